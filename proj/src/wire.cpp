#include "coic/wire.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "coic/error.hpp"

namespace coic::wire {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

std::uint64_t get_u64(const std::uint8_t* p) {
  return (std::uint64_t{get_u32(p)} << 32) | get_u32(p + 4);
}

void put_header(std::vector<std::uint8_t>& out, MessageType type, std::uint64_t id,
                std::size_t body_len) {
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  out.push_back(static_cast<std::uint8_t>(type));
  put_u64(out, id);
  put_u32(out, static_cast<std::uint32_t>(body_len));
}

std::size_t descriptor_size(TaskKind kind, std::size_t dim) {
  return uses_feature_vector(kind) ? 2 + 4 * dim : ContentHash::kSize;
}

ProtocolError malformed(std::string detail) {
  return ProtocolError{ProtocolErrorCode::MalformedBody, std::move(detail)};
}

DecodeResult decode_request_body(std::uint64_t id, std::span<const std::uint8_t> body,
                                 std::size_t consumed) {
  if (body.size() < 5) return malformed("request body shorter than 5 bytes");
  const auto kind = task_kind_from_code(body[0]);
  if (!kind) return malformed("unknown task kind " + std::to_string(body[0]));
  const std::uint32_t user = get_u32(body.data() + 1);
  try {
    Descriptor d = decode_descriptor(*kind, body.subspan(5));
    return Decoded{RequestMessage{id, user, std::move(d)}, consumed};
  } catch (const InvalidParameter& e) {
    return malformed(e.what());
  }
}

DecodeResult decode_response_body(std::uint64_t id, std::span<const std::uint8_t> body,
                                   std::size_t consumed) {
  if (body.size() < 5) return malformed("response body shorter than 5 bytes");
  if (body[0] != 1 && body[0] != 2) {
    return malformed("unknown served_from " + std::to_string(body[0]));
  }
  const std::uint32_t len = get_u32(body.data() + 1);
  if (len != body.size() - 5) return malformed("result_len disagrees with body_len");
  if (len == 0) return malformed("empty result");
  std::vector<std::uint8_t> result(body.begin() + 5, body.end());
  return Decoded{
      ResponseMessage{id, static_cast<ServedFrom>(body[0]), ResultPayload(std::move(result))},
      consumed};
}

}  // namespace

std::string_view to_string(ServedFrom s) noexcept {
  return s == ServedFrom::Edge ? "edge" : "cloud";
}

std::string_view to_string(ProtocolErrorCode code) noexcept {
  switch (code) {
    case ProtocolErrorCode::BadMagic:
      return "BadMagic";
    case ProtocolErrorCode::UnknownType:
      return "UnknownType";
    case ProtocolErrorCode::OversizeBody:
      return "OversizeBody";
    case ProtocolErrorCode::TruncatedBody:
      return "TruncatedBody";
    case ProtocolErrorCode::MalformedBody:
      return "MalformedBody";
  }
  return "Unknown";
}

std::vector<std::uint8_t> encode_descriptor(const Descriptor& descriptor) {
  std::vector<std::uint8_t> out;
  if (descriptor.is_vector()) {
    const auto values = descriptor.vector().values();
    if (values.size() > 0xFFFF) throw InvalidParameter("feature vector dim exceeds 65535");
    out.reserve(2 + 4 * values.size());
    put_u16(out, static_cast<std::uint16_t>(values.size()));
    for (float v : values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  } else {
    const auto& bytes = descriptor.hash().bytes();
    out.assign(bytes.begin(), bytes.end());
  }
  return out;
}

Descriptor decode_descriptor(TaskKind kind, std::span<const std::uint8_t> bytes) {
  if (!uses_feature_vector(kind)) return Descriptor(kind, ContentHash::from_bytes(bytes));
  if (bytes.size() < 2) throw InvalidParameter("vector descriptor shorter than 2 bytes");
  const std::size_t dim = get_u16(bytes.data());
  if (bytes.size() != 2 + 4 * dim) {
    throw InvalidParameter("vector descriptor length disagrees with dim " + std::to_string(dim));
  }
  std::vector<float> values(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes.data() + 2 + 4 * i));
  }
  return Descriptor(kind, FeatureVector(std::move(values)));
}

std::size_t request_frame_size(TaskKind kind, std::size_t dim) {
  return kHeaderSize + 5 + descriptor_size(kind, dim);
}

std::vector<std::uint8_t> encode(const Message& message) {
  std::vector<std::uint8_t> out;
  if (const auto* req = std::get_if<RequestMessage>(&message)) {
    const auto desc = encode_descriptor(req->descriptor);
    out.reserve(kHeaderSize + 5 + desc.size());
    put_header(out, MessageType::TaskRequest, req->request_id, 5 + desc.size());
    out.push_back(static_cast<std::uint8_t>(req->descriptor.kind()));
    put_u32(out, req->user_id);
    out.insert(out.end(), desc.begin(), desc.end());
    return out;
  }
  const auto& resp = std::get<ResponseMessage>(message);
  const auto result = resp.result.bytes();
  if (result.size() > kMaxBodyBytes - 5) throw InvalidParameter("result exceeds frame body cap");
  out.reserve(kHeaderSize + 5 + result.size());
  put_header(out, MessageType::TaskResponse, resp.request_id, 5 + result.size());
  out.push_back(static_cast<std::uint8_t>(resp.served_from));
  put_u32(out, static_cast<std::uint32_t>(result.size()));
  out.insert(out.end(), result.begin(), result.end());
  return out;
}

DecodeResult decode(std::span<const std::uint8_t> bytes, bool stream_closed) {
  const std::size_t magic_seen = std::min(bytes.size(), kMagic.size());
  if (!std::equal(bytes.begin(), bytes.begin() + magic_seen, kMagic.begin())) {
    return ProtocolError{ProtocolErrorCode::BadMagic, "frame does not start with CIC1"};
  }
  if (bytes.size() >= 5 && bytes[4] != 1 && bytes[4] != 2) {
    return ProtocolError{ProtocolErrorCode::UnknownType,
                         "msg_type " + std::to_string(bytes[4])};
  }
  auto incomplete = [&]() -> DecodeResult {
    if (stream_closed && !bytes.empty()) {
      return ProtocolError{ProtocolErrorCode::TruncatedBody, "stream closed inside a frame"};
    }
    return NeedMoreBytes{};
  };
  if (bytes.size() < kHeaderSize) return incomplete();

  const std::uint32_t body_len = get_u32(bytes.data() + 13);
  if (body_len > kMaxBodyBytes) {
    return ProtocolError{ProtocolErrorCode::OversizeBody,
                         "body_len " + std::to_string(body_len) + " exceeds 64 MiB"};
  }
  const std::size_t total = kHeaderSize + body_len;
  if (bytes.size() < total) return incomplete();

  const std::uint64_t id = get_u64(bytes.data() + 5);
  const auto body = bytes.subspan(kHeaderSize, body_len);
  if (static_cast<MessageType>(bytes[4]) == MessageType::TaskRequest) {
    return decode_request_body(id, body, total);
  }
  return decode_response_body(id, body, total);
}

void FrameDecoder::feed(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

DecodeResult FrameDecoder::next(bool stream_closed) {
  const std::span<const std::uint8_t> pending(buffer_.data() + offset_, buffer_.size() - offset_);
  DecodeResult r = decode(pending, stream_closed);
  if (const auto* d = std::get_if<Decoded>(&r)) {
    offset_ += d->consumed;
    if (offset_ > 1 << 20 && offset_ * 2 > buffer_.size()) {
      buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
      offset_ = 0;
    }
  }
  return r;
}

}  // namespace coic::wire
