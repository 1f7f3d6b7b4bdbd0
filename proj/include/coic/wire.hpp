#pragma once

// Framed binary protocol shared by the client->edge and edge->cloud hops.
//
//   frame    := magic "CIC1" | msg_type u8 | request_id u64 | body_len u32 | body
//   request  := task_kind u8 | user_id u32 | descriptor
//   response := served_from u8 | result_len u32 | result
//   descriptor (kind 1)    := dim u16 | dim x binary32
//   descriptor (kind 2, 3) := 32 hash bytes
//
// All integers and floats are big-endian.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "coic/descriptor.hpp"
#include "coic/payload.hpp"

namespace coic::wire {

inline constexpr std::array<std::uint8_t, 4> kMagic = {'C', 'I', 'C', '1'};
inline constexpr std::size_t kHeaderSize = 17;
inline constexpr std::uint32_t kMaxBodyBytes = 64u * 1024u * 1024u;

enum class MessageType : std::uint8_t { TaskRequest = 1, TaskResponse = 2 };
enum class ServedFrom : std::uint8_t { Edge = 1, Cloud = 2 };

std::string_view to_string(ServedFrom s) noexcept;

struct RequestMessage {
  std::uint64_t request_id = 0;
  std::uint32_t user_id = 0;
  Descriptor descriptor;

  friend bool operator==(const RequestMessage&, const RequestMessage&) = default;
};

struct ResponseMessage {
  std::uint64_t request_id = 0;
  ServedFrom served_from = ServedFrom::Cloud;
  ResultPayload result;

  friend bool operator==(const ResponseMessage&, const ResponseMessage&) = default;
};

using Message = std::variant<RequestMessage, ResponseMessage>;

std::vector<std::uint8_t> encode(const Message& message);

// Descriptor bytes alone (the tail of a request body).
std::vector<std::uint8_t> encode_descriptor(const Descriptor& descriptor);
// Throws InvalidParameter when the bytes do not form a descriptor of this kind.
Descriptor decode_descriptor(TaskKind kind, std::span<const std::uint8_t> bytes);

// Full frame length of a request carrying this descriptor.
std::size_t request_frame_size(TaskKind kind, std::size_t dim);

enum class ProtocolErrorCode {
  BadMagic,
  UnknownType,
  OversizeBody,
  TruncatedBody,  // stream closed mid-frame
  MalformedBody,  // header fine, body inconsistent with its type
};

std::string_view to_string(ProtocolErrorCode code) noexcept;

struct ProtocolError {
  ProtocolErrorCode code;
  std::string detail;
};

struct NeedMoreBytes {};

struct Decoded {
  Message message;
  std::size_t consumed = 0;
};

using DecodeResult = std::variant<Decoded, NeedMoreBytes, ProtocolError>;

// Decodes at most one frame from the front of `bytes`. Never throws on
// malformed input. With stream_closed set, a partial frame is TruncatedBody.
DecodeResult decode(std::span<const std::uint8_t> bytes, bool stream_closed = false);

// Per-connection incremental decoder.
class FrameDecoder {
 public:
  void feed(std::span<const std::uint8_t> bytes);
  DecodeResult next(bool stream_closed = false);
  std::size_t buffered() const noexcept { return buffer_.size() - offset_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
};

}  // namespace coic::wire
