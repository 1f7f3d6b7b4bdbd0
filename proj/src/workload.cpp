#include "coic/workload.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "coic/error.hpp"
#include "coic/netmodel.hpp"
#include "coic/wire.hpp"

namespace coic {

namespace {

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xF]);
  }
  return out;
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::vector<std::uint8_t> from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0) throw InvalidParameter("odd-length hex string");
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw InvalidParameter("invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view field, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw InvalidParameter("trace line " + std::to_string(line) + ": bad number '" +
                           std::string(field) + "'");
  }
  return value;
}

TaskKind sample_kind(const std::array<double, 3>& mix, Prng& rng) {
  const double u = rng.uniform();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (mix[i] <= 0.0) continue;
    last_positive = i;
    cum += mix[i];
    if (u < cum) return kAllTaskKinds[i];
  }
  return kAllTaskKinds[last_positive];
}

}  // namespace

void WorkloadSpec::validate() const {
  if (users < 1) throw InvalidParameter("users must be >= 1");
  if (requests_per_user < 1) throw InvalidParameter("requests_per_user must be >= 1");
  if (catalog_size < 1) throw InvalidParameter("catalog_size must be >= 1");
  if (!(zipf_s >= 0.0) || !std::isfinite(zipf_s)) throw InvalidParameter("zipf_s must be >= 0");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InvalidParameter("sigma must be >= 0");
  if (feature_dim < 1 || feature_dim > 0xFFFF) {
    throw InvalidParameter("feature_dim must be within [1, 65535]");
  }
  double sum = 0.0;
  for (double w : kind_mix) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidParameter("kind_mix weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InvalidParameter("kind_mix must sum to 1");
  if (!(arrival.mean_interarrival_ms > 0.0) || !std::isfinite(arrival.mean_interarrival_ms)) {
    throw InvalidParameter("mean_interarrival_ms must be > 0");
  }
}

ZipfSampler::ZipfSampler(std::uint64_t n, double s) {
  if (n < 1) throw InvalidParameter("zipf catalog size must be >= 1");
  if (!(s >= 0.0) || !std::isfinite(s)) throw InvalidParameter("zipf exponent must be >= 0");
  cdf_.resize(n);
  double total = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    total += std::pow(static_cast<double>(i + 1), -s);
    cdf_[i] = total;
  }
  for (double& c : cdf_) c /= total;
  cdf_.back() = 1.0;
}

std::uint64_t ZipfSampler::operator()(Prng& rng) const {
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  return static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(
      it - cdf_.begin(), static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
}

double ZipfSampler::probability(std::uint64_t i) const {
  if (i >= cdf_.size()) return 0.0;
  return i == 0 ? cdf_[0] : cdf_[i] - cdf_[i - 1];
}

std::uint64_t zipf_sample(std::uint64_t n, double s, Prng& rng) { return ZipfSampler(n, s)(rng); }

ContentHash object_content_hash(std::uint64_t object_id) {
  return hash_content(canonical_object_bytes(object_id));
}

Trace generate_trace(const WorkloadSpec& spec) {
  spec.validate();
  const ZipfSampler zipf(spec.catalog_size, spec.zipf_s);

  struct Pending {
    std::uint32_t user;
    std::uint32_t index;
    TraceRequest request;
  };
  std::vector<Pending> pending;
  pending.reserve(static_cast<std::size_t>(spec.users) * spec.requests_per_user);

  const double spacing = spec.arrival.mean_interarrival_ms;
  for (std::uint32_t user = 0; user < spec.users; ++user) {
    Prng rng(derive_seed(spec.seed, user));
    double t_ms = spec.arrival.process == ArrivalProcess::Fixed
                      ? spacing * static_cast<double>(user) / static_cast<double>(spec.users)
                      : 0.0;
    for (std::uint32_t k = 0; k < spec.requests_per_user; ++k) {
      const TaskKind kind = sample_kind(spec.kind_mix, rng);
      const std::uint64_t object = zipf(rng);
      const std::uint64_t noise_seed = rng.next_u64();
      if (spec.arrival.process == ArrivalProcess::Exponential) {
        t_ms += rng.exponential(spacing);
      } else if (k > 0) {
        t_ms += spacing;
      }
      Descriptor d = uses_feature_vector(kind)
                         ? Descriptor::recognition(
                               stub_extract(object, noise_seed, spec.sigma, spec.feature_dim))
                         : Descriptor::hashed(kind, object_content_hash(object));
      pending.push_back({user, k, TraceRequest{0, user, ms_to_us(t_ms), object, std::move(d)}});
    }
  }

  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.request.issued_at_us != b.request.issued_at_us) {
      return a.request.issued_at_us < b.request.issued_at_us;
    }
    return a.user != b.user ? a.user < b.user : a.index < b.index;
  });

  Trace trace;
  trace.requests.reserve(pending.size());
  for (std::size_t i = 0; i < pending.size(); ++i) {
    pending[i].request.request_id = i;
    trace.requests.push_back(std::move(pending[i].request));
  }
  return trace;
}

std::string serialize_trace(const Trace& trace) {
  std::ostringstream out;
  out << "# coic-trace v1: request_id,user_id,issued_at_us,kind,object_id,descriptor_hex\n";
  for (const TraceRequest& r : trace.requests) {
    out << r.request_id << ',' << r.user_id << ',' << r.issued_at_us << ',' << to_string(r.kind())
        << ',' << r.object_id << ',' << to_hex(wire::encode_descriptor(r.descriptor)) << '\n';
  }
  return out.str();
}

Trace parse_trace(std::string_view text) {
  Trace trace;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;

    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6) {
      throw InvalidParameter("trace line " + std::to_string(line_no) + ": expected 6 fields");
    }
    const auto kind = task_kind_from_string(fields[3]);
    if (!kind) {
      throw InvalidParameter("trace line " + std::to_string(line_no) + ": unknown kind '" +
                             std::string(fields[3]) + "'");
    }
    std::optional<Descriptor> descriptor;
    try {
      descriptor = wire::decode_descriptor(*kind, from_hex(fields[5]));
    } catch (const InvalidParameter& e) {
      throw InvalidParameter("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    TraceRequest r{
        parse_number<std::uint64_t>(fields[0], line_no),
        parse_number<std::uint32_t>(fields[1], line_no),
        parse_number<VirtualTime>(fields[2], line_no),
        parse_number<std::uint64_t>(fields[4], line_no),
        std::move(*descriptor),
    };
    trace.requests.push_back(std::move(r));
  }
  for (std::size_t i = 1; i < trace.requests.size(); ++i) {
    if (trace.requests[i].issued_at_us < trace.requests[i - 1].issued_at_us) {
      throw InvalidParameter("trace is not sorted by issued_at_us");
    }
  }
  return trace;
}

ContentHash trace_digest(const Trace& trace) {
  const std::string text = serialize_trace(trace);
  return hash_content(
      std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace coic
