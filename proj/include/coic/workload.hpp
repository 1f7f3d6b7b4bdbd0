#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "coic/descriptor.hpp"
#include "coic/rng.hpp"
#include "coic/simcache.hpp"

namespace coic {

enum class ArrivalProcess { Fixed, Exponential };

struct ArrivalSpec {
  ArrivalProcess process = ArrivalProcess::Fixed;
  double mean_interarrival_ms = 1.0;
};

struct WorkloadSpec {
  std::uint32_t users = 1;
  std::uint32_t requests_per_user = 1;
  std::uint64_t catalog_size = 1;
  double zipf_s = 0.0;
  std::array<double, 3> kind_mix{1.0, 0.0, 0.0};  // indexed by kind_index()
  double sigma = 0.0;
  std::size_t feature_dim = 64;
  ArrivalSpec arrival;
  std::uint64_t seed = 0;

  // Throws InvalidParameter.
  void validate() const;
};

struct TraceRequest {
  std::uint64_t request_id = 0;
  std::uint32_t user_id = 0;
  VirtualTime issued_at_us = 0;
  std::uint64_t object_id = 0;  // ground truth
  Descriptor descriptor;

  TaskKind kind() const noexcept { return descriptor.kind(); }
  friend bool operator==(const TraceRequest&, const TraceRequest&) = default;
};

// Sorted by issued_at_us, then request_id; request ids are dense from 0.
struct Trace {
  std::vector<TraceRequest> requests;

  friend bool operator==(const Trace&, const Trace&) = default;
};

// Zipf popularity over [0, n): P(i) = (i+1)^-s / H(n, s).
class ZipfSampler {
 public:
  ZipfSampler(std::uint64_t n, double s);

  std::uint64_t operator()(Prng& rng) const;
  double probability(std::uint64_t i) const;
  std::uint64_t size() const noexcept { return cdf_.size(); }

 private:
  std::vector<double> cdf_;
};

std::uint64_t zipf_sample(std::uint64_t n, double s, Prng& rng);

ContentHash object_content_hash(std::uint64_t object_id);

Trace generate_trace(const WorkloadSpec& spec);

// Line format: request_id,user_id,issued_at_us,kind,object_id,descriptor_hex
std::string serialize_trace(const Trace& trace);
// Throws InvalidParameter with the offending line number.
Trace parse_trace(std::string_view text);

// SHA-256 of the serialized trace; identifies a trace across arms.
ContentHash trace_digest(const Trace& trace);

}  // namespace coic
