#pragma once

#include <array>
#include <cstdint>

#include "coic/descriptor.hpp"
#include "coic/simcache.hpp"

namespace coic {

struct LinkSpec {
  double bandwidth_bps = 1.0;
  double propagation_ms = 0.0;

  void validate() const;
};

// link_me carries the mobile-to-edge hop, link_ec the edge-to-cloud hop.
struct Links {
  LinkSpec link_me;
  LinkSpec link_ec;
};

struct KindCompute {
  double cloud_compute_ms = 0.0;
  double edge_lookup_ms = 0.0;
  double client_extract_ms = 0.0;
};

struct ComputeSpec {
  std::array<KindCompute, 3> per_kind{};

  const KindCompute& operator[](TaskKind k) const { return per_kind[kind_index(k)]; }
  KindCompute& operator[](TaskKind k) { return per_kind[kind_index(k)]; }
  void validate() const;
};

struct KindSizes {
  std::uint64_t request_descriptor_bytes = 1;
  std::uint64_t result_bytes = 1;
};

struct SizeSpec {
  std::array<KindSizes, 3> per_kind{};

  const KindSizes& operator[](TaskKind k) const { return per_kind[kind_index(k)]; }
  KindSizes& operator[](TaskKind k) { return per_kind[kind_index(k)]; }
  void validate() const;
};

// propagation + serialization delay, in milliseconds.
double transfer_time_ms(const LinkSpec& link, std::uint64_t size_bytes);

// Client -> edge -> client when the edge cache answers.
double latency_hit_ms(TaskKind kind, const Links& links, const ComputeSpec& compute,
                      const SizeSpec& sizes);

// Hit path plus the edge -> cloud -> edge round trip and cloud compute.
double latency_miss_ms(TaskKind kind, const Links& links, const ComputeSpec& compute,
                       const SizeSpec& sizes);

// Baseline: the miss path with the edge acting as a pure pass-through.
double latency_baseline_ms(TaskKind kind, const Links& links, const ComputeSpec& compute,
                           const SizeSpec& sizes);

// h * hit + (1 - h) * miss. Throws InvalidParameter unless 0 <= h <= 1.
double expected_mean_latency_ms(double hit_rate, double latency_hit, double latency_miss);

// Rounds half-up to whole microseconds. Every scheduled delay goes through this.
VirtualTime ms_to_us(double ms);

class VirtualClock {
 public:
  VirtualTime now_us() const noexcept { return now_us_; }
  // Throws InvariantViolation if t is in the past.
  void advance_to(VirtualTime t);

 private:
  VirtualTime now_us_ = 0;
};

}  // namespace coic
