#include "coic/netmodel.hpp"

#include <cmath>
#include <string>

#include "coic/error.hpp"

namespace coic {

void LinkSpec::validate() const {
  if (!(bandwidth_bps > 0.0) || !std::isfinite(bandwidth_bps)) {
    throw InvalidParameter("bandwidth_bps must be > 0");
  }
  if (!(propagation_ms >= 0.0) || !std::isfinite(propagation_ms)) {
    throw InvalidParameter("propagation_ms must be >= 0");
  }
}

void ComputeSpec::validate() const {
  for (const KindCompute& c : per_kind) {
    for (double v : {c.cloud_compute_ms, c.edge_lookup_ms, c.client_extract_ms}) {
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidParameter("compute times must be >= 0");
    }
  }
}

void SizeSpec::validate() const {
  for (const KindSizes& s : per_kind) {
    if (s.request_descriptor_bytes < 1 || s.result_bytes < 1) {
      throw InvalidParameter("sizes must be >= 1 byte");
    }
  }
}

double transfer_time_ms(const LinkSpec& link, std::uint64_t size_bytes) {
  return link.propagation_ms + static_cast<double>(size_bytes) * 8.0 / link.bandwidth_bps * 1000.0;
}

double latency_hit_ms(TaskKind kind, const Links& links, const ComputeSpec& compute,
                      const SizeSpec& sizes) {
  const KindCompute& c = compute[kind];
  const KindSizes& s = sizes[kind];
  return c.client_extract_ms + transfer_time_ms(links.link_me, s.request_descriptor_bytes) +
         c.edge_lookup_ms + transfer_time_ms(links.link_me, s.result_bytes);
}

double latency_miss_ms(TaskKind kind, const Links& links, const ComputeSpec& compute,
                       const SizeSpec& sizes) {
  const KindCompute& c = compute[kind];
  const KindSizes& s = sizes[kind];
  return latency_hit_ms(kind, links, compute, sizes) +
         transfer_time_ms(links.link_ec, s.request_descriptor_bytes) + c.cloud_compute_ms +
         transfer_time_ms(links.link_ec, s.result_bytes);
}

double latency_baseline_ms(TaskKind kind, const Links& links, const ComputeSpec& compute,
                           const SizeSpec& sizes) {
  ComputeSpec passthrough = compute;
  passthrough[kind].edge_lookup_ms = 0.0;
  return latency_miss_ms(kind, links, passthrough, sizes);
}

double expected_mean_latency_ms(double hit_rate, double latency_hit, double latency_miss) {
  if (!(hit_rate >= 0.0 && hit_rate <= 1.0)) {
    throw InvalidParameter("hit rate must be within [0, 1]");
  }
  return hit_rate * latency_hit + (1.0 - hit_rate) * latency_miss;
}

VirtualTime ms_to_us(double ms) {
  return static_cast<VirtualTime>(std::floor(ms * 1000.0 + 0.5));
}

void VirtualClock::advance_to(VirtualTime t) {
  if (t < now_us_) {
    throw InvariantViolation("virtual clock moved backward: " + std::to_string(now_us_) + " -> " +
                             std::to_string(t));
  }
  now_us_ = t;
}

}  // namespace coic
