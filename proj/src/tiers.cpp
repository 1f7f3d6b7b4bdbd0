#include "coic/tiers.hpp"

#include <limits>

#include "coic/error.hpp"
#include "coic/rng.hpp"

namespace coic {

namespace {

constexpr std::size_t kPayloadHeader = 9;

}  // namespace

CloudBackend::CloudBackend(Catalog catalog, ComputeSpec compute, SizeSpec sizes)
    : catalog_(catalog), compute_(compute), sizes_(sizes) {
  if (catalog_.size < 1) throw InvalidParameter("catalog size must be >= 1");
  centroids_.reserve(catalog_.size);
  by_hash_.reserve(catalog_.size);
  for (std::uint64_t id = 0; id < catalog_.size; ++id) {
    centroids_.push_back(object_centroid(id, catalog_.feature_dim));
    by_hash_.emplace(object_content_hash(id), id);
  }
}

std::uint64_t CloudBackend::resolve_object(const Descriptor& descriptor) const {
  if (!descriptor.is_vector()) {
    auto it = by_hash_.find(descriptor.hash());
    return it == by_hash_.end() ? kUnknownObject : it->second;
  }
  const FeatureVector& v = descriptor.vector();
  if (v.dim() != catalog_.feature_dim) return kUnknownObject;
  std::uint64_t best = kUnknownObject;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::uint64_t id = 0; id < centroids_.size(); ++id) {
    const double d = distance(v, centroids_[id], DistanceMetric::EuclideanL2);
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

ResultPayload CloudBackend::result_for(TaskKind kind, std::uint64_t object_id) const {
  std::lock_guard lock(mu_);
  const auto key = std::make_pair(kind, object_id);
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;

  const std::size_t size = sizes_[kind].result_bytes;
  std::vector<std::uint8_t> bytes(std::max(size, kPayloadHeader));
  bytes[0] = static_cast<std::uint8_t>(kind);
  for (int i = 0; i < 8; ++i) bytes[1 + i] = static_cast<std::uint8_t>(object_id >> (56 - 8 * i));
  Prng rng(derive_seed(object_id, static_cast<std::uint64_t>(kind)));
  for (std::size_t i = kPayloadHeader; i < bytes.size(); i += 8) {
    const std::uint64_t word = rng.next_u64();
    for (std::size_t j = 0; j < 8 && i + j < bytes.size(); ++j) {
      bytes[i + j] = static_cast<std::uint8_t>(word >> (8 * j));
    }
  }
  bytes.resize(size);
  ResultPayload payload(std::move(bytes));
  memo_.emplace(key, payload);
  return payload;
}

std::optional<std::uint64_t> payload_object(const ResultPayload& payload) {
  const auto b = payload.bytes();
  if (b.size() < kPayloadHeader || !task_kind_from_code(b[0])) return std::nullopt;
  std::uint64_t id = 0;
  for (std::size_t i = 1; i < kPayloadHeader; ++i) id = (id << 8) | b[i];
  return id;
}

Simulator::Simulator(SimulationParams params, const CloudBackend& backend)
    : params_(params), backend_(backend) {
  params_.links.link_me.validate();
  params_.links.link_ec.validate();
  params_.compute.validate();
  params_.sizes.validate();
  if (params_.cache_enabled) {
    cache_.emplace(params_.cache);
  } else {
    for (KindCompute& c : params_.compute.per_kind) c.edge_lookup_ms = 0.0;
  }
}

void Simulator::client_issue(const TaskRequest& request) {
  if (request.descriptor.kind() != request.kind) {
    throw InvalidParameter("request " + std::to_string(request.request_id) +
                           ": descriptor kind does not match task kind");
  }
  if (!slot_by_id_.emplace(request.request_id, flights_.size()).second) {
    throw DuplicateRequestId(request.request_id);
  }
  flights_.push_back(InFlight{request, 0.0, ResultPayload{}, std::nullopt, ServedFrom::Cloud, std::nullopt});
  const std::size_t slot = flights_.size() - 1;
  const KindCompute& c = params_.compute[request.kind];
  const KindSizes& s = params_.sizes[request.kind];
  flights_[slot].elapsed_ms =
      c.client_extract_ms + transfer_time_ms(params_.links.link_me, s.request_descriptor_bytes);
  loop_.schedule(request.issued_at + ms_to_us(flights_[slot].elapsed_ms),
                 Event{Stage::EdgeArrival, slot});
}

void Simulator::edge_handle(std::size_t slot) {
  InFlight& f = flights_[slot];
  const KindCompute& c = params_.compute[f.request.kind];
  const KindSizes& s = params_.sizes[f.request.kind];

  std::optional<CacheHit> hit;
  if (cache_) hit = cache_->lookup(f.request.descriptor, loop_.now());

  f.elapsed_ms += c.edge_lookup_ms;
  if (hit) {
    f.result = hit->result;
    f.matched_distance = hit->matched_distance;
    f.served_from = ServedFrom::Edge;
    f.elapsed_ms += transfer_time_ms(params_.links.link_me, s.result_bytes);
    loop_.schedule(f.request.issued_at + ms_to_us(f.elapsed_ms),
                   Event{Stage::ClientDelivery, slot});
    return;
  }
  f.elapsed_ms += transfer_time_ms(params_.links.link_ec, s.request_descriptor_bytes);
  loop_.schedule(f.request.issued_at + ms_to_us(f.elapsed_ms), Event{Stage::CloudArrival, slot});
}

void Simulator::cloud_handle(std::size_t slot) {
  InFlight& f = flights_[slot];
  f.result = backend_.handle(f.request.descriptor);
  f.served_from = ServedFrom::Cloud;
  f.elapsed_ms += params_.compute[f.request.kind].cloud_compute_ms;
  f.elapsed_ms +=
      transfer_time_ms(params_.links.link_ec, params_.sizes[f.request.kind].result_bytes);
  loop_.schedule(f.request.issued_at + ms_to_us(f.elapsed_ms), Event{Stage::EdgeReturn, slot});
}

void Simulator::edge_return(std::size_t slot) {
  InFlight& f = flights_[slot];
  if (cache_) cache_->insert(f.request.descriptor, f.result, loop_.now());
  f.elapsed_ms +=
      transfer_time_ms(params_.links.link_me, params_.sizes[f.request.kind].result_bytes);
  loop_.schedule(f.request.issued_at + ms_to_us(f.elapsed_ms), Event{Stage::ClientDelivery, slot});
}

void Simulator::run() {
  while (auto event = loop_.pop()) {
    switch (event->stage) {
      case Stage::EdgeArrival:
        edge_handle(event->slot);
        break;
      case Stage::CloudArrival:
        cloud_handle(event->slot);
        break;
      case Stage::EdgeReturn:
        edge_return(event->slot);
        break;
      case Stage::ClientDelivery: {
        InFlight& f = flights_[event->slot];
        if (f.completed_at) {
          throw InvariantViolation("request " + std::to_string(f.request.request_id) +
                                   " delivered twice");
        }
        f.completed_at = loop_.now();
        break;
      }
    }
  }
}

SimulationResult Simulator::result() const {
  SimulationResult out;
  out.records.reserve(flights_.size());
  std::uint64_t edge_served = 0;
  for (const InFlight& f : flights_) {
    if (!f.completed_at) {
      throw InvariantViolation("request " + std::to_string(f.request.request_id) +
                               " has no response");
    }
    if (*f.completed_at < f.request.issued_at) {
      throw InvariantViolation("request " + std::to_string(f.request.request_id) +
                               " completed before it was issued");
    }
    RequestRecord r;
    r.request_id = f.request.request_id;
    r.user_id = f.request.user_id;
    r.kind = f.request.kind;
    r.issued_at_us = f.request.issued_at;
    r.completed_at_us = *f.completed_at;
    r.latency_us = *f.completed_at - f.request.issued_at;
    r.served_from = f.served_from;
    r.matched_distance = f.matched_distance;
    r.served_object = payload_object(f.result).value_or(kUnknownObject);
    if (f.served_from == ServedFrom::Edge) ++edge_served;
    out.records.push_back(r);
  }
  if (cache_) {
    out.cache_stats = cache_->stats();
    if (out.cache_stats.hits != edge_served) {
      throw InvariantViolation("cache hits disagree with edge-served responses");
    }
  } else if (edge_served != 0) {
    throw InvariantViolation("baseline arm served from the edge");
  }
  return out;
}

SimulationResult run_simulation(const SimulationParams& params, const CloudBackend& backend,
                                const Trace& trace) {
  Simulator sim(params, backend);
  for (const TraceRequest& r : trace.requests) sim.client_issue(TaskRequest::from_trace(r));
  sim.run();
  SimulationResult result = sim.result();
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    result.records[i].object_id = trace.requests[i].object_id;
  }
  return result;
}

}  // namespace coic
