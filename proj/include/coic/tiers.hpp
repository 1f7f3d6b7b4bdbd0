#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <queue>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "coic/descriptor.hpp"
#include "coic/error.hpp"
#include "coic/netmodel.hpp"
#include "coic/payload.hpp"
#include "coic/simcache.hpp"
#include "coic/wire.hpp"
#include "coic/workload.hpp"

namespace coic {

using wire::ServedFrom;

inline constexpr std::uint64_t kUnknownObject = ~std::uint64_t{0};

struct TaskRequest {
  std::uint64_t request_id = 0;
  std::uint32_t user_id = 0;
  TaskKind kind = TaskKind::ObjectRecognition;
  Descriptor descriptor;
  VirtualTime issued_at = 0;

  static TaskRequest from_trace(const TraceRequest& r) {
    return {r.request_id, r.user_id, r.kind(), r.descriptor, r.issued_at_us};
  }
};

// The catalog a cloud backend serves. Needed to map a descriptor back to the
// object it represents.
struct Catalog {
  std::uint64_t size = 1;
  std::size_t feature_dim = 64;
};

// Deterministic stand-in for cloud recognition / model loading.
//
// Results are a 9-byte header (kind, object id big-endian) followed by
// seeded filler, cut to the configured result size. Recognition descriptors
// resolve to the nearest catalog centroid; hashes resolve by table lookup.
class CloudBackend {
 public:
  CloudBackend(Catalog catalog, ComputeSpec compute, SizeSpec sizes);

  std::uint64_t resolve_object(const Descriptor& descriptor) const;
  ResultPayload result_for(TaskKind kind, std::uint64_t object_id) const;
  ResultPayload handle(const Descriptor& descriptor) const {
    return result_for(descriptor.kind(), resolve_object(descriptor));
  }
  double compute_ms(TaskKind kind) const { return compute_[kind].cloud_compute_ms; }

 private:
  Catalog catalog_;
  ComputeSpec compute_;
  SizeSpec sizes_;
  std::vector<FeatureVector> centroids_;
  std::unordered_map<ContentHash, std::uint64_t, ContentHashHasher> by_hash_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<TaskKind, std::uint64_t>, ResultPayload> memo_;
};

// Object id carried in a backend payload header, if the payload has one.
std::optional<std::uint64_t> payload_object(const ResultPayload& payload);

struct RequestRecord {
  std::uint64_t request_id = 0;
  std::uint32_t user_id = 0;
  TaskKind kind = TaskKind::ObjectRecognition;
  std::uint64_t object_id = 0;
  VirtualTime issued_at_us = 0;
  VirtualTime completed_at_us = 0;
  VirtualTime latency_us = 0;
  ServedFrom served_from = ServedFrom::Cloud;
  std::optional<double> matched_distance;  // edge hits only
  std::uint64_t served_object = kUnknownObject;

  friend bool operator==(const RequestRecord&, const RequestRecord&) = default;
};

struct SimulationParams {
  Links links;
  ComputeSpec compute;
  SizeSpec sizes;
  CacheConfig cache;
  bool cache_enabled = true;  // false = baseline pass-through edge
};

struct SimulationResult {
  std::vector<RequestRecord> records;  // trace order
  CacheStats cache_stats;
};

// Priority queue keyed by (time, enqueue sequence).
template <typename Event>
class EventLoop {
 public:
  void schedule(VirtualTime at, Event event) {
    if (at < clock_.now_us()) throw InvariantViolation("event scheduled in the past");
    queue_.push(Item{at, next_seq_++, std::move(event)});
  }

  // Pops the next event and advances the clock to it.
  std::optional<Event> pop() {
    if (queue_.empty()) return std::nullopt;
    Item item = queue_.top();
    queue_.pop();
    clock_.advance_to(item.at);
    return std::move(item.event);
  }

  VirtualTime now() const noexcept { return clock_.now_us(); }
  bool empty() const noexcept { return queue_.empty(); }

 private:
  struct Item {
    VirtualTime at;
    std::uint64_t seq;
    Event event;
    bool operator>(const Item& o) const { return std::tie(at, seq) > std::tie(o.at, o.seq); }
  };
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue_;
  VirtualClock clock_;
  std::uint64_t next_seq_ = 0;
};

// Client, edge and cloud tiers on one deterministic event loop.
//
// Every request carries its accumulated path delay in milliseconds; each
// event fires at issued_at + round_half_up(accumulated). Latencies therefore
// match the closed forms to within rounding. All client_issue calls made
// before run() enqueue edge arrivals first, so at equal timestamps lookups
// precede cache inserts.
class Simulator {
 public:
  Simulator(SimulationParams params, const CloudBackend& backend);

  // Throws DuplicateRequestId, or InvalidParameter on a kind/descriptor mismatch.
  void client_issue(const TaskRequest& request);
  void run();

  // Throws InvariantViolation if any issued request lacks a response.
  SimulationResult result() const;
  const SimilarityCache* cache() const { return cache_ ? &*cache_ : nullptr; }

 private:
  enum class Stage { EdgeArrival, CloudArrival, EdgeReturn, ClientDelivery };
  struct Event {
    Stage stage;
    std::size_t slot;
  };
  struct InFlight {
    TaskRequest request;
    double elapsed_ms = 0.0;
    ResultPayload result;
    std::optional<double> matched_distance;
    ServedFrom served_from = ServedFrom::Cloud;
    std::optional<VirtualTime> completed_at;
  };

  void edge_handle(std::size_t slot);
  void cloud_handle(std::size_t slot);
  void edge_return(std::size_t slot);

  SimulationParams params_;
  const CloudBackend& backend_;
  std::optional<SimilarityCache> cache_;
  EventLoop<Event> loop_;
  std::vector<InFlight> flights_;
  std::unordered_map<std::uint64_t, std::size_t> slot_by_id_;
};

SimulationResult run_simulation(const SimulationParams& params, const CloudBackend& backend,
                                const Trace& trace);

}  // namespace coic
