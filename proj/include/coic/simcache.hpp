#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <list>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "coic/descriptor.hpp"
#include "coic/payload.hpp"

namespace coic {

// Virtual time in integer microseconds.
using VirtualTime = std::int64_t;

struct CacheConfig {
  double beta = 0.5;  // similarity threshold
  DistanceMetric metric = DistanceMetric::EuclideanL2;
  std::uint64_t capacity_bytes = 1;

  // Throws InvalidParameter.
  void validate() const;
};

struct CacheEntry {
  Descriptor descriptor;
  ResultPayload result;
  VirtualTime inserted_at = 0;
  VirtualTime last_hit_at = 0;
  std::uint64_t hit_count = 0;
};

struct CacheStats {
  std::uint64_t lookups = 0;
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  std::uint64_t insertions = 0;
  std::uint64_t evictions = 0;
  std::uint64_t rejections = 0;
  std::uint64_t bytes_resident = 0;

  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

struct CacheHit {
  ResultPayload result;
  double matched_distance = 0.0;
  Descriptor matched;
};

enum class InsertOutcome { Inserted, Replaced, RejectedTooLarge };

// Edge-resident result cache.
//
// Hash-keyed kinds hit only on bytewise-equal digests. Vector-keyed kinds
// hit when the nearest cached vector of the same kind is within beta; the
// scan is exact. Capacity counts result bytes, and eviction is LRU over all
// kinds, where recency is refreshed by insert, replace and hit.
//
// Every public member is serialized on an internal mutex.
class SimilarityCache {
 public:
  using EvictionListener = std::function<void(const CacheEntry&)>;

  explicit SimilarityCache(CacheConfig config);

  SimilarityCache(const SimilarityCache&) = delete;
  SimilarityCache& operator=(const SimilarityCache&) = delete;

  // Nearest match for the descriptor, or nullopt on a miss. Ties in distance
  // go to the most recent last_hit_at, then to the newest insertion.
  // Throws DimensionMismatch if a cached vector has a different dim.
  std::optional<CacheHit> lookup(const Descriptor& descriptor, VirtualTime now);

  InsertOutcome insert(const Descriptor& descriptor, ResultPayload result, VirtualTime now);

  CacheStats stats() const;
  const CacheConfig& config() const noexcept { return config_; }

  // Resident entries, most recently used first.
  std::vector<CacheEntry> entries_by_recency() const;

  // Called (under the cache lock) for each evicted entry, in eviction order.
  void set_eviction_listener(EvictionListener listener);

 private:
  struct Node {
    CacheEntry entry;
    std::uint64_t insert_seq = 0;
  };
  using NodeList = std::list<Node>;
  using NodeIt = NodeList::iterator;

  struct Namespace {
    std::unordered_map<ContentHash, NodeIt, ContentHashHasher> by_hash;
    std::vector<NodeIt> vectors;
  };

  Namespace& space_for(TaskKind kind) { return spaces_[kind_index(kind)]; }
  std::optional<NodeIt> find_best(const Descriptor& descriptor, double* best_distance);
  std::optional<NodeIt> find_identical(const Descriptor& descriptor);
  void evict_until_fits(std::uint64_t incoming, std::optional<NodeIt> keep);
  void erase(NodeIt it);

  CacheConfig config_;
  mutable std::mutex mu_;
  NodeList lru_;  // front = most recently used
  std::array<Namespace, 3> spaces_;
  CacheStats stats_;
  std::uint64_t next_seq_ = 0;
  EvictionListener on_evict_;
};

}  // namespace coic
