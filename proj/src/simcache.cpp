#include "coic/simcache.hpp"

#include <algorithm>
#include <cmath>

#include "coic/error.hpp"

namespace coic {

void CacheConfig::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidParameter("beta must be >= 0");
  if (capacity_bytes < 1) throw InvalidParameter("capacity_bytes must be >= 1");
}

SimilarityCache::SimilarityCache(CacheConfig config) : config_(config) { config_.validate(); }

std::optional<SimilarityCache::NodeIt> SimilarityCache::find_best(const Descriptor& descriptor,
                                                                  double* best_distance) {
  Namespace& space = space_for(descriptor.kind());
  if (!descriptor.is_vector()) {
    auto it = space.by_hash.find(descriptor.hash());
    if (it == space.by_hash.end()) return std::nullopt;
    *best_distance = 0.0;
    return it->second;
  }

  const FeatureVector& query = descriptor.vector();
  std::optional<NodeIt> best;
  double best_d = 0.0;
  for (NodeIt node : space.vectors) {
    const double d = distance(query, node->entry.descriptor.vector(), config_.metric);
    if (!best) {
      best = node;
      best_d = d;
      continue;
    }
    const Node& cur = **best;
    const bool better =
        d < best_d ||
        (d == best_d && (node->entry.last_hit_at > cur.entry.last_hit_at ||
                         (node->entry.last_hit_at == cur.entry.last_hit_at &&
                          node->insert_seq > cur.insert_seq)));
    if (better) {
      best = node;
      best_d = d;
    }
  }
  if (best) *best_distance = best_d;
  return best;
}

std::optional<SimilarityCache::NodeIt> SimilarityCache::find_identical(
    const Descriptor& descriptor) {
  double d = 0.0;
  auto best = find_best(descriptor, &d);
  if (best && d == 0.0) return best;
  return std::nullopt;
}

std::optional<CacheHit> SimilarityCache::lookup(const Descriptor& descriptor, VirtualTime now) {
  std::lock_guard lock(mu_);
  double d = 0.0;
  auto best = find_best(descriptor, &d);
  ++stats_.lookups;
  if (!best || d > config_.beta) {
    ++stats_.misses;
    return std::nullopt;
  }
  ++stats_.hits;
  NodeIt node = *best;
  node->entry.last_hit_at = std::max(now, node->entry.inserted_at);
  ++node->entry.hit_count;
  lru_.splice(lru_.begin(), lru_, node);
  return CacheHit{node->entry.result, d, node->entry.descriptor};
}

InsertOutcome SimilarityCache::insert(const Descriptor& descriptor, ResultPayload result,
                                      VirtualTime now) {
  if (result.empty()) throw InvalidParameter("cannot cache an empty result");
  std::lock_guard lock(mu_);
  const std::uint64_t size = result.size();
  if (size > config_.capacity_bytes) {
    ++stats_.rejections;
    return InsertOutcome::RejectedTooLarge;
  }

  if (auto existing = find_identical(descriptor)) {
    NodeIt node = *existing;
    stats_.bytes_resident -= node->entry.result.size();
    evict_until_fits(size, node);
    Namespace& space = space_for(descriptor.kind());
    if (!descriptor.is_vector()) space.by_hash.erase(node->entry.descriptor.hash());
    node->entry.descriptor = descriptor;
    node->entry.result = std::move(result);
    node->entry.inserted_at = now;
    node->entry.last_hit_at = now;
    node->insert_seq = next_seq_++;
    if (!descriptor.is_vector()) space.by_hash.emplace(descriptor.hash(), node);
    lru_.splice(lru_.begin(), lru_, node);
    stats_.bytes_resident += size;
    ++stats_.insertions;
    return InsertOutcome::Replaced;
  }

  evict_until_fits(size, std::nullopt);
  lru_.push_front(Node{CacheEntry{descriptor, std::move(result), now, now, 0}, next_seq_++});
  NodeIt node = lru_.begin();
  Namespace& space = space_for(descriptor.kind());
  if (descriptor.is_vector()) {
    space.vectors.push_back(node);
  } else {
    space.by_hash.emplace(descriptor.hash(), node);
  }
  stats_.bytes_resident += size;
  ++stats_.insertions;
  return InsertOutcome::Inserted;
}

void SimilarityCache::evict_until_fits(std::uint64_t incoming, std::optional<NodeIt> keep) {
  auto it = lru_.end();
  while (stats_.bytes_resident + incoming > config_.capacity_bytes && it != lru_.begin()) {
    --it;
    if (keep && it == *keep) continue;
    NodeIt victim = it;
    ++it;  // erase invalidates only the victim
    if (on_evict_) on_evict_(victim->entry);
    erase(victim);
    ++stats_.evictions;
  }
}

void SimilarityCache::erase(NodeIt node) {
  Namespace& space = space_for(node->entry.descriptor.kind());
  if (node->entry.descriptor.is_vector()) {
    auto pos = std::find(space.vectors.begin(), space.vectors.end(), node);
    *pos = space.vectors.back();
    space.vectors.pop_back();
  } else {
    space.by_hash.erase(node->entry.descriptor.hash());
  }
  stats_.bytes_resident -= node->entry.result.size();
  lru_.erase(node);
}

CacheStats SimilarityCache::stats() const {
  std::lock_guard lock(mu_);
  return stats_;
}

std::vector<CacheEntry> SimilarityCache::entries_by_recency() const {
  std::lock_guard lock(mu_);
  std::vector<CacheEntry> out;
  out.reserve(lru_.size());
  for (const Node& n : lru_) out.push_back(n.entry);
  return out;
}

void SimilarityCache::set_eviction_listener(EvictionListener listener) {
  std::lock_guard lock(mu_);
  on_evict_ = std::move(listener);
}

}  // namespace coic
