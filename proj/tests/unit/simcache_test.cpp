#include <doctest.h>

#include <thread>

#include "coic/error.hpp"
#include "coic/rng.hpp"
#include "coic/simcache.hpp"
#include "oracles.hpp"

using namespace coic;

namespace {

Descriptor vec(std::initializer_list<float> v) {
  return Descriptor::recognition(FeatureVector(std::vector<float>(v)));
}

Descriptor hashed(TaskKind kind, std::uint8_t tag) {
  ContentHash::Bytes b{};
  b[0] = tag;
  return Descriptor::hashed(kind, ContentHash(b));
}

ResultPayload payload(std::size_t size, std::uint8_t fill = 1) {
  return ResultPayload(std::vector<std::uint8_t>(size, fill));
}

CacheConfig config(double beta, std::uint64_t capacity,
                   DistanceMetric metric = DistanceMetric::EuclideanL2) {
  return CacheConfig{beta, metric, capacity};
}

}  // namespace

TEST_SUITE("simcache") {

TEST_CASE("config validation") {
  CHECK_THROWS_AS(SimilarityCache(config(-0.1, 10)), InvalidParameter);
  CHECK_THROWS_AS(SimilarityCache(config(NAN, 10)), InvalidParameter);
  CHECK_THROWS_AS(SimilarityCache(config(0.5, 0)), InvalidParameter);
  CHECK_NOTHROW(SimilarityCache(config(0.0, 1)));
}

TEST_CASE("lookup examples") {
  SimilarityCache cache(config(0.5, 1000));
  CHECK_FALSE(cache.lookup(vec({1, 0}), 0));

  const ResultPayload r = payload(10, 7);
  CHECK(cache.insert(vec({1, 0}), r, 1) == InsertOutcome::Inserted);
  auto hit = cache.lookup(vec({1, 0}), 2);
  REQUIRE(hit);
  CHECK(hit->result == r);
  CHECK(hit->matched_distance == 0.0);

  hit = cache.lookup(vec({1, 0.3f}), 3);
  REQUIRE(hit);
  CHECK(hit->matched_distance == doctest::Approx(0.3).epsilon(1e-7));
  CHECK(hit->matched == vec({1, 0}));
  CHECK_FALSE(cache.lookup(vec({1, 0.6f}), 4));
}

TEST_CASE("hash lookups are exact") {
  SimilarityCache cache(config(100.0, 1000));
  cache.insert(hashed(TaskKind::ModelRender3D, 1), payload(10), 0);
  cache.insert(hashed(TaskKind::ModelRender3D, 2), payload(10), 0);
  CHECK(cache.lookup(hashed(TaskKind::ModelRender3D, 1), 1));
  CHECK(cache.lookup(hashed(TaskKind::ModelRender3D, 2), 1));
  CHECK_FALSE(cache.lookup(hashed(TaskKind::ModelRender3D, 3), 1));
  // Same digest, different kind: separate namespace.
  CHECK_FALSE(cache.lookup(hashed(TaskKind::VRPanorama, 1), 1));
}

TEST_CASE("threshold boundary is inclusive") {
  SimilarityCache cache(config(0.5, 1000));
  cache.insert(vec({0, 0}), payload(10), 0);
  CHECK(cache.lookup(vec({0.5f, 0}), 1));
  CHECK_FALSE(cache.lookup(vec({0.5000001f, 0}), 1));
  SimilarityCache exact(config(0.0, 1000));
  exact.insert(vec({0, 0}), payload(10), 0);
  CHECK(exact.lookup(vec({0, 0}), 1));
  CHECK_FALSE(exact.lookup(vec({0, 1e-6f}), 1));
}

TEST_CASE("nearest entry wins, ties go to most recent hit then newest insert") {
  SimilarityCache cache(config(5.0, 1000));
  const ResultPayload left = payload(10, 1), right = payload(10, 2), far = payload(10, 3);
  cache.insert(vec({-1, 0}), left, 0);
  cache.insert(vec({1, 0}), right, 1);
  cache.insert(vec({4, 0}), far, 2);
  // Equidistant from both; newest insertion wins.
  auto hit = cache.lookup(vec({0, 0}), 10);
  REQUIRE(hit);
  CHECK(hit->result == right);
  // Refresh left via a nearer query, then the tie goes to it.
  hit = cache.lookup(vec({-1.1f, 0}), 20);
  REQUIRE(hit);
  CHECK(hit->result == left);
  hit = cache.lookup(vec({0, 0}), 30);
  REQUIRE(hit);
  CHECK(hit->result == left);
  CHECK(cache.lookup(vec({3.9f, 0}), 40)->result == far);
}

TEST_CASE("dimension mismatch against a cached vector") {
  SimilarityCache cache(config(0.5, 1000));
  cache.insert(vec({1, 0}), payload(10), 0);
  CHECK_THROWS_AS(cache.lookup(vec({1, 0, 0}), 1), DimensionMismatch);
}

TEST_CASE("cosine metric") {
  SimilarityCache cache(config(0.01, 1000, DistanceMetric::CosineDistance));
  cache.insert(vec({1, 0}), payload(10), 0);
  CHECK(cache.lookup(vec({5, 0.01f}), 1));
  CHECK_FALSE(cache.lookup(vec({0, 1}), 1));
  CHECK_THROWS_AS(cache.lookup(vec({0, 0}), 1), ZeroNormVector);
}

TEST_CASE("capacity examples") {
  SUBCASE("second entry evicts the first") {
    SimilarityCache cache(config(0.0, 100));
    cache.insert(hashed(TaskKind::ModelRender3D, 1), payload(60), 0);
    cache.insert(hashed(TaskKind::ModelRender3D, 2), payload(60), 1);
    const auto entries = cache.entries_by_recency();
    REQUIRE(entries.size() == 1);
    CHECK(entries[0].descriptor == hashed(TaskKind::ModelRender3D, 2));
    CHECK(cache.stats().evictions == 1);
  }
  SUBCASE("a hit protects an entry from eviction") {
    SimilarityCache cache(config(0.0, 100));
    const auto a = hashed(TaskKind::ModelRender3D, 1), b = hashed(TaskKind::ModelRender3D, 2),
               c = hashed(TaskKind::ModelRender3D, 3);
    cache.insert(a, payload(40), 0);
    cache.insert(b, payload(40), 1);
    CHECK(cache.lookup(a, 2));
    std::vector<Descriptor> evicted;
    cache.set_eviction_listener([&](const CacheEntry& e) { evicted.push_back(e.descriptor); });
    cache.insert(c, payload(40), 3);
    CHECK(evicted == std::vector<Descriptor>{b});
    CHECK(cache.lookup(a, 4));
    CHECK_FALSE(cache.lookup(b, 4));
    CHECK(cache.lookup(c, 4));
  }
  SUBCASE("oversized entry is rejected without side effects") {
    SimilarityCache cache(config(0.0, 100));
    cache.insert(hashed(TaskKind::VRPanorama, 1), payload(50), 0);
    CHECK(cache.insert(hashed(TaskKind::VRPanorama, 2), payload(200), 1) ==
          InsertOutcome::RejectedTooLarge);
    CHECK(cache.entries_by_recency().size() == 1);
    CHECK(cache.stats().bytes_resident == 50);
    CHECK(cache.stats().rejections == 1);
    CHECK(cache.stats().evictions == 0);
  }
  SUBCASE("entry of exactly the capacity fits") {
    SimilarityCache cache(config(0.0, 100));
    CHECK(cache.insert(hashed(TaskKind::VRPanorama, 1), payload(100), 0) == InsertOutcome::Inserted);
  }
}

TEST_CASE("identical key replaces the entry") {
  SimilarityCache cache(config(0.5, 100));
  cache.insert(vec({1, 1}), payload(30, 1), 0);
  CHECK(cache.lookup(vec({1, 1}), 5));
  CHECK(cache.insert(vec({1, 1}), payload(50, 2), 10) == InsertOutcome::Replaced);
  const auto entries = cache.entries_by_recency();
  REQUIRE(entries.size() == 1);
  CHECK(entries[0].result == payload(50, 2));
  CHECK(entries[0].inserted_at == 10);
  CHECK(entries[0].hit_count == 1);
  CHECK(cache.stats().bytes_resident == 50);

  // A near but not identical vector is a new entry.
  CHECK(cache.insert(vec({1, 1.1f}), payload(10), 11) == InsertOutcome::Inserted);
  CHECK(cache.entries_by_recency().size() == 2);

  // Replacement that needs room evicts others, never itself.
  SimilarityCache small(config(0.0, 100));
  const auto a = hashed(TaskKind::ModelRender3D, 1), b = hashed(TaskKind::ModelRender3D, 2);
  small.insert(a, payload(40), 0);
  small.insert(b, payload(40), 1);
  CHECK(small.insert(a, payload(90), 2) == InsertOutcome::Replaced);
  const auto left = small.entries_by_recency();
  REQUIRE(left.size() == 1);
  CHECK(left[0].descriptor == a);
}

TEST_CASE("empty results are refused") {
  SimilarityCache cache(config(0.5, 100));
  CHECK_THROWS_AS(cache.insert(vec({1}), ResultPayload{}, 0), InvalidParameter);
}

TEST_CASE("stats") {
  SimilarityCache cache(config(0.5, 1000));
  CHECK(cache.stats() == CacheStats{});
  cache.insert(vec({0, 0}), payload(10), 0);
  cache.lookup(vec({0, 0}), 1);
  cache.lookup(vec({9, 9}), 2);
  cache.lookup(vec({8, 8}), 3);
  const CacheStats s = cache.stats();
  CHECK(s.lookups == 3);
  CHECK(s.hits == 1);
  CHECK(s.misses == 2);
  CHECK(s.insertions == 1);
  CHECK(s.bytes_resident == 10);
}

TEST_CASE("last_hit_at never precedes inserted_at") {
  SimilarityCache cache(config(0.5, 1000));
  cache.insert(vec({0}), payload(10), 100);
  cache.lookup(vec({0}), 50);
  const auto e = cache.entries_by_recency().at(0);
  CHECK(e.last_hit_at >= e.inserted_at);
}

TEST_CASE("random sequences keep capacity and agree with the oracle") {
  Prng rng(derive_seed(5, 5));
  for (int seq = 0; seq < 300; ++seq) {
    const std::uint64_t capacity = 50 + rng.next_u64() % 200;
    const double beta = rng.uniform() * 1.5;
    SimilarityCache cache(config(beta, capacity));
    oracle::BruteForceCache ref(beta, DistanceMetric::EuclideanL2, capacity);
    VirtualTime now = 0;
    for (int op = 0; op < 60; ++op) {
      now += static_cast<VirtualTime>(rng.next_u64() % 3);
      Descriptor d = rng.uniform() < 0.6
                         ? vec({static_cast<float>(rng.next_u64() % 4) * 0.5f,
                                static_cast<float>(rng.next_u64() % 4) * 0.5f})
                         : hashed(TaskKind::VRPanorama, static_cast<std::uint8_t>(rng.next_u64() % 5));
      if (rng.uniform() < 0.5) {
        const auto got = cache.lookup(d, now);
        const auto want = ref.lookup(d, now);
        REQUIRE(bool(got) == want.hit);
      } else {
        const ResultPayload p = payload(1 + rng.next_u64() % 120);
        REQUIRE(cache.insert(d, p, now) == ref.insert(d, p, now));
      }
      REQUIRE(cache.stats().bytes_resident <= capacity);
      REQUIRE(cache.stats().bytes_resident == ref.resident_bytes());
    }
  }
}

TEST_CASE("beta monotonicity") {
  Prng rng(derive_seed(6, 6));
  for (int trial = 0; trial < 200; ++trial) {
    const double b1 = rng.uniform();
    const double b2 = b1 + rng.uniform();
    SimilarityCache lo(config(b1, 1u << 20)), hi(config(b2, 1u << 20));
    for (int i = 0; i < 20; ++i) {
      const auto d = vec({static_cast<float>(rng.uniform() * 4), static_cast<float>(rng.uniform() * 4)});
      lo.insert(d, payload(8), 0);
      hi.insert(d, payload(8), 0);
    }
    for (int q = 0; q < 20; ++q) {
      const auto d = vec({static_cast<float>(rng.uniform() * 4), static_cast<float>(rng.uniform() * 4)});
      // No evictions happen, so earlier lookups cannot change later decisions.
      if (lo.lookup(d, 1)) CHECK(hi.lookup(d, 1));
    }
  }
}

TEST_CASE("concurrent handlers see consistent state") {
  SimilarityCache cache(config(0.0, 4096));
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&cache, t] {
      for (int i = 0; i < 2000; ++i) {
        const auto d = hashed(TaskKind::VRPanorama, static_cast<std::uint8_t>((i * 7 + t) % 64));
        if (!cache.lookup(d, i)) cache.insert(d, payload(100), i);
      }
    });
  }
  for (auto& w : workers) w.join();
  const CacheStats s = cache.stats();
  CHECK(s.lookups == 8000);
  CHECK(s.lookups == s.hits + s.misses);
  CHECK(s.bytes_resident <= 4096);
  std::uint64_t sum = 0;
  for (const auto& e : cache.entries_by_recency()) sum += e.result.size();
  CHECK(sum == s.bytes_resident);
}

}  // TEST_SUITE
