#include <doctest.h>

#include <cmath>
#include <set>

#include "coic/error.hpp"
#include "coic/workload.hpp"

using namespace coic;

namespace {

WorkloadSpec spec(TaskKind kind, std::uint32_t users, std::uint32_t per_user,
                  std::uint64_t catalog) {
  WorkloadSpec w;
  w.users = users;
  w.requests_per_user = per_user;
  w.catalog_size = catalog;
  w.kind_mix = {0, 0, 0};
  w.kind_mix[kind_index(kind)] = 1.0;
  w.arrival = {ArrivalProcess::Fixed, 100.0};
  w.feature_dim = 16;
  w.seed = 1;
  return w;
}

WorkloadSpec mixed() {
  WorkloadSpec w = spec(TaskKind::ObjectRecognition, 3, 40, 12);
  w.kind_mix = {0.5, 0.3, 0.2};
  w.zipf_s = 0.9;
  w.sigma = 0.03;
  w.arrival = {ArrivalProcess::Exponential, 250.0};
  w.seed = 77;
  return w;
}

}  // namespace

TEST_SUITE("workload") {

TEST_CASE("zipf probabilities") {
  const ZipfSampler z(3, 1.0);
  CHECK(z.probability(0) == doctest::Approx(6.0 / 11.0));
  CHECK(z.probability(1) == doctest::Approx(3.0 / 11.0));
  CHECK(z.probability(2) == doctest::Approx(2.0 / 11.0));
  CHECK(z.probability(3) == 0.0);
  const ZipfSampler u(5, 0.0);
  for (std::uint64_t i = 0; i < 5; ++i) CHECK(u.probability(i) == doctest::Approx(0.2));
  Prng rng(1);
  const ZipfSampler one(1, 2.0);
  for (int i = 0; i < 100; ++i) CHECK(one(rng) == 0);
}

TEST_CASE("zipf parameter errors") {
  CHECK_THROWS_AS(ZipfSampler(0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(ZipfSampler(3, -0.5), InvalidParameter);
  Prng rng(1);
  CHECK_THROWS_AS(zipf_sample(0, 1.0, rng), InvalidParameter);
}

TEST_CASE("zipf empirical frequencies") {
  const std::uint64_t n = 10;
  const double s = 0.8;
  const int draws = 100000;
  const ZipfSampler z(n, s);
  Prng rng(derive_seed(2024, 0));
  std::vector<int> counts(n);
  for (int i = 0; i < draws; ++i) ++counts[z(rng)];
  double chi2 = 0.0;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double p = z.probability(i);
    const double expected = p * draws;
    CAPTURE(i);
    CHECK(std::abs(counts[i] - expected) <= 3.0 * std::sqrt(draws * p * (1 - p)));
    chi2 += (counts[i] - expected) * (counts[i] - expected) / expected;
  }
  // 99.9th percentile of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 27.88);
}

TEST_CASE("spec validation") {
  WorkloadSpec w = spec(TaskKind::ModelRender3D, 1, 1, 1);
  CHECK_NOTHROW(w.validate());
  auto broken = [&](auto mutate) {
    WorkloadSpec b = w;
    mutate(b);
    return b;
  };
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.users = 0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.requests_per_user = 0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.catalog_size = 0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.zipf_s = -1; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.sigma = -1; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.feature_dim = 0; }).validate(), InvalidParameter);
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.kind_mix = {0.5, 0.4, 0.0}; }).validate(),
                  InvalidParameter);
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.kind_mix = {1.5, -0.5, 0.0}; }).validate(),
                  InvalidParameter);
  CHECK_NOTHROW(broken([](WorkloadSpec& b) { b.kind_mix = {0.5, 0.5 + 1e-10, 0.0}; }).validate());
  CHECK_THROWS_AS(broken([](WorkloadSpec& b) { b.arrival.mean_interarrival_ms = 0; }).validate(),
                  InvalidParameter);
  CHECK_THROWS_AS(generate_trace(broken([](WorkloadSpec& b) { b.users = 0; })), InvalidParameter);
}

TEST_CASE("single object with no noise repeats one descriptor") {
  const Trace t = generate_trace(spec(TaskKind::ObjectRecognition, 1, 5, 1));
  REQUIRE(t.requests.size() == 5);
  for (const TraceRequest& r : t.requests) {
    CHECK(r.object_id == 0);
    CHECK(r.descriptor == t.requests[0].descriptor);
  }
}

TEST_CASE("hash kinds share one digest per object") {
  const Trace t = generate_trace(spec(TaskKind::VRPanorama, 2, 10, 1));
  REQUIRE(t.requests.size() == 20);
  for (const TraceRequest& r : t.requests) {
    CHECK(r.kind() == TaskKind::VRPanorama);
    CHECK(r.descriptor.hash() == object_content_hash(0));
  }
  CHECK(object_content_hash(0).hex() ==
        "5341e6b2646979a70e57653007a1f310169421ec9bdd9f1a5648f75ade005af1");
}

TEST_CASE("trace shape") {
  const Trace t = generate_trace(mixed());
  REQUIRE(t.requests.size() == 120);
  std::set<std::uint32_t> users;
  for (std::size_t i = 0; i < t.requests.size(); ++i) {
    const TraceRequest& r = t.requests[i];
    CHECK(r.request_id == i);
    if (i > 0) CHECK(r.issued_at_us >= t.requests[i - 1].issued_at_us);
    CHECK(r.object_id < 12);
    if (r.kind() == TaskKind::ObjectRecognition) {
      CHECK(r.descriptor.vector().dim() == 16);
    } else {
      CHECK(r.descriptor.hash() == object_content_hash(r.object_id));
    }
    users.insert(r.user_id);
  }
  CHECK(users.size() == 3);
}

TEST_CASE("fixed arrivals are evenly spaced and staggered") {
  WorkloadSpec w = spec(TaskKind::ModelRender3D, 2, 3, 4);
  w.arrival = {ArrivalProcess::Fixed, 10.0};
  const Trace t = generate_trace(w);
  std::vector<VirtualTime> times;
  for (const auto& r : t.requests) times.push_back(r.issued_at_us);
  CHECK(times == std::vector<VirtualTime>{0, 5000, 10000, 15000, 20000, 25000});
  CHECK(t.requests[0].user_id == 0);
  CHECK(t.requests[1].user_id == 1);
}

TEST_CASE("determinism") {
  CHECK(generate_trace(mixed()) == generate_trace(mixed()));
  CHECK(serialize_trace(generate_trace(mixed())) == serialize_trace(generate_trace(mixed())));
  WorkloadSpec other = mixed();
  other.seed = 78;
  CHECK_FALSE(trace_digest(generate_trace(other)) == trace_digest(generate_trace(mixed())));
}

TEST_CASE("serialization round trip") {
  const Trace t = generate_trace(mixed());
  const std::string text = serialize_trace(t);
  CHECK(text.rfind("# coic-trace v1", 0) == 0);
  CHECK(parse_trace(text) == t);
  CHECK(parse_trace("") == Trace{});
}

TEST_CASE("trace parse errors name the line") {
  const std::string hash(64, '0');
  const std::string ok = "0,0,10,vr_panorama,0," + hash + "\n";
  CHECK_NOTHROW(parse_trace(ok));
  auto fails_with = [](const std::string& text, const std::string& needle) {
    try {
      parse_trace(text);
    } catch (const InvalidParameter& e) {
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_with("0,0,10,vr_panorama\n", "line 1"));
  CHECK(fails_with("# header\n0,0,x,vr_panorama,0," + hash + "\n", "line 2"));
  CHECK(fails_with("0,0,10,tracking,0," + hash + "\n", "unknown kind"));
  CHECK(fails_with("0,0,10,vr_panorama,0,zz\n", "line 1"));
  CHECK(fails_with("0,0,10,vr_panorama,0,00\n", "line 1"));
  CHECK(fails_with("0,0,10,vr_panorama,0," + hash + "\n1,0,5,vr_panorama,0," + hash + "\n",
                   "not sorted"));
}

}  // TEST_SUITE
