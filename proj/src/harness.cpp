#include "coic/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "coic/networked.hpp"

namespace coic {

namespace {

constexpr double kReductionSlack = 1e-6;

LatencySummary latency_summary(const std::vector<VirtualTime>& latencies) {
  LatencySummary s;
  if (latencies.empty()) return s;
  long double sum = 0;
  for (VirtualTime l : latencies) sum += l;
  s.mean_ms = static_cast<double>(sum / latencies.size()) / 1000.0;
  s.median_ms = static_cast<double>(nearest_rank(latencies, 50.0)) / 1000.0;
  s.p95_ms = static_cast<double>(nearest_rank(latencies, 95.0)) / 1000.0;
  return s;
}

KindAggregate aggregate(std::string name, const std::vector<const RequestRecord*>& coic,
                        const std::vector<const RequestRecord*>& baseline) {
  KindAggregate a;
  a.kind = std::move(name);
  a.requests = coic.size();
  std::vector<VirtualTime> lc, lb;
  std::size_t edge = 0, correct = 0;
  for (const RequestRecord* r : coic) {
    lc.push_back(r->latency_us);
    if (r->served_from == ServedFrom::Edge) {
      ++edge;
      if (r->served_object == r->object_id) ++correct;
    }
  }
  for (const RequestRecord* r : baseline) lb.push_back(r->latency_us);
  a.hit_rate = a.requests ? static_cast<double>(edge) / static_cast<double>(a.requests) : 0.0;
  a.precision = edge ? static_cast<double>(correct) / static_cast<double>(edge) : 1.0;
  a.coic = latency_summary(lc);
  a.baseline = latency_summary(lb);
  a.reduction = a.baseline.mean_ms > 0.0 ? 1.0 - a.coic.mean_ms / a.baseline.mean_ms : 0.0;
  return a;
}

SimulationParams params_for(const ScenarioConfig& config, bool cache_enabled) {
  return SimulationParams{config.links, config.compute, config.sizes, config.cache, cache_enabled};
}

std::shared_ptr<const CloudBackend> backend_for(const ScenarioConfig& config) {
  return std::make_shared<const CloudBackend>(
      Catalog{config.workload.catalog_size, config.workload.feature_dim}, config.compute,
      config.sizes);
}

void check_point(const ScenarioConfig& config, const PointReport& p, const ContentHash& digest_b,
                 std::vector<std::string>& violations) {
  const std::string where =
      p.sweep_path.empty() ? std::string("base") : p.sweep_path + "=" + format_double(p.sweep_value);
  auto fail = [&](const std::string& what) { violations.push_back(where + ": " + what); };

  if (!(p.trace_digest == digest_b)) fail("baseline and coic arms replayed different traces");
  if (p.coic.size() != p.baseline.size()) fail("arms produced different record counts");

  for (const auto& records : {&p.baseline, &p.coic}) {
    std::set<std::uint64_t> ids;
    for (const RequestRecord& r : *records) {
      if (!ids.insert(r.request_id).second) fail("duplicate response for a request id");
      if (r.completed_at_us < r.issued_at_us) fail("response completed before issue");
    }
  }
  for (const RequestRecord& r : p.baseline) {
    if (r.served_from == ServedFrom::Edge) fail("baseline arm served from the edge");
  }
  if (p.cache_stats) {
    const auto edge = std::count_if(p.coic.begin(), p.coic.end(), [](const RequestRecord& r) {
      return r.served_from == ServedFrom::Edge;
    });
    if (p.cache_stats->hits != static_cast<std::uint64_t>(edge)) {
      fail("cache hit count disagrees with edge-served responses");
    }
    if (p.cache_stats->lookups != p.cache_stats->hits + p.cache_stats->misses) {
      fail("cache lookups != hits + misses");
    }
    if (p.cache_stats->bytes_resident > config.cache.capacity_bytes) fail("cache over capacity");
  }

  // First request for each hashed object is a miss.
  std::set<std::pair<TaskKind, std::uint64_t>> seen;
  for (const RequestRecord& r : p.coic) {
    if (uses_feature_vector(r.kind)) continue;
    if (seen.insert({r.kind, r.object_id}).second && r.served_from == ServedFrom::Edge) {
      fail("first request for object " + std::to_string(r.object_id) + " hit the cache");
    }
  }

  std::set<TaskKind> kinds;
  for (const RequestRecord& r : p.coic) kinds.insert(r.kind);
  for (const KindAggregate& a : p.aggregates) {
    if (a.hit_rate < 0.0 || a.hit_rate > 1.0) fail("hit_rate outside [0, 1]");
    if (a.precision < 0.0 || a.precision > 1.0) fail("precision outside [0, 1]");
  }
  if (kinds.size() == 1 && config.mode == RunMode::Simulated) {
    const TaskKind k = *kinds.begin();
    const double hit = latency_hit_ms(k, config.links, config.compute, config.sizes);
    const double base = latency_baseline_ms(k, config.links, config.compute, config.sizes);
    const KindAggregate& all = p.aggregates.back();
    if (all.reduction > all.hit_rate * (1.0 - hit / base) + kReductionSlack) {
      fail("reduction exceeds the hit-rate bound");
    }
  }
}

PointReport run_point_simulated(const ScenarioConfig& config, const Trace& trace) {
  const auto backend = backend_for(config);
  PointReport p;
  SimulationResult base = run_simulation(params_for(config, false), *backend, trace);
  SimulationResult coic = run_simulation(params_for(config, true), *backend, trace);
  p.baseline = std::move(base.records);
  p.coic = std::move(coic.records);
  p.cache_stats = coic.cache_stats;
  return p;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void append_summary_rows(std::ostringstream& out, const PointReport& p) {
  for (const KindAggregate& a : p.aggregates) {
    out << p.sweep_path << ',' << (p.sweep_path.empty() ? "" : format_double(p.sweep_value)) << ','
        << a.kind << ',' << a.requests << ',' << format_double(a.hit_rate) << ','
        << format_double(a.precision) << ',' << format_double(a.baseline.mean_ms) << ','
        << format_double(a.baseline.median_ms) << ',' << format_double(a.baseline.p95_ms) << ','
        << format_double(a.coic.mean_ms) << ',' << format_double(a.coic.median_ms) << ','
        << format_double(a.coic.p95_ms) << ',' << format_double(a.reduction) << '\n';
  }
}

constexpr const char* kSummaryHeader =
    "sweep_path,sweep_value,kind,requests,hit_rate,precision,baseline_mean_ms,"
    "baseline_median_ms,baseline_p95_ms,coic_mean_ms,coic_median_ms,coic_p95_ms,reduction\n";

}  // namespace

std::string format_double(double value) {
  // Plain notation across the range the reports use, shortest round-trip digits.
  char buf[400];
  const double mag = std::abs(value);
  const bool plain = mag == 0.0 || (mag >= 1e-4 && mag < 1e15);
  auto [ptr, ec] = plain ? std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

VirtualTime nearest_rank(std::vector<VirtualTime> values, double percentile) {
  if (values.empty()) throw InvalidParameter("percentile of an empty sample");
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw InvalidParameter("percentile must be within (0, 100]");
  }
  std::sort(values.begin(), values.end());
  const auto n = static_cast<double>(values.size());
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * n));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

std::vector<KindAggregate> summarize(const std::vector<RequestRecord>& coic,
                                     const std::vector<RequestRecord>& baseline) {
  if (coic.size() != baseline.size()) {
    throw MismatchedTraces("arms have " + std::to_string(coic.size()) + " and " +
                           std::to_string(baseline.size()) + " records");
  }
  std::map<TaskKind, std::pair<std::vector<const RequestRecord*>, std::vector<const RequestRecord*>>>
      by_kind;
  std::vector<const RequestRecord*> all_c, all_b;
  for (std::size_t i = 0; i < coic.size(); ++i) {
    const RequestRecord& c = coic[i];
    const RequestRecord& b = baseline[i];
    if (c.request_id != b.request_id || c.kind != b.kind || c.object_id != b.object_id ||
        c.user_id != b.user_id || c.issued_at_us != b.issued_at_us) {
      throw MismatchedTraces("arms diverge at request index " + std::to_string(i));
    }
    by_kind[c.kind].first.push_back(&c);
    by_kind[c.kind].second.push_back(&b);
    all_c.push_back(&c);
    all_b.push_back(&b);
  }
  std::vector<KindAggregate> out;
  for (const auto& [kind, arms] : by_kind) {
    out.push_back(aggregate(std::string(to_string(kind)), arms.first, arms.second));
  }
  out.push_back(aggregate("all", all_c, all_b));
  return out;
}

PointReport run_point_networked(const ScenarioConfig& config, const Trace& trace) {
  const auto backend = backend_for(config);
  const LinkEmulation emulation{config.links, config.compute, config.sizes};
  const net::Endpoint loopback{"127.0.0.1", 0};
  PointReport p;

  auto run_arm = [&](bool cache_enabled) {
    CloudServer cloud(loopback, backend, emulation);
    EdgeServer edge(loopback, net::Endpoint{"127.0.0.1", cloud.port()},
                    cache_enabled ? std::optional<CacheConfig>(config.cache) : std::nullopt,
                    emulation);
    auto records = replay_trace(net::Endpoint{"127.0.0.1", edge.port()}, trace);
    if (cache_enabled) p.cache_stats = edge.cache_stats();
    edge.stop();
    cloud.stop();
    return records;
  };
  p.baseline = run_arm(false);
  p.coic = run_arm(true);
  return p;
}

RunReport run_scenario(const ScenarioConfig& config) {
  RunReport report;
  for (SweepPoint& point : expand_sweeps(config)) {
    const ScenarioConfig& cfg = point.config;
    // Each arm derives its trace independently; the digests must agree.
    const Trace trace = generate_trace(cfg.workload);
    const ContentHash baseline_digest = trace_digest(generate_trace(cfg.workload));

    PointReport p = cfg.mode == RunMode::Simulated ? run_point_simulated(cfg, trace)
                                                   : run_point_networked(cfg, trace);
    p.sweep_path = point.path;
    p.sweep_value = point.value;
    p.trace_digest = trace_digest(trace);
    p.aggregates = summarize(p.coic, p.baseline);
    check_point(cfg, p, baseline_digest, report.violations);
    report.points.push_back(std::move(p));
  }
  return report;
}

std::string requests_csv(const PointReport& point) {
  std::ostringstream out;
  out << "arm,request_id,user_id,kind,object_id,issued_at_us,latency_us,served_from,"
         "matched_distance\n";
  auto rows = [&](const char* arm, const std::vector<RequestRecord>& records) {
    for (const RequestRecord& r : records) {
      out << arm << ',' << r.request_id << ',' << r.user_id << ',' << to_string(r.kind) << ','
          << r.object_id << ',' << r.issued_at_us << ',' << r.latency_us << ','
          << wire::to_string(r.served_from) << ','
          << (r.matched_distance ? format_double(*r.matched_distance) : std::string()) << '\n';
    }
  };
  rows("baseline", point.baseline);
  rows("coic", point.coic);
  return out.str();
}

std::string summary_csv(const PointReport& point) {
  std::ostringstream out;
  out << kSummaryHeader;
  append_summary_rows(out, point);
  return out.str();
}

std::string summary_csv(const RunReport& report) {
  std::ostringstream out;
  out << kSummaryHeader;
  for (const PointReport& p : report.points) append_summary_rows(out, p);
  return out.str();
}

void write_reports(const RunReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "summary.csv", summary_csv(report));
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "point-%03zu", i);
    const auto dir = out_dir / name;
    std::filesystem::create_directories(dir);
    write_file(dir / "requests.csv", requests_csv(report.points[i]));
    write_file(dir / "summary.csv", summary_csv(report.points[i]));
  }
}

}  // namespace coic
