#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "coic/error.hpp"
#include "coic/scenario.hpp"
#include "coic/tiers.hpp"

namespace coic {

class MismatchedTraces : public Error {
 public:
  using Error::Error;
};

struct LatencySummary {
  double mean_ms = 0.0;
  double median_ms = 0.0;  // nearest-rank p50
  double p95_ms = 0.0;     // nearest-rank p95
};

struct KindAggregate {
  std::string kind;  // a TaskKind name, or "all"
  std::size_t requests = 0;
  double hit_rate = 0.0;
  // Edge-served responses whose object matches the request's ground truth,
  // over all edge-served responses. 1 when nothing was edge-served.
  double precision = 1.0;
  LatencySummary baseline;
  LatencySummary coic;
  double reduction = 0.0;  // 1 - mean_coic / mean_baseline
};

// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value.
VirtualTime nearest_rank(std::vector<VirtualTime> values, double percentile);

// Per-kind rows (kinds present, in kind order) followed by an "all" row.
// Throws MismatchedTraces unless both arms cover the same requests.
std::vector<KindAggregate> summarize(const std::vector<RequestRecord>& coic,
                                     const std::vector<RequestRecord>& baseline);

struct PointReport {
  std::string sweep_path;
  double sweep_value = 0.0;
  ContentHash trace_digest;
  std::vector<RequestRecord> baseline;
  std::vector<RequestRecord> coic;
  std::optional<CacheStats> cache_stats;
  std::vector<KindAggregate> aggregates;
};

struct RunReport {
  std::vector<PointReport> points;
  std::vector<std::string> violations;  // failed invariant checks

  bool ok() const noexcept { return violations.empty(); }
};

// Baseline and CoIC arms over the same generated trace, per sweep point.
RunReport run_scenario(const ScenarioConfig& config);

// Runs one point on loopback servers; used by run_scenario in networked mode.
PointReport run_point_networked(const ScenarioConfig& config, const Trace& trace);

std::string requests_csv(const PointReport& point);
std::string summary_csv(const RunReport& report);
std::string summary_csv(const PointReport& point);

// out/summary.csv plus out/point-NNN/{requests,summary}.csv.
void write_reports(const RunReport& report, const std::filesystem::path& out_dir);

std::string format_double(double value);

}  // namespace coic
