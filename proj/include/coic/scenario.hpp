#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "coic/netmodel.hpp"
#include "coic/simcache.hpp"
#include "coic/workload.hpp"

namespace coic {

enum class RunMode { Simulated, Networked };

struct SweepSpec {
  std::string path;  // dotted path to a numeric field, e.g. "link_ec.bandwidth_bps"
  std::vector<double> values;
};

struct ScenarioConfig {
  WorkloadSpec workload;
  Links links;
  ComputeSpec compute;
  SizeSpec sizes;
  CacheConfig cache;
  RunMode mode = RunMode::Simulated;
  std::vector<SweepSpec> sweeps;

  nlohmann::json source;  // the validated document, for applying sweep overrides
};

// Every field is required and unknown fields are rejected. Throws ConfigError
// naming the offending field path.
ScenarioConfig parse_scenario(const nlohmann::json& document);
ScenarioConfig load_scenario(const std::filesystem::path& file);

// Copy of the document with one numeric field replaced. Throws ConfigError
// if the path does not name an existing number.
nlohmann::json with_override(nlohmann::json document, const std::string& path, double value);

struct SweepPoint {
  std::string path;  // empty for the unswept base point
  double value = 0.0;
  ScenarioConfig config;
};

// One point per (sweep, value); a single base point when there are no sweeps.
std::vector<SweepPoint> expand_sweeps(const ScenarioConfig& config);

}  // namespace coic
