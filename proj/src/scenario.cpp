#include "coic/scenario.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "coic/error.hpp"
#include "coic/wire.hpp"

namespace coic {

namespace {

using nlohmann::json;

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Strict view over one JSON object: every key must be consumed exactly once.
class Fields {
 public:
  Fields(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    auto it = object_.find(key);
    if (it == object_.end()) throw ConfigError(join(path_, key), "missing required field");
    return *it;
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  Fields object(const std::string& key) { return Fields(raw(key), join(path_, key)); }

  double number(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_number()) throw ConfigError(join(path_, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(path_, key), "expected a finite number");
    return d;
  }

  std::uint64_t unsigned_int(const std::string& key) {
    const json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0 && d == std::floor(d) && d < 0x1p64) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(join(path_, key), "expected a non-negative integer");
  }

  std::string string(const std::string& key) {
    const json& v = raw(key);
    if (!v.is_string()) throw ConfigError(join(path_, key), "expected a string");
    return v.get<std::string>();
  }

  std::string path(const std::string& key) const { return join(path_, key); }

  void finish() const {
    for (const auto& [key, _] : object_.items()) {
      if (!seen_.count(key)) throw ConfigError(join(path_, key), "unknown field");
    }
  }

 private:
  const json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Fn>
void checked(const std::string& path, Fn&& fn) {
  try {
    fn();
  } catch (const InvalidParameter& e) {
    throw ConfigError(path, e.what());
  }
}

std::uint32_t narrow_u32(Fields& f, const std::string& key) {
  const std::uint64_t v = f.unsigned_int(key);
  if (v > std::numeric_limits<std::uint32_t>::max()) throw ConfigError(f.path(key), "out of range");
  return static_cast<std::uint32_t>(v);
}

WorkloadSpec parse_workload(Fields f) {
  WorkloadSpec w;
  w.users = narrow_u32(f, "users");
  w.requests_per_user = narrow_u32(f, "requests_per_user");
  w.catalog_size = f.unsigned_int("catalog_size");
  w.zipf_s = f.number("zipf_s");
  {
    Fields mix = f.object("kind_mix");
    for (TaskKind k : kAllTaskKinds) w.kind_mix[kind_index(k)] = mix.number(std::string(to_string(k)));
    mix.finish();
  }
  w.sigma = f.number("sigma");
  w.feature_dim = f.unsigned_int("feature_dim");
  {
    Fields arrival = f.object("arrival");
    const std::string process = arrival.string("process");
    if (process == "fixed") {
      w.arrival.process = ArrivalProcess::Fixed;
    } else if (process == "exponential") {
      w.arrival.process = ArrivalProcess::Exponential;
    } else {
      throw ConfigError(arrival.path("process"), "expected \"fixed\" or \"exponential\"");
    }
    w.arrival.mean_interarrival_ms = arrival.number("mean_interarrival_ms");
    arrival.finish();
  }
  w.seed = f.unsigned_int("seed");
  f.finish();
  checked("workload", [&] { w.validate(); });
  return w;
}

LinkSpec parse_link(Fields f) {
  LinkSpec l{f.number("bandwidth_bps"), f.number("propagation_ms")};
  f.finish();
  return l;
}

}  // namespace

ScenarioConfig parse_scenario(const json& document) {
  Fields root(document, "");
  ScenarioConfig c;
  c.workload = parse_workload(root.object("workload"));

  c.links.link_me = parse_link(root.object("link_me"));
  checked("link_me", [&] { c.links.link_me.validate(); });
  c.links.link_ec = parse_link(root.object("link_ec"));
  checked("link_ec", [&] { c.links.link_ec.validate(); });

  {
    Fields compute = root.object("compute");
    for (TaskKind k : kAllTaskKinds) {
      Fields kf = compute.object(std::string(to_string(k)));
      KindCompute& kc = c.compute[k];
      kc.cloud_compute_ms = kf.number("cloud_compute_ms");
      kc.edge_lookup_ms = kf.number("edge_lookup_ms");
      kc.client_extract_ms = kf.number("client_extract_ms");
      kf.finish();
    }
    compute.finish();
    checked("compute", [&] { c.compute.validate(); });
  }

  {
    Fields sizes = root.object("sizes");
    for (TaskKind k : kAllTaskKinds) {
      Fields kf = sizes.object(std::string(to_string(k)));
      KindSizes& ks = c.sizes[k];
      ks.request_descriptor_bytes = kf.unsigned_int("request_descriptor_bytes");
      ks.result_bytes = kf.unsigned_int("result_bytes");
      kf.finish();
      if (ks.request_descriptor_bytes < 1) {
        throw ConfigError(kf.path("request_descriptor_bytes"), "must be >= 1");
      }
      // Results carry a 9-byte (kind, object id) header used for precision accounting.
      if (ks.result_bytes < 9) throw ConfigError(kf.path("result_bytes"), "must be >= 9");
    }
    sizes.finish();
    const std::size_t frame =
        wire::request_frame_size(TaskKind::ObjectRecognition, c.workload.feature_dim);
    if (c.sizes[TaskKind::ObjectRecognition].request_descriptor_bytes != frame) {
      throw ConfigError("sizes.object_recognition.request_descriptor_bytes",
                        "must equal the wire-encoded request size " + std::to_string(frame) +
                            " for feature_dim " + std::to_string(c.workload.feature_dim));
    }
  }

  {
    Fields cache = root.object("cache");
    c.cache.beta = cache.number("beta");
    const std::string metric = cache.string("metric");
    const auto m = distance_metric_from_string(metric);
    if (!m) throw ConfigError(cache.path("metric"), "expected \"l2\" or \"cosine\"");
    c.cache.metric = *m;
    c.cache.capacity_bytes = cache.unsigned_int("capacity_bytes");
    cache.finish();
    checked("cache", [&] { c.cache.validate(); });
  }

  const std::string mode = root.string("mode");
  if (mode == "simulated") {
    c.mode = RunMode::Simulated;
  } else if (mode == "networked") {
    c.mode = RunMode::Networked;
  } else {
    throw ConfigError("mode", "expected \"simulated\" or \"networked\"");
  }

  if (root.has("sweep")) {
    const json& sweeps = root.raw("sweep");
    if (!sweeps.is_array()) throw ConfigError("sweep", "expected an array");
    for (std::size_t i = 0; i < sweeps.size(); ++i) {
      const std::string at = "sweep[" + std::to_string(i) + "]";
      Fields s(sweeps[i], at);
      SweepSpec spec;
      spec.path = s.string("path");
      const json& values = s.raw("values");
      if (!values.is_array() || values.empty()) {
        throw ConfigError(s.path("values"), "expected a non-empty array of numbers");
      }
      for (const json& v : values) {
        if (!v.is_number()) throw ConfigError(s.path("values"), "expected numbers");
        spec.values.push_back(v.get<double>());
      }
      s.finish();
      // Each value must yield a valid configuration on its own.
      for (double v : spec.values) {
        json probe = with_override(document, spec.path, v);
        probe.erase("sweep");
        parse_scenario(probe);
      }
      c.sweeps.push_back(std::move(spec));
    }
  }
  root.finish();
  c.source = document;
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file.string(), "cannot open config file");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file.string(), e.what());
  }
  return parse_scenario(doc);
}

json with_override(json document, const std::string& path, double value) {
  json* node = &document;
  std::stringstream parts(path);
  std::string part;
  while (std::getline(parts, part, '.')) {
    if (!node->is_object() || !node->contains(part)) {
      throw ConfigError(path, "sweep path does not name an existing field");
    }
    node = &(*node)[part];
  }
  if (!node->is_number()) throw ConfigError(path, "sweep path must name a numeric field");
  if (node->is_number_integer() && value == std::floor(value) && value >= 0) {
    *node = static_cast<std::uint64_t>(value);
  } else {
    *node = value;
  }
  return document;
}

std::vector<SweepPoint> expand_sweeps(const ScenarioConfig& config) {
  std::vector<SweepPoint> points;
  if (config.sweeps.empty()) {
    points.push_back(SweepPoint{"", 0.0, config});
    return points;
  }
  json base = config.source;
  base.erase("sweep");
  for (const SweepSpec& sweep : config.sweeps) {
    for (double v : sweep.values) {
      points.push_back(SweepPoint{sweep.path, v, parse_scenario(with_override(base, sweep.path, v))});
    }
  }
  return points;
}

}  // namespace coic
