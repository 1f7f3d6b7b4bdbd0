#include <doctest.h>

#include <fstream>

#include "coic/error.hpp"
#include "coic/scenario.hpp"

using namespace coic;
using nlohmann::json;

namespace {

const std::string kConfigDir = COIC_CONFIG_DIR;

json default_doc() {
  std::ifstream in(kConfigDir + "/default.json");
  return json::parse(in);
}

std::string config_error_path(const json& doc) {
  try {
    parse_scenario(doc);
  } catch (const ConfigError& e) {
    return e.path();
  }
  return "<no error>";
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("default config parses") {
  const ScenarioConfig c = load_scenario(kConfigDir + "/default.json");
  CHECK(c.workload.users == 4);
  CHECK(c.workload.requests_per_user == 50);
  CHECK(c.workload.kind_mix[kind_index(TaskKind::ModelRender3D)] == 0.3);
  CHECK(c.workload.arrival.process == ArrivalProcess::Exponential);
  CHECK(c.links.link_me.bandwidth_bps == 400e6);
  CHECK(c.compute[TaskKind::ObjectRecognition].cloud_compute_ms == 80.0);
  CHECK(c.sizes[TaskKind::VRPanorama].result_bytes == 2000000);
  CHECK(c.cache.metric == DistanceMetric::EuclideanL2);
  CHECK(c.mode == RunMode::Simulated);
  REQUIRE(c.sweeps.size() == 1);
  CHECK(c.sweeps[0].path == "link_ec.bandwidth_bps");
  CHECK(c.sweeps[0].values.size() == 4);
}

TEST_CASE("every shipped config parses") {
  for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(load_scenario(entry.path()));
  }
}

TEST_CASE("missing and unknown fields are named") {
  json doc = default_doc();
  doc["link_ec"].erase("propagation_ms");
  CHECK(config_error_path(doc) == "link_ec.propagation_ms");

  doc = default_doc();
  doc["workload"]["kind_mix"].erase("vr_panorama");
  CHECK(config_error_path(doc) == "workload.kind_mix.vr_panorama");

  doc = default_doc();
  doc["cache"]["ttl_ms"] = 5;
  CHECK(config_error_path(doc) == "cache.ttl_ms");

  doc = default_doc();
  doc["extra"] = true;
  CHECK(config_error_path(doc) == "extra");

  doc = default_doc();
  doc.erase("mode");
  CHECK(config_error_path(doc) == "mode");
}

TEST_CASE("type and range errors") {
  json doc = default_doc();
  doc["workload"]["users"] = -1;
  CHECK(config_error_path(doc) == "workload.users");

  doc = default_doc();
  doc["workload"]["users"] = 1.5;
  CHECK(config_error_path(doc) == "workload.users");

  doc = default_doc();
  doc["workload"]["users"] = 0;
  CHECK(config_error_path(doc) == "workload");

  doc = default_doc();
  doc["link_me"]["bandwidth_bps"] = "fast";
  CHECK(config_error_path(doc) == "link_me.bandwidth_bps");

  doc = default_doc();
  doc["link_me"]["bandwidth_bps"] = 0;
  CHECK(config_error_path(doc) == "link_me");

  doc = default_doc();
  doc["compute"]["vr_panorama"]["cloud_compute_ms"] = -3;
  CHECK(config_error_path(doc) == "compute");

  doc = default_doc();
  doc["cache"]["metric"] = "manhattan";
  CHECK(config_error_path(doc) == "cache.metric");

  doc = default_doc();
  doc["cache"]["beta"] = -0.5;
  CHECK(config_error_path(doc) == "cache");

  doc = default_doc();
  doc["workload"]["arrival"]["process"] = "bursty";
  CHECK(config_error_path(doc) == "workload.arrival.process");

  doc = default_doc();
  doc["mode"] = "hybrid";
  CHECK(config_error_path(doc) == "mode");

  doc = default_doc();
  doc["workload"]["kind_mix"]["vr_panorama"] = 0.3;
  CHECK(config_error_path(doc) == "workload");
}

TEST_CASE("size constraints") {
  json doc = default_doc();
  doc["sizes"]["model_render_3d"]["result_bytes"] = 8;
  CHECK(config_error_path(doc) == "sizes.model_render_3d.result_bytes");

  doc = default_doc();
  doc["sizes"]["object_recognition"]["request_descriptor_bytes"] = 1024;
  CHECK(config_error_path(doc) == "sizes.object_recognition.request_descriptor_bytes");

  // The wire size follows feature_dim.
  doc = default_doc();
  doc["workload"]["feature_dim"] = 8;
  doc["sizes"]["object_recognition"]["request_descriptor_bytes"] = 17 + 5 + 2 + 4 * 8;
  CHECK_NOTHROW(parse_scenario(doc));
}

TEST_CASE("sweep validation") {
  json doc = default_doc();
  doc["sweep"][0]["path"] = "link_ec.bandwidth";
  CHECK(config_error_path(doc) == "link_ec.bandwidth");

  doc = default_doc();
  doc["sweep"][0]["path"] = "cache.metric";
  CHECK(config_error_path(doc) == "cache.metric");

  doc = default_doc();
  doc["sweep"][0]["values"] = json::array({1e8, 0});
  CHECK(config_error_path(doc) == "link_ec");

  doc = default_doc();
  doc["sweep"][0]["values"] = json::array();
  CHECK(config_error_path(doc) == "sweep[0].values");

  doc = default_doc();
  doc["sweep"] = json::object();
  CHECK(config_error_path(doc) == "sweep");
}

TEST_CASE("overrides keep integer fields integral") {
  const json doc = with_override(default_doc(), "workload.users", 7);
  CHECK(doc["workload"]["users"].is_number_unsigned());
  CHECK(doc["workload"]["users"] == 7);
  const json f = with_override(default_doc(), "cache.beta", 0.25);
  CHECK(f["cache"]["beta"] == 0.25);
  CHECK_THROWS_AS(with_override(default_doc(), "nope.x", 1), ConfigError);
}

TEST_CASE("sweep expansion") {
  const ScenarioConfig c = parse_scenario(default_doc());
  const auto points = expand_sweeps(c);
  REQUIRE(points.size() == 4);
  CHECK(points[0].config.links.link_ec.bandwidth_bps == 1e7);
  CHECK(points[3].config.links.link_ec.bandwidth_bps == 4e8);
  CHECK(points[2].value == 1e8);
  CHECK(points[0].config.sweeps.empty());

  json flat = default_doc();
  flat.erase("sweep");
  const auto base = expand_sweeps(parse_scenario(flat));
  REQUIRE(base.size() == 1);
  CHECK(base[0].path.empty());
}

TEST_CASE("file errors") {
  CHECK_THROWS_AS(load_scenario("/nonexistent/config.json"), ConfigError);
  const auto tmp = std::filesystem::temp_directory_path() / "coic_bad.json";
  {
    std::ofstream out(tmp);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_scenario(tmp), ConfigError);
  std::filesystem::remove(tmp);
  CHECK(config_error_path(json::array()) == "<root>");
}

}  // TEST_SUITE
