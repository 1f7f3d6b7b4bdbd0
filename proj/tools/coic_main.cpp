// coic: scenario runner, trace generator, and networked edge/cloud tiers.

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "coic/harness.hpp"
#include "coic/networked.hpp"
#include "coic/scenario.hpp"
#include "coic/workload.hpp"

namespace {

using namespace coic;

// Blocks until SIGINT or SIGTERM.
void wait_for_shutdown_signal() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  int sig = 0;
  sigwait(&set, &sig);
}

void block_shutdown_signals() {
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);
}

std::shared_ptr<const CloudBackend> backend_for(const ScenarioConfig& c) {
  return std::make_shared<const CloudBackend>(
      Catalog{c.workload.catalog_size, c.workload.feature_dim}, c.compute, c.sizes);
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  ScenarioConfig config = load_scenario(config_path);
  if (seed) {
    nlohmann::json doc = config.source;
    doc["workload"]["seed"] = *seed;
    config = parse_scenario(doc);
  }
  const RunReport report = run_scenario(config);
  write_reports(report, out_dir);
  std::cout << summary_csv(report);
  for (const std::string& v : report.violations) std::cerr << "invariant violation: " << v << '\n';
  return report.ok() ? 0 : 1;
}

int cmd_gen_trace(const std::string& config_path, const std::string& out_file) {
  const ScenarioConfig config = load_scenario(config_path);
  const Trace trace = generate_trace(config.workload);
  std::ofstream out(out_file, std::ios::binary);
  if (!out) throw Error("cannot write " + out_file);
  out << serialize_trace(trace);
  std::cerr << "wrote " << trace.requests.size() << " requests to " << out_file << '\n';
  return 0;
}

int cmd_serve_cloud(const std::string& listen, const std::string& config_path) {
  const ScenarioConfig config = load_scenario(config_path);
  block_shutdown_signals();
  CloudServer server(net::Endpoint::parse(listen), backend_for(config),
                     LinkEmulation{config.links, config.compute, config.sizes});
  std::cerr << "cloud listening on port " << server.port() << '\n';
  wait_for_shutdown_signal();
  server.stop();
  return 0;
}

int cmd_serve_edge(const std::string& listen, const std::string& cloud,
                   const std::string& config_path) {
  const ScenarioConfig config = load_scenario(config_path);
  block_shutdown_signals();
  EdgeServer server(net::Endpoint::parse(listen), net::Endpoint::parse(cloud), config.cache,
                    LinkEmulation{config.links, config.compute, config.sizes});
  std::cerr << "edge listening on port " << server.port() << ", forwarding to " << cloud << '\n';
  wait_for_shutdown_signal();
  server.stop();
  if (auto stats = server.cache_stats()) {
    std::cerr << "lookups=" << stats->lookups << " hits=" << stats->hits
              << " misses=" << stats->misses << " evictions=" << stats->evictions << '\n';
  }
  return 0;
}

int cmd_replay(const std::string& edge, const std::string& trace_file, const std::string& out_dir,
               bool pace) {
  std::ifstream in(trace_file, std::ios::binary);
  if (!in) throw Error("cannot read " + trace_file);
  std::stringstream text;
  text << in.rdbuf();
  const Trace trace = parse_trace(text.str());
  PointReport point;
  point.coic = replay_trace(net::Endpoint::parse(edge), trace, ReplayOptions{pace});

  std::filesystem::create_directories(out_dir);
  std::ofstream out(std::filesystem::path(out_dir) / "requests.csv", std::ios::binary);
  std::string csv = requests_csv(point);
  out << csv;
  std::size_t edge_served = 0;
  for (const RequestRecord& r : point.coic) edge_served += r.served_from == ServedFrom::Edge;
  std::cout << "requests=" << point.coic.size() << " edge_served=" << edge_served << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative edge result cache for immersive computing tasks"};
  app.require_subcommand(1);

  std::string config, out, listen, cloud, edge, trace;
  std::optional<std::uint64_t> seed;
  bool pace = false;

  auto* run = app.add_subcommand("run", "Run baseline and cached arms of a scenario");
  run->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override workload.seed");
  run->add_option("--out", out, "Output directory")->required();

  auto* gen = app.add_subcommand("gen-trace", "Generate the scenario's request trace");
  gen->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", out, "Trace file")->required();

  auto* serve_edge = app.add_subcommand("serve-edge", "Run the edge tier");
  serve_edge->add_option("--listen", listen, "host:port")->default_val("0.0.0.0:7401");
  serve_edge->add_option("--cloud", cloud, "Cloud host:port")->default_val("127.0.0.1:7402");
  serve_edge->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* serve_cloud = app.add_subcommand("serve-cloud", "Run the cloud tier");
  serve_cloud->add_option("--listen", listen, "host:port")->default_val("0.0.0.0:7402");
  serve_cloud->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);

  auto* replay = app.add_subcommand("replay", "Replay a trace against a running edge");
  replay->add_option("--edge", edge, "Edge host:port")->default_val("127.0.0.1:7401");
  replay->add_option("--trace", trace, "Trace file")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", out, "Output directory")->required();
  replay->add_flag("--pace", pace, "Honor issued_at offsets");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, seed, out);
    if (*gen) return cmd_gen_trace(config, out);
    if (*serve_edge) return cmd_serve_edge(listen, cloud, config);
    if (*serve_cloud) return cmd_serve_cloud(listen, config);
    if (*replay) return cmd_replay(edge, trace, out, pace);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
