#pragma once

#include <chrono>
#include <memory>
#include <optional>
#include <vector>

#include "coic/net.hpp"
#include "coic/netmodel.hpp"
#include "coic/simcache.hpp"
#include "coic/tiers.hpp"
#include "coic/workload.hpp"

namespace coic {

// Delays the servers inject to emulate the configured links, in the way tc
// shaping would. Sleeps are skipped when below one microsecond.
struct LinkEmulation {
  Links links;
  ComputeSpec compute;
  SizeSpec sizes;
};

// Cloud tier: computes results for every request frame it receives.
class CloudServer {
 public:
  CloudServer(const net::Endpoint& listen, std::shared_ptr<const CloudBackend> backend,
              LinkEmulation emulation);

  std::uint16_t port() const noexcept { return server_.port(); }
  void stop() { server_.stop(); }

 private:
  void serve(net::FramedConnection& conn);

  std::shared_ptr<const CloudBackend> backend_;
  LinkEmulation emulation_;
  net::TcpServer server_;
};

// Edge tier: answers from the shared cache or forwards to the cloud and
// inserts the returned result. With no cache it is a pure pass-through.
class EdgeServer {
 public:
  EdgeServer(const net::Endpoint& listen, net::Endpoint cloud, std::optional<CacheConfig> cache,
             LinkEmulation emulation);

  std::uint16_t port() const noexcept { return server_.port(); }
  void stop() { server_.stop(); }
  std::optional<CacheStats> cache_stats() const;

 private:
  void serve(net::FramedConnection& conn);
  VirtualTime now_us() const;

  net::Endpoint cloud_;
  std::unique_ptr<SimilarityCache> cache_;
  LinkEmulation emulation_;
  std::chrono::steady_clock::time_point epoch_;
  net::TcpServer server_;
};

struct ReplayOptions {
  // Wait until each request's issued_at offset before sending it.
  bool pace = false;
};

// Closed-loop replay over one connection: requests go out in trace order and
// each waits for its response. Latencies are wall-clock microseconds.
std::vector<RequestRecord> replay_trace(const net::Endpoint& edge, const Trace& trace,
                                        ReplayOptions options = {});

}  // namespace coic
