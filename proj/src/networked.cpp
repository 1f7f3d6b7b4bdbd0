#include "coic/networked.hpp"

#include <thread>

#include "coic/error.hpp"

namespace coic {

namespace {

void emulate_ms(double ms) {
  if (ms * 1000.0 >= 1.0) {
    std::this_thread::sleep_for(std::chrono::microseconds(ms_to_us(ms)));
  }
}

}  // namespace

CloudServer::CloudServer(const net::Endpoint& listen, std::shared_ptr<const CloudBackend> backend,
                         LinkEmulation emulation)
    : backend_(std::move(backend)),
      emulation_(emulation),
      server_(listen, [this](net::FramedConnection& conn) { serve(conn); }) {}

void CloudServer::serve(net::FramedConnection& conn) {
  while (auto message = conn.receive()) {
    const auto* request = std::get_if<wire::RequestMessage>(&*message);
    if (!request) return;  // clients never send responses
    const TaskKind kind = request->descriptor.kind();
    ResultPayload result = backend_->handle(request->descriptor);
    emulate_ms(emulation_.compute[kind].cloud_compute_ms +
               transfer_time_ms(emulation_.links.link_ec, result.size()));
    conn.send(wire::ResponseMessage{request->request_id, ServedFrom::Cloud, std::move(result)});
  }
}

EdgeServer::EdgeServer(const net::Endpoint& listen, net::Endpoint cloud,
                       std::optional<CacheConfig> cache, LinkEmulation emulation)
    : cloud_(std::move(cloud)),
      cache_(cache ? std::make_unique<SimilarityCache>(*cache) : nullptr),
      emulation_(emulation),
      epoch_(std::chrono::steady_clock::now()),
      server_(listen, [this](net::FramedConnection& conn) { serve(conn); }) {}

std::optional<CacheStats> EdgeServer::cache_stats() const {
  if (!cache_) return std::nullopt;
  return cache_->stats();
}

VirtualTime EdgeServer::now_us() const {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() -
                                                               epoch_)
      .count();
}

void EdgeServer::serve(net::FramedConnection& conn) {
  std::optional<net::FramedConnection> upstream;
  const Links& links = emulation_.links;

  while (auto message = conn.receive()) {
    const auto* request = std::get_if<wire::RequestMessage>(&*message);
    if (!request) return;
    const TaskKind kind = request->descriptor.kind();
    const KindSizes& sizes = emulation_.sizes[kind];
    emulate_ms(transfer_time_ms(links.link_me, sizes.request_descriptor_bytes));

    if (cache_) {
      auto hit = cache_->lookup(request->descriptor, now_us());
      emulate_ms(emulation_.compute[kind].edge_lookup_ms);
      if (hit) {
        emulate_ms(transfer_time_ms(links.link_me, hit->result.size()));
        conn.send(wire::ResponseMessage{request->request_id, ServedFrom::Edge, hit->result});
        continue;
      }
    }

    if (!upstream) upstream.emplace(net::connect_to(cloud_));
    emulate_ms(transfer_time_ms(links.link_ec, sizes.request_descriptor_bytes));
    upstream->send(*request);
    auto reply = upstream->receive();
    const auto* response = reply ? std::get_if<wire::ResponseMessage>(&*reply) : nullptr;
    if (!response || response->request_id != request->request_id) {
      throw TransportError("cloud returned no matching response for request " +
                           std::to_string(request->request_id));
    }
    if (cache_) cache_->insert(request->descriptor, response->result, now_us());
    emulate_ms(transfer_time_ms(links.link_me, response->result.size()));
    conn.send(wire::ResponseMessage{request->request_id, ServedFrom::Cloud, response->result});
  }
}

std::vector<RequestRecord> replay_trace(const net::Endpoint& edge, const Trace& trace,
                                        ReplayOptions options) {
  net::FramedConnection conn(net::connect_to(edge));
  std::vector<RequestRecord> records;
  records.reserve(trace.requests.size());
  const auto start = std::chrono::steady_clock::now();

  for (const TraceRequest& r : trace.requests) {
    if (options.pace) std::this_thread::sleep_until(start + std::chrono::microseconds(r.issued_at_us));
    const auto sent = std::chrono::steady_clock::now();
    conn.send(wire::RequestMessage{r.request_id, r.user_id, r.descriptor});
    auto reply = conn.receive();
    const auto received = std::chrono::steady_clock::now();
    const auto* response = reply ? std::get_if<wire::ResponseMessage>(&*reply) : nullptr;
    if (!response || response->request_id != r.request_id) {
      throw InvariantViolation("no response for request " + std::to_string(r.request_id));
    }

    RequestRecord rec;
    rec.request_id = r.request_id;
    rec.user_id = r.user_id;
    rec.kind = r.kind();
    rec.object_id = r.object_id;
    rec.issued_at_us = r.issued_at_us;
    rec.latency_us =
        std::chrono::duration_cast<std::chrono::microseconds>(received - sent).count();
    rec.completed_at_us = rec.issued_at_us + rec.latency_us;
    rec.served_from = response->served_from;
    rec.served_object = payload_object(response->result).value_or(kUnknownObject);
    records.push_back(rec);
  }
  return records;
}

}  // namespace coic
