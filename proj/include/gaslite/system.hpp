/* Copyright 2026 The Gaslite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef GASLITE_SYSTEM_HPP
#define GASLITE_SYSTEM_HPP

#include <fcntl.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gaslite/bridge.hpp"
#include "gaslite/config.hpp"
#include "gaslite/gasnet.hpp"
#include "gaslite/noc.hpp"

namespace gaslite {

/// Thrown by application code to fail a run with a message.
class AppError : public std::runtime_error {
 public:
  explicit AppError(const std::string& what) : std::runtime_error(what) {}
};

inline void app_check(bool cond, const std::string& msg) {
  if (!cond) throw AppError(msg);
}

struct AppParams {
  std::map<std::string, std::string> kv;

  bool has(const std::string& k) const { return kv.count(k) != 0; }
  std::string get(const std::string& k, const std::string& dflt = "") const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : it->second;
  }
  uint64_t get_u64(const std::string& k, uint64_t dflt) const {
    auto it = kv.find(k);
    return it == kv.end() ? dflt : std::stoull(it->second);
  }
  void set(const std::string& k, const std::string& v) { kv[k] = v; }
};

using AppMain = std::function<void(Node&, const AppParams&)>;

namespace detail {

struct AbortFiber {};

/// Cooperative execution context for one software node. Exactly one fiber
/// (or the scheduler) runs at any instant; handoff order is fixed, which
/// keeps runs deterministic.
class Fiber {
 public:
  Fiber() = default;
  ~Fiber() { shutdown(); }
  Fiber(const Fiber&) = delete;
  Fiber& operator=(const Fiber&) = delete;

  void start(std::function<void()> fn) {
    fn_ = std::move(fn);
    thread_ = std::thread([this] { body(); });
  }

  bool started() const { return thread_.joinable(); }
  bool finished() const { return finished_.load(); }
  std::exception_ptr error() const { return error_; }

  /// Scheduler side: let the fiber run until it yields or finishes.
  void resume() {
    if (!thread_.joinable() || finished_.load()) return;
    std::unique_lock lk(mu_);
    fiber_turn_ = true;
    cv_.notify_all();
    cv_.wait(lk, [&] { return !fiber_turn_; });
  }

  /// Fiber side: hand control back to the scheduler.
  void yield() {
    std::unique_lock lk(mu_);
    fiber_turn_ = false;
    cv_.notify_all();
    cv_.wait(lk, [&] { return fiber_turn_; });
    if (kill_.load()) throw AbortFiber{};
  }

  /// Unwinds and joins a still-running fiber.
  void shutdown() {
    if (!thread_.joinable()) return;
    kill_.store(true);
    while (!finished_.load()) resume();
    thread_.join();
  }

 private:
  void body() {
    {
      std::unique_lock lk(mu_);
      cv_.wait(lk, [&] { return fiber_turn_; });
    }
    if (!kill_.load()) {
      try {
        fn_();
      } catch (const AbortFiber&) {
      } catch (...) {
        error_ = std::current_exception();
      }
    }
    std::unique_lock lk(mu_);
    finished_.store(true);
    fiber_turn_ = false;
    cv_.notify_all();
  }

  std::function<void()> fn_;
  std::thread thread_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool fiber_turn_ = false;
  std::atomic<bool> finished_{false};
  std::atomic<bool> kill_{false};
  std::exception_ptr error_;
};

}  // namespace detail

class System;

/// The complete interface a hardware core gets: the encoded command FIFO in,
/// delivery records out, and its own local memory. Nothing of the software
/// node API is reachable from here.
class HwPort {
 public:
  std::optional<DeliveryRecord> pop_delivery() { return engine_->pop_delivery(); }
  std::span<const uint8_t> payload_view(const DeliveryRecord& rec) const {
    return engine_->payload_view(rec);
  }
  Segment& memory() { return engine_->segment(); }
  Cycles now() const;

  /// Pushes one encoded command (8-word header + args) into the GAScore.
  Status submit_words(std::span<const uint32_t> words);

  /// Retires a record; a non-empty `reply_words` command is emitted as the
  /// reply using the record's token.
  Status complete(const DeliveryRecord& rec, std::span<const uint32_t> reply_words = {});

 private:
  friend class System;
  System* sys_ = nullptr;
  GascoreEngine* engine_ = nullptr;
  uint32_t domain_id_ = 0;
};

/// A scripted hardware node: reacts to deliveries and emits commands, all
/// through the HwPort FIFO surface.
class CoreBehavior {
 public:
  virtual ~CoreBehavior() = default;
  virtual void step(HwPort& port) = 0;
};

using BehaviorResolver = std::function<std::unique_ptr<CoreBehavior>(const std::string&)>;

/// Builds and drives one process's share of a configured system: all domains
/// in-process, or a single hosted domain with socket links to the rest.
class System {
 public:
  static constexpr Cycles kDefaultCycleLimit = 1'000'000'000;
  static constexpr int kBridgedWatchdogMs = 120'000;
  static constexpr uint64_t kMaxSchedulerRounds = 50'000'000;

  System(SystemConfig cfg, Tracer& tracer, int hosted_domain = -1)
      : cfg_(std::move(cfg)), tracer_(tracer), hosted_domain_(hosted_domain) {}

  ~System() { teardown_links(); }
  System(const System&) = delete;
  System& operator=(const System&) = delete;

  bool bridged() const { return hosted_domain_ >= 0; }

  Status start(const BehaviorResolver& behaviors = {}) {
    if (Status s = cfg_.validate(); !s.ok()) return s;
    if (bridged() && cfg_.domain(static_cast<uint32_t>(hosted_domain_)) == nullptr)
      return Err::ConfigInvalid;

    for (const auto& dc : cfg_.domains) {
      if (!hosts_domain(dc.id)) continue;
      auto table = cfg_.routing_for(dc.id);
      if (!table.ok()) return table.error();
      auto ds = std::make_unique<DomainState>(dc.id, NocDomain(dc.topo, &tracer_),
                                              std::move(table.value()));
      domains_.emplace(dc.id, std::move(ds));
    }

    for (const auto& nc : cfg_.nodes) {  // cfg_.nodes is rank-sorted
      if (!hosts_domain(nc.domain)) continue;
      auto seg = attach_segment(nc.segment_size, nc.placement);
      if (!seg.ok()) return seg.error();
      auto ns = std::make_unique<NodeState>(nc, std::move(seg.value()), &tracer_);
      DomainState& dom = *domains_.at(nc.domain);
      GascoreEngine* eng = &ns->engine;
      if (Status s = dom.noc.attach(nc.rank, [eng](const ActiveMessage& m, Cycles t) {
            return eng->on_packet(m, t);
          });
          !s.ok())
        return s;

      if (nc.kind == NodeKind::Software) {
        ns->fiber = std::make_unique<detail::Fiber>();
        NodeEnv env;
        env.send = [this, d = &dom](const ActiveMessage& m) { return route_send(m, *d); };
        env.yield = [f = ns->fiber.get()] { f->yield(); };
        env.now = [d = &dom] { return d->noc.now(); };
        env.report = [this](const std::string& k, const std::string& v) { results_[k] = v; };
        env.config = &cfg_;
        env.tracer = &tracer_;
        ns->node = std::make_unique<Node>(nc.rank, ns->engine, std::move(env));
      } else {
        if (!behaviors) return Err::ConfigInvalid;
        ns->behavior = behaviors(nc.behavior);
        if (!ns->behavior) return Err::ConfigInvalid;
        ns->port = std::make_unique<HwPort>();
        ns->port->sys_ = this;
        ns->port->engine_ = &ns->engine;
        ns->port->domain_id_ = nc.domain;
      }
      nodes_.push_back(std::move(ns));
    }

    for (const auto& lc : cfg_.links) {
      bool relevant = hosts_domain(lc.endpoints[0].domain) || hosts_domain(lc.endpoints[1].domain);
      if (!relevant) continue;
      auto ls = std::make_unique<LinkState>();
      ls->cfg = lc;
      links_.emplace(lc.id, std::move(ls));
    }
    if (bridged()) {
      if (Status s = open_sockets(); !s.ok()) return s;
    }
    started_ = true;
    return {};
  }

  /// Runs `app` on every hosted software node to completion (or failure /
  /// cycle limit). Hardware nodes step between event batches.
  Status run(const AppMain& app, const AppParams& params, Cycles cycles_max = kDefaultCycleLimit) {
    if (!started_) return Err::ConfigInvalid;
    for (auto& ns : nodes_)
      if (ns->fiber)
        ns->fiber->start([node = ns->node.get(), &app, &params] { app(*node, params); });

    Status outcome;
    bool aborted = false;
    const auto wall_start = std::chrono::steady_clock::now();
    size_t idle_rounds = 0;

    for (uint64_t round = 0;; ++round) {
      if (round > kMaxSchedulerRounds) {
        outcome = Err::AppFailure;
        error_message_ = "scheduler round limit exceeded (livelock?)";
        aborted = true;
        break;
      }

      for (auto& ns : nodes_) {
        if (ns->fiber && !ns->fiber->finished())
          ns->fiber->resume();
        else if (ns->behavior)
          ns->behavior->step(*ns->port);
      }
      if (bridged()) pump_links();

      bool all_done = true;
      for (auto& ns : nodes_)
        if (ns->fiber && !ns->fiber->finished()) all_done = false;

      std::optional<Cycles> next;
      for (auto& [id, dom] : domains_) {
        auto t = dom->noc.next_event_time();
        if (t && (!next || *t < *next)) next = t;
      }

      if (next) {
        if (*next > cycles_max) {
          outcome = Err::CycleLimitExceeded;
          aborted = true;
          break;
        }
        for (auto& [id, dom] : domains_) dom->noc.advance(*next);
        idle_rounds = 0;
        continue;
      }

      if (all_done) {
        if (!bridged()) break;
        send_fins();
        if (all_peer_fins()) break;
        poll_links(1);
        if (wall_elapsed_ms(wall_start) > kBridgedWatchdogMs) {
          outcome = Err::AppFailure;
          error_message_ = "timed out waiting for peer shutdown";
          aborted = true;
          break;
        }
        continue;
      }

      if (bridged()) {
        poll_links(1);
        if (all_peer_fins_seen_and_silent()) {
          outcome = Err::AppFailure;
          error_message_ = "peers finished but local nodes are still blocked";
          aborted = true;
          break;
        }
        if (wall_elapsed_ms(wall_start) > kBridgedWatchdogMs) {
          outcome = Err::AppFailure;
          error_message_ = "bridged run watchdog expired";
          aborted = true;
          break;
        }
        continue;
      }

      if (++idle_rounds > 8) {
        outcome = Err::AppFailure;
        error_message_ = "deadlock: all nodes blocked with no pending events";
        aborted = true;
        break;
      }
    }

    for (auto& ns : nodes_)
      if (ns->fiber) ns->fiber->shutdown();
    for (auto& ns : nodes_) {
      if (ns->fiber && ns->fiber->error()) {
        aborted = true;
        if (outcome.ok()) outcome = Err::AppFailure;
        try {
          std::rethrow_exception(ns->fiber->error());
        } catch (const std::exception& e) {
          if (error_message_.empty())
            error_message_ = "rank " + std::to_string(ns->cfg.rank) + ": " + e.what();
        } catch (...) {
          if (error_message_.empty()) error_message_ = "unknown application error";
        }
      }
    }

    if (!aborted) drain_residual();
    Cycles end = 0;
    for (auto& [id, dom] : domains_) end = std::max(end, dom->noc.now());
    tracer_.stats().end_cycles = end;
    teardown_links();
    return outcome;
  }

  const std::map<std::string, std::string>& results() const { return results_; }
  const std::string& error_message() const { return error_message_; }
  const SystemConfig& config() const { return cfg_; }

  Node* software_node(uint16_t rank) {
    for (auto& ns : nodes_)
      if (ns->cfg.rank == rank) return ns->node.get();
    return nullptr;
  }
  GascoreEngine* engine_of(uint16_t rank) {
    for (auto& ns : nodes_)
      if (ns->cfg.rank == rank) return &ns->engine;
    return nullptr;
  }
  NocDomain* noc_of(uint32_t domain_id) {
    auto it = domains_.find(domain_id);
    return it == domains_.end() ? nullptr : &it->second->noc;
  }

 private:
  friend class HwPort;

  struct DomainState {
    DomainState(uint32_t id_, NocDomain noc_, RoutingTable routes_)
        : id(id_), noc(std::move(noc_)), routes(std::move(routes_)) {}
    uint32_t id;
    NocDomain noc;
    RoutingTable routes;
  };

  struct NodeState {
    NodeState(const NodeConfig& c, Segment seg, Tracer* tracer)
        : cfg(c), segment(std::move(seg)), engine(c.rank, segment, tracer) {}
    NodeConfig cfg;
    Segment segment;
    GascoreEngine engine;
    std::unique_ptr<detail::Fiber> fiber;  // software
    std::unique_ptr<Node> node;            // software
    std::unique_ptr<CoreBehavior> behavior;  // hardware
    std::unique_ptr<HwPort> port;            // hardware
  };

  struct RxState {
    FrameDecoder dec;
    uint64_t frames_seen = 0, crc_seen = 0, skip_seen = 0;
  };

  struct LinkState {
    LinkConfig cfg;
    // bridged endpoint
    int fd = -1;
    int listen_fd = -1;
    std::string unix_path;
    bool fin_sent = false;
    bool fin_received = false;
    RxState rx;
    // in-process: a decoder per endpoint domain
    std::map<uint32_t, RxState> inproc_rx;
  };

  static constexpr std::array<uint8_t, 4> kFinPacket{0xFF, 'F', 'I', 'N'};

  bool hosts_domain(uint32_t id) const {
    return !bridged() || id == static_cast<uint32_t>(hosted_domain_);
  }

  static int64_t wall_elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }

  Status route_send(const ActiveMessage& msg, DomainState& from) {
    auto target = bridge_forward(from.routes, msg);
    if (!target.ok()) {
      tracer_.emit(from.noc.now(), TraceKind::Error, msg.src_node, msg.src_node, msg.dst_node,
                   msg.seq, "unroutable_node");
      return target.error();
    }
    if (target->local) return from.noc.inject(msg, from.noc.now());
    auto bytes = encode_packet(msg);
    if (!bytes.ok()) return bytes.error();
    tracer_.note_inject(msg.kind);
    tracer_.emit(from.noc.now(), TraceKind::Inject, msg.src_node, msg.src_node, msg.dst_node,
                 msg.seq, "link");
    return link_transmit(target->link_id, from.id, bytes.value());
  }

  Status link_transmit(uint32_t link_id, uint32_t from_domain, std::span<const uint8_t> packet) {
    auto it = links_.find(link_id);
    if (it == links_.end()) return Err::UnroutableNode;
    LinkState& link = *it->second;
    auto frame = frame_encode(packet);
    if (!frame.ok()) return frame.error();
    tracer_.note_frame_sent();

    if (!bridged()) {
      uint32_t peer = link.cfg.endpoints[0].domain == from_domain ? link.cfg.endpoints[1].domain
                                                                  : link.cfg.endpoints[0].domain;
      RxState& rx = link.inproc_rx[peer];
      auto packets = rx.dec.feed(frame.value());
      sync_link_stats(rx);
      for (auto& p : packets) handle_link_packet(peer, link, p);
      return {};
    }
    return send_all(link.fd, frame.value());
  }

  void handle_link_packet(uint32_t at_domain, LinkState& via, std::span<const uint8_t> packet) {
    if (packet.size() == kFinPacket.size() &&
        std::equal(kFinPacket.begin(), kFinPacket.end(), packet.begin())) {
      via.fin_received = true;
      return;
    }
    auto msg = decode_packet(packet);
    auto dit = domains_.find(at_domain);
    if (dit == domains_.end()) return;
    DomainState& dom = *dit->second;
    if (!msg.ok()) {
      tracer_.emit(dom.noc.now(), TraceKind::Error, -1, -1, -1, -1,
                   std::string("link_packet_invalid ") + err_name(msg.error()));
      return;
    }
    auto target = bridge_forward(dom.routes, msg.value());
    if (!target.ok()) {
      tracer_.emit(dom.noc.now(), TraceKind::Error, -1, msg->src_node, msg->dst_node, msg->seq,
                   "unroutable_node");
      return;
    }
    if (target->local) {
      Status s = dom.noc.inject_external(msg.value(), dom.noc.now());
      if (!s.ok())
        tracer_.emit(dom.noc.now(), TraceKind::Error, -1, msg->src_node, msg->dst_node, msg->seq,
                     "bridge_inject_failed");
    } else {
      link_transmit(target->link_id, dom.id, packet);
    }
  }

  void sync_link_stats(LinkState& link, const FrameDecoder& rx) {
    tracer_.note_frames(rx.frames_ok() - link.rx_frames_seen, rx.crc_errors() - link.rx_crc_seen,
                        rx.bytes_skipped() - link.rx_skip_seen);
    link.rx_frames_seen = rx.frames_ok();
    link.rx_crc_seen = rx.crc_errors();
    link.rx_skip_seen = rx.bytes_skipped();
  }

  // -- bridged-mode socket plumbing ----------------------------------------

  static Result<std::string> unix_path_of(const std::string& address) {
    if (address.rfind("unix:", 0) != 0 || address.size() <= 5) return Err::ConfigInvalid;
    return address.substr(5);
  }

  Status open_sockets() {
    // Phase 1: all listeners exist before anyone connects.
    for (auto& [id, link] : links_) {
      const auto& eps = link->cfg.endpoints;
      uint32_t lo = std::min(eps[0].domain, eps[1].domain);
      const LinkEndpoint& mine =
          eps[0].domain == static_cast<uint32_t>(hosted_domain_) ? eps[0] : eps[1];
      auto path = unix_path_of(mine.address);
      if (!path.ok()) return path.error();
      link->unix_path = path.value();
      if (mine.domain == lo) {
        ::unlink(link->unix_path.c_str());
        int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
        if (fd < 0) return Err::LinkError;
        sockaddr_un addr{};
        addr.sun_family = AF_UNIX;
        std::strncpy(addr.sun_path, link->unix_path.c_str(), sizeof(addr.sun_path) - 1);
        if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 ||
            ::listen(fd, 1) < 0) {
          ::close(fd);
          return Err::LinkError;
        }
        link->listen_fd = fd;
      }
    }
    // Phase 2: accept / connect, link id order.
    for (auto& [id, link] : links_) {
      if (link->listen_fd >= 0) {
        pollfd p{link->listen_fd, POLLIN, 0};
        if (::poll(&p, 1, kBridgedWatchdogMs) <= 0) return Err::LinkError;
        link->fd = ::accept(link->listen_fd, nullptr, nullptr);
        if (link->fd < 0) return Err::LinkError;
      } else {
        const auto deadline = std::chrono::steady_clock::now() +
                              std::chrono::milliseconds(kBridgedWatchdogMs);
        for (;;) {
          int fd = ::socket(AF_UNIX, SOCK_STREAM, 0);
          if (fd < 0) return Err::LinkError;
          sockaddr_un addr{};
          addr.sun_family = AF_UNIX;
          const auto& eps = link->cfg.endpoints;
          uint32_t lo = std::min(eps[0].domain, eps[1].domain);
          const LinkEndpoint& peer = eps[0].domain == lo ? eps[0] : eps[1];
          auto peer_path = unix_path_of(peer.address);
          if (!peer_path.ok()) {
            ::close(fd);
            return peer_path.error();
          }
          std::strncpy(addr.sun_path, peer_path->c_str(), sizeof(addr.sun_path) - 1);
          if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0) {
            link->fd = fd;
            break;
          }
          ::close(fd);
          if (std::chrono::steady_clock::now() > deadline) return Err::LinkError;
          std::this_thread::sleep_for(std::chrono::milliseconds(20));
        }
      }
      int flags = ::fcntl(link->fd, F_GETFL, 0);
      ::fcntl(link->fd, F_SETFL, flags | O_NONBLOCK);
    }
    return {};
  }

  static Status send_all(int fd, std::span<const uint8_t> bytes) {
    size_t off = 0;
    while (off < bytes.size()) {
      ssize_t n = ::send(fd, bytes.data() + off, bytes.size() - off, MSG_NOSIGNAL);
      if (n > 0) {
        off += static_cast<size_t>(n);
        continue;
      }
      if (n < 0 && (errno == EAGAIN || errno == EWOULDBLOCK)) {
        pollfd p{fd, POLLOUT, 0};
        if (::poll(&p, 1, kBridgedWatchdogMs) <= 0) return Err::LinkError;
        continue;
      }
      if (n < 0 && errno == EINTR) continue;
      return Err::LinkError;
    }
    return {};
  }

  /// Reads whatever is available on every link; returns true if any bytes came in.
  bool pump_links() {
    bool any = false;
    for (auto& [id, link] : links_) {
      if (link->fd < 0) continue;
      for (;;) {
        uint8_t buf[65536];
        ssize_t n = ::recv(link->fd, buf, sizeof(buf), 0);
        if (n > 0) {
          any = true;
          auto packets = link->rx.feed({buf, static_cast<size_t>(n)});
          sync_link_stats(*link, link->rx);
          for (auto& p : packets)
            handle_link_packet(static_cast<uint32_t>(hosted_domain_), p);
          continue;
        }
        if (n == 0) {  // peer closed: treat as FIN
          link->fin_received = true;
          ::close(link->fd);
          link->fd = -1;
        }
        break;
      }
    }
    return any;
  }

  void poll_links(int timeout_ms) {
    std::vector<pollfd> fds;
    for (auto& [id, link] : links_)
      if (link->fd >= 0) fds.push_back({link->fd, POLLIN, 0});
    if (fds.empty()) {
      std::this_thread::sleep_for(std::chrono::milliseconds(timeout_ms));
      return;
    }
    ::poll(fds.data(), fds.size(), timeout_ms);
    pump_links();
  }

  void send_fins() {
    for (auto& [id, link] : links_) {
      if (link->fin_sent || link->fd < 0) continue;
      auto frame = frame_encode(kFinPacket);
      if (frame.ok()) send_all(link->fd, frame.value());
      link->fin_sent = true;
    }
  }

  bool all_peer_fins() const {
    for (const auto& [id, link] : links_)
      if (!link->fin_received) return false;
    return true;
  }

  bool all_peer_fins_seen_and_silent() {
    if (links_.empty()) return true;
    for (const auto& [id, link] : links_)
      if (!link->fin_received) return false;
    // peers are gone; only already-received bytes could still unblock us
    return !pump_links();
  }

  void teardown_links() {
    for (auto& [id, link] : links_) {
      if (link->fd >= 0) ::close(link->fd);
      if (link->listen_fd >= 0) ::close(link->listen_fd);
      if (!link->unix_path.empty() && link->listen_fd >= 0) ::unlink(link->unix_path.c_str());
      link->fd = link->listen_fd = -1;
    }
  }

  /// After all apps finish, deliver what is still in flight so the stats show
  /// a drained network (bounded; leftovers only happen with ill-behaved apps).
  void drain_residual() {
    for (int i = 0; i < 10000; ++i) {
      std::optional<Cycles> next;
      for (auto& [id, dom] : domains_) {
        auto t = dom->noc.next_event_time();
        if (t && (!next || *t < *next)) next = t;
      }
      if (!next) return;
      for (auto& [id, dom] : domains_) dom->noc.advance(*next);
      for (auto& ns : nodes_)
        if (ns->behavior) ns->behavior->step(*ns->port);
    }
  }

  SystemConfig cfg_;
  Tracer& tracer_;
  int hosted_domain_;
  bool started_ = false;

  std::map<uint32_t, std::unique_ptr<DomainState>> domains_;
  std::vector<std::unique_ptr<NodeState>> nodes_;  // rank order
  std::map<uint32_t, std::unique_ptr<LinkState>> links_;
  std::map<std::string, std::string> results_;
  std::string error_message_;
};

inline Cycles HwPort::now() const {
  NocDomain* noc = sys_->noc_of(domain_id_);
  return noc ? noc->now() : 0;
}

inline Status HwPort::submit_words(std::span<const uint32_t> words) {
  auto cmd = decode_command(words);
  if (!cmd.ok()) return cmd.error();
  auto msg = engine_->submit_command(cmd.value(), now());
  if (!msg.ok()) return msg.error();
  auto dit = sys_->domains_.find(domain_id_);
  if (dit == sys_->domains_.end()) return Err::ConfigInvalid;
  return sys_->route_send(msg.value(), *dit->second);
}

inline Status HwPort::complete(const DeliveryRecord& rec, std::span<const uint32_t> reply_words) {
  std::optional<GasCommand> reply;
  if (!reply_words.empty()) {
    auto cmd = decode_command(reply_words);
    if (!cmd.ok()) return cmd.error();
    reply = std::move(cmd.value());
  }
  auto res = engine_->complete_delivery(rec, reply, now());
  if (!res.ok()) return res.error();
  if (res.value().has_value()) {
    auto dit = sys_->domains_.find(domain_id_);
    if (dit == sys_->domains_.end()) return Err::ConfigInvalid;
    return sys_->route_send(*res.value(), *dit->second);
  }
  return {};
}

}  // namespace gaslite

#endif  // GASLITE_SYSTEM_HPP
