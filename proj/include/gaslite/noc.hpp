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

#ifndef GASLITE_NOC_HPP
#define GASLITE_NOC_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <tuple>
#include <vector>

#include "gaslite/am_protocol.hpp"
#include "gaslite/result.hpp"
#include "gaslite/trace.hpp"

namespace gaslite {

enum class TopologyKind : uint8_t { Crossbar, Ring };

inline const char* topology_name(TopologyKind k) {
  return k == TopologyKind::Crossbar ? "crossbar" : "ring";
}

struct Topology {
  TopologyKind kind = TopologyKind::Crossbar;
  uint16_t node_count = 1;
  uint32_t router_latency = 4;
  uint32_t link_bytes_per_cycle = 4;

  Status validate() const {
    if (node_count < 1 || router_latency == 0 || link_bytes_per_cycle == 0)
      return Err::ConfigInvalid;
    return {};
  }
};

/// Destination sink: accepts a packet at a delivery time. Err::BounceFull
/// back-pressures (the packet is stalled and retried); any other error counts
/// as a consumed drop.
using DeliverFn = std::function<Status(const ActiveMessage&, Cycles)>;

struct DeliveredPacket {
  ActiveMessage msg;
  Cycles time = 0;
};

/// Deterministic discrete-event model of one chip domain's packet network.
///
/// Delivery latency is hops * router_latency + ceil(bytes / link_bytes_per
/// _cycle); loopback (src == dst) bypasses the network entirely and delivers
/// at the inject time. Events are processed in (time, src, dst, seq) order,
/// which is a total order because seq is unique per (src, dst) pair; equal-
/// time deliveries of one pair therefore drain in seq order, and scheduled
/// delivery times are clamped to be non-decreasing per pair so a small packet
/// can never overtake a large one on the same pair.
class NocDomain {
 public:
  explicit NocDomain(Topology topo, Tracer* tracer = nullptr)
      : topo_(topo), tracer_(tracer) {}

  const Topology& topology() const { return topo_; }
  Cycles now() const { return now_; }

  /// Registers a node (global rank) as an endpoint of this domain. Ring
  /// position follows ascending rank order.
  Status attach(uint16_t rank, DeliverFn sink) {
    if (sinks_.count(rank)) return Err::DuplicateRank;
    if (sinks_.size() >= topo_.node_count) return Err::ConfigInvalid;
    sinks_.emplace(rank, std::move(sink));
    return {};
  }

  bool has_node(uint16_t rank) const { return sinks_.count(rank) != 0; }

  /// Hop count between two attached nodes. Crossbar: one hop (zero for
  /// loopback). Ring: minimal circular distance; ties route clockwise
  /// (ascending rank order), which leaves the count unchanged.
  Result<uint32_t> route(uint16_t src, uint16_t dst) const {
    auto si = index_of(src);
    auto di = index_of(dst);
    if (!si || !di) return Err::UnknownNode;
    if (topo_.kind == TopologyKind::Crossbar) return src == dst ? 0u : 1u;
    const uint32_t n = static_cast<uint32_t>(sinks_.size());
    const uint32_t fwd = (*di + n - *si) % n;
    return std::min(fwd, n - fwd);
  }

  /// Schedules delivery of a packet injected by a local node.
  Status inject(const ActiveMessage& msg, Cycles now) {
    auto hops = route(msg.src_node, msg.dst_node);
    if (!hops.ok()) return hops.error();
    schedule(msg, now, hops.value(), "", /*count_inject=*/true);
    return {};
  }

  /// Entry point for packets arriving from an off-chip bridge: the source is
  /// foreign, the OCCC ingress counts as one router traversal. The packet was
  /// already counted as injected at its origin domain.
  Status inject_external(const ActiveMessage& msg, Cycles now) {
    if (!has_node(msg.dst_node)) return Err::UnknownNode;
    schedule(msg, now, 1, "bridge", /*count_inject=*/false);
    return {};
  }

  std::optional<Cycles> next_event_time() const {
    if (queue_.empty()) return std::nullopt;
    return queue_.top().time;
  }

  bool idle() const { return queue_.empty(); }

  /// Processes every event with time <= until, handing packets to their
  /// destination sinks. BounceFull stalls a packet (retry next cycle) and
  /// holds back later packets of the same (src, dst) pair to preserve FIFO.
  std::vector<DeliveredPacket> advance(Cycles until) {
    std::vector<DeliveredPacket> delivered;
    while (!queue_.empty() && queue_.top().time <= until) {
      Event ev = queue_.top();
      queue_.pop();
      now_ = std::max(now_, ev.time);
      const Pair pair{ev.src, ev.dst};

      auto blocked = blocked_head_.find(pair);
      if (blocked != blocked_head_.end() && ev.seq > blocked->second) {
        stall(std::move(ev), "fifo_hold");
        continue;
      }

      auto sink = sinks_.find(ev.dst);
      Status st = sink == sinks_.end() ? Status(Err::UnknownNode) : sink->second(ev.msg, ev.time);
      if (st.ok()) {
        if (blocked != blocked_head_.end() && blocked->second == ev.seq) blocked_head_.erase(blocked);
        if (tracer_) {
          tracer_->note_deliver(ev.msg.kind, ev.msg.payload.size());
          tracer_->emit(ev.time, TraceKind::Deliver, ev.dst, ev.src, ev.dst, ev.seq,
                        kind_name(ev.msg.kind));
        }
        delivered.push_back({std::move(ev.msg), ev.time});
      } else if (st.error() == Err::BounceFull) {
        if (blocked == blocked_head_.end()) blocked_head_.emplace(pair, ev.seq);
        stall(std::move(ev), "bounce_full");
      } else {
        // consumed drop (e.g. out-of-bounds Long); the engine traced it
        if (blocked != blocked_head_.end() && blocked->second == ev.seq) blocked_head_.erase(blocked);
      }
    }
    now_ = std::max(now_, until);
    return delivered;
  }

 private:
  using Pair = std::pair<uint16_t, uint16_t>;

  struct Event {
    Cycles time;
    uint16_t src;
    uint16_t dst;
    uint32_t seq;
    uint64_t order;
    ActiveMessage msg;
  };
  struct EventAfter {
    bool operator()(const Event& a, const Event& b) const {
      return std::tie(a.time, a.src, a.dst, a.seq, a.order) >
             std::tie(b.time, b.src, b.dst, b.seq, b.order);
    }
  };

  std::optional<uint32_t> index_of(uint16_t rank) const {
    auto it = sinks_.find(rank);
    if (it == sinks_.end()) return std::nullopt;
    return static_cast<uint32_t>(std::distance(sinks_.begin(), it));
  }

  void schedule(const ActiveMessage& msg, Cycles now, uint32_t hops, const char* note,
                bool count_inject) {
    Cycles at = now;
    if (msg.src_node != msg.dst_node) {
      const uint64_t bytes = encoded_size(msg);
      at = now + static_cast<Cycles>(hops) * topo_.router_latency +
           (bytes + topo_.link_bytes_per_cycle - 1) / topo_.link_bytes_per_cycle;
    }
    Cycles& floor = last_sched_[Pair{msg.src_node, msg.dst_node}];
    at = std::max(at, floor);
    floor = at;
    if (tracer_) {
      if (count_inject) tracer_->note_inject(msg.kind);
      tracer_->emit(now, TraceKind::Inject, msg.src_node, msg.src_node, msg.dst_node, msg.seq,
                    note[0] ? note : kind_name(msg.kind));
    }
    queue_.push(Event{at, msg.src_node, msg.dst_node, msg.seq, order_counter_++, msg});
  }

  void stall(Event ev, const char* why) {
    if (tracer_)
      tracer_->emit(ev.time, TraceKind::Stall, ev.dst, ev.src, ev.dst, ev.seq, why);
    ev.time += 1;
    ev.order = order_counter_++;
    queue_.push(std::move(ev));
  }

  Topology topo_;
  Tracer* tracer_;
  std::map<uint16_t, DeliverFn> sinks_;  // ordered: ring position by rank
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::map<Pair, Cycles> last_sched_;
  std::map<Pair, uint32_t> blocked_head_;
  Cycles now_ = 0;
  uint64_t order_counter_ = 0;
};

}  // namespace gaslite

#endif  // GASLITE_NOC_HPP
