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

#ifndef GASLITE_GASNET_HPP
#define GASLITE_GASNET_HPP

#include <array>
#include <cstring>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "gaslite/config.hpp"
#include "gaslite/gascore.hpp"
#include "gaslite/result.hpp"

namespace gaslite {

class Node;

/// Read-only view of one delivery, alive only for the handler invocation.
/// Replying goes through Node::am_reply and is possible at most once.
class HandlerContext {
 public:
  MsgKind kind() const { return rec_.kind; }
  bool is_request() const { return rec_.reply_token.has_value(); }
  uint16_t src() const { return rec_.src_node; }
  uint8_t handler_id() const { return rec_.handler_id; }
  uint32_t seq() const { return rec_.seq; }
  std::span<const uint32_t> args() const { return rec_.args; }

  /// Medium: the bounce buffer; Long: the written segment region; Short: empty.
  std::span<const uint8_t> payload() const;

  /// Long deliveries: where the payload landed in the segment.
  std::optional<std::pair<uint64_t, uint64_t>> segment_span() const {
    if (rec_.payload.where != PayloadRef::Where::Segment) return std::nullopt;
    return std::make_pair(rec_.payload.offset, rec_.payload.len);
  }

 private:
  friend class Node;
  HandlerContext(Node& node, const DeliveryRecord& rec) : node_(node), rec_(rec) {}

  Node& node_;
  const DeliveryRecord& rec_;
  std::optional<GasCommand> staged_reply_;
  bool replied_ = false;
  bool deferred_ = false;
};

using HandlerFn = std::function<void(HandlerContext&)>;

/// Completion handle for put/get. Completes exactly once; an out-of-bounds
/// target surfaces as an error carried by the handle.
struct SyncHandle {
  uint32_t op_id = 0;
};

/// Wiring a Node needs from its host system.
struct NodeEnv {
  std::function<Status(const ActiveMessage&)> send;
  std::function<void()> yield;
  std::function<Cycles()> now;
  std::function<void(const std::string&, const std::string&)> report;
  const SystemConfig* config = nullptr;
  Tracer* tracer = nullptr;
};

/// The software-node runtime: the common API application code calls.
/// One Node per rank; every call and every handler runs on that node's own
/// execution context.
///
/// Reserved handlers: 0 no-op, 1 put-ack, 2 get-request, 3 barrier-control.
/// User handlers register ids 4..255. Handlers may reply (once) but may not
/// issue requests or wait — those raise RequestInHandler/WaitInHandler.
class Node {
 public:
  static constexpr uint8_t kFirstUserHandler = 4;

  Node(uint16_t rank, GascoreEngine& engine, NodeEnv env)
      : rank_(rank),
        engine_(engine),
        env_(std::move(env)),
        rng_(env_.config->seed ^ (0x9E3779B97F4A7C15ull * (rank + 1))) {
    staging_cap_ = std::min<uint64_t>(engine_.segment().size() / 2, 64 * 1024);
    staging_off_ = engine_.segment().size() - staging_cap_;
  }

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  uint16_t rank() const { return rank_; }
  uint16_t size() const { return env_.config->size(); }
  Segment& segment() { return engine_.segment(); }
  GascoreEngine& engine() { return engine_; }
  Cycles now() const { return env_.now(); }
  std::mt19937_64& rng() { return rng_; }
  const SystemConfig& config() const { return *env_.config; }

  /// Bytes at the top of the segment used to stage outbound payloads into
  /// the DMA path; applications should lay their data out below this.
  uint64_t staging_capacity() const { return staging_cap_; }
  uint64_t app_region_size() const { return staging_off_; }

  uint64_t segment_size_of(uint16_t rank) const {
    const NodeConfig* n = env_.config->node(rank);
    return n ? n->segment_size : 0;
  }

  void report(const std::string& key, const std::string& value) {
    if (env_.report) env_.report(key, value);
  }

  // -- handler registration ------------------------------------------------

  Status register_handler(uint8_t id, HandlerFn fn) {
    if (id < kFirstUserHandler) return Err::ReservedId;
    if (handlers_[id]) return Err::DuplicateId;
    handlers_[id] = std::move(fn);
    return {};
  }

  // -- Active Message requests & replies ------------------------------------

  Status am_request(AmClass cls, uint16_t dst, uint8_t handler,
                    std::span<const uint32_t> args, std::span<const uint8_t> payload = {},
                    uint64_t dest_offset = 0) {
    if (in_handler_) return Err::RequestInHandler;
    if (dst >= size()) return Err::UnknownNode;
    GasCommand cmd;
    if (Status s = build_command(cmd, cls, /*reply=*/false, handler, args, payload, dest_offset);
        !s.ok())
      return s;
    cmd.dst_node = dst;
    return emit(cmd);
  }

  Status am_reply(HandlerContext& ctx, AmClass cls, uint8_t handler,
                  std::span<const uint32_t> args, std::span<const uint8_t> payload = {},
                  uint64_t dest_offset = 0) {
    if (!ctx.rec_.reply_token.has_value()) return Err::NotARequest;
    if (ctx.replied_) return Err::AlreadyReplied;
    GasCommand cmd;
    if (Status s = build_command(cmd, cls, /*reply=*/true, handler, args, payload, dest_offset);
        !s.ok())
      return s;
    ctx.staged_reply_ = std::move(cmd);
    ctx.replied_ = true;
    return {};
  }

  // -- one-sided put/get above the Core API ---------------------------------

  Result<SyncHandle> put(uint16_t dst, uint64_t dest_offset, std::span<const uint8_t> data) {
    if (in_handler_) return Err::RequestInHandler;
    if (dst >= size()) return Err::UnknownNode;
    if (data.size() > staging_cap_) return Err::InvalidArgs;
    SyncHandle h = new_op();
    if (data.empty()) {
      op_complete(h.op_id, Err::None);
      return h;
    }
    const uint64_t remote = segment_size_of(dst);
    if (dest_offset > remote || data.size() > remote - dest_offset) {
      nack(h, Err::OutOfBoundsRemote, "put_oob dst=" + std::to_string(dst));
      return h;
    }
    std::array<uint32_t, 1> args{h.op_id};
    if (Status s = am_request(AmClass::Long, dst, kHandlerPutAck, args, data, dest_offset);
        !s.ok()) {
      ops_.erase(h.op_id);
      return s.error();
    }
    return h;
  }

  Result<SyncHandle> get(uint16_t dst, uint64_t src_offset, uint64_t len, uint64_t local_offset) {
    if (in_handler_) return Err::RequestInHandler;
    if (dst >= size()) return Err::UnknownNode;
    SyncHandle h = new_op();
    if (len == 0) {
      op_complete(h.op_id, Err::None);
      return h;
    }
    const uint64_t remote = segment_size_of(dst);
    if (src_offset > remote || len > remote - src_offset) {
      nack(h, Err::OutOfBoundsRemote, "get_oob dst=" + std::to_string(dst));
      return h;
    }
    if (local_offset > segment().size() || len > segment().size() - local_offset) {
      nack(h, Err::OutOfBoundsLocal, "get_local_oob");
      return h;
    }
    std::array<uint32_t, 7> args{
        static_cast<uint32_t>(src_offset),  static_cast<uint32_t>(src_offset >> 32),
        static_cast<uint32_t>(len),         static_cast<uint32_t>(len >> 32),
        static_cast<uint32_t>(local_offset), static_cast<uint32_t>(local_offset >> 32),
        h.op_id};
    if (Status s = am_request(AmClass::Short, dst, kHandlerGet, args); !s.ok()) {
      ops_.erase(h.op_id);
      return s.error();
    }
    return h;
  }

  Status wait(SyncHandle h) {
    if (in_handler_) return Err::WaitInHandler;
    auto it = ops_.find(h.op_id);
    if (it == ops_.end()) return Err::InvalidArgs;
    while (!ops_[h.op_id].done) {
      poll();
      if (!ops_[h.op_id].done) env_.yield();
    }
    Err e = ops_[h.op_id].err;
    ops_.erase(h.op_id);
    return e;
  }

  // -- split-phase barrier ---------------------------------------------------

  Status barrier_notify(uint32_t value, bool anonymous) {
    if (in_handler_) return Err::RequestInHandler;
    if (notify_outstanding_) return Err::InvalidArgs;
    notify_outstanding_ = true;
    trace_stat("barrier_notify epoch=" + std::to_string(epoch_));
    std::array<uint32_t, 3> args{epoch_, anonymous ? 1u : 0u, value};
    return am_request(AmClass::Short, 0, kHandlerBarrier, args);
  }

  Status barrier_wait() {
    if (in_handler_) return Err::WaitInHandler;
    if (!notify_outstanding_) return Err::InvalidArgs;
    if (Status s = block_until([&] { return released_epoch_ > epoch_; }); !s.ok()) return s;
    trace_stat("barrier_wait_return epoch=" + std::to_string(epoch_));
    notify_outstanding_ = false;
    epoch_++;
    return release_result_;
  }

  /// notify + wait. Non-anonymous notifies with unequal values make every
  /// node's wait return Mismatch for that epoch.
  Status barrier(uint32_t value = 0, bool anonymous = true) {
    if (Status s = barrier_notify(value, anonymous); !s.ok()) return s;
    return barrier_wait();
  }

  // -- progress -----------------------------------------------------------

  /// Drains pending deliveries, running handlers to completion in order.
  void poll() {
    while (auto rec = engine_.pop_delivery()) dispatch(*rec);
  }

  Status block_until(const std::function<bool()>& pred) {
    if (in_handler_) return Err::WaitInHandler;
    for (;;) {
      poll();
      if (pred()) return {};
      env_.yield();
    }
  }

 private:
  friend class HandlerContext;

  static constexpr uint8_t kHandlerNoop = 0;
  static constexpr uint8_t kHandlerPutAck = 1;
  static constexpr uint8_t kHandlerGet = 2;
  static constexpr uint8_t kHandlerBarrier = 3;

  struct OpState {
    bool done = false;
    Err err = Err::None;
  };

  struct HeldNotify {
    DeliveryRecord rec;
    bool anonymous;
    uint32_t value;
  };

  struct InHandlerGuard {
    explicit InHandlerGuard(bool& flag) : flag_(flag) { flag_ = true; }
    ~InHandlerGuard() { flag_ = false; }
    bool& flag_;
  };

  Status build_command(GasCommand& cmd, AmClass cls, bool reply, uint8_t handler,
                       std::span<const uint32_t> args, std::span<const uint8_t> payload,
                       uint64_t dest_offset) {
    if (args.size() > kMaxArgs) return Err::InvalidArgs;
    if (cls == AmClass::Short && (!payload.empty() || dest_offset != 0)) return Err::InvalidArgs;
    if (cls == AmClass::Medium && (payload.size() > kMaxMediumPayload || dest_offset != 0))
      return Err::InvalidArgs;
    cmd.opcode = kind_for(cls, reply);
    cmd.handler_id = handler;
    cmd.args.assign(args.begin(), args.end());
    cmd.dest_offset = dest_offset;
    cmd.payload_len = payload.size();
    if (cls != AmClass::Short && !payload.empty()) {
      if (payload.size() > staging_cap_) return Err::InvalidArgs;
      segment().write(staging_off_, payload);  // stage into the DMA path
      cmd.local_src_offset = staging_off_;
    }
    return {};
  }

  Status emit(const GasCommand& cmd) {
    auto msg = engine_.submit_command(cmd, now());
    if (!msg.ok()) return msg.error();
    return env_.send(msg.value());
  }

  SyncHandle new_op() {
    SyncHandle h{++op_counter_};
    ops_.emplace(h.op_id, OpState{});
    return h;
  }

  void op_complete(uint32_t op_id, Err err) {
    auto it = ops_.find(op_id);
    if (it == ops_.end()) return;
    it->second.done = true;
    it->second.err = err;
  }

  void nack(SyncHandle h, Err err, const std::string& detail) {
    if (env_.tracer)
      env_.tracer->emit(now(), TraceKind::Error, rank_, rank_, -1, -1, detail);
    op_complete(h.op_id, err);
  }

  void trace_stat(const std::string& detail) {
    if (env_.tracer)
      env_.tracer->emit(now(), TraceKind::Stat, rank_, rank_, -1, -1, detail);
  }

  void dispatch(const DeliveryRecord& rec) {
    HandlerContext ctx(*this, rec);
    if (env_.tracer)
      env_.tracer->emit(now(), TraceKind::HandlerStart, rank_, rec.src_node, rank_, rec.seq,
                        "handler=" + std::to_string(rec.handler_id));
    {
      InHandlerGuard guard(in_handler_);
      switch (rec.handler_id) {
        case kHandlerNoop:
          break;
        case kHandlerPutAck:
          on_put_ack(ctx);
          break;
        case kHandlerGet:
          on_get(ctx);
          break;
        case kHandlerBarrier:
          on_barrier(ctx);
          break;
        default:
          if (handlers_[rec.handler_id]) {
            handlers_[rec.handler_id](ctx);
          } else {
            if (env_.tracer)
              env_.tracer->emit(now(), TraceKind::Error, rank_, rec.src_node, rank_, rec.seq,
                                "unbound_handler id=" + std::to_string(rec.handler_id));
          }
          break;
      }
    }
    if (env_.tracer)
      env_.tracer->emit(now(), TraceKind::HandlerEnd, rank_, rec.src_node, rank_, rec.seq,
                        "handler=" + std::to_string(rec.handler_id));
    if (!ctx.deferred_) complete(rec, ctx.staged_reply_);
  }

  void complete(const DeliveryRecord& rec, const std::optional<GasCommand>& reply) {
    auto res = engine_.complete_delivery(rec, reply, now());
    if (!res.ok()) {
      if (env_.tracer)
        env_.tracer->emit(now(), TraceKind::Error, rank_, rec.src_node, rank_, rec.seq,
                          std::string("complete_failed ") + err_name(res.error()));
      return;
    }
    if (res.value().has_value()) {
      Status s = env_.send(*res.value());
      if (!s.ok() && env_.tracer)
        env_.tracer->emit(now(), TraceKind::Error, rank_, rank_, -1, -1,
                          std::string("reply_send_failed ") + err_name(s.error()));
    }
  }

  // reserved handler 1: remote side of put acks, local side completes the op
  void on_put_ack(HandlerContext& ctx) {
    if (ctx.is_request()) {
      std::array<uint32_t, 1> args{ctx.args().empty() ? 0 : ctx.args()[0]};
      am_reply(ctx, AmClass::Short, kHandlerPutAck, args);
    } else if (!ctx.args().empty()) {
      op_complete(ctx.args()[0], Err::None);
    }
  }

  // reserved handler 2: remote side serves the data with a Long reply read
  // straight out of its segment; local side completes the op
  void on_get(HandlerContext& ctx) {
    if (ctx.is_request()) {
      auto a = ctx.args();
      if (a.size() != 7) return;
      const uint64_t src_off = a[0] | (static_cast<uint64_t>(a[1]) << 32);
      const uint64_t len = a[2] | (static_cast<uint64_t>(a[3]) << 32);
      const uint64_t local_off = a[4] | (static_cast<uint64_t>(a[5]) << 32);
      GasCommand reply;
      reply.opcode = MsgKind::LongReply;
      reply.handler_id = kHandlerGet;
      reply.args = {a[6]};
      reply.local_src_offset = src_off;
      reply.payload_len = len;
      reply.dest_offset = local_off;
      ctx.staged_reply_ = std::move(reply);
      ctx.replied_ = true;
    } else if (!ctx.args().empty()) {
      op_complete(ctx.args()[0], Err::None);
    }
  }

  // reserved handler 3: rank 0 collects one notify per software node, then
  // releases everyone by replying to the held requests
  void on_barrier(HandlerContext& ctx) {
    if (ctx.is_request()) {
      held_notifies_.push_back(HeldNotify{ctx.rec_, ctx.args()[1] != 0, ctx.args()[2]});
      ctx.deferred_ = true;
      if (held_notifies_.size() == env_.config->software_node_count()) release_barrier();
    } else {
      release_result_ = ctx.args()[1] != 0 ? Status(Err::Mismatch) : Status();
      released_epoch_ = ctx.args()[0] + 1;
    }
  }

  void release_barrier() {
    bool mismatch = false;
    std::optional<uint32_t> named;
    for (const auto& n : held_notifies_) {
      if (n.anonymous) continue;
      if (named.has_value() && *named != n.value) mismatch = true;
      named = n.value;
    }
    trace_stat("barrier_release epoch=" + std::to_string(coordinator_epoch_) +
               (mismatch ? " mismatch" : " ok"));
    for (const auto& n : held_notifies_) {
      std::array<uint32_t, 2> args{coordinator_epoch_, mismatch ? 1u : 0u};
      GasCommand reply;
      reply.opcode = MsgKind::ShortReply;
      reply.handler_id = kHandlerBarrier;
      reply.args.assign(args.begin(), args.end());
      complete(n.rec, reply);
    }
    held_notifies_.clear();
    coordinator_epoch_++;
  }

  uint16_t rank_;
  GascoreEngine& engine_;
  NodeEnv env_;
  std::mt19937_64 rng_;

  uint64_t staging_cap_ = 0;
  uint64_t staging_off_ = 0;
  std::array<HandlerFn, 256> handlers_{};
  bool in_handler_ = false;

  std::unordered_map<uint32_t, OpState> ops_;
  uint32_t op_counter_ = 0;

  // barrier state
  uint32_t epoch_ = 0;                 // next epoch this node completes
  bool notify_outstanding_ = false;
  uint32_t released_epoch_ = 0;        // one past the last released epoch
  Status release_result_;
  std::vector<HeldNotify> held_notifies_;  // coordinator (rank 0) only
  uint32_t coordinator_epoch_ = 0;
};

inline std::span<const uint8_t> HandlerContext::payload() const {
  return node_.engine().payload_view(rec_);
}

}  // namespace gaslite

#endif  // GASLITE_GASNET_HPP
