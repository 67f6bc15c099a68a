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

#ifndef GASLITE_GASCORE_HPP
#define GASLITE_GASCORE_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gaslite/am_protocol.hpp"
#include "gaslite/result.hpp"
#include "gaslite/segment.hpp"
#include "gaslite/trace.hpp"

namespace gaslite {

/// The command a CPU or hardware core pushes into its GAScore FIFO to send
/// an Active Message. Requests name a destination node; replies name the
/// token of the request being answered.
///
/// FIFO word layout (little-endian u32 words, fixed 8-word header):
///   w0 = opcode | handler_id << 8 | arg_count << 16   (top byte zero)
///   w1 = dst_node (requests) or reply_token (replies)
///   w2,w3 = payload_len  (lo, hi)
///   w4,w5 = local_src_offset (lo, hi)
///   w6,w7 = dest_offset (lo, hi)
/// followed by arg_count argument words.
struct GasCommand {
  MsgKind opcode = MsgKind::ShortRequest;
  uint8_t handler_id = 0;
  uint16_t dst_node = 0;     // requests only
  uint32_t reply_token = 0;  // replies only
  std::vector<uint32_t> args;
  uint64_t payload_len = 0;
  uint64_t local_src_offset = 0;
  uint64_t dest_offset = 0;

  bool operator==(const GasCommand&) const = default;
};

constexpr size_t kCommandHeaderWords = 8;

/// Checks the kind-dependent command invariants (segment bounds are checked
/// against the live segment at submit time, not here).
inline Status validate_command(const GasCommand& cmd) {
  if (cmd.args.size() > kMaxArgs) return Err::TooManyArgs;
  switch (class_of(cmd.opcode)) {
    case AmClass::Short:
      if (cmd.payload_len != 0) return Err::ShortWithPayload;
      if (cmd.dest_offset != 0) return Err::ShortWithDestOffset;
      break;
    case AmClass::Medium:
      if (cmd.payload_len > kMaxMediumPayload) return Err::MediumTooLarge;
      if (cmd.dest_offset != 0) return Err::MediumWithDestOffset;
      break;
    case AmClass::Long:
      break;
  }
  return {};
}

inline Result<std::vector<uint32_t>> encode_command(const GasCommand& cmd) {
  if (!validate_command(cmd).ok()) return Err::InvalidCommand;
  std::vector<uint32_t> w(kCommandHeaderWords);
  w[0] = static_cast<uint32_t>(cmd.opcode) | (static_cast<uint32_t>(cmd.handler_id) << 8) |
         (static_cast<uint32_t>(cmd.args.size()) << 16);
  w[1] = is_reply(cmd.opcode) ? cmd.reply_token : cmd.dst_node;
  w[2] = static_cast<uint32_t>(cmd.payload_len);
  w[3] = static_cast<uint32_t>(cmd.payload_len >> 32);
  w[4] = static_cast<uint32_t>(cmd.local_src_offset);
  w[5] = static_cast<uint32_t>(cmd.local_src_offset >> 32);
  w[6] = static_cast<uint32_t>(cmd.dest_offset);
  w[7] = static_cast<uint32_t>(cmd.dest_offset >> 32);
  w.insert(w.end(), cmd.args.begin(), cmd.args.end());
  return w;
}

inline Result<GasCommand> decode_command(std::span<const uint32_t> words) {
  if (words.size() < kCommandHeaderWords) return Err::Truncated;
  auto kind = kind_from_code(static_cast<uint8_t>(words[0] & 0xFF));
  if (!kind.ok()) return Err::UnknownOpcode;
  if ((words[0] >> 24) != 0) return Err::InvalidCommand;

  GasCommand cmd;
  cmd.opcode = kind.value();
  cmd.handler_id = static_cast<uint8_t>((words[0] >> 8) & 0xFF);
  const size_t arg_count = (words[0] >> 16) & 0xFF;
  if (words.size() < kCommandHeaderWords + arg_count) return Err::Truncated;
  if (words.size() > kCommandHeaderWords + arg_count) return Err::TrailingBytes;

  if (is_reply(cmd.opcode)) {
    cmd.reply_token = words[1];
  } else {
    if (words[1] > 0xFFFF) return Err::InvalidCommand;
    cmd.dst_node = static_cast<uint16_t>(words[1]);
  }
  cmd.payload_len = static_cast<uint64_t>(words[2]) | (static_cast<uint64_t>(words[3]) << 32);
  cmd.local_src_offset = static_cast<uint64_t>(words[4]) | (static_cast<uint64_t>(words[5]) << 32);
  cmd.dest_offset = static_cast<uint64_t>(words[6]) | (static_cast<uint64_t>(words[7]) << 32);
  cmd.args.assign(words.begin() + kCommandHeaderWords, words.end());

  if (Status v = validate_command(cmd); !v.ok()) return v.error();
  return cmd;
}

/// Where an arriving payload was placed for the handler.
struct PayloadRef {
  enum class Where : uint8_t { None, Bounce, Segment };
  Where where = Where::None;
  uint32_t bounce_index = 0;  // Bounce
  uint64_t offset = 0;        // Segment
  uint64_t len = 0;

  bool operator==(const PayloadRef&) const = default;
};

/// The simulated form of "calls the local handler function": everything a
/// node (software runtime or hardware core) is given about one arrived AM.
struct DeliveryRecord {
  uint64_t record_id = 0;
  MsgKind kind = MsgKind::ShortRequest;
  uint16_t src_node = 0;
  uint8_t handler_id = 0;
  std::vector<uint32_t> args;
  PayloadRef payload;
  std::optional<uint32_t> reply_token;  // present iff kind is a request
  uint32_t seq = 0;
};

/// Per-node Remote-DMA engine. Commands come in through the FIFO encoding
/// above, AM packets go out to the network; arriving packets are written to
/// the segment (Long) or a bounce buffer (Medium) before a DeliveryRecord
/// becomes visible, and every request delivery carries a single-use reply
/// token.
class GascoreEngine {
 public:
  static constexpr size_t kNumBounce = 16;
  static constexpr size_t kBounceBytes = 4096;

  GascoreEngine(uint16_t node_id, Segment& segment, Tracer* tracer = nullptr)
      : node_(node_id), seg_(segment), tracer_(tracer) {
    for (uint32_t i = 0; i < kNumBounce; ++i) free_bounce_.push_back(i);
    bounce_.resize(kNumBounce);
  }

  GascoreEngine(const GascoreEngine&) = delete;
  GascoreEngine& operator=(const GascoreEngine&) = delete;

  uint16_t node_id() const { return node_; }
  Segment& segment() { return seg_; }
  const Segment& segment() const { return seg_; }

  /// Executes one command: DMA-reads the payload from the local segment,
  /// stamps the next per-destination seq and returns the AM to inject.
  /// Replies resolve their destination from the (consumed) token.
  Result<ActiveMessage> submit_command(const GasCommand& cmd, Cycles now) {
    if (!validate_command(cmd).ok()) return Err::InvalidCommand;

    uint16_t dst = cmd.dst_node;
    if (is_reply(cmd.opcode)) {
      auto it = tokens_.find(cmd.reply_token);
      if (it == tokens_.end()) return Err::BadToken;
      dst = it->second;
    }

    ActiveMessage msg;
    if (class_of(cmd.opcode) != AmClass::Short && cmd.payload_len > 0) {
      auto data = seg_.read(cmd.local_src_offset, cmd.payload_len);
      if (!data.ok()) {
        trace_error(now, "dma_read_oob", dst);
        return Err::OutOfBounds;
      }
      msg.payload = std::move(data.value());
    }

    // Commit point: consume the token and the seq slot.
    if (is_reply(cmd.opcode)) tokens_.erase(cmd.reply_token);
    msg.kind = cmd.opcode;
    msg.src_node = node_;
    msg.dst_node = dst;
    msg.handler_id = cmd.handler_id;
    msg.args = cmd.args;
    msg.dest_offset = cmd.dest_offset;
    msg.seq = next_seq_[dst]++;
    return msg;
  }

  /// Accepts an arriving packet. Long payloads are written to the segment
  /// *before* the DeliveryRecord is queued; Medium payloads land in a bounce
  /// buffer (BounceFull back-pressures the network); out-of-bounds Long
  /// packets are dropped with a trace event, never delivered.
  Status on_packet(const ActiveMessage& msg, Cycles now) {
    if (msg.dst_node != node_) return Err::UnknownNode;

    DeliveryRecord rec;
    switch (class_of(msg.kind)) {
      case AmClass::Short:
        break;
      case AmClass::Medium: {
        if (free_bounce_.empty()) return Err::BounceFull;
        uint32_t idx = free_bounce_.front();
        free_bounce_.pop_front();
        bounce_[idx].assign(msg.payload.begin(), msg.payload.end());
        rec.payload = {PayloadRef::Where::Bounce, idx, 0, msg.payload.size()};
        break;
      }
      case AmClass::Long: {
        if (!seg_.write(msg.dest_offset, msg.payload).ok()) {
          trace_error(now, "long_write_oob seq=" + std::to_string(msg.seq), msg.src_node);
          if (tracer_) tracer_->note_drop();
          return Err::OutOfBounds;
        }
        rec.payload = {PayloadRef::Where::Segment, 0, msg.dest_offset, msg.payload.size()};
        break;
      }
    }

    rec.record_id = ++record_counter_;
    rec.kind = msg.kind;
    rec.src_node = msg.src_node;
    rec.handler_id = msg.handler_id;
    rec.args = msg.args;
    rec.seq = msg.seq;
    if (is_request(msg.kind)) {
      uint32_t token = ++token_counter_;
      tokens_.emplace(token, msg.src_node);
      rec.reply_token = token;
    }
    outstanding_.insert(rec.record_id);
    deliveries_.push_back(std::move(rec));
    return {};
  }

  std::optional<DeliveryRecord> pop_delivery() {
    if (deliveries_.empty()) return std::nullopt;
    DeliveryRecord rec = std::move(deliveries_.front());
    deliveries_.pop_front();
    return rec;
  }

  size_t pending_deliveries() const { return deliveries_.size(); }

  /// Retires a record: frees its bounce buffer and consumes its token. With
  /// `reply`, the reply command is emitted through submit_command using the
  /// record's token (its own reply_token field is ignored); at most one reply
  /// per request is possible because the token is single-use.
  Result<std::optional<ActiveMessage>> complete_delivery(const DeliveryRecord& rec,
                                                         const std::optional<GasCommand>& reply,
                                                         Cycles now) {
    if (outstanding_.find(rec.record_id) == outstanding_.end()) return Err::DoubleComplete;

    GasCommand reply_cmd;
    if (reply.has_value()) {
      if (!rec.reply_token.has_value()) return Err::ReplyToReply;
      if (!is_reply(reply->opcode)) return Err::InvalidCommand;
      if (!validate_command(*reply).ok()) return Err::InvalidCommand;
      if (tokens_.find(*rec.reply_token) == tokens_.end()) return Err::BadToken;
      if (class_of(reply->opcode) != AmClass::Short && reply->payload_len > 0 &&
          !seg_.view(reply->local_src_offset, reply->payload_len).ok()) {
        return Err::OutOfBounds;
      }
      reply_cmd = *reply;
      reply_cmd.reply_token = *rec.reply_token;
    }

    // Commit.
    outstanding_.erase(rec.record_id);
    if (rec.payload.where == PayloadRef::Where::Bounce) free_bounce_.push_back(rec.payload.bounce_index);
    if (!reply.has_value()) {
      if (rec.reply_token.has_value()) tokens_.erase(*rec.reply_token);
      return std::optional<ActiveMessage>(std::nullopt);
    }

    auto msg = submit_command(reply_cmd, now);
    if (!msg.ok()) return msg.error();  // unreachable: validated above
    return std::optional<ActiveMessage>(std::move(msg.value()));
  }

  /// View of an undelivered record's payload (bounce buffer or segment).
  std::span<const uint8_t> payload_view(const DeliveryRecord& rec) const {
    switch (rec.payload.where) {
      case PayloadRef::Where::None:
        return {};
      case PayloadRef::Where::Bounce:
        return std::span<const uint8_t>(bounce_[rec.payload.bounce_index]).first(rec.payload.len);
      case PayloadRef::Where::Segment: {
        auto v = seg_.view(rec.payload.offset, rec.payload.len);
        return v.ok() ? v.value() : std::span<const uint8_t>{};
      }
    }
    return {};
  }

  size_t free_bounce_count() const { return free_bounce_.size(); }
  size_t held_bounce_count() const { return kNumBounce - free_bounce_.size(); }
  size_t outstanding_tokens() const { return tokens_.size(); }
  size_t outstanding_records() const { return outstanding_.size(); }
  uint32_t next_seq(uint16_t dst) const {
    auto it = next_seq_.find(dst);
    return it == next_seq_.end() ? 0 : it->second;
  }

 private:
  void trace_error(Cycles now, const std::string& detail, uint16_t peer) {
    if (tracer_) tracer_->emit(now, TraceKind::Error, node_, peer, node_, -1, detail);
  }

  uint16_t node_;
  Segment& seg_;
  Tracer* tracer_;

  std::vector<std::vector<uint8_t>> bounce_;
  std::deque<uint32_t> free_bounce_;
  std::unordered_map<uint16_t, uint32_t> next_seq_;
  std::unordered_map<uint32_t, uint16_t> tokens_;  // token -> requesting node
  std::unordered_set<uint64_t> outstanding_;       // incomplete record ids
  std::deque<DeliveryRecord> deliveries_;
  uint32_t token_counter_ = 0;
  uint64_t record_counter_ = 0;
};

}  // namespace gaslite

#endif  // GASLITE_GASCORE_HPP
