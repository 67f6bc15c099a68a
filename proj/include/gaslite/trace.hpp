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

#ifndef GASLITE_TRACE_HPP
#define GASLITE_TRACE_HPP

#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "gaslite/am_protocol.hpp"

namespace gaslite {

using Cycles = uint64_t;

enum class TraceKind : uint8_t {
  Inject,
  Deliver,
  Stall,
  HandlerStart,
  HandlerEnd,
  Error,
  Stat,
};

inline const char* trace_kind_name(TraceKind k) {
  switch (k) {
    case TraceKind::Inject: return "inject";
    case TraceKind::Deliver: return "deliver";
    case TraceKind::Stall: return "stall";
    case TraceKind::HandlerStart: return "handler_start";
    case TraceKind::HandlerEnd: return "handler_end";
    case TraceKind::Error: return "error";
    case TraceKind::Stat: return "stat";
  }
  return "?";
}

/// Counters accumulated over one run and printed in the stats summary.
struct RunStats {
  std::array<uint64_t, 6> injected_by_kind{};   // indexed by kind_index()
  std::array<uint64_t, 6> delivered_by_kind{};
  uint64_t payload_bytes_moved = 0;
  uint64_t stalls = 0;
  uint64_t errors = 0;
  uint64_t drops = 0;
  uint64_t frames_sent = 0;
  uint64_t frames_ok = 0;
  uint64_t frames_crc_error = 0;
  uint64_t resync_bytes_skipped = 0;
  Cycles end_cycles = 0;

  static size_t kind_index(MsgKind k) {
    switch (k) {
      case MsgKind::ShortRequest: return 0;
      case MsgKind::MediumRequest: return 1;
      case MsgKind::LongRequest: return 2;
      case MsgKind::ShortReply: return 3;
      case MsgKind::MediumReply: return 4;
      case MsgKind::LongReply: return 5;
    }
    return 0;
  }

  uint64_t total_injected() const {
    uint64_t n = 0;
    for (uint64_t v : injected_by_kind) n += v;
    return n;
  }
  uint64_t total_delivered() const {
    uint64_t n = 0;
    for (uint64_t v : delivered_by_kind) n += v;
    return n;
  }
};

/// Line-delimited trace sink. One object per line, fixed key order:
///   {"time":..,"kind":"..","node":..,"src":..,"dst":..,"seq":..,"detail":".."}
/// node/src/dst are -1 where not meaningful. Writes are serialized by the
/// single-context execution model; the tracer itself takes no locks.
class Tracer {
 public:
  Tracer() = default;

  Status open_file(const std::string& path) {
    out_.open(path, std::ios::binary | std::ios::trunc);
    if (!out_.is_open()) return Err::ParseError;
    enabled_ = true;
    return {};
  }

  void close() {
    if (enabled_) out_.close();
    enabled_ = false;
  }

  bool enabled() const { return enabled_; }
  RunStats& stats() { return stats_; }
  const RunStats& stats() const { return stats_; }

  void emit(Cycles time, TraceKind kind, int node, int src, int dst, int64_t seq,
            std::string_view detail) {
    count(kind);
    if (!enabled_) return;
    char buf[256];
    int n = std::snprintf(buf, sizeof(buf),
                          "{\"time\":%llu,\"kind\":\"%s\",\"node\":%d,\"src\":%d,"
                          "\"dst\":%d,\"seq\":%lld,\"detail\":\"",
                          static_cast<unsigned long long>(time), trace_kind_name(kind),
                          node, src, dst, static_cast<long long>(seq));
    out_.write(buf, n);
    write_escaped(detail);
    out_.write("\"}\n", 3);
  }

  void note_inject(MsgKind k) { stats_.injected_by_kind[RunStats::kind_index(k)]++; }
  void note_deliver(MsgKind k, size_t payload_bytes) {
    stats_.delivered_by_kind[RunStats::kind_index(k)]++;
    stats_.payload_bytes_moved += payload_bytes;
  }
  void note_drop() { stats_.drops++; }
  void note_frame_sent() { stats_.frames_sent++; }
  void note_frames(uint64_t ok, uint64_t crc_errors, uint64_t skipped) {
    stats_.frames_ok += ok;
    stats_.frames_crc_error += crc_errors;
    stats_.resync_bytes_skipped += skipped;
  }

 private:
  void count(TraceKind kind) {
    if (kind == TraceKind::Stall) stats_.stalls++;
    if (kind == TraceKind::Error) stats_.errors++;
  }

  void write_escaped(std::string_view s) {
    for (char c : s) {
      if (c == '"' || c == '\\') {
        out_.put('\\');
        out_.put(c);
      } else if (static_cast<unsigned char>(c) < 0x20) {
        char esc[8];
        int n = std::snprintf(esc, sizeof(esc), "\\u%04x", c);
        out_.write(esc, n);
      } else {
        out_.put(c);
      }
    }
  }

  std::ofstream out_;
  bool enabled_ = false;
  RunStats stats_;
};

}  // namespace gaslite

#endif  // GASLITE_TRACE_HPP
