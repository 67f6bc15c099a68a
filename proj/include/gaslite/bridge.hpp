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

#ifndef GASLITE_BRIDGE_HPP
#define GASLITE_BRIDGE_HPP

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "gaslite/am_protocol.hpp"
#include "gaslite/result.hpp"

namespace gaslite {

// ---------------------------------------------------------------------------
// CRC-32 (IEEE 802.3 polynomial, reflected, init/xorout 0xFFFFFFFF)
// ---------------------------------------------------------------------------

namespace detail {

inline const std::array<uint32_t, 256>& crc32_table() {
  static const std::array<uint32_t, 256> table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  return table;
}

}  // namespace detail

inline uint32_t crc32_ieee(std::span<const uint8_t> bytes) {
  const auto& table = detail::crc32_table();
  uint32_t crc = 0xFFFFFFFFu;
  for (uint8_t b : bytes) crc = table[(crc ^ b) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

// ---------------------------------------------------------------------------
// Frame codec: the inter-process wire contract (bit-exact).
//   "GAS1" | length u32 LE | packet bytes | CRC-32 of the packet, u32 LE
// ---------------------------------------------------------------------------

constexpr std::array<uint8_t, 4> kFrameMagic{0x47, 0x41, 0x53, 0x31};  // "GAS1"
constexpr size_t kFrameOverhead = 12;
constexpr size_t kMaxFramePacket = 1u << 20;  // length plausibility bound for resync

inline Result<std::vector<uint8_t>> frame_encode(std::span<const uint8_t> packet) {
  if (packet.empty()) return Err::EmptyPacket;
  std::vector<uint8_t> out;
  out.reserve(kFrameOverhead + packet.size());
  out.insert(out.end(), kFrameMagic.begin(), kFrameMagic.end());
  detail::put_u32(out, static_cast<uint32_t>(packet.size()));
  out.insert(out.end(), packet.begin(), packet.end());
  detail::put_u32(out, crc32_ieee(packet));
  return out;
}

struct FrameDecodeResult {
  std::vector<std::vector<uint8_t>> packets;
  size_t consumed = 0;  // bytes to drop from the front of the buffer
  uint64_t crc_errors = 0;
  uint64_t bytes_skipped = 0;  // resync skips (bad magic / implausible length)
};

/// Extracts every complete, CRC-valid frame from the front of `buf`.
/// The unconsumed tail (buf.size() - consumed bytes) must be fed again once
/// more bytes arrive; any split point is handled. Corruption is contained by
/// rescanning for the next magic rather than trusting a damaged length field,
/// so one flipped bit loses at most the frame it landed in.
inline FrameDecodeResult frame_decode(std::span<const uint8_t> buf) {
  FrameDecodeResult res;
  size_t pos = 0;
  while (true) {
    const size_t remaining = buf.size() - pos;
    if (remaining < kFrameMagic.size()) break;

    if (!std::equal(kFrameMagic.begin(), kFrameMagic.end(), buf.begin() + static_cast<ptrdiff_t>(pos))) {
      auto next = std::search(buf.begin() + static_cast<ptrdiff_t>(pos) + 1, buf.end(),
                              kFrameMagic.begin(), kFrameMagic.end());
      size_t next_pos = static_cast<size_t>(next - buf.begin());
      if (next == buf.end()) {
        // keep the last 3 bytes: they may be a magic prefix
        next_pos = buf.size() - (kFrameMagic.size() - 1);
        next_pos = std::max(next_pos, pos);
      }
      res.bytes_skipped += next_pos - pos;
      pos = next_pos;
      if (next == buf.end()) break;
      continue;
    }

    if (remaining < 8) break;  // need the length field
    const uint32_t len = detail::get_u32(buf, pos + 4);
    if (len == 0 || len > kMaxFramePacket) {
      // implausible: treat this magic as a false sync point
      res.bytes_skipped += kFrameMagic.size();
      pos += kFrameMagic.size();
      continue;
    }
    if (remaining < kFrameOverhead + len) break;  // wait for the rest

    auto packet = buf.subspan(pos + 8, len);
    const uint32_t stored = detail::get_u32(buf, pos + 8 + len);
    if (crc32_ieee(packet) == stored) {
      res.packets.emplace_back(packet.begin(), packet.end());
      pos += kFrameOverhead + len;
    } else {
      res.crc_errors++;
      res.bytes_skipped += kFrameMagic.size();
      pos += kFrameMagic.size();
    }
  }
  res.consumed = pos;
  return res;
}

/// Stateful streaming wrapper around frame_decode for byte-stream links.
class FrameDecoder {
 public:
  std::vector<std::vector<uint8_t>> feed(std::span<const uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
    FrameDecodeResult r = frame_decode(buf_);
    buf_.erase(buf_.begin(), buf_.begin() + static_cast<ptrdiff_t>(r.consumed));
    frames_ok_ += r.packets.size();
    crc_errors_ += r.crc_errors;
    bytes_skipped_ += r.bytes_skipped;
    return std::move(r.packets);
  }

  size_t buffered() const { return buf_.size(); }
  uint64_t frames_ok() const { return frames_ok_; }
  uint64_t crc_errors() const { return crc_errors_; }
  uint64_t bytes_skipped() const { return bytes_skipped_; }

 private:
  std::vector<uint8_t> buf_;
  uint64_t frames_ok_ = 0;
  uint64_t crc_errors_ = 0;
  uint64_t bytes_skipped_ = 0;
};

// ---------------------------------------------------------------------------
// Node-id routing across domains
// ---------------------------------------------------------------------------

struct RouteTarget {
  bool local = true;
  uint32_t link_id = 0;

  static RouteTarget Local() { return {true, 0}; }
  static RouteTarget Link(uint32_t id) { return {false, id}; }
  bool operator==(const RouteTarget&) const = default;
};

/// Maps node-id ranges to Local delivery or an off-chip link. The ranges of
/// one table must tile the whole system's rank space exactly.
class RoutingTable {
 public:
  Status add(uint16_t lo, uint16_t hi, RouteTarget target) {
    if (lo > hi) return Err::ConfigInvalid;
    for (const auto& r : ranges_)
      if (lo <= r.hi && r.lo <= hi) return Err::NonTotalRouting;  // overlap
    ranges_.push_back({lo, hi, target});
    std::sort(ranges_.begin(), ranges_.end(),
              [](const Range& a, const Range& b) { return a.lo < b.lo; });
    return {};
  }

  Result<RouteTarget> lookup(uint16_t rank) const {
    for (const auto& r : ranges_)
      if (rank >= r.lo && rank <= r.hi) return r.target;
    return Err::UnroutableNode;
  }

  /// Total over 0..world_size-1, disjoint, and nothing dangling beyond it.
  Status check_total(uint16_t world_size) const {
    if (world_size == 0) return Err::ConfigInvalid;
    uint32_t expect = 0;
    for (const auto& r : ranges_) {
      if (r.lo != expect) return Err::NonTotalRouting;  // gap
      expect = static_cast<uint32_t>(r.hi) + 1;
    }
    if (expect != world_size) return Err::NonTotalRouting;  // short or dangling
    return {};
  }

 private:
  struct Range {
    uint16_t lo, hi;
    RouteTarget target;
  };
  std::vector<Range> ranges_;
};

/// Routing decision for one message: deliver into the local domain or frame
/// it onto a link.
inline Result<RouteTarget> bridge_forward(const RoutingTable& table, const ActiveMessage& msg) {
  return table.lookup(msg.dst_node);
}

}  // namespace gaslite

#endif  // GASLITE_BRIDGE_HPP
