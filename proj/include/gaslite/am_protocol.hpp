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

#ifndef GASLITE_AM_PROTOCOL_HPP
#define GASLITE_AM_PROTOCOL_HPP

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "gaslite/result.hpp"

namespace gaslite {

/// Active Message taxonomy. Bit 4 of the code marks a reply; the low nibble
/// selects the payload class (1 = Short, 2 = Medium, 3 = Long).
enum class MsgKind : uint8_t {
  ShortRequest = 0x01,
  MediumRequest = 0x02,
  LongRequest = 0x03,
  ShortReply = 0x11,
  MediumReply = 0x12,
  LongReply = 0x13,
};

enum class AmClass : uint8_t { Short = 1, Medium = 2, Long = 3 };

constexpr size_t kMaxArgs = 8;
constexpr size_t kMaxMediumPayload = 4096;
constexpr size_t kPacketHeaderBytes = 24;

inline bool is_reply(MsgKind k) { return (static_cast<uint8_t>(k) & 0x10) != 0; }
inline bool is_request(MsgKind k) { return !is_reply(k); }
inline AmClass class_of(MsgKind k) {
  return static_cast<AmClass>(static_cast<uint8_t>(k) & 0x0F);
}
inline MsgKind kind_for(AmClass c, bool reply) {
  return static_cast<MsgKind>(static_cast<uint8_t>(c) | (reply ? 0x10 : 0x00));
}

inline Result<MsgKind> kind_from_code(uint8_t code) {
  switch (code) {
    case 0x01: case 0x02: case 0x03: case 0x11: case 0x12: case 0x13:
      return static_cast<MsgKind>(code);
    default:
      return Err::UnknownKind;
  }
}

inline const char* kind_name(MsgKind k) {
  switch (k) {
    case MsgKind::ShortRequest: return "short_request";
    case MsgKind::MediumRequest: return "medium_request";
    case MsgKind::LongRequest: return "long_request";
    case MsgKind::ShortReply: return "short_reply";
    case MsgKind::MediumReply: return "medium_reply";
    case MsgKind::LongReply: return "long_reply";
  }
  return "?";
}

/// One Active Message == one network packet.
///
/// Wire layout (little-endian), 24-byte header:
///   [0]      kind code
///   [1]      handler id
///   [2..4)   src node (u16)
///   [4..6)   dst node (u16)
///   [6]      arg count
///   [7]      reserved, must be zero
///   [8..12)  payload length (u32)
///   [12..20) dest offset (u64, Long kinds only)
///   [20..24) seq (u32, per (src,dst) pair)
/// followed by arg_count u32 args, then the payload bytes.
struct ActiveMessage {
  MsgKind kind = MsgKind::ShortRequest;
  uint16_t src_node = 0;
  uint16_t dst_node = 0;
  uint8_t handler_id = 0;
  std::vector<uint32_t> args;
  std::vector<uint8_t> payload;
  uint64_t dest_offset = 0;
  uint32_t seq = 0;

  bool operator==(const ActiveMessage&) const = default;
};

inline size_t encoded_size(const ActiveMessage& m) {
  return kPacketHeaderBytes + 4 * m.args.size() + m.payload.size();
}

/// Checks the ActiveMessage invariants; returns the first violation.
inline Status validate(const ActiveMessage& m) {
  if (m.args.size() > kMaxArgs) return Err::TooManyArgs;
  switch (class_of(m.kind)) {
    case AmClass::Short:
      if (!m.payload.empty()) return Err::ShortWithPayload;
      if (m.dest_offset != 0) return Err::ShortWithDestOffset;
      break;
    case AmClass::Medium:
      if (m.payload.size() > kMaxMediumPayload) return Err::MediumTooLarge;
      if (m.dest_offset != 0) return Err::MediumWithDestOffset;
      break;
    case AmClass::Long:
      break;  // payload bounded by the destination segment, checked on receipt
  }
  return {};
}

namespace detail {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
inline uint16_t get_u16(std::span<const uint8_t> b, size_t at) {
  return static_cast<uint16_t>(b[at] | (b[at + 1] << 8));
}
inline uint32_t get_u32(std::span<const uint8_t> b, size_t at) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[at + static_cast<size_t>(i)];
  return v;
}
inline uint64_t get_u64(std::span<const uint8_t> b, size_t at) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[at + static_cast<size_t>(i)];
  return v;
}

}  // namespace detail

/// Serializes a valid message to its wire form.
inline Result<std::vector<uint8_t>> encode_packet(const ActiveMessage& m) {
  if (!validate(m).ok()) return Err::InvalidMessage;
  std::vector<uint8_t> out;
  out.reserve(encoded_size(m));
  out.push_back(static_cast<uint8_t>(m.kind));
  out.push_back(m.handler_id);
  detail::put_u16(out, m.src_node);
  detail::put_u16(out, m.dst_node);
  out.push_back(static_cast<uint8_t>(m.args.size()));
  out.push_back(0x00);  // reserved
  detail::put_u32(out, static_cast<uint32_t>(m.payload.size()));
  detail::put_u64(out, m.dest_offset);
  detail::put_u32(out, m.seq);
  for (uint32_t a : m.args) detail::put_u32(out, a);
  out.insert(out.end(), m.payload.begin(), m.payload.end());
  return out;
}

/// Total inverse of encode_packet: any byte sequence yields a message or a
/// typed error, never a crash.
inline Result<ActiveMessage> decode_packet(std::span<const uint8_t> bytes) {
  if (bytes.size() < kPacketHeaderBytes) return Err::Truncated;
  auto kind = kind_from_code(bytes[0]);
  if (!kind.ok()) return kind.error();
  if (bytes[7] != 0x00) return Err::ReservedNonzero;

  ActiveMessage m;
  m.kind = kind.value();
  m.handler_id = bytes[1];
  m.src_node = detail::get_u16(bytes, 2);
  m.dst_node = detail::get_u16(bytes, 4);
  const size_t arg_count = bytes[6];
  const size_t payload_len = detail::get_u32(bytes, 8);
  m.dest_offset = detail::get_u64(bytes, 12);
  m.seq = detail::get_u32(bytes, 20);

  const size_t declared = kPacketHeaderBytes + 4 * arg_count + payload_len;
  if (bytes.size() < declared) return Err::Truncated;
  if (bytes.size() > declared) return Err::TrailingBytes;

  m.args.reserve(arg_count);
  for (size_t i = 0; i < arg_count; ++i)
    m.args.push_back(detail::get_u32(bytes, kPacketHeaderBytes + 4 * i));
  const size_t payload_at = kPacketHeaderBytes + 4 * arg_count;
  m.payload.assign(bytes.begin() + static_cast<ptrdiff_t>(payload_at),
                   bytes.begin() + static_cast<ptrdiff_t>(declared));

  if (Status v = validate(m); !v.ok()) return v.error();
  return m;
}

}  // namespace gaslite

#endif  // GASLITE_AM_PROTOCOL_HPP
