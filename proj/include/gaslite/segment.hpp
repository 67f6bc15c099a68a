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

#ifndef GASLITE_SEGMENT_HPP
#define GASLITE_SEGMENT_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "gaslite/result.hpp"

namespace gaslite {

/// Whether a node's segment sits in on-chip or shared off-chip memory.
/// Metadata only: reported in traces, no timing asymmetry is modeled.
enum class Placement : uint8_t { OnChip, OffChip };

inline const char* placement_name(Placement p) {
  return p == Placement::OnChip ? "on_chip" : "off_chip";
}

/// A node's registered shared-memory region, the target of all remote reads
/// and writes. Size is fixed at attach time; every access is bounds-checked
/// and a rejected access leaves the contents untouched.
class Segment {
 public:
  uint64_t size() const { return data_.size(); }
  Placement placement() const { return placement_; }

  Result<std::vector<uint8_t>> read(uint64_t offset, uint64_t len) const {
    if (!in_bounds(offset, len)) return Err::OutOfBounds;
    return std::vector<uint8_t>(data_.begin() + static_cast<ptrdiff_t>(offset),
                                data_.begin() + static_cast<ptrdiff_t>(offset + len));
  }

  Status write(uint64_t offset, std::span<const uint8_t> bytes) {
    if (!in_bounds(offset, bytes.size())) return Err::OutOfBounds;
    std::copy(bytes.begin(), bytes.end(), data_.begin() + static_cast<ptrdiff_t>(offset));
    return {};
  }

  /// Zero-copy view for the owning node (the PGAS "direct access" promise).
  std::span<const uint8_t> bytes() const { return data_; }
  std::span<uint8_t> bytes() { return data_; }

  Result<std::span<const uint8_t>> view(uint64_t offset, uint64_t len) const {
    if (!in_bounds(offset, len)) return Err::OutOfBounds;
    return std::span<const uint8_t>(data_).subspan(offset, len);
  }

 private:
  friend Result<Segment> attach_segment(uint64_t, Placement);
  Segment(uint64_t size, Placement p) : data_(size, 0), placement_(p) {}

  bool in_bounds(uint64_t offset, uint64_t len) const {
    return offset <= data_.size() && len <= data_.size() - offset;
  }

  std::vector<uint8_t> data_;
  Placement placement_;
};

/// Registers a zero-initialized segment of `size` bytes.
inline Result<Segment> attach_segment(uint64_t size, Placement placement) {
  if (size == 0) return Err::ZeroSize;
  return Segment(size, placement);
}

}  // namespace gaslite

#endif  // GASLITE_SEGMENT_HPP
