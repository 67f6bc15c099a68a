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

#ifndef GASLITE_RESULT_HPP
#define GASLITE_RESULT_HPP

#include <cstdint>
#include <utility>
#include <variant>

namespace gaslite {

/// Every failure the library reports, one code per contract violation.
enum class Err : uint8_t {
  None = 0,

  // packet codec / message validation
  InvalidMessage,
  Truncated,
  UnknownKind,
  ReservedNonzero,
  TrailingBytes,
  TooManyArgs,
  ShortWithPayload,
  MediumTooLarge,
  ShortWithDestOffset,
  MediumWithDestOffset,

  // segment
  ZeroSize,
  OutOfBounds,

  // engine / command codec
  InvalidCommand,
  UnknownOpcode,
  BadToken,
  BounceFull,
  ReplyToReply,
  DoubleComplete,

  // network
  UnknownNode,

  // bridge
  EmptyPacket,
  CrcMismatch,
  BadMagic,
  UnroutableNode,
  NonTotalRouting,

  // config
  ParseError,
  DuplicateRank,
  ConfigInvalid,
  UnknownRank,

  // node API
  ReservedId,
  DuplicateId,
  UnboundHandler,
  InvalidArgs,
  NotARequest,
  AlreadyReplied,
  Mismatch,
  RequestInHandler,
  WaitInHandler,
  OutOfBoundsRemote,
  OutOfBoundsLocal,
  BadPartition,

  // harness
  CycleLimitExceeded,
  AppFailure,
  LinkError,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::None: return "ok";
    case Err::InvalidMessage: return "InvalidMessage";
    case Err::Truncated: return "Truncated";
    case Err::UnknownKind: return "UnknownKind";
    case Err::ReservedNonzero: return "ReservedNonzero";
    case Err::TrailingBytes: return "TrailingBytes";
    case Err::TooManyArgs: return "TooManyArgs";
    case Err::ShortWithPayload: return "ShortWithPayload";
    case Err::MediumTooLarge: return "MediumTooLarge";
    case Err::ShortWithDestOffset: return "ShortWithDestOffset";
    case Err::MediumWithDestOffset: return "MediumWithDestOffset";
    case Err::ZeroSize: return "ZeroSize";
    case Err::OutOfBounds: return "OutOfBounds";
    case Err::InvalidCommand: return "InvalidCommand";
    case Err::UnknownOpcode: return "UnknownOpcode";
    case Err::BadToken: return "BadToken";
    case Err::BounceFull: return "BounceFull";
    case Err::ReplyToReply: return "ReplyToReply";
    case Err::DoubleComplete: return "DoubleComplete";
    case Err::UnknownNode: return "UnknownNode";
    case Err::EmptyPacket: return "EmptyPacket";
    case Err::CrcMismatch: return "CrcMismatch";
    case Err::BadMagic: return "BadMagic";
    case Err::UnroutableNode: return "UnroutableNode";
    case Err::NonTotalRouting: return "NonTotalRouting";
    case Err::ParseError: return "ParseError";
    case Err::DuplicateRank: return "DuplicateRank";
    case Err::ConfigInvalid: return "ConfigInvalid";
    case Err::UnknownRank: return "UnknownRank";
    case Err::ReservedId: return "ReservedId";
    case Err::DuplicateId: return "DuplicateId";
    case Err::UnboundHandler: return "UnboundHandler";
    case Err::InvalidArgs: return "InvalidArgs";
    case Err::NotARequest: return "NotARequest";
    case Err::AlreadyReplied: return "AlreadyReplied";
    case Err::Mismatch: return "Mismatch";
    case Err::RequestInHandler: return "RequestInHandler";
    case Err::WaitInHandler: return "WaitInHandler";
    case Err::OutOfBoundsRemote: return "OutOfBoundsRemote";
    case Err::OutOfBoundsLocal: return "OutOfBoundsLocal";
    case Err::BadPartition: return "BadPartition";
    case Err::CycleLimitExceeded: return "CycleLimitExceeded";
    case Err::AppFailure: return "AppFailure";
    case Err::LinkError: return "LinkError";
  }
  return "unknown";
}

/// Success-or-error for operations without a payload.
class Status {
 public:
  Status() = default;
  Status(Err e) : err_(e) {}  // NOLINT: implicit by design
  bool ok() const { return err_ == Err::None; }
  explicit operator bool() const { return ok(); }
  Err error() const { return err_; }

  friend bool operator==(Status a, Status b) { return a.err_ == b.err_; }

 private:
  Err err_ = Err::None;
};

/// Value-or-error. `value()` must only be called when `ok()`.
template <typename T>
class Result {
 public:
  Result(T v) : v_(std::move(v)) {}  // NOLINT: implicit by design
  Result(Err e) : v_(e) {}           // NOLINT: implicit by design

  bool ok() const { return std::holds_alternative<T>(v_); }
  explicit operator bool() const { return ok(); }
  Err error() const { return ok() ? Err::None : std::get<Err>(v_); }
  Status status() const { return Status(error()); }

  T& value() { return std::get<T>(v_); }
  const T& value() const { return std::get<T>(v_); }
  T* operator->() { return &value(); }
  const T* operator->() const { return &value(); }

 private:
  std::variant<T, Err> v_;
};

}  // namespace gaslite

#endif  // GASLITE_RESULT_HPP
