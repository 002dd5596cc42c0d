#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace eae {

enum class ErrorCode {
  kInvalidArgument,
  kIo,
  kMalformedLine,
  kSpanOutOfBounds,
  kSpanTextMismatch,
  kUnknownSplit,
  kDuplicateId,
  kDuplicateEventType,
  kDuplicateRole,
  kTemplateRoleMismatch,
  kInvalidQuestion,
  kUnbalancedBrace,
  kEmptySlotName,
  kAdjacentSlots,
  kDuplicateSlot,
  kSkeletonMismatch,
  kTrailingText,
  kLengthMismatch,
  kNotNormalized,
  kEmptyPool,
  kUnknownVariant,
  kSlotMismatch,
  kCountMismatch,
  kUnparseable,
  kTransport,
  kNotFound,
  kMissingResource,
  kInsufficientData,
  kZeroVariance,
  kRunExists,
  kInvalidUtf8,
};

// Stable snake_case name used in machine-readable error output.
std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// An error attributable to one request of a batch.
class RequestError : public Error {
 public:
  RequestError(ErrorCode code, std::size_t request_index, const std::string& message)
      : Error(code, message), request_index_(request_index) {}

  std::size_t request_index() const noexcept { return request_index_; }

 private:
  std::size_t request_index_;
};

// Raised by backends when a batch call fails in transport; retryable.
class TransportError : public RequestError {
 public:
  TransportError(std::size_t request_index, const std::string& message)
      : RequestError(ErrorCode::kTransport, request_index, message) {}
};

}  // namespace eae
