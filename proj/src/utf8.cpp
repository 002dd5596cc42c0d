#include "eae/utf8.hpp"

#include <algorithm>

#include "eae/error.hpp"

namespace eae {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kMalformedLine: return "malformed_line";
    case ErrorCode::kSpanOutOfBounds: return "span_out_of_bounds";
    case ErrorCode::kSpanTextMismatch: return "span_text_mismatch";
    case ErrorCode::kUnknownSplit: return "unknown_split";
    case ErrorCode::kDuplicateId: return "duplicate_id";
    case ErrorCode::kDuplicateEventType: return "duplicate_event_type";
    case ErrorCode::kDuplicateRole: return "duplicate_role";
    case ErrorCode::kTemplateRoleMismatch: return "template_role_mismatch";
    case ErrorCode::kInvalidQuestion: return "invalid_question";
    case ErrorCode::kUnbalancedBrace: return "unbalanced_brace";
    case ErrorCode::kEmptySlotName: return "empty_slot_name";
    case ErrorCode::kAdjacentSlots: return "adjacent_slots";
    case ErrorCode::kDuplicateSlot: return "duplicate_slot";
    case ErrorCode::kSkeletonMismatch: return "skeleton_mismatch";
    case ErrorCode::kTrailingText: return "trailing_text";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kNotNormalized: return "not_normalized";
    case ErrorCode::kEmptyPool: return "empty_pool";
    case ErrorCode::kUnknownVariant: return "unknown_variant";
    case ErrorCode::kSlotMismatch: return "slot_mismatch";
    case ErrorCode::kCountMismatch: return "count_mismatch";
    case ErrorCode::kUnparseable: return "unparseable";
    case ErrorCode::kTransport: return "transport";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kMissingResource: return "missing_resource";
    case ErrorCode::kInsufficientData: return "insufficient_data";
    case ErrorCode::kZeroVariance: return "zero_variance";
    case ErrorCode::kRunExists: return "run_exists";
    case ErrorCode::kInvalidUtf8: return "invalid_utf8";
  }
  return "unknown";
}

namespace utf8 {
namespace {

// Length of the sequence starting at text[i], or 0 if invalid.
std::size_t sequence_length(std::string_view text, std::size_t i) {
  const auto lead = static_cast<unsigned char>(text[i]);
  std::size_t n = 0;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0 && lead >= 0xC2) n = 2;
  else if ((lead & 0xF0) == 0xE0) n = 3;
  else if ((lead & 0xF8) == 0xF0 && lead <= 0xF4) n = 4;
  else return 0;
  if (i + n > text.size()) return 0;
  for (std::size_t k = 1; k < n; ++k) {
    if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) return 0;
  }
  return n;
}

char32_t decode_at(std::string_view text, std::size_t i, std::size_t n) {
  const auto b = [&](std::size_t k) { return static_cast<unsigned char>(text[i + k]); };
  switch (n) {
    case 1: return b(0);
    case 2: return ((b(0) & 0x1F) << 6) | (b(1) & 0x3F);
    case 3: return ((b(0) & 0x0F) << 12) | ((b(1) & 0x3F) << 6) | (b(2) & 0x3F);
    default:
      return ((b(0) & 0x07) << 18) | ((b(1) & 0x3F) << 12) | ((b(2) & 0x3F) << 6) |
             (b(3) & 0x3F);
  }
}

[[noreturn]] void invalid(std::size_t byte) {
  throw Error(ErrorCode::kInvalidUtf8,
              "invalid UTF-8 sequence at byte " + std::to_string(byte));
}

}  // namespace

std::size_t length(std::string_view text) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t n = sequence_length(text, i);
    if (n == 0) invalid(i);
    i += n;
    ++count;
  }
  return count;
}

void append(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::u32string decode(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t n = sequence_length(text, i);
    if (n == 0) invalid(i);
    out.push_back(decode_at(text, i, n));
    i += n;
  }
  return out;
}

std::string encode(std::u32string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char32_t cp : text) append(out, cp);
  return out;
}

Index::Index(std::string_view text) : text_(text) {
  bytes_.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size();) {
    const std::size_t n = sequence_length(text, i);
    if (n == 0) invalid(i);
    bytes_.push_back(i);
    i += n;
  }
  bytes_.push_back(text.size());
}

std::string_view Index::slice(std::size_t start, std::size_t end) const {
  if (start > end || end > size()) {
    throw Error(ErrorCode::kSpanOutOfBounds,
                "slice [" + std::to_string(start) + ", " + std::to_string(end) +
                    ") outside text of length " + std::to_string(size()));
  }
  return text_.substr(bytes_[start], bytes_[end] - bytes_[start]);
}

std::size_t Index::cp_offset(std::size_t byte) const {
  auto it = std::lower_bound(bytes_.begin(), bytes_.end(), byte);
  if (it == bytes_.end() || *it != byte) {
    throw Error(ErrorCode::kInvalidArgument,
                "byte offset " + std::to_string(byte) + " is not a character boundary");
  }
  return static_cast<std::size_t>(it - bytes_.begin());
}

}  // namespace utf8
}  // namespace eae
