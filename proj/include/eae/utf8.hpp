#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Offsets throughout the library count Unicode scalar values, while text is
// stored as UTF-8. These helpers translate between the two.
namespace eae::utf8 {

// Number of scalar values in `text`. Throws Error(kInvalidUtf8).
std::size_t length(std::string_view text);

// Appends the UTF-8 encoding of `cp`.
void append(std::string& out, char32_t cp);

std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);

// Scalar-value index over a UTF-8 string. Holds a view: the indexed text
// must outlive the index.
class Index {
 public:
  explicit Index(std::string_view text);

  std::size_t size() const noexcept { return bytes_.size() - 1; }
  std::size_t byte_offset(std::size_t cp) const { return bytes_.at(cp); }

  // Substring [start, end) in scalar values. Requires start <= end <= size().
  std::string_view slice(std::size_t start, std::size_t end) const;

  // Scalar index of a byte offset that falls on a boundary.
  std::size_t cp_offset(std::size_t byte) const;

 private:
  std::string_view text_;
  std::vector<std::size_t> bytes_;
};

}  // namespace eae::utf8
