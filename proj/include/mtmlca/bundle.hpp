#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace mtmlca {

/// Fixed-length item-membership word. Item k is in the bundle iff test(k).
///
/// Capacity is kMaxItems, which covers the largest preset layout (196 items).
/// Bits at positions >= size() are always zero, so equality and ordering
/// only ever look at meaningful items.
class Bundle {
 public:
  static constexpr std::size_t kMaxItems = 256;

  Bundle() = default;
  explicit Bundle(std::size_t num_items);

  static Bundle full(std::size_t num_items);
  /// Items 0..63 taken from the low bits of `mask`; requires num_items <= 64.
  static Bundle from_mask(std::size_t num_items, std::uint64_t mask);
  static Bundle from_items(std::size_t num_items, const std::vector<std::size_t>& items);
  /// Parses a string of '0'/'1' characters, item 0 first.
  static Bundle from_string(const std::string& bits);

  std::size_t size() const noexcept { return size_; }
  bool test(std::size_t item) const;
  void set(std::size_t item, bool value = true);

  std::size_t count() const noexcept;
  bool none() const noexcept;
  bool is_subset_of(const Bundle& other) const;
  bool intersects(const Bundle& other) const;

  Bundle operator|(const Bundle& other) const;
  Bundle operator&(const Bundle& other) const;
  Bundle& operator|=(const Bundle& other);

  /// Low 64 items as an integer mask; requires size() <= 64.
  std::uint64_t to_mask() const;
  std::vector<std::size_t> items() const;
  std::string to_string() const;

  bool operator==(const Bundle& other) const = default;
  std::strong_ordering operator<=>(const Bundle& other) const;

  std::size_t hash() const noexcept;

 private:
  void check_same_size(const Bundle& other) const;

  std::array<std::uint64_t, kMaxItems / 64> words_{};
  std::size_t size_ = 0;
};

struct BundleHash {
  std::size_t operator()(const Bundle& b) const noexcept { return b.hash(); }
};

}  // namespace mtmlca
