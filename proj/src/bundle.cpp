#include "mtmlca/bundle.hpp"

#include "mtmlca/errors.hpp"

namespace mtmlca {

Bundle::Bundle(std::size_t num_items) : size_(num_items) {
  if (num_items > kMaxItems) {
    throw ArgumentError("bundle length " + std::to_string(num_items) + " exceeds capacity " +
                        std::to_string(kMaxItems));
  }
}

Bundle Bundle::full(std::size_t num_items) {
  Bundle b(num_items);
  for (std::size_t k = 0; k < num_items; ++k) b.set(k);
  return b;
}

Bundle Bundle::from_mask(std::size_t num_items, std::uint64_t mask) {
  if (num_items > 64) throw ArgumentError("from_mask requires at most 64 items");
  if (num_items < 64 && (mask >> num_items) != 0) {
    throw ArgumentError("mask has bits beyond the bundle length");
  }
  Bundle b(num_items);
  b.words_[0] = mask;
  return b;
}

Bundle Bundle::from_items(std::size_t num_items, const std::vector<std::size_t>& items) {
  Bundle b(num_items);
  for (auto k : items) b.set(k);
  return b;
}

Bundle Bundle::from_string(const std::string& bits) {
  Bundle b(bits.size());
  for (std::size_t k = 0; k < bits.size(); ++k) {
    if (bits[k] == '1') {
      b.set(k);
    } else if (bits[k] != '0') {
      throw ArgumentError("bundle string must contain only '0' and '1'");
    }
  }
  return b;
}

bool Bundle::test(std::size_t item) const {
  if (item >= size_) throw ArgumentError("item index out of range");
  return (words_[item / 64] >> (item % 64)) & 1U;
}

void Bundle::set(std::size_t item, bool value) {
  if (item >= size_) throw ArgumentError("item index out of range");
  const std::uint64_t bit = std::uint64_t{1} << (item % 64);
  if (value) {
    words_[item / 64] |= bit;
  } else {
    words_[item / 64] &= ~bit;
  }
}

std::size_t Bundle::count() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool Bundle::none() const noexcept {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

void Bundle::check_same_size(const Bundle& other) const {
  if (other.size_ != size_) throw ArgumentError("bundle length mismatch");
}

bool Bundle::is_subset_of(const Bundle& other) const {
  check_same_size(other);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if ((words_[w] & ~other.words_[w]) != 0) return false;
  }
  return true;
}

bool Bundle::intersects(const Bundle& other) const {
  check_same_size(other);
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if ((words_[w] & other.words_[w]) != 0) return true;
  }
  return false;
}

Bundle Bundle::operator|(const Bundle& other) const {
  Bundle r = *this;
  r |= other;
  return r;
}

Bundle Bundle::operator&(const Bundle& other) const {
  check_same_size(other);
  Bundle r = *this;
  for (std::size_t w = 0; w < words_.size(); ++w) r.words_[w] &= other.words_[w];
  return r;
}

Bundle& Bundle::operator|=(const Bundle& other) {
  check_same_size(other);
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  return *this;
}

std::uint64_t Bundle::to_mask() const {
  if (size_ > 64) throw ArgumentError("to_mask requires at most 64 items");
  return words_[0];
}

std::vector<std::size_t> Bundle::items() const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < size_; ++k) {
    if (test(k)) out.push_back(k);
  }
  return out;
}

std::string Bundle::to_string() const {
  std::string s(size_, '0');
  for (std::size_t k = 0; k < size_; ++k) {
    if (test(k)) s[k] = '1';
  }
  return s;
}

std::strong_ordering Bundle::operator<=>(const Bundle& other) const {
  if (auto c = size_ <=> other.size_; c != 0) return c;
  for (std::size_t w = words_.size(); w-- > 0;) {
    if (auto c = words_[w] <=> other.words_[w]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t Bundle::hash() const noexcept {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ size_;
  for (auto w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return static_cast<std::size_t>(h);
}

}  // namespace mtmlca
