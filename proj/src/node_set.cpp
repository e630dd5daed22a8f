#include "causalbandit/node_set.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "causalbandit/errors.hpp"

namespace causalbandit {

NodeSet::NodeSet(std::size_t width, std::initializer_list<Node> members) : NodeSet(width) {
  for (Node v : members) {
    if (v >= width) throw DomainError("NodeSet member out of range");
    insert(v);
  }
}

NodeSet NodeSet::full(std::size_t width) {
  NodeSet s(width);
  std::fill(s.words_.begin(), s.words_.end(), ~std::uint64_t{0});
  if (width % 64 != 0) s.words_.back() = (std::uint64_t{1} << (width % 64)) - 1;
  return s;
}

NodeSet NodeSet::from_mask(std::size_t width, std::uint64_t mask) {
  if (width > 64) throw DomainError("from_mask requires width <= 64");
  NodeSet s(width);
  if (width > 0) s.words_[0] = width == 64 ? mask : (mask & ((std::uint64_t{1} << width) - 1));
  return s;
}

void NodeSet::clear() noexcept { std::fill(words_.begin(), words_.end(), 0); }

std::size_t NodeSet::size() const noexcept {
  std::size_t c = 0;
  for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
  return c;
}

bool NodeSet::empty() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](auto w) { return w == 0; });
}

bool NodeSet::intersects(const NodeSet& other) const noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & other.words_[i]) return true;
  return false;
}

bool NodeSet::is_subset_of(const NodeSet& other) const noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~other.words_[i]) return false;
  return true;
}

std::size_t NodeSet::intersection_size(const NodeSet& other) const noexcept {
  std::size_t c = 0;
  for (std::size_t i = 0; i < words_.size(); ++i) c += static_cast<std::size_t>(std::popcount(words_[i] & other.words_[i]));
  return c;
}

NodeSet& NodeSet::operator|=(const NodeSet& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

NodeSet& NodeSet::operator&=(const NodeSet& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

NodeSet& NodeSet::operator^=(const NodeSet& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

NodeSet& NodeSet::operator-=(const NodeSet& other) noexcept {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
  return *this;
}

Node NodeSet::nth(std::size_t k) const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    const auto c = static_cast<std::size_t>(std::popcount(words_[w]));
    if (k < c) {
      std::uint64_t bits = words_[w];
      for (std::size_t j = 0; j < k; ++j) bits &= bits - 1;
      return static_cast<Node>(w * 64 + std::countr_zero(bits));
    }
    k -= c;
  }
  throw DomainError("NodeSet::nth index out of range");
}

std::vector<Node> NodeSet::members() const {
  std::vector<Node> out;
  out.reserve(size());
  for_each([&](Node v) { out.push_back(v); });
  return out;
}

std::string NodeSet::to_string() const {
  std::ostringstream os;
  os << '{';
  bool first = true;
  for_each([&](Node v) {
    if (!first) os << ',';
    os << v;
    first = false;
  });
  os << '}';
  return os.str();
}

std::strong_ordering operator<=>(const NodeSet& a, const NodeSet& b) {
  if (auto c = a.width_ <=> b.width_; c != 0) return c;
  // Compare from the most significant word so the order matches the
  // numeric order of the bit masks.
  for (std::size_t i = a.words_.size(); i-- > 0;) {
    if (auto c = a.words_[i] <=> b.words_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t NodeSet::hash() const noexcept {
  std::size_t h = width_ * 0x9e3779b97f4a7c15ULL;
  for (auto w : words_) h = (h ^ w) * 0x100000001b3ULL + (h >> 17);
  return h;
}

}  // namespace causalbandit
