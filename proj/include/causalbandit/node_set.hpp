#pragma once

#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

namespace causalbandit {

using Node = std::uint32_t;

/// Fixed-width set of node indices backed by 64-bit words.
///
/// All binary operations require both operands to have the same width.
/// Ordering is lexicographic on the word vector, which gives a canonical
/// order for deduplicating families of sets.
class NodeSet {
 public:
  NodeSet() = default;
  explicit NodeSet(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}
  NodeSet(std::size_t width, std::initializer_list<Node> members);

  static NodeSet full(std::size_t width);
  static NodeSet from_mask(std::size_t width, std::uint64_t mask);

  std::size_t width() const noexcept { return width_; }
  bool test(Node v) const noexcept { return (words_[v >> 6] >> (v & 63)) & 1U; }
  bool contains(Node v) const noexcept { return v < width_ && test(v); }
  void insert(Node v) noexcept { words_[v >> 6] |= std::uint64_t{1} << (v & 63); }
  void erase(Node v) noexcept { words_[v >> 6] &= ~(std::uint64_t{1} << (v & 63)); }
  void clear() noexcept;

  std::size_t size() const noexcept;
  bool empty() const noexcept;
  bool intersects(const NodeSet& other) const noexcept;
  bool is_subset_of(const NodeSet& other) const noexcept;
  std::size_t intersection_size(const NodeSet& other) const noexcept;

  NodeSet& operator|=(const NodeSet& other) noexcept;
  NodeSet& operator&=(const NodeSet& other) noexcept;
  NodeSet& operator^=(const NodeSet& other) noexcept;
  NodeSet& operator-=(const NodeSet& other) noexcept;

  friend NodeSet operator|(NodeSet a, const NodeSet& b) { return a |= b; }
  friend NodeSet operator&(NodeSet a, const NodeSet& b) { return a &= b; }
  friend NodeSet operator^(NodeSet a, const NodeSet& b) { return a ^= b; }
  friend NodeSet operator-(NodeSet a, const NodeSet& b) { return a -= b; }

  // Index of the k-th smallest member (0-based); k must be < size().
  Node nth(std::size_t k) const;
  std::vector<Node> members() const;
  // Low 64 bits; only meaningful for width <= 64.
  std::uint64_t mask() const noexcept { return words_.empty() ? 0 : words_[0]; }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = std::countr_zero(bits);
        f(static_cast<Node>(w * 64 + b));
        bits &= bits - 1;
      }
    }
  }

  std::string to_string() const;

  friend bool operator==(const NodeSet& a, const NodeSet& b) = default;
  friend std::strong_ordering operator<=>(const NodeSet& a, const NodeSet& b);

  std::size_t hash() const noexcept;

 private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

struct NodeSetHash {
  std::size_t operator()(const NodeSet& s) const noexcept { return s.hash(); }
};

}  // namespace causalbandit
