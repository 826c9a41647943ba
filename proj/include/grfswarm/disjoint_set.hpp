#ifndef GRFSWARM_DISJOINT_SET_HPP_
#define GRFSWARM_DISJOINT_SET_HPP_

#include <numeric>
#include <utility>
#include <vector>

namespace grfswarm {

/// Union-find with path halving and union by size.
class DisjointSet {
public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) i = parent_[i] = parent_[parent_[i]];
    return i;
  }

  /// returns true if a union was performed
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

  std::size_t component_size(std::size_t i) { return size_[find(i)]; }

private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

} // namespace grfswarm

#endif // GRFSWARM_DISJOINT_SET_HPP_
