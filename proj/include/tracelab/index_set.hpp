#pragma once

#include "tracelab/common.hpp"

#include <vector>

namespace tracelab {

// Strictly increasing list of indices selecting a principal subblock.
class IndexSet {
 public:
  IndexSet() = default;
  // Validates ordering and uniqueness; when n >= 0 also checks every index lies in [0, n).
  explicit IndexSet(std::vector<Index> indices, Index n = -1);

  static IndexSet range(Index begin, Index end);

  Index size() const noexcept { return static_cast<Index>(indices_.size()); }
  bool empty() const noexcept { return indices_.empty(); }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(Index i) const;
  // Position of index i inside the set, or -1.
  Index position(Index i) const;

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<Index> indices_;
};

}  // namespace tracelab
