#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bvvi/model.hpp"

namespace bvvi {

/// One fixed-width vector per history for steps 1..last_step, stored level
/// by level in lexicographic history order. The children of history i at
/// step h occupy the contiguous block [i*A*O, (i+1)*A*O) of step h+1.
class HistoryTable {
 public:
  HistoryTable() = default;
  HistoryTable(int A, int O, int last_step, int width, double fill = 0.0, std::uint64_t cap = kDefaultHistoryCap);

  int last_step() const { return static_cast<int>(levels_.size()); }
  int width() const { return width_; }
  std::size_t count(int h) const { return levels_[h - 1].size() / width_; }

  std::span<double> at(int h, std::size_t index) {
    return {levels_[h - 1].data() + index * width_, static_cast<std::size_t>(width_)};
  }
  std::span<const double> at(int h, std::size_t index) const {
    return {levels_[h - 1].data() + index * width_, static_cast<std::size_t>(width_)};
  }
  /// `n` consecutive entries starting at `index`.
  std::span<const double> block(int h, std::size_t index, std::size_t n) const {
    return {levels_[h - 1].data() + index * width_, n * width_};
  }
  std::span<const double> level(int h) const { return levels_[h - 1]; }

 private:
  int width_ = 0;
  std::vector<Vec> levels_;
};

}  // namespace bvvi
