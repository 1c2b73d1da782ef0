#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "gridsynth/errors.hpp"

namespace gridsynth {

// Packed set of grid cells. Cells of an N x N grid are numbered row-major,
// id = (t-1)*N + (u-1) for 1-based (t, u).
class CellSet {
 public:
  CellSet() = default;
  explicit CellSet(int grid_n)
      : n_(grid_n), words_((static_cast<std::size_t>(grid_n) * grid_n + 63) / 64, 0) {}

  static CellSet full(int grid_n) {
    CellSet s(grid_n);
    const int cells = grid_n * grid_n;
    for (std::size_t w = 0; w < s.words_.size(); ++w) s.words_[w] = ~0ULL;
    s.words_.back() &= tail_mask(cells);
    return s;
  }

  int grid_n() const { return n_; }
  int cell_count() const { return n_ * n_; }
  int word_count() const { return static_cast<int>(words_.size()); }
  const std::uint64_t* words() const { return words_.data(); }
  std::uint64_t* words() { return words_.data(); }

  int cell_id(int t, int u) const { return (t - 1) * n_ + (u - 1); }

  bool test(int cell) const {
    return (words_[cell >> 6] >> (cell & 63)) & 1ULL;
  }
  bool test(int t, int u) const { return test(cell_id(t, u)); }

  void set(int cell) { words_[cell >> 6] |= 1ULL << (cell & 63); }
  void set(int t, int u) { set(cell_id(t, u)); }

  int count() const {
    int c = 0;
    for (std::uint64_t w : words_) c += std::popcount(w);
    return c;
  }

  // True when every member of `other` is also a member of this set.
  bool contains(const CellSet& other) const {
    for (std::size_t w = 0; w < words_.size(); ++w)
      if (other.words_[w] & ~words_[w]) return false;
    return true;
  }

  int intersect_count(const CellSet& other) const {
    int c = 0;
    for (std::size_t w = 0; w < words_.size(); ++w)
      c += std::popcount(words_[w] & other.words_[w]);
    return c;
  }

  CellSet& operator|=(const CellSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    return *this;
  }
  CellSet& operator&=(const CellSet& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    return *this;
  }

  bool operator==(const CellSet& other) const {
    return n_ == other.n_ && words_ == other.words_;
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {  // fn(cell_id), ascending
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        const int b = std::countr_zero(bits);
        fn(static_cast<int>(w * 64) + b);
        bits &= bits - 1;
      }
    }
  }

  static std::uint64_t tail_mask(int valid_bits) {
    const int rem = valid_bits & 63;
    return rem == 0 ? ~0ULL : (1ULL << rem) - 1;
  }

 private:
  int n_ = 0;
  std::vector<std::uint64_t> words_;
};

// Boolean N^4 tensor over cell pairs, stored as N^2 packed rows of N^2 bits.
// Row r holds the bits for cell pair (r, *). Unused tail bits are kept zero.
class SimilarityTensor {
 public:
  SimilarityTensor() = default;
  explicit SimilarityTensor(int grid_n)
      : n_(grid_n),
        wpr_(static_cast<int>((static_cast<std::size_t>(grid_n) * grid_n + 63) / 64)),
        bits_(static_cast<std::size_t>(grid_n) * grid_n * wpr_, 0) {}

  int grid_n() const { return n_; }
  int words_per_row() const { return wpr_; }
  int cell_count() const { return n_ * n_; }

  const std::uint64_t* row(int cell) const {
    return bits_.data() + static_cast<std::size_t>(cell) * wpr_;
  }
  std::uint64_t* row(int cell) {
    return bits_.data() + static_cast<std::size_t>(cell) * wpr_;
  }

  int cell_id(int t, int u) const { return (t - 1) * n_ + (u - 1); }

  bool get(int t, int u, int t2, int u2) const {
    const int a = cell_id(t, u), b = cell_id(t2, u2);
    return (row(a)[b >> 6] >> (b & 63)) & 1ULL;
  }

  // Sets both mirrored entries (a,b) and (b,a).
  void set_pair(int cell_a, int cell_b) {
    row(cell_a)[cell_b >> 6] |= 1ULL << (cell_b & 63);
    row(cell_b)[cell_a >> 6] |= 1ULL << (cell_a & 63);
  }

  std::int64_t ones_count() const {
    std::int64_t c = 0;
    for (std::uint64_t w : bits_) c += std::popcount(w);
    return c;
  }

  bool operator==(const SimilarityTensor& other) const {
    return n_ == other.n_ && bits_ == other.bits_;
  }

 private:
  int n_ = 0;
  int wpr_ = 0;
  std::vector<std::uint64_t> bits_;
};

// Integer components of the synthesis objective: the count of entries where
// both tensors are 1 and the count where both are 0 (within the universe).
// The real-valued objective is tp + lambda * zeros_agree; the integer pair is
// kept so comparisons and reports stay exact.
struct ObjectiveCounts {
  std::int64_t tp = 0;
  std::int64_t zeros_agree = 0;

  double value(double lambda) const {
    return static_cast<double>(tp) + lambda * static_cast<double>(zeros_agree);
  }
  bool operator==(const ObjectiveCounts&) const = default;
};

inline void require_same_grid(const SimilarityTensor& a, const SimilarityTensor& b) {
  if (a.grid_n() != b.grid_n())
    throw InputError("tensor grid sizes differ: " + std::to_string(a.grid_n()) +
                     " vs " + std::to_string(b.grid_n()));
}

// Counts over all N^4 entries.
ObjectiveCounts objective_counts(const SimilarityTensor& bx, const SimilarityTensor& bp);

// Counts restricted to the universe of entries whose cells are both in
// `cells`; entries touching an excluded cell contribute to neither term.
ObjectiveCounts objective_counts(const SimilarityTensor& bx, const SimilarityTensor& bp,
                                 const CellSet& cells);

// Sign of diff_tp + lambda * diff_z, computed exactly (no float rounding).
// Returns -1, 0, or +1.
int weighted_sign(std::int64_t diff_tp, std::int64_t diff_z, double lambda);

}  // namespace gridsynth
