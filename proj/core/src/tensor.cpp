#include "gridsynth/tensor.hpp"

#include <cmath>

namespace gridsynth {

ObjectiveCounts objective_counts(const SimilarityTensor& bx, const SimilarityTensor& bp) {
  require_same_grid(bx, bp);
  const int cells = bx.cell_count();
  const int wpr = bx.words_per_row();
  const std::uint64_t tail = CellSet::tail_mask(cells);
  ObjectiveCounts out;
  for (int c = 0; c < cells; ++c) {
    const std::uint64_t* rx = bx.row(c);
    const std::uint64_t* rp = bp.row(c);
    for (int w = 0; w < wpr; ++w) {
      const std::uint64_t valid = (w == wpr - 1) ? tail : ~0ULL;
      out.tp += std::popcount(rx[w] & rp[w]);
      out.zeros_agree += std::popcount(~rx[w] & ~rp[w] & valid);
    }
  }
  return out;
}

ObjectiveCounts objective_counts(const SimilarityTensor& bx, const SimilarityTensor& bp,
                                 const CellSet& cells) {
  require_same_grid(bx, bp);
  if (cells.grid_n() != bx.grid_n())
    throw InputError("universe cell set grid size differs from tensor");
  const int wpr = bx.words_per_row();
  ObjectiveCounts out;
  cells.for_each([&](int c) {
    const std::uint64_t* rx = bx.row(c);
    const std::uint64_t* rp = bp.row(c);
    const std::uint64_t* u = cells.words();
    for (int w = 0; w < wpr; ++w) {
      out.tp += std::popcount(rx[w] & rp[w] & u[w]);
      out.zeros_agree += std::popcount(~rx[w] & ~rp[w] & u[w]);
    }
  });
  return out;
}

int weighted_sign(std::int64_t diff_tp, std::int64_t diff_z, double lambda) {
  if (lambda == 0.0 || diff_z == 0) {
    return diff_tp > 0 ? 1 : diff_tp < 0 ? -1 : 0;
  }
  // lambda = mant * 2^(exp-53) with integer mant in [2^52, 2^53).
  int exp = 0;
  const double frac = std::frexp(lambda, &exp);
  const auto mant = static_cast<__int128>(std::ldexp(frac, 53));
  const int shift = 53 - exp;  // diff_tp + lambda*diff_z ~ diff_tp*2^shift + mant*diff_z
  __int128 lhs;
  if (shift >= 0) {
    if (shift > 100) {
      // lambda < 2^-47: |lambda*diff_z| < 1, so it only matters when tp ties.
      if (diff_tp != 0) return diff_tp > 0 ? 1 : -1;
      return diff_z > 0 ? 1 : -1;
    }
    lhs = (static_cast<__int128>(diff_tp) << shift) + mant * diff_z;
  } else {
    // lambda >= 2^53 is not a meaningful weight; scale the other side.
    lhs = static_cast<__int128>(diff_tp) + ((mant * diff_z) << (-shift));
  }
  return lhs > 0 ? 1 : lhs < 0 ? -1 : 0;
}

}  // namespace gridsynth
