#pragma once

#include "gridsynth/synthesis.hpp"

namespace gridsynth {

// Painted into cells outside the known region of a partial image.
inline constexpr Rgb kUnknownSentinel{255, 0, 255};

struct PartialImage {
  GridImage image;
  CellSet known;  // 1 = cell present in the partial image
};

// Validates (>= 1 known cell, matching grid sizes) and paints unknown cells
// with the sentinel color so the raster and the mask always agree.
PartialImage make_partial(GridImage image, CellSet known);

// Sidecar mask format: "gridsynth-mask v1 N=<int>" then N lines of N
// characters from {0,1}, row t on line t.
std::string serialize_mask(const CellSet& known);
CellSet parse_mask(const std::string& text);

PartialImage load_partial(const std::string& png_path, const std::string& mask_path,
                          int grid_n, int cell_m);

// Greedy synthesis restricted to the known region: components come only from
// known cells, candidate sketches must cover only known cells, and objective
// entries touching an unknown cell are excluded from both terms.
ScoredProgram synthesize_partial(const PartialImage& p, const SynthesisConfig& cfg,
                                 const GreedyOptions& opts = {});

struct ExtrapolateOptions {
  // Also extend toward smaller indices by reducing each offset to its
  // residue mod the stride. Off by default: partial images are top-anchored,
  // so patterns grow toward larger indices.
  bool extend_offsets = false;
};

// For each pair independently, keeps (a, b, a2, b2) and the component and
// raises the iteration counts to the largest values fitting the grid. Pair
// order is preserved; idempotent; every cover is a superset of the original.
Program extrapolate(const Program& p_part, int grid_n,
                    const ExtrapolateOptions& opts = {});

struct CompletionResult {
  GridImage image;             // the completed image
  ScoredProgram partial;       // program synthesized from the known region
  Program extrapolated;        // the full-grid extension that was rendered
  CellSet covered;             // unknown cells written by the program
};

// synthesize_partial -> extrapolate -> execute_onto, then fills cells that
// are neither known nor covered from the nearest filled cell (Manhattan
// distance, ties to the lexicographically smallest cell).
CompletionResult complete_pipeline(const PartialImage& p, const SynthesisConfig& cfg,
                                   const GreedyOptions& opts = {},
                                   const ExtrapolateOptions& ex = {});

// Just the completed image.
GridImage complete_baseline(const PartialImage& p, const SynthesisConfig& cfg,
                            const GreedyOptions& opts = {},
                            const ExtrapolateOptions& ex = {});

}  // namespace gridsynth
