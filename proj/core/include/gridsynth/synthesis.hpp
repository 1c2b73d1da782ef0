#pragma once

#include <functional>
#include <vector>

#include "gridsynth/program.hpp"

namespace gridsynth {

struct SynthesisConfig {
  int k = 12;             // maximum pairs per program
  double eps = 0.15;      // similarity threshold
  double lambda = 0.01;   // weight on the agreement-on-zeros term
  DistanceConfig distance;
  int min_cover = 1;      // minimum n*n2 for enumerated sketches
  bool early_stop = true; // stop when no candidate has positive gain
};

void validate(const SynthesisConfig& cfg);

struct ScoredProgram {
  Program program;
  double objective = 0.0;
  std::vector<double> per_step_gains;
};

// One record per greedy iteration, for progress reporting.
struct GreedyStep {
  int iteration = 0;  // 1-based
  Sketch sketch;
  CellIndex component;
  std::int64_t gain_tp = 0;     // newly covered entries where B^(x) = 1
  std::int64_t gain_zeros = 0;  // change in the agreement-on-zeros count (<= 0)
  double gain = 0.0;
  double objective = 0.0;  // cumulative, after this step
};

struct GreedyOptions {
  int threads = 1;
  // Score candidates by recomputing the whole objective instead of the
  // incremental O(|cover|^2) update. Same results, kept for cross-checking
  // and benchmarks.
  bool naive_gains = false;
  std::function<void(const GreedyStep&)> on_step;
};

// ||B^(x) ^ B^(P)||_1 + lambda * ||~B^(x) ^ ~B^(P)||_1 over all N^4 entries.
double objective(const Program& p, const SimilarityTensor& bx, double lambda);

// All sketches with a*n+b <= N, a2*n2+b2 <= N, strides >= 1, offsets >= 0 and
// n*n2 >= min_cover, in lexicographic (n, a, b, n2, a2, b2) order.
std::vector<Sketch> enumerate_sketches(int grid_n, int min_cover = 1);

// The restricted search space handed to the greedy loop and the oracle.
// Sketch covers must lie inside `universe`; objective terms are counted only
// on entries whose cells are both in `universe`.
struct SearchSpace {
  const SimilarityTensor* bx = nullptr;
  int cell_m = 1;
  CellSet universe;                      // cells contributing objective entries
  std::vector<Sketch> sketches;          // lexicographic order
  std::vector<int> component_cells;      // allowed component cell ids, ascending
};

SearchSpace full_search_space(const SimilarityTensor& bx, int cell_m, int min_cover);

// Greedy loop: each iteration scores every (sketch, component) candidate by
// its marginal objective gain and appends the best. Equal-gain sketches
// resolve to the lexicographically smallest; among components of the chosen
// sketch, the one similar to the most covered cells wins (then smallest
// cell), so renderings reproduce what the cover actually contains.
ScoredProgram greedy_synthesize(const SearchSpace& space, const SynthesisConfig& cfg,
                                const GreedyOptions& opts = {});

// Convenience entry: builds B^(x) from the image and searches components
// over every cell of the image.
ScoredProgram greedy_synthesize(const GridImage& img, const SynthesisConfig& cfg,
                                const GreedyOptions& opts = {});

struct OracleOptions {
  // Ceiling on the number of candidate programs (multisets of at most k
  // sketches; list order cannot change the objective).
  long long budget = 20'000'000;
  int threads = 1;
};

// Exhaustive maximization of the objective over programs of length <= k.
// Feasible only at small scale; throws BudgetError above the budget.
ScoredProgram oracle_synthesize(const SearchSpace& space, const SynthesisConfig& cfg,
                                const OracleOptions& opts = {});
ScoredProgram oracle_synthesize(const GridImage& img, const SynthesisConfig& cfg,
                                const OracleOptions& opts = {});

// Number of programs the oracle would enumerate (clamped at a large ceiling).
long long oracle_candidate_count(long long sketch_count, int k);

}  // namespace gridsynth
