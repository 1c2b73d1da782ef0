#include "gridsynth/synthesis.hpp"

#include <algorithm>

#include "gridsynth/parallel.hpp"

namespace gridsynth {

void validate(const SynthesisConfig& cfg) {
  if (cfg.k < 1) throw InputError("k must be >= 1");
  if (cfg.eps < 0) throw InputError("eps must be nonnegative");
  if (cfg.lambda < 0) throw InputError("lambda must be nonnegative");
  if (cfg.min_cover < 1) throw InputError("min_cover must be >= 1");
  validate(cfg.distance);
}

double objective(const Program& p, const SimilarityTensor& bx, double lambda) {
  if (p.grid_n != bx.grid_n())
    throw InputError("program grid " + std::to_string(p.grid_n) +
                     " does not match tensor grid " + std::to_string(bx.grid_n()));
  return objective_counts(bx, program_tensor(p)).value(lambda);
}

std::vector<Sketch> enumerate_sketches(int grid_n, int min_cover) {
  if (grid_n < 1) throw InputError("grid_n must be >= 1");
  if (min_cover < 1) throw InputError("min_cover must be >= 1");
  // Valid (count, stride, offset) triples for one axis, lexicographic.
  std::vector<std::array<int, 3>> axis;
  for (int n = 1; n <= grid_n; ++n)
    for (int a = 1; a * n <= grid_n; ++a)
      for (int b = 0; a * n + b <= grid_n; ++b) axis.push_back({n, a, b});

  std::vector<Sketch> out;
  for (const auto& row : axis)
    for (const auto& col : axis) {
      if (row[0] * col[0] < min_cover) continue;
      out.push_back({row[0], row[1], row[2], col[0], col[1], col[2]});
    }
  return out;
}

SearchSpace full_search_space(const SimilarityTensor& bx, int cell_m, int min_cover) {
  SearchSpace space;
  space.bx = &bx;
  space.cell_m = cell_m;
  space.universe = CellSet::full(bx.grid_n());
  space.sketches = enumerate_sketches(bx.grid_n(), min_cover);
  space.component_cells.resize(bx.cell_count());
  for (int c = 0; c < bx.cell_count(); ++c) space.component_cells[c] = c;
  return space;
}

namespace {

struct SketchInfo {
  CellSet mask;
  std::vector<std::uint16_t> cells;
};

std::vector<SketchInfo> precompute_covers(const std::vector<Sketch>& sketches, int grid_n) {
  std::vector<SketchInfo> infos(sketches.size());
  for (std::size_t i = 0; i < sketches.size(); ++i) {
    infos[i].mask = cover_cells(sketches[i], grid_n);
    infos[i].mask.for_each([&](int c) {
      infos[i].cells.push_back(static_cast<std::uint16_t>(c));
    });
  }
  return infos;
}

struct Gain {
  std::int64_t tp = 0;
  std::int64_t zeros = 0;  // change of the agreement-on-zeros count, <= 0
};

Gain incremental_gain(const SimilarityTensor& bx, const SimilarityTensor& bp,
                      const SketchInfo& info) {
  Gain g;
  std::int64_t fresh = 0;
  const int wpr = bx.words_per_row();
  const std::uint64_t* cm = info.mask.words();
  for (const std::uint16_t cell : info.cells) {
    const std::uint64_t* rp = bp.row(cell);
    const std::uint64_t* rx = bx.row(cell);
    for (int w = 0; w < wpr; ++w) {
      const std::uint64_t added = cm[w] & ~rp[w];
      g.tp += std::popcount(added & rx[w]);
      fresh += std::popcount(added);
    }
  }
  g.zeros = -(fresh - g.tp);
  return g;
}

void apply_cover(SimilarityTensor& bp, const SketchInfo& info) {
  const int wpr = bp.words_per_row();
  const std::uint64_t* cm = info.mask.words();
  for (const std::uint16_t cell : info.cells) {
    std::uint64_t* rp = bp.row(cell);
    for (int w = 0; w < wpr; ++w) rp[w] |= cm[w];
  }
}

Gain naive_gain(const SimilarityTensor& bx, const SimilarityTensor& bp,
                const CellSet& universe, const ObjectiveCounts& current,
                const SketchInfo& info) {
  SimilarityTensor with = bp;
  apply_cover(with, info);
  const ObjectiveCounts next = objective_counts(bx, with, universe);
  return {next.tp - current.tp, next.zeros_agree - current.zeros_agree};
}

// Component whose similarity row agrees with the most cells of the cover;
// ties go to the smallest cell id.
int pick_component(const SimilarityTensor& bx, const SketchInfo& info,
                   const std::vector<int>& candidates) {
  int best = candidates.front();
  int best_agree = -1;
  const int wpr = bx.words_per_row();
  for (const int cell : candidates) {
    const std::uint64_t* rx = bx.row(cell);
    int agree = 0;
    for (int w = 0; w < wpr; ++w) agree += std::popcount(rx[w] & info.mask.words()[w]);
    if (agree > best_agree) {
      best_agree = agree;
      best = cell;
    }
  }
  return best;
}

CellIndex cell_from_id(int id, int grid_n) { return {id / grid_n + 1, id % grid_n + 1}; }

}  // namespace

ScoredProgram greedy_synthesize(const SearchSpace& space, const SynthesisConfig& cfg,
                                const GreedyOptions& opts) {
  validate(cfg);
  const SimilarityTensor& bx = *space.bx;
  const int n = bx.grid_n();
  const std::vector<SketchInfo> infos = precompute_covers(space.sketches, n);

  SimilarityTensor bp(n);
  ObjectiveCounts counts = objective_counts(bx, bp, space.universe);

  ScoredProgram result;
  result.program.grid_n = n;
  result.program.cell_m = space.cell_m;

  for (int step = 1; step <= cfg.k && !infos.empty(); ++step) {
    // Per-chunk winners, merged in chunk order: identical for any thread count.
    const int threads = resolve_threads(opts.threads);
    const std::size_t chunk_count =
        std::min<std::size_t>(static_cast<std::size_t>(threads), infos.size());
    std::vector<std::size_t> chunk_best(chunk_count, SIZE_MAX);
    std::vector<Gain> chunk_gain(chunk_count);
    const std::size_t step_size = (infos.size() + chunk_count - 1) / chunk_count;
    parallel_chunks(chunk_count, static_cast<int>(chunk_count),
                    [&](std::size_t cb, std::size_t ce) {
      for (std::size_t c = cb; c < ce; ++c) {
        const std::size_t begin = c * step_size;
        const std::size_t end = std::min(begin + step_size, infos.size());
        std::size_t best = SIZE_MAX;
        Gain best_gain;
        for (std::size_t i = begin; i < end; ++i) {
          const Gain g = opts.naive_gains
                             ? naive_gain(bx, bp, space.universe, counts, infos[i])
                             : incremental_gain(bx, bp, infos[i]);
          if (best == SIZE_MAX ||
              weighted_sign(g.tp - best_gain.tp, g.zeros - best_gain.zeros, cfg.lambda) > 0) {
            best = i;
            best_gain = g;
          }
        }
        chunk_best[c] = best;
        chunk_gain[c] = best_gain;
      }
    });

    std::size_t best = SIZE_MAX;
    Gain gain;
    for (std::size_t c = 0; c < chunk_count; ++c) {
      if (chunk_best[c] == SIZE_MAX) continue;
      if (best == SIZE_MAX ||
          weighted_sign(chunk_gain[c].tp - gain.tp, chunk_gain[c].zeros - gain.zeros,
                        cfg.lambda) > 0) {
        best = chunk_best[c];
        gain = chunk_gain[c];
      }
    }
    if (best == SIZE_MAX) break;
    if (cfg.early_stop && weighted_sign(gain.tp, gain.zeros, cfg.lambda) <= 0) break;

    const int comp_cell = pick_component(bx, infos[best], space.component_cells);
    apply_cover(bp, infos[best]);
    counts.tp += gain.tp;
    counts.zeros_agree += gain.zeros;

    const double gain_value =
        static_cast<double>(gain.tp) + cfg.lambda * static_cast<double>(gain.zeros);
    result.program.pairs.emplace_back(space.sketches[best],
                                      Component{cell_from_id(comp_cell, n)});
    result.per_step_gains.push_back(gain_value);
    if (opts.on_step) {
      GreedyStep rec;
      rec.iteration = step;
      rec.sketch = space.sketches[best];
      rec.component = cell_from_id(comp_cell, n);
      rec.gain_tp = gain.tp;
      rec.gain_zeros = gain.zeros;
      rec.gain = gain_value;
      rec.objective = counts.value(cfg.lambda);
      opts.on_step(rec);
    }
  }

  result.objective =
      objective_counts(bx, program_tensor(result.program), space.universe).value(cfg.lambda);
  return result;
}

ScoredProgram greedy_synthesize(const GridImage& img, const SynthesisConfig& cfg,
                                const GreedyOptions& opts) {
  validate(cfg);
  const SimilarityTensor bx =
      build_similarity_tensor(img, cfg.eps, cfg.distance, opts.threads);
  const SearchSpace space = full_search_space(bx, img.cell_m(), cfg.min_cover);
  return greedy_synthesize(space, cfg, opts);
}

long long oracle_candidate_count(long long sketch_count, int k) {
  constexpr long long kCeiling = 4'000'000'000'000'000'000LL;
  __int128 total = 0;
  for (int j = 0; j <= k; ++j) {
    // C(sketch_count + j - 1, j): multisets of size j.
    __int128 c = 1;
    for (int t = 1; t <= j; ++t) {
      c = c * (sketch_count - 1 + t) / t;
      if (c > kCeiling) return kCeiling;
    }
    total += c;
    if (total > kCeiling) return kCeiling;
  }
  return static_cast<long long>(total);
}

namespace {

struct OracleBest {
  bool valid = false;
  ObjectiveCounts counts;
  std::vector<std::size_t> picks;
};

// Strictly-better replaces, so ties keep the first program in enumeration
// order (prefix-first, then ascending sketch index).
void consider(OracleBest& best, const ObjectiveCounts& counts,
              const std::vector<std::size_t>& picks, double lambda) {
  if (!best.valid ||
      weighted_sign(counts.tp - best.counts.tp,
                    counts.zeros_agree - best.counts.zeros_agree, lambda) > 0) {
    best.valid = true;
    best.counts = counts;
    best.picks = picks;
  }
}

struct OracleWalker {
  const SimilarityTensor& bx;
  const std::vector<SketchInfo>& infos;
  double lambda;
  int k;

  SimilarityTensor bp;
  ObjectiveCounts counts;
  std::vector<std::size_t> picks;
  std::vector<std::vector<std::uint64_t>> saved;  // per-level row backups
  OracleBest best;

  OracleWalker(const SimilarityTensor& bx_, const std::vector<SketchInfo>& infos_,
               double lambda_, int k_, const ObjectiveCounts& base)
      : bx(bx_), infos(infos_), lambda(lambda_), k(k_), bp(bx_.grid_n()), counts(base) {
    saved.resize(k_);
  }

  void dfs(std::size_t start) {
    for (std::size_t i = start; i < infos.size(); ++i) {
      const Gain g = incremental_gain(bx, bp, infos[i]);
      // push
      const SketchInfo& info = infos[i];
      const int wpr = bp.words_per_row();
      auto& backup = saved[picks.size()];
      backup.resize(info.cells.size() * wpr);
      std::size_t o = 0;
      for (const std::uint16_t cell : info.cells)
        for (int w = 0; w < wpr; ++w) backup[o++] = bp.row(cell)[w];
      apply_cover(bp, info);
      counts.tp += g.tp;
      counts.zeros_agree += g.zeros;
      picks.push_back(i);

      consider(best, counts, picks, lambda);
      if (static_cast<int>(picks.size()) < k) dfs(i);

      // pop
      picks.pop_back();
      o = 0;
      for (const std::uint16_t cell : info.cells)
        for (int w = 0; w < wpr; ++w) bp.row(cell)[w] = backup[o++];
      counts.tp -= g.tp;
      counts.zeros_agree -= g.zeros;
    }
  }
};

}  // namespace

ScoredProgram oracle_synthesize(const SearchSpace& space, const SynthesisConfig& cfg,
                                const OracleOptions& opts) {
  validate(cfg);
  const SimilarityTensor& bx = *space.bx;
  const int n = bx.grid_n();
  const long long candidates =
      oracle_candidate_count(static_cast<long long>(space.sketches.size()), cfg.k);
  if (candidates > opts.budget)
    throw BudgetError("oracle enumeration of " + std::to_string(candidates) +
                          " candidate programs exceeds budget " +
                          std::to_string(opts.budget),
                      candidates);

  const std::vector<SketchInfo> infos = precompute_covers(space.sketches, n);
  const ObjectiveCounts base = objective_counts(bx, SimilarityTensor(n), space.universe);

  OracleBest overall;
  consider(overall, base, {}, cfg.lambda);  // the empty program is a candidate

  if (!infos.empty()) {
    const int threads = resolve_threads(opts.threads);
    const std::size_t chunk_count =
        std::min<std::size_t>(static_cast<std::size_t>(threads), infos.size());
    std::vector<OracleBest> chunk_best(chunk_count);
    const std::size_t step = (infos.size() + chunk_count - 1) / chunk_count;
    parallel_chunks(chunk_count, static_cast<int>(chunk_count),
                    [&](std::size_t cb, std::size_t ce) {
      for (std::size_t c = cb; c < ce; ++c) {
        OracleWalker walker(bx, infos, cfg.lambda, cfg.k, base);
        const std::size_t begin = c * step;
        const std::size_t end = std::min(begin + step, infos.size());
        for (std::size_t first = begin; first < end; ++first) {
          const Gain g = incremental_gain(bx, walker.bp, infos[first]);
          auto& backup = walker.saved[0];
          const int wpr = walker.bp.words_per_row();
          backup.resize(infos[first].cells.size() * wpr);
          std::size_t o = 0;
          for (const std::uint16_t cell : infos[first].cells)
            for (int w = 0; w < wpr; ++w) backup[o++] = walker.bp.row(cell)[w];
          apply_cover(walker.bp, infos[first]);
          walker.counts.tp += g.tp;
          walker.counts.zeros_agree += g.zeros;
          walker.picks.push_back(first);

          consider(walker.best, walker.counts, walker.picks, cfg.lambda);
          if (cfg.k > 1) walker.dfs(first);

          walker.picks.pop_back();
          o = 0;
          for (const std::uint16_t cell : infos[first].cells)
            for (int w = 0; w < wpr; ++w) walker.bp.row(cell)[w] = backup[o++];
          walker.counts.tp -= g.tp;
          walker.counts.zeros_agree -= g.zeros;
        }
        chunk_best[c] = walker.best;
      }
    });
    // Merge in chunk order; ties keep the earlier chunk, matching sequential
    // enumeration order.
    for (const OracleBest& cb : chunk_best) {
      if (!cb.valid) continue;
      consider(overall, cb.counts, cb.picks, cfg.lambda);
    }
  }

  ScoredProgram result;
  result.program.grid_n = n;
  result.program.cell_m = space.cell_m;
  for (const std::size_t idx : overall.picks) {
    const int comp = pick_component(bx, infos[idx], space.component_cells);
    result.program.pairs.emplace_back(space.sketches[idx],
                                      Component{cell_from_id(comp, n)});
  }
  result.objective =
      objective_counts(bx, program_tensor(result.program), space.universe).value(cfg.lambda);
  return result;
}

ScoredProgram oracle_synthesize(const GridImage& img, const SynthesisConfig& cfg,
                                const OracleOptions& opts) {
  validate(cfg);
  const SimilarityTensor bx =
      build_similarity_tensor(img, cfg.eps, cfg.distance, opts.threads);
  const SearchSpace space = full_search_space(bx, img.cell_m(), cfg.min_cover);
  return oracle_synthesize(space, cfg, opts);
}

}  // namespace gridsynth
