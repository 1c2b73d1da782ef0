#include "gridsynth/extrapolation.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gridsynth/png_io.hpp"

namespace gridsynth {

PartialImage make_partial(GridImage image, CellSet known) {
  if (known.grid_n() != image.grid_n())
    throw InputError("known mask grid " + std::to_string(known.grid_n()) +
                     " does not match image grid " + std::to_string(image.grid_n()));
  if (known.count() == 0) throw InputError("partial image has no known cells");
  const int n = image.grid_n();
  for (int t = 1; t <= n; ++t)
    for (int u = 1; u <= n; ++u)
      if (!known.test(t, u)) image.fill_cell({t, u}, kUnknownSentinel);
  return {std::move(image), std::move(known)};
}

std::string serialize_mask(const CellSet& known) {
  const int n = known.grid_n();
  std::ostringstream out;
  out << "gridsynth-mask v1 N=" << n << "\n";
  for (int t = 1; t <= n; ++t) {
    for (int u = 1; u <= n; ++u) out << (known.test(t, u) ? '1' : '0');
    out << "\n";
  }
  return out.str();
}

CellSet parse_mask(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    std::string line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw InputError("mask line 1: missing header");

  int n = 0;
  {
    std::istringstream head(lines[0]);
    std::string magic, version, nfield;
    head >> magic >> version >> nfield;
    if (magic != "gridsynth-mask" || version != "v1" || nfield.rfind("N=", 0) != 0)
      throw InputError("mask line 1: expected 'gridsynth-mask v1 N=<int>'");
    const char* first = nfield.data() + 2;
    const char* last = nfield.data() + nfield.size();
    const auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec != std::errc() || ptr != last || n < 1)
      throw InputError("mask line 1: bad grid size '" + nfield + "'");
  }
  if (static_cast<int>(lines.size()) != n + 1)
    throw InputError("mask has " + std::to_string(lines.size() - 1) + " rows, expected " +
                     std::to_string(n));
  CellSet known(n);
  for (int t = 1; t <= n; ++t) {
    const std::string& row = lines[t];
    if (static_cast<int>(row.size()) != n)
      throw InputError("mask line " + std::to_string(t + 1) + ": expected " +
                       std::to_string(n) + " characters");
    for (int u = 1; u <= n; ++u) {
      const char c = row[u - 1];
      if (c == '1')
        known.set(t, u);
      else if (c != '0')
        throw InputError("mask line " + std::to_string(t + 1) +
                         ": characters must be 0 or 1");
    }
  }
  return known;
}

PartialImage load_partial(const std::string& png_path, const std::string& mask_path,
                          int grid_n, int cell_m) {
  GridImage image = load_grid_image(png_path, grid_n, cell_m);
  std::ifstream in(mask_path, std::ios::binary);
  if (!in) throw InputError("cannot open mask file '" + mask_path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  CellSet known = parse_mask(buf.str());
  if (known.grid_n() != grid_n)
    throw InputError("mask grid " + std::to_string(known.grid_n()) +
                     " does not match requested grid " + std::to_string(grid_n));
  return make_partial(std::move(image), std::move(known));
}

ScoredProgram synthesize_partial(const PartialImage& p, const SynthesisConfig& cfg,
                                 const GreedyOptions& opts) {
  validate(cfg);
  if (p.known.grid_n() != p.image.grid_n())
    throw InputError("known mask does not match image grid");
  if (p.known.count() == 0) throw InputError("partial image has no known cells");

  const SimilarityTensor bx =
      build_similarity_tensor(p.image, cfg.eps, cfg.distance, opts.threads);
  SearchSpace space;
  space.bx = &bx;
  space.cell_m = p.image.cell_m();
  space.universe = p.known;
  for (const Sketch& s : enumerate_sketches(p.image.grid_n(), cfg.min_cover))
    if (p.known.contains(cover_cells(s, p.image.grid_n()))) space.sketches.push_back(s);
  p.known.for_each([&](int c) { space.component_cells.push_back(c); });
  return greedy_synthesize(space, cfg, opts);
}

Program extrapolate(const Program& p_part, int grid_n, const ExtrapolateOptions& opts) {
  if (grid_n < p_part.grid_n)
    throw InputError("target grid smaller than the program grid");
  Program out = p_part;
  out.grid_n = grid_n;
  validate(out);
  for (auto& [s, comp] : out.pairs) {
    if (opts.extend_offsets) {
      s.b = s.b % s.a;
      s.b2 = s.b2 % s.a2;
    }
    s.n = (grid_n - s.b) / s.a;
    s.n2 = (grid_n - s.b2) / s.a2;
  }
  return out;
}

CompletionResult complete_pipeline(const PartialImage& p, const SynthesisConfig& cfg,
                                   const GreedyOptions& opts, const ExtrapolateOptions& ex) {
  CompletionResult result;
  result.partial = synthesize_partial(p, cfg, opts);
  result.extrapolated = extrapolate(result.partial.program, p.image.grid_n(), ex);
  StructureRendering rendering = execute_onto(result.extrapolated, p.image, p.known, &p.image);

  CellSet filled = rendering.covered;
  filled |= p.known;
  const int n = p.image.grid_n();
  for (int t = 1; t <= n; ++t) {
    for (int u = 1; u <= n; ++u) {
      if (filled.test(t, u)) continue;
      int best_t = 0, best_u = 0, best_d = 1 << 30;
      for (int t2 = 1; t2 <= n; ++t2)
        for (int u2 = 1; u2 <= n; ++u2) {
          if (!filled.test(t2, u2)) continue;
          const int d = std::abs(t - t2) + std::abs(u - u2);
          if (d < best_d) {
            best_d = d;
            best_t = t2;
            best_u = u2;
          }
        }
      const SubImage donor = subimage(rendering.image, {best_t, best_u});
      rendering.image.blit_cell({t, u}, donor.pixels.data());
    }
  }
  result.covered = rendering.covered;
  result.image = std::move(rendering.image);
  return result;
}

GridImage complete_baseline(const PartialImage& p, const SynthesisConfig& cfg,
                            const GreedyOptions& opts, const ExtrapolateOptions& ex) {
  return complete_pipeline(p, cfg, opts, ex).image;
}

}  // namespace gridsynth
