#include "gridsynth/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gridsynth/datagen.hpp"
#include "gridsynth/parallel.hpp"
#include "gridsynth/png_io.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace gridsynth {

CoverMetrics compare_covers(const Program& pred, const Program& truth) {
  if (pred.grid_n != truth.grid_n)
    throw InputError("programs cover different grids: " + std::to_string(pred.grid_n) +
                     " vs " + std::to_string(truth.grid_n));
  const int n = pred.grid_n;
  CellSet pred_cells(n), truth_cells(n);
  for (const auto& [s, c] : pred.pairs) pred_cells |= cover_cells(s, n);
  for (const auto& [s, c] : truth.pairs) truth_cells |= cover_cells(s, n);

  const int inter = pred_cells.intersect_count(truth_cells);
  const int np = pred_cells.count();
  const int nt = truth_cells.count();
  CoverMetrics m;
  m.precision = np > 0 ? static_cast<double>(inter) / np : 0.0;
  m.recall = nt > 0 ? static_cast<double>(inter) / nt : 0.0;
  m.f1 = (m.precision + m.recall) > 0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double covered_pixel_accuracy(const GridImage& pred_img, const GridImage& truth_img,
                              const CellSet& cells, int tol) {
  if (pred_img.grid_n() != truth_img.grid_n() || pred_img.cell_m() != truth_img.cell_m())
    throw InputError("image shapes differ");
  if (cells.grid_n() != pred_img.grid_n())
    throw InputError("cell set grid does not match images");
  const int m = pred_img.cell_m();
  std::int64_t total = 0, matching = 0;
  const int n = pred_img.grid_n();
  for (int t = 1; t <= n; ++t)
    for (int u = 1; u <= n; ++u) {
      if (!cells.test(t, u)) continue;
      const int x0 = (u - 1) * m, y0 = (t - 1) * m;
      for (int dy = 0; dy < m; ++dy) {
        const std::uint8_t* pp = pred_img.px(x0, y0 + dy);
        const std::uint8_t* tp = truth_img.px(x0, y0 + dy);
        for (int dx = 0; dx < m; ++dx) {
          ++total;
          const bool ok = std::abs(int(pp[3 * dx]) - int(tp[3 * dx])) <= tol &&
                          std::abs(int(pp[3 * dx + 1]) - int(tp[3 * dx + 1])) <= tol &&
                          std::abs(int(pp[3 * dx + 2]) - int(tp[3 * dx + 2])) <= tol;
          matching += ok;
        }
      }
    }
  return total > 0 ? static_cast<double>(matching) / static_cast<double>(total) : 1.0;
}

namespace {

struct CorpusInstance {
  std::string id;
  fs::path full_png;      // empty when absent
  fs::path partial_png;   // empty when absent
  fs::path mask;          // empty when absent
  fs::path program;       // ground truth, empty when absent
};

struct CorpusLayout {
  int grid_n = 0;
  int cell_m = 0;
  std::vector<CorpusInstance> instances;
};

CorpusLayout scan_corpus(const std::string& dir, const EvalOptions& opts) {
  if (!fs::is_directory(dir)) throw InputError("corpus directory '" + dir + "' not found");
  CorpusLayout layout;
  const fs::path manifest_path = fs::path(dir) / "manifest.jsonl";
  if (fs::exists(manifest_path)) {
    const fs::path spec_path = fs::path(dir) / "spec.json";
    if (!fs::exists(spec_path))
      throw InputError("corpus has manifest.jsonl but no spec.json");
    std::ifstream spec_in(spec_path, std::ios::binary);
    std::ostringstream spec_buf;
    spec_buf << spec_in.rdbuf();
    const GeneratorSpec spec = spec_from_json(spec_buf.str());
    layout.grid_n = spec.grid_n;
    layout.cell_m = spec.cell_m;

    std::ifstream in(manifest_path, std::ios::binary);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      ordered_json j;
      try {
        j = ordered_json::parse(line);
      } catch (const std::exception& e) {
        throw InputError("manifest line " + std::to_string(line_no) + ": " + e.what());
      }
      CorpusInstance inst;
      inst.id = std::to_string(j.at("index").get<long long>());
      inst.full_png = fs::path(dir) / j.at("full").get<std::string>();
      inst.partial_png = fs::path(dir) / j.at("partial").get<std::string>();
      inst.mask = fs::path(dir) / j.at("mask").get<std::string>();
      inst.program = fs::path(dir) / j.at("program").get<std::string>();
      layout.instances.push_back(std::move(inst));
    }
  } else {
    // Plain directory: <stem>.png with a matching <stem>.mask; no ground truth.
    if (opts.grid_n < 1 || opts.cell_m < 1)
      throw InputError("corpus has no spec.json; pass the grid geometry explicitly");
    layout.grid_n = opts.grid_n;
    layout.cell_m = opts.cell_m;
    std::vector<std::string> stems;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.is_regular_file() && entry.path().extension() == ".mask")
        stems.push_back(entry.path().stem().string());
    std::sort(stems.begin(), stems.end());
    for (const std::string& stem : stems) {
      CorpusInstance inst;
      inst.id = stem;
      const fs::path png = fs::path(dir) / (stem + ".png");
      if (!fs::exists(png))
        throw InputError("instance '" + stem + "': missing " + png.string());
      inst.full_png = png;
      inst.mask = fs::path(dir) / (stem + ".mask");
      layout.instances.push_back(std::move(inst));
    }
  }
  if (layout.instances.empty()) throw InputError("corpus '" + dir + "' has no instances");
  return layout;
}

std::optional<Program> load_truth(const CorpusInstance& inst, const std::string& id) {
  if (inst.program.empty() || !fs::exists(inst.program)) return std::nullopt;
  std::ifstream in(inst.program, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_program(buf.str());
  } catch (const InputError& e) {
    throw InputError("instance '" + id + "': " + e.what());
  }
}

StructureReport evaluate_instance(const CorpusInstance& inst, const CorpusLayout& layout,
                                  const SynthesisConfig& cfg, const EvalOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  StructureReport rep;
  const std::optional<Program> truth = load_truth(inst, inst.id);

  if (opts.mode == EvalMode::kSynth) {
    const GridImage full = load_grid_image(inst.full_png.string(), layout.grid_n,
                                           layout.cell_m);
    const SimilarityTensor bx = build_similarity_tensor(full, cfg.eps, cfg.distance, 1);
    const SearchSpace space = full_search_space(bx, full.cell_m(), cfg.min_cover);
    const ScoredProgram synth = greedy_synthesize(space, cfg, {});
    rep.objective_pred = synth.objective;
    if (truth) {
      const CoverMetrics cm = compare_covers(synth.program, *truth);
      rep.cover_precision = cm.precision;
      rep.cover_recall = cm.recall;
      rep.cover_f1 = cm.f1;
      rep.objective_true = objective(*truth, bx, cfg.lambda);
    }
    const StructureRendering rendering = execute(synth.program, Rgb{0, 0, 0}, &full);
    rep.covered_pixel_accuracy =
        covered_pixel_accuracy(rendering.image, full, rendering.covered, opts.tol);
  } else {
    GridImage full = load_grid_image(inst.full_png.string(), layout.grid_n, layout.cell_m);
    PartialImage partial = [&] {
      if (!inst.partial_png.empty() && fs::exists(inst.partial_png))
        return load_partial(inst.partial_png.string(), inst.mask.string(), layout.grid_n,
                            layout.cell_m);
      // Plain corpora carry only the full image; derive the partial from it.
      std::ifstream min(inst.mask, std::ios::binary);
      std::ostringstream mbuf;
      mbuf << min.rdbuf();
      return make_partial(full, parse_mask(mbuf.str()));
    }();
    const CompletionResult completion = complete_pipeline(partial, cfg, {});
    const SimilarityTensor bx = build_similarity_tensor(full, cfg.eps, cfg.distance, 1);
    rep.objective_pred = objective(completion.extrapolated, bx, cfg.lambda);

    CellSet measured(layout.grid_n);
    if (truth) {
      const CoverMetrics cm = compare_covers(completion.extrapolated, *truth);
      rep.cover_precision = cm.precision;
      rep.cover_recall = cm.recall;
      rep.cover_f1 = cm.f1;
      rep.objective_true = objective(*truth, bx, cfg.lambda);
      for (const auto& [s, c] : truth->pairs)
        measured |= cover_cells(s, layout.grid_n);
    } else {
      measured = CellSet::full(layout.grid_n);
    }
    // Accuracy over the unknown part of the measured cells.
    CellSet unknown_measured(layout.grid_n);
    for (int t = 1; t <= layout.grid_n; ++t)
      for (int u = 1; u <= layout.grid_n; ++u)
        if (measured.test(t, u) && !partial.known.test(t, u)) unknown_measured.set(t, u);
    rep.covered_pixel_accuracy =
        covered_pixel_accuracy(completion.image, full, unknown_measured, opts.tol);
  }

  const auto t1 = std::chrono::steady_clock::now();
  rep.runtime_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count();
  return rep;
}

void put_optional(ordered_json& j, const char* key, const std::optional<double>& v) {
  if (v)
    j[key] = *v;
  else
    j[key] = nullptr;
}

ordered_json aggregate(const std::vector<double>& values) {
  if (values.empty()) return nullptr;
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  double sum = 0.0;
  for (double v : sorted) sum += v;
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 == 1
                            ? sorted[mid]
                            : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return ordered_json{{"mean", sum / sorted.size()}, {"median", median},
                      {"count", sorted.size()}};
}

ordered_json config_json(const SynthesisConfig& cfg, const EvalOptions& opts) {
  return ordered_json{
      {"mode", opts.mode == EvalMode::kSynth ? "synth" : "complete"},
      {"k", cfg.k},
      {"eps", cfg.eps},
      {"lambda", cfg.lambda},
      {"min_cover", cfg.min_cover},
      {"early_stop", cfg.early_stop},
      {"hist_bins", cfg.distance.hist_bins},
      {"w_emd", cfg.distance.w_emd},
      {"w_struct", cfg.distance.w_struct},
      {"tol", opts.tol},
  };
}

}  // namespace

CorpusEvaluation evaluate_corpus(const std::string& dir, const SynthesisConfig& cfg,
                                 const EvalOptions& opts) {
  validate(cfg);
  const CorpusLayout layout = scan_corpus(dir, opts);
  CorpusEvaluation eval;
  eval.mode = opts.mode;
  eval.instances.resize(layout.instances.size());
  std::vector<std::string> errors(layout.instances.size());
  parallel_chunks(layout.instances.size(), opts.threads,
                  [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      eval.instances[i].id = layout.instances[i].id;
      try {
        eval.instances[i].report =
            evaluate_instance(layout.instances[i], layout, cfg, opts);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  });
  for (std::size_t i = 0; i < errors.size(); ++i)
    if (!errors[i].empty())
      throw InputError("instance '" + layout.instances[i].id + "': " + errors[i]);
  return eval;
}

std::string report_json(const CorpusEvaluation& eval, const SynthesisConfig& cfg,
                        const EvalOptions& opts) {
  std::vector<double> precision, recall, f1, obj_pred, obj_true, acc, runtime;
  for (const InstanceRecord& r : eval.instances) {
    if (r.report.cover_precision) precision.push_back(*r.report.cover_precision);
    if (r.report.cover_recall) recall.push_back(*r.report.cover_recall);
    if (r.report.cover_f1) f1.push_back(*r.report.cover_f1);
    obj_pred.push_back(r.report.objective_pred);
    if (r.report.objective_true) obj_true.push_back(*r.report.objective_true);
    if (r.report.covered_pixel_accuracy) acc.push_back(*r.report.covered_pixel_accuracy);
    runtime.push_back(static_cast<double>(r.report.runtime_ms));
  }
  ordered_json j;
  j["config"] = config_json(cfg, opts);
  j["instances"] = eval.instances.size();
  j["aggregates"] = ordered_json{
      {"cover_precision", aggregate(precision)},
      {"cover_recall", aggregate(recall)},
      {"cover_f1", aggregate(f1)},
      {"objective_pred", aggregate(obj_pred)},
      {"objective_true", aggregate(obj_true)},
      {"covered_pixel_accuracy", aggregate(acc)},
      {"runtime_ms", aggregate(runtime)},
  };
  return j.dump(2) + "\n";
}

std::string records_jsonl(const CorpusEvaluation& eval) {
  std::ostringstream out;
  for (const InstanceRecord& r : eval.instances) {
    ordered_json j;
    j["id"] = r.id;
    put_optional(j, "cover_precision", r.report.cover_precision);
    put_optional(j, "cover_recall", r.report.cover_recall);
    put_optional(j, "cover_f1", r.report.cover_f1);
    j["objective_pred"] = r.report.objective_pred;
    put_optional(j, "objective_true", r.report.objective_true);
    put_optional(j, "covered_pixel_accuracy", r.report.covered_pixel_accuracy);
    j["runtime_ms"] = r.report.runtime_ms;
    out << j.dump() << "\n";
  }
  return out.str();
}

}  // namespace gridsynth
