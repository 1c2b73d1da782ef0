#pragma once

#include <optional>
#include <string>

#include "gridsynth/extrapolation.hpp"
#include "gridsynth/synthesis.hpp"

namespace gridsynth {

struct CoverMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision/recall/F1 over the cell sets covered by each program's sketches.
// An empty predicted (or true) cover scores 0 rather than being undefined.
CoverMetrics compare_covers(const Program& pred, const Program& truth);

// Fraction of pixels within the given cells whose channels all differ by at
// most tol bytes.
double covered_pixel_accuracy(const GridImage& pred_img, const GridImage& truth_img,
                              const CellSet& cells, int tol);

// Optional fields are absent for corpora without ground-truth programs.
struct StructureReport {
  std::optional<double> cover_precision;
  std::optional<double> cover_recall;
  std::optional<double> cover_f1;
  double objective_pred = 0.0;
  std::optional<double> objective_true;
  std::optional<double> covered_pixel_accuracy;
  std::int64_t runtime_ms = 0;  // wall clock; the only nondeterministic field
};

enum class EvalMode { kSynth, kComplete };

struct EvalOptions {
  EvalMode mode = EvalMode::kSynth;
  int tol = 0;      // byte tolerance for pixel accuracy
  int threads = 1;
  // Grid geometry for corpora without a spec.json (image + mask pairs).
  int grid_n = 0;
  int cell_m = 0;
};

struct InstanceRecord {
  std::string id;
  StructureReport report;
};

struct CorpusEvaluation {
  EvalMode mode = EvalMode::kSynth;
  std::vector<InstanceRecord> instances;
};

// Evaluates every instance of a corpus directory. Accepts the generated
// corpus layout (manifest.jsonl + spec.json) or a plain directory of
// <stem>.png / <stem>.mask pairs without ground truth.
CorpusEvaluation evaluate_corpus(const std::string& dir, const SynthesisConfig& cfg,
                                 const EvalOptions& opts);

// Single JSON document with per-field mean/median aggregates and the
// effective configuration.
std::string report_json(const CorpusEvaluation& eval, const SynthesisConfig& cfg,
                        const EvalOptions& opts);

// One JSON line per instance.
std::string records_jsonl(const CorpusEvaluation& eval);

}  // namespace gridsynth
