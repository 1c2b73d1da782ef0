#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "cli_settings.hpp"
#include "gridsynth/datagen.hpp"
#include "gridsynth/evaluation.hpp"
#include "gridsynth/extrapolation.hpp"
#include "gridsynth/png_io.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;
using namespace gridsynth;
using cli::Settings;

namespace {

std::string env_key(const std::string& key) {
  std::string out = "GRIDSYNTH_";
  for (const char c : key) out += c == '-' ? '_' : static_cast<char>(std::toupper(c));
  return out;
}

void parse_into(const std::string& text, int& out, const std::string& key) {
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || p != text.data() + text.size())
    throw InputError("value for '" + key + "' is not an integer: '" + text + "'");
}

void parse_into(const std::string& text, long long& out, const std::string& key) {
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || p != text.data() + text.size())
    throw InputError("value for '" + key + "' is not an integer: '" + text + "'");
}

void parse_into(const std::string& text, std::uint64_t& out, const std::string& key) {
  const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || p != text.data() + text.size())
    throw InputError("value for '" + key + "' is not an integer: '" + text + "'");
}

void parse_into(const std::string& text, double& out, const std::string& key) {
  try {
    std::size_t used = 0;
    out = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
  } catch (const std::exception&) {
    throw InputError("value for '" + key + "' is not a number: '" + text + "'");
  }
}

void parse_into(const std::string& text, bool& out, const std::string& key) {
  if (text == "true" || text == "1" || text == "yes")
    out = true;
  else if (text == "false" || text == "0" || text == "no")
    out = false;
  else
    throw InputError("value for '" + key + "' is not a boolean: '" + text + "'");
}

void parse_into(const std::string& text, std::string& out, const std::string&) {
  out = text;
}

struct Layered {
  std::map<std::string, std::string> file_values;
  std::map<std::string, bool> provided;  // set by flag, file, or env

  std::optional<std::string> lookup(const std::string& key) const {
    if (const auto it = file_values.find(key); it != file_values.end()) return it->second;
    if (const char* env = std::getenv(env_key(key).c_str())) return std::string(env);
    return std::nullopt;
  }
};

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path prepare_out_dir(const std::string& out) {
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw InputError("cannot create directory '" + out + "': " + ec.message());
  return out;
}

void require_grid_flags(const Settings& st) {
  if (st.grid_n < 1 || st.cell_m < 1)
    throw InputError("--grid-n and --cell-m are required (both >= 1)");
}

ordered_json config_echo(const Settings& st) {
  ordered_json j;
  j["grid_n"] = st.grid_n;
  j["cell_m"] = st.cell_m;
  j["k"] = st.k;
  j["eps"] = st.eps;
  j["lambda"] = st.lambda;
  j["min_cover"] = st.min_cover;
  j["early_stop"] = st.early_stop;
  j["hist_bins"] = st.hist_bins;
  j["w_emd"] = st.w_emd;
  j["w_struct"] = st.w_struct;
  j["seed"] = st.seed;
  j["background"] = st.background;
  j["tol"] = st.tol;
  return j;
}

ordered_json sketch_json(const Sketch& s) {
  return ordered_json{{"n", s.n},   {"a", s.a},   {"b", s.b},
                      {"n2", s.n2}, {"a2", s.a2}, {"b2", s.b2}};
}

ordered_json pairs_json(const Program& p) {
  ordered_json arr = ordered_json::array();
  for (const auto& [s, comp] : p.pairs) {
    ordered_json pj;
    pj["sketch"] = sketch_json(s);
    if (comp.is_cell())
      pj["component"] = "cell:" + std::to_string(comp.cell().t) + "," +
                        std::to_string(comp.cell().u);
    else
      pj["component"] = "raw:" + std::to_string(comp.raw().size()) + " bytes";
    arr.push_back(std::move(pj));
  }
  return arr;
}

void embed_components(Program& p, const GridImage& source) {
  for (auto& [s, comp] : p.pairs)
    if (comp.is_cell()) comp.source = subimage(source, comp.cell()).pixels;
}

int cmd_synth(const Settings& st, const std::string& image_path, const std::string& out,
              bool render, bool embed, bool progress) {
  require_grid_flags(st);
  const GridImage img = load_grid_image(image_path, st.grid_n, st.cell_m);
  const SynthesisConfig cfg = st.synthesis();

  std::vector<GreedyStep> steps;
  GreedyOptions gopts;
  gopts.threads = st.threads;
  if (progress) gopts.on_step = [&steps](const GreedyStep& s) { steps.push_back(s); };

  ScoredProgram result = greedy_synthesize(img, cfg, gopts);
  if (embed) embed_components(result.program, img);

  const fs::path dir = prepare_out_dir(out);
  const std::string stem = stem_of(image_path);
  const fs::path prog_path = dir / (stem + ".prog");
  write_text(prog_path, serialize(result.program));

  ordered_json summary;
  summary["command"] = "synth";
  summary["input"] = image_path;
  summary["config"] = config_echo(st);
  summary["objective"] = result.objective;
  summary["per_step_gains"] = result.per_step_gains;
  summary["pairs"] = pairs_json(result.program);
  summary["program_file"] = prog_path.filename().string();

  if (render) {
    const StructureRendering rendering =
        execute(result.program, cli::parse_color(st.background), &img);
    const fs::path png_path = dir / (stem + "_render.png");
    write_png(png_path.string(), rendering.image);
    summary["render_file"] = png_path.filename().string();
  }
  if (progress) {
    std::ostringstream lines;
    for (const GreedyStep& s : steps) {
      ordered_json j;
      j["iteration"] = s.iteration;
      j["sketch"] = sketch_json(s.sketch);
      j["component"] = {s.component.t, s.component.u};
      j["gain"] = s.gain;
      j["objective"] = s.objective;
      lines << j.dump() << "\n";
    }
    const fs::path prog_file = dir / (stem + "_progress.jsonl");
    write_text(prog_file, lines.str());
    summary["progress_file"] = prog_file.filename().string();
  }
  write_text(dir / (stem + "_synth.json"), summary.dump(2) + "\n");
  std::cout << prog_path.string() << "\n";
  return 0;
}

int cmd_complete(const Settings& st, const std::string& partial_path,
                 const std::string& mask_path, const std::string& out,
                 bool extend_offsets) {
  require_grid_flags(st);
  const PartialImage partial =
      load_partial(partial_path, mask_path, st.grid_n, st.cell_m);
  const SynthesisConfig cfg = st.synthesis();
  GreedyOptions gopts;
  gopts.threads = st.threads;
  ExtrapolateOptions ex;
  ex.extend_offsets = extend_offsets;

  const CompletionResult result = complete_pipeline(partial, cfg, gopts, ex);

  const fs::path dir = prepare_out_dir(out);
  const std::string stem = stem_of(partial_path);
  const fs::path png_path = dir / (stem + "_completed.png");
  const fs::path prog_path = dir / (stem + "_extrapolated.prog");
  write_png(png_path.string(), result.image);
  write_text(prog_path, serialize(result.extrapolated));

  ordered_json summary;
  summary["command"] = "complete";
  summary["input"] = partial_path;
  summary["mask"] = mask_path;
  summary["config"] = config_echo(st);
  summary["partial_objective"] = result.partial.objective;
  summary["pairs"] = pairs_json(result.extrapolated);
  summary["completed_file"] = png_path.filename().string();
  summary["program_file"] = prog_path.filename().string();
  write_text(dir / (stem + "_complete.json"), summary.dump(2) + "\n");
  std::cout << png_path.string() << "\n";
  return 0;
}

int cmd_gen(const Settings& st, const Layered& layered, const std::string& gen_spec_path,
            const std::string& out) {
  GeneratorSpec spec = gen_spec_path.empty() ? default_generator_spec()
                                             : spec_from_json(read_text(gen_spec_path));
  const auto provided = [&](const char* key) {
    const auto it = layered.provided.find(key);
    return it != layered.provided.end() && it->second;
  };
  if (provided("grid-n")) spec.grid_n = st.grid_n;
  if (provided("cell-m")) spec.cell_m = st.cell_m;
  if (provided("k")) spec.k = st.k;
  if (provided("seed")) spec.seed = st.seed;
  if (provided("noise")) spec.noise = st.noise;
  if (provided("tile-source")) spec.tile_source = st.tile_source;
  if (provided("background")) spec.background = cli::parse_color(st.background);
  if (provided("variants-per-label")) spec.variants_per_label = st.variants_per_label;

  generate_corpus(spec, st.count, st.occlusion, out);
  std::cout << fs::path(out).string() << "\n";
  return 0;
}

int cmd_eval(const Settings& st, const std::string& corpus_dir, const std::string& mode,
             const std::string& out) {
  EvalOptions eopts;
  eopts.mode = mode == "complete" ? EvalMode::kComplete : EvalMode::kSynth;
  eopts.tol = st.tol;
  eopts.threads = st.threads;
  eopts.grid_n = st.grid_n;
  eopts.cell_m = st.cell_m;
  const SynthesisConfig cfg = st.synthesis();

  const CorpusEvaluation eval = evaluate_corpus(corpus_dir, cfg, eopts);
  const std::string report = report_json(eval, cfg, eopts);

  const fs::path dir = prepare_out_dir(out);
  write_text(dir / "report.json", report);
  write_text(dir / "records.jsonl", records_jsonl(eval));
  std::cout << report;
  return 0;
}

int cmd_oracle(const Settings& st, const std::string& image_path, const std::string& out) {
  require_grid_flags(st);
  const GridImage img = load_grid_image(image_path, st.grid_n, st.cell_m);
  const SynthesisConfig cfg = st.synthesis();

  const SimilarityTensor bx =
      build_similarity_tensor(img, cfg.eps, cfg.distance, st.threads);
  const SearchSpace space = full_search_space(bx, img.cell_m(), cfg.min_cover);

  OracleOptions oopts;
  oopts.budget = st.budget;
  oopts.threads = st.threads;
  const ScoredProgram best = oracle_synthesize(space, cfg, oopts);
  GreedyOptions gopts;
  gopts.threads = st.threads;
  const ScoredProgram greedy = greedy_synthesize(space, cfg, gopts);

  const fs::path dir = prepare_out_dir(out);
  const std::string stem = stem_of(image_path);
  const fs::path prog_path = dir / (stem + "_oracle.prog");
  write_text(prog_path, serialize(best.program));

  ordered_json summary;
  summary["command"] = "oracle";
  summary["input"] = image_path;
  summary["config"] = config_echo(st);
  summary["candidate_programs"] =
      oracle_candidate_count(static_cast<long long>(space.sketches.size()), cfg.k);
  summary["oracle_objective"] = best.objective;
  summary["greedy_objective"] = greedy.objective;
  summary["greedy_to_oracle_ratio"] =
      best.objective > 0 ? greedy.objective / best.objective : 1.0;
  summary["oracle_pairs"] = pairs_json(best.program);
  summary["greedy_pairs"] = pairs_json(greedy.program);
  summary["program_file"] = prog_path.filename().string();
  write_text(dir / (stem + "_oracle.json"), summary.dump(2) + "\n");
  std::cout << prog_path.string() << "\n";
  return 0;
}

int cmd_render(const Settings& st, const std::string& prog_path,
               const std::string& source_path, const std::string& out) {
  const Program p = parse_program(read_text(prog_path));
  GridImage source;
  const GridImage* source_ptr = nullptr;
  if (!source_path.empty()) {
    source = load_grid_image(source_path, p.grid_n, p.cell_m);
    source_ptr = &source;
  }
  const StructureRendering rendering =
      execute(p, cli::parse_color(st.background), source_ptr);
  const fs::path dir = prepare_out_dir(out);
  const fs::path png_path = dir / (stem_of(prog_path) + "_render.png");
  write_png(png_path.string(), rendering.image);
  std::cout << png_path.string() << "\n";
  return 0;
}

int cmd_extrapolate(const Settings& st, const Layered& layered,
                    const std::string& prog_path, bool extend_offsets,
                    const std::string& out) {
  const Program p = parse_program(read_text(prog_path));
  int target = p.grid_n;
  const auto it = layered.provided.find("grid-n");
  if (it != layered.provided.end() && it->second) target = st.grid_n;
  ExtrapolateOptions ex;
  ex.extend_offsets = extend_offsets;
  const Program extended = extrapolate(p, target, ex);
  const fs::path dir = prepare_out_dir(out);
  const fs::path out_path = dir / (stem_of(prog_path) + "_extrapolated.prog");
  write_text(out_path, serialize(extended));
  std::cout << out_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gridsynth: synthesize, execute, and extrapolate nested-loop "
               "programs describing 2D repeating structure in grid images"};
  app.require_subcommand(1);

  Settings st;
  Layered layered;

  // The config file must be known before option resolution.
  std::string config_path;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc)
      config_path = argv[i + 1];
    else if (arg.rfind("--config=", 0) == 0)
      config_path = arg.substr(9);
  }
  if (config_path.empty())
    if (const char* env = std::getenv("GRIDSYNTH_CONFIG")) config_path = env;

  try {
    if (!config_path.empty()) layered.file_values = cli::read_config_file(config_path);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::string config_opt;
  app.add_option("--config", config_opt, "key = value configuration file");

  struct Binding {
    CLI::Option* opt;
    std::string key;
    std::function<void(const std::string&)> assign;
  };
  std::vector<Binding> bindings;
  const auto bind = [&](CLI::Option* opt, const std::string& key, auto& var) {
    bindings.push_back({opt, key, [&var, key](const std::string& text) {
                          parse_into(text, var, key);
                        }});
  };

  bind(app.add_option("--grid-n", st.grid_n, "grid cells per axis (N)"), "grid-n", st.grid_n);
  bind(app.add_option("--cell-m", st.cell_m, "pixels per cell side (M)"), "cell-m", st.cell_m);
  bind(app.add_option("--k", st.k, "maximum pairs per program"), "k", st.k);
  bind(app.add_option("--eps", st.eps, "similarity threshold"), "eps", st.eps);
  bind(app.add_option("--lambda", st.lambda, "weight on agreement-on-zeros"), "lambda",
       st.lambda);
  bind(app.add_option("--min-cover", st.min_cover, "minimum cells per sketch"), "min-cover",
       st.min_cover);
  bind(app.add_flag("--early-stop,!--no-early-stop", st.early_stop,
                    "stop when no candidate improves the objective"),
       "early-stop", st.early_stop);
  bind(app.add_option("--hist-bins", st.hist_bins, "histogram bins per channel"),
       "hist-bins", st.hist_bins);
  bind(app.add_option("--w-emd", st.w_emd, "weight of the histogram term"), "w-emd",
       st.w_emd);
  bind(app.add_option("--w-struct", st.w_struct, "weight of the structural term"),
       "w-struct", st.w_struct);
  bind(app.add_option("--seed", st.seed, "RNG seed (default 0)"), "seed", st.seed);
  bind(app.add_option("--threads", st.threads, "worker threads (0 = all)"), "threads",
       st.threads);
  bind(app.add_option("--count", st.count, "instances to generate"), "count", st.count);
  bind(app.add_option("--occlusion", st.occlusion, "fraction of bottom rows masked"),
       "occlusion", st.occlusion);
  bind(app.add_flag("--noise,!--no-noise", st.noise, "per-iteration tile resampling"),
       "noise", st.noise);
  bind(app.add_option("--tile-source", st.tile_source, "'procedural' or a tile directory"),
       "tile-source", st.tile_source);
  bind(app.add_option("--background", st.background, "background color '<r>,<g>,<b>'"),
       "background", st.background);
  bind(app.add_option("--variants-per-label", st.variants_per_label,
                      "procedural tiles per label"),
       "variants-per-label", st.variants_per_label);
  bind(app.add_option("--tol", st.tol, "per-channel byte tolerance for evaluation"), "tol",
       st.tol);
  bind(app.add_option("--budget", st.budget, "oracle candidate-program budget"), "budget",
       st.budget);

  std::string out = ".";
  app.add_option("--out", out, "output directory")->capture_default_str();

  std::string synth_image, complete_partial, complete_mask, eval_dir, oracle_image;
  std::string render_prog, render_source, extrap_prog, gen_spec, eval_mode = "synth";
  bool flag_render = false, flag_embed = false, flag_progress = false;
  bool flag_extend_offsets = false;

  CLI::App* synth = app.add_subcommand("synth", "synthesize a program from an image");
  synth->add_option("image", synth_image, "input PNG")->required();
  synth->add_flag("--render", flag_render, "also render the program to PNG");
  synth->add_flag("--embed", flag_embed, "embed component pixels in the program file");
  synth->add_flag("--progress", flag_progress, "write per-iteration JSON lines");

  CLI::App* complete = app.add_subcommand("complete", "complete a partial image");
  complete->add_option("partial", complete_partial, "partial PNG")->required();
  complete->add_option("mask", complete_mask, "sidecar mask file")->required();
  complete->add_flag("--extend-offsets", flag_extend_offsets,
                     "also extend patterns toward smaller indices");

  CLI::App* gen = app.add_subcommand("gen", "generate a synthetic corpus");
  gen->add_option("--gen-spec", gen_spec, "full generator spec as JSON");

  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a corpus");
  eval_cmd->add_option("corpus", eval_dir, "corpus directory")->required();
  eval_cmd->add_option("--mode", eval_mode, "synth or complete")
      ->check(CLI::IsMember({"synth", "complete"}));

  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive optimum on a small image");
  oracle->add_option("image", oracle_image, "input PNG")->required();

  CLI::App* render = app.add_subcommand("render", "execute a program file to PNG");
  render->add_option("program", render_prog, "program text file")->required();
  render->add_option("--source", render_source, "image resolving cell components");

  CLI::App* extrap = app.add_subcommand("extrapolate", "extend a program to a full grid");
  extrap->add_option("program", extrap_prog, "program text file")->required();
  extrap->add_flag("--extend-offsets", flag_extend_offsets,
                   "also extend patterns toward smaller indices");

  for (CLI::App* sub : {synth, complete, gen, eval_cmd, oracle, render, extrap})
    sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    // Precedence below the command line: config file, then environment.
    for (const Binding& b : bindings) {
      if (b.opt->count() > 0) {
        layered.provided[b.key] = true;
        continue;
      }
      if (const auto value = layered.lookup(b.key)) {
        b.assign(*value);
        layered.provided[b.key] = true;
      }
    }

    if (synth->parsed())
      return cmd_synth(st, synth_image, out, flag_render, flag_embed, flag_progress);
    if (complete->parsed())
      return cmd_complete(st, complete_partial, complete_mask, out, flag_extend_offsets);
    if (gen->parsed()) return cmd_gen(st, layered, gen_spec, out);
    if (eval_cmd->parsed()) return cmd_eval(st, eval_dir, eval_mode, out);
    if (oracle->parsed()) return cmd_oracle(st, oracle_image, out);
    if (render->parsed()) return cmd_render(st, render_prog, render_source, out);
    if (extrap->parsed())
      return cmd_extrapolate(st, layered, extrap_prog, flag_extend_offsets, out);
    std::cerr << "error: no command selected\n";
    return 2;
  } catch (const BudgetError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
