#include "gridsynth/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "gridsynth/extrapolation.hpp"
#include "gridsynth/png_io.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace gridsynth {

namespace {

constexpr const char* kColorNames[5] = {"red", "blue", "orange", "green", "yellow"};
constexpr Rgb kColorValues[5] = {
    {230, 40, 40}, {50, 80, 230}, {240, 150, 40}, {60, 200, 70}, {240, 220, 60}};

}  // namespace

const char* color_name(int color) { return kColorNames[color]; }
Rgb color_value(int color) { return kColorValues[color]; }

GeneratorSpec default_generator_spec() {
  GeneratorSpec spec;
  for (int p = 0; p < kPropertyCount; ++p) {
    auto& row = spec.transition[p];
    row.fill(0.0);
    row[p] = 0.6;
    // Three fixed successors per property.
    for (int step : {1, 5, 7}) row[(p + step) % kPropertyCount] += 0.4 / 3.0;
  }
  for (auto& stats : spec.sketch_stats) {
    stats.n = stats.n2 = {3.0, 1.0};
    stats.a = stats.a2 = {2.0, 1.0};
    stats.b = stats.b2 = {1.0, 1.0};
  }
  spec.default_stats = true;
  return spec;
}

void validate(const GeneratorSpec& spec) {
  if (spec.grid_n < 1 || spec.cell_m < 1) throw InputError("grid_n and cell_m must be >= 1");
  if (spec.k < 1) throw InputError("k must be >= 1");
  if (spec.variants_per_label < 2)
    throw InputError("variants_per_label must be >= 2 (same-label noise needs choices)");
  for (int p = 0; p < kPropertyCount; ++p) {
    double sum = 0.0;
    for (double v : spec.transition[p]) {
      if (v < 0) throw InputError("transition probabilities must be nonnegative");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw InputError("transition row " + std::to_string(p) + " sums to " +
                       std::to_string(sum) + ", expected 1");
  }
  for (const SketchStats& st : spec.sketch_stats)
    for (const ParamStats* ps : {&st.n, &st.a, &st.b, &st.n2, &st.a2, &st.b2})
      if (ps->stddev < 0) throw InputError("sketch parameter stddev must be >= 0");
}

namespace {

ordered_json stats_to_json(const SketchStats& st) {
  auto pair = [](const ParamStats& ps) { return ordered_json::array({ps.mean, ps.stddev}); };
  return ordered_json{{"n", pair(st.n)},   {"a", pair(st.a)},   {"b", pair(st.b)},
                      {"n2", pair(st.n2)}, {"a2", pair(st.a2)}, {"b2", pair(st.b2)}};
}

SketchStats stats_from_json(const ordered_json& j) {
  auto pair = [&](const char* key) {
    const auto& arr = j.at(key);
    return ParamStats{arr.at(0).get<double>(), arr.at(1).get<double>()};
  };
  return {pair("n"), pair("a"), pair("b"), pair("n2"), pair("a2"), pair("b2")};
}

}  // namespace

std::string spec_to_json(const GeneratorSpec& spec) {
  ordered_json j;
  j["grid_n"] = spec.grid_n;
  j["cell_m"] = spec.cell_m;
  j["k"] = spec.k;
  j["noise"] = spec.noise;
  j["seed"] = spec.seed;
  j["tile_source"] = spec.tile_source;
  j["background"] = {spec.background.r, spec.background.g, spec.background.b};
  j["variants_per_label"] = spec.variants_per_label;
  j["default_stats"] = spec.default_stats;
  ordered_json rows = ordered_json::array();
  for (const auto& row : spec.transition) rows.push_back(row);
  j["transition"] = std::move(rows);
  ordered_json stats = ordered_json::array();
  for (const auto& st : spec.sketch_stats) stats.push_back(stats_to_json(st));
  j["sketch_stats"] = std::move(stats);
  return j.dump(2) + "\n";
}

GeneratorSpec spec_from_json(const std::string& json_text) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    throw InputError(std::string("bad generator spec JSON: ") + e.what());
  }
  GeneratorSpec spec = default_generator_spec();
  try {
    if (j.contains("grid_n")) spec.grid_n = j["grid_n"].get<int>();
    if (j.contains("cell_m")) spec.cell_m = j["cell_m"].get<int>();
    if (j.contains("k")) spec.k = j["k"].get<int>();
    if (j.contains("noise")) spec.noise = j["noise"].get<bool>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("tile_source")) spec.tile_source = j["tile_source"].get<std::string>();
    if (j.contains("variants_per_label"))
      spec.variants_per_label = j["variants_per_label"].get<int>();
    if (j.contains("background")) {
      const auto& bg = j["background"];
      spec.background = {bg.at(0).get<std::uint8_t>(), bg.at(1).get<std::uint8_t>(),
                         bg.at(2).get<std::uint8_t>()};
    }
    if (j.contains("transition")) {
      const auto& rows = j["transition"];
      if (rows.size() != kPropertyCount)
        throw InputError("transition must have 25 rows");
      for (int p = 0; p < kPropertyCount; ++p) {
        if (rows[p].size() != kPropertyCount)
          throw InputError("transition rows must have 25 entries");
        for (int q = 0; q < kPropertyCount; ++q)
          spec.transition[p][q] = rows[p][q].get<double>();
      }
      spec.default_stats = false;
    }
    if (j.contains("sketch_stats")) {
      const auto& stats = j["sketch_stats"];
      if (stats.size() != kPropertyCount)
        throw InputError("sketch_stats must have 25 entries");
      for (int p = 0; p < kPropertyCount; ++p)
        spec.sketch_stats[p] = stats_from_json(stats[p]);
      spec.default_stats = false;
    }
  } catch (const ordered_json::exception& e) {
    throw InputError(std::string("bad generator spec JSON: ") + e.what());
  }
  validate(spec);
  return spec;
}

std::uint64_t spec_hash(const GeneratorSpec& spec) {
  const std::string text = spec_to_json(spec);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : text) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace {

// Base stroke geometry per label; intensity 0 marks background.
bool glyph_on(int label, int x, int y, int m) {
  const int period = std::max(3, m / 4);
  const int thick = std::max(1, period / 2);
  switch (label) {
    case 0:  // horizontal bars
      return y % period < thick;
    case 1:  // vertical bars
      return x % period < thick;
    case 2:  // diagonal stripes
      return (x + y) % period < thick;
    case 3: {  // ring
      const int cx = 2 * x - (m - 1), cy = 2 * y - (m - 1);  // doubled coords
      const int r2 = cx * cx + cy * cy;
      const int outer = (m - 1) * (m - 1);
      const int inner = outer / 4;
      return r2 <= outer && r2 >= inner;
    }
    default: {  // dot lattice
      const int p = std::max(3, m / 3);
      const int t = std::max(1, p / 2);
      return x % p < t && y % p < t;
    }
  }
}

}  // namespace

TileBank TileBank::procedural(int cell_m, int variants_per_label, std::uint64_t seed) {
  if (cell_m < 1) throw InputError("cell_m must be >= 1");
  if (variants_per_label < 2) throw InputError("variants_per_label must be >= 2");
  TileBank bank;
  bank.cell_m_ = cell_m;
  for (int label = 0; label < 5; ++label) {
    for (int v = 0; v < variants_per_label; ++v) {
      Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label) * 64 + v));
      std::vector<std::uint8_t> tile(static_cast<std::size_t>(cell_m) * cell_m, 0);
      const int base = 180 + 9 * (v % 8);
      for (int y = 0; y < cell_m; ++y)
        for (int x = 0; x < cell_m; ++x) {
          if (!glyph_on(label, x, y, cell_m)) continue;
          const int jitter = static_cast<int>(rng.uniform_int(-12, 12));
          tile[static_cast<std::size_t>(y) * cell_m + x] =
              static_cast<std::uint8_t>(std::clamp(base + jitter, 60, 255));
        }
      bank.tiles_[label].push_back(std::move(tile));
    }
  }
  return bank;
}

TileBank TileBank::from_directory(const std::string& dir, int cell_m) {
  if (!fs::is_directory(dir)) throw InputError("tile directory '" + dir + "' not found");
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());

  TileBank bank;
  bank.cell_m_ = cell_m;
  for (const std::string& name : names) {
    if (name.size() < 2 || name[0] < '0' || name[0] > '4' || name[1] != '_') continue;
    const int label = name[0] - '0';
    const RawImage raw = read_png((fs::path(dir) / name).string());
    if (raw.width != cell_m || raw.height != cell_m)
      throw InputError("tile '" + name + "' is " + std::to_string(raw.width) + "x" +
                       std::to_string(raw.height) + ", expected " + std::to_string(cell_m));
    std::vector<std::uint8_t> gray(static_cast<std::size_t>(cell_m) * cell_m);
    for (std::size_t i = 0; i < gray.size(); ++i) {
      const int sum = raw.pixels[3 * i] + raw.pixels[3 * i + 1] + raw.pixels[3 * i + 2];
      gray[i] = static_cast<std::uint8_t>(sum / 3);
    }
    bank.tiles_[label].push_back(std::move(gray));
  }
  for (int label = 0; label < 5; ++label)
    if (bank.count(label) < 2)
      throw InputError("tile directory needs >= 2 tiles named '" + std::to_string(label) +
                       "_*.png' for label " + std::to_string(label));
  return bank;
}

TileBank TileBank::for_spec(const GeneratorSpec& spec) {
  if (spec.tile_source == "procedural")
    return procedural(spec.cell_m, spec.variants_per_label, spec.seed);
  return from_directory(spec.tile_source, spec.cell_m);
}

std::vector<std::uint8_t> colorize(const std::vector<std::uint8_t>& gray, int cell_m,
                                   Rgb color, Rgb background) {
  std::vector<std::uint8_t> out(3 * static_cast<std::size_t>(cell_m) * cell_m);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    const int g = gray[i];
    out[3 * i] = static_cast<std::uint8_t>((g * color.r + (255 - g) * background.r + 127) / 255);
    out[3 * i + 1] =
        static_cast<std::uint8_t>((g * color.g + (255 - g) * background.g + 127) / 255);
    out[3 * i + 2] =
        static_cast<std::uint8_t>((g * color.b + (255 - g) * background.b + 127) / 255);
  }
  return out;
}

namespace {

int sample_param(Rng& rng, const ParamStats& ps, int lo, int hi) {
  const long long raw = std::llround(rng.normal(ps.mean, ps.stddev));
  return static_cast<int>(std::clamp<long long>(raw, lo, hi));
}

// Draws all six parameters, then repairs each axis to fit the grid: shrink
// the iteration count first, then the offset.
Sketch sample_sketch(Rng& rng, const SketchStats& st, int grid_n) {
  Sketch s;
  s.n = sample_param(rng, st.n, 1, grid_n);
  s.a = sample_param(rng, st.a, 1, grid_n);
  s.b = sample_param(rng, st.b, 0, grid_n - 1);
  s.n2 = sample_param(rng, st.n2, 1, grid_n);
  s.a2 = sample_param(rng, st.a2, 1, grid_n);
  s.b2 = sample_param(rng, st.b2, 0, grid_n - 1);
  auto repair = [grid_n](int& n, int a, int& b) {
    if (a * n + b <= grid_n) return;
    const int fit = (grid_n - b) / a;
    if (fit >= 1) {
      n = fit;
    } else {
      n = 1;
      b = grid_n - a;
    }
  };
  repair(s.n, s.a, s.b);
  repair(s.n2, s.a2, s.b2);
  return s;
}

}  // namespace

GeneratedProgram sample_program(const GeneratorSpec& spec, const TileBank& bank, Rng& rng) {
  validate(spec);
  GeneratedProgram gp;
  gp.program.grid_n = spec.grid_n;
  gp.program.cell_m = spec.cell_m;
  int property = 0;
  for (int h = 0; h < spec.k; ++h) {
    if (h == 0) {
      property = static_cast<int>(rng.uniform_int(0, kPropertyCount - 1));
    } else {
      property = rng.weighted_choice(spec.transition[property].data(), kPropertyCount);
    }
    const LatentProperty lp = LatentProperty::from_index(property);
    const Sketch s = sample_sketch(rng, spec.sketch_stats[property], spec.grid_n);
    if (bank.count(lp.label) < 1)
      throw InputError("tile bank has no tiles for label " + std::to_string(lp.label));
    const int tile_idx = static_cast<int>(rng.uniform_int(0, bank.count(lp.label) - 1));
    Component comp;
    comp.source = colorize(bank.tile(lp.label, tile_idx), spec.cell_m,
                           color_value(lp.color), spec.background);
    gp.program.pairs.emplace_back(s, std::move(comp));
    gp.properties.push_back(lp);
    gp.base_tiles.push_back(tile_idx);
  }
  validate(gp.program);
  return gp;
}

GridImage render_noisy(const GeneratedProgram& gp, const GeneratorSpec& spec,
                       const TileBank& bank, Rng& rng) {
  GridImage canvas(spec.grid_n, spec.cell_m, spec.background);
  for (std::size_t h = 0; h < gp.program.pairs.size(); ++h) {
    const auto& [sketch, comp] = gp.program.pairs[h];
    const LatentProperty lp = gp.properties[h];
    const int base = gp.base_tiles[h];
    for (const CellIndex cell : cover(sketch)) {
      if (spec.noise) {
        const int choices = bank.count(lp.label);
        if (choices < 2)
          throw InputError("noise needs >= 2 tiles for label " + std::to_string(lp.label));
        // A different instance of the same symbol, recolored identically.
        int alt = static_cast<int>(rng.uniform_int(0, choices - 2));
        if (alt >= base) ++alt;
        const std::vector<std::uint8_t> tile = colorize(
            bank.tile(lp.label, alt), spec.cell_m, color_value(lp.color), spec.background);
        canvas.blit_cell(cell, tile.data());
      } else {
        canvas.blit_cell(cell, comp.raw().data());
      }
    }
  }
  return canvas;
}

namespace {

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 15];
    v >>= 4;
  }
  return s;
}

}  // namespace

void generate_corpus(const GeneratorSpec& spec, int count, double occlusion,
                     const std::string& out_dir) {
  validate(spec);
  if (count < 1) throw InputError("count must be >= 1");
  if (occlusion < 0.0 || occlusion >= 1.0) throw InputError("occlusion must be in [0, 1)");

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw InputError("cannot create directory '" + out_dir + "': " + ec.message());

  const TileBank bank = TileBank::for_spec(spec);
  const std::uint64_t hash = spec_hash(spec);
  const int n = spec.grid_n;
  int masked_rows = static_cast<int>(std::lround(occlusion * n));
  masked_rows = std::clamp(masked_rows, 0, n - 1);
  CellSet known(n);
  for (int t = 1; t <= n - masked_rows; ++t)
    for (int u = 1; u <= n; ++u) known.set(t, u);

  write_text_file(fs::path(out_dir) / "spec.json", spec_to_json(spec));

  std::ofstream manifest(fs::path(out_dir) / "manifest.jsonl",
                         std::ios::binary | std::ios::trunc);
  if (!manifest) throw InputError("cannot open manifest in '" + out_dir + "'");

  for (int i = 0; i < count; ++i) {
    const std::uint64_t instance_seed = mix_seed(spec.seed, static_cast<std::uint64_t>(i));
    Rng rng(instance_seed);
    const GeneratedProgram gp = sample_program(spec, bank, rng);
    const GridImage full = render_noisy(gp, spec, bank, rng);
    const PartialImage partial = make_partial(full, known);

    const std::string stem = std::to_string(i);
    write_png((fs::path(out_dir) / (stem + "_full.png")).string(), full);
    write_png((fs::path(out_dir) / (stem + "_partial.png")).string(), partial.image);
    write_text_file(fs::path(out_dir) / (stem + ".mask"), serialize_mask(partial.known));
    write_text_file(fs::path(out_dir) / (stem + ".prog"), serialize(gp.program));

    ordered_json line;
    line["index"] = i;
    line["seed"] = instance_seed;
    line["spec_hash"] = hex64(hash);
    line["full"] = stem + "_full.png";
    line["partial"] = stem + "_partial.png";
    line["mask"] = stem + ".mask";
    line["program"] = stem + ".prog";
    line["occlusion"] = occlusion;
    line["noise"] = spec.noise;
    line["background"] = {spec.background.r, spec.background.g, spec.background.b};
    line["defaults_are_placeholders"] = spec.default_stats;
    manifest << line.dump() << "\n";
  }
  if (!manifest) throw InputError("failed writing manifest in '" + out_dir + "'");
}

}  // namespace gridsynth
