#include "gridsynth/program.hpp"

#include <charconv>
#include <sstream>

namespace gridsynth {

bool sketch_fits(const Sketch& s, int grid_n) {
  if (s.n < 1 || s.n2 < 1 || s.a < 1 || s.a2 < 1 || s.b < 0 || s.b2 < 0) return false;
  // 64-bit products so absurd values cannot wrap.
  const auto row_max = static_cast<long long>(s.a) * s.n + s.b;
  const auto col_max = static_cast<long long>(s.a2) * s.n2 + s.b2;
  return row_max <= grid_n && col_max <= grid_n;
}

void validate(const Sketch& s, int grid_n) {
  if (!sketch_fits(s, grid_n)) {
    std::ostringstream msg;
    msg << "sketch (n=" << s.n << " a=" << s.a << " b=" << s.b << " n2=" << s.n2
        << " a2=" << s.a2 << " b2=" << s.b2 << ") out of bounds for grid " << grid_n;
    throw InputError(msg.str());
  }
}

void validate(const Program& p) {
  if (p.grid_n < 1 || p.cell_m < 1)
    throw InputError("program grid_n and cell_m must be >= 1");
  for (const auto& [sketch, comp] : p.pairs) {
    validate(sketch, p.grid_n);
    if (comp.is_cell()) {
      const CellIndex c = comp.cell();
      if (c.t < 1 || c.t > p.grid_n || c.u < 1 || c.u > p.grid_n)
        throw InputError("component cell (" + std::to_string(c.t) + "," +
                         std::to_string(c.u) + ") outside grid");
    } else {
      const std::size_t want = 3 * static_cast<std::size_t>(p.cell_m) * p.cell_m;
      if (comp.raw().size() != want)
        throw InputError("embedded component holds " + std::to_string(comp.raw().size()) +
                         " bytes, expected " + std::to_string(want));
    }
  }
}

std::vector<CellIndex> cover(const Sketch& s) {
  std::vector<CellIndex> cells;
  cells.reserve(static_cast<std::size_t>(s.n) * s.n2);
  for (int i = 1; i <= s.n; ++i)
    for (int j = 1; j <= s.n2; ++j)
      cells.push_back({s.a * i + s.b, s.a2 * j + s.b2});
  return cells;
}

CellSet cover_cells(const Sketch& s, int grid_n) {
  validate(s, grid_n);
  CellSet set(grid_n);
  for (int i = 1; i <= s.n; ++i)
    for (int j = 1; j <= s.n2; ++j) set.set(s.a * i + s.b, s.a2 * j + s.b2);
  return set;
}

SimilarityTensor sketch_tensor(const Sketch& s, int grid_n) {
  const CellSet cells = cover_cells(s, grid_n);
  SimilarityTensor out(grid_n);
  cells.for_each([&](int c) {
    std::uint64_t* row = out.row(c);
    for (int w = 0; w < out.words_per_row(); ++w) row[w] = cells.words()[w];
  });
  return out;
}

SimilarityTensor program_tensor(const Program& p) {
  validate(p);
  SimilarityTensor out(p.grid_n);
  for (const auto& [sketch, comp] : p.pairs) {
    const CellSet cells = cover_cells(sketch, p.grid_n);
    cells.for_each([&](int c) {
      std::uint64_t* row = out.row(c);
      for (int w = 0; w < out.words_per_row(); ++w) row[w] |= cells.words()[w];
    });
  }
  return out;
}

namespace {

std::vector<std::uint8_t> resolve_component(const Component& comp, int cell_m,
                                            const GridImage* source) {
  if (!comp.is_cell()) return comp.raw();
  if (source == nullptr)
    throw InputError("component references cell (" + std::to_string(comp.cell().t) + "," +
                     std::to_string(comp.cell().u) + ") but no source image was supplied");
  if (source->cell_m() != cell_m)
    throw InputError("source image cell size " + std::to_string(source->cell_m()) +
                     " does not match program cell size " + std::to_string(cell_m));
  return subimage(*source, comp.cell()).pixels;
}

StructureRendering run(const Program& p, GridImage canvas, const CellSet* known,
                       const GridImage* source) {
  validate(p);
  StructureRendering out{std::move(canvas), CellSet(p.grid_n)};
  for (const auto& [sketch, comp] : p.pairs) {
    const std::vector<std::uint8_t> tile = resolve_component(comp, p.cell_m, source);
    for (const CellIndex cell : cover(sketch)) {
      if (known != nullptr && known->test(cell.t, cell.u)) continue;
      out.image.blit_cell(cell, tile.data());
      out.covered.set(cell.t, cell.u);
    }
  }
  return out;
}

}  // namespace

StructureRendering execute(const Program& p, const GridImage& background,
                           const GridImage* component_source) {
  if (background.grid_n() != p.grid_n || background.cell_m() != p.cell_m)
    throw InputError("background grid does not match program grid");
  return run(p, background, nullptr, component_source);
}

StructureRendering execute(const Program& p, Rgb background, const GridImage* component_source) {
  return run(p, GridImage(p.grid_n, p.cell_m, background), nullptr, component_source);
}

StructureRendering execute_onto(const Program& p, const GridImage& partial,
                                const CellSet& known_mask, const GridImage* component_source) {
  if (partial.grid_n() != p.grid_n || partial.cell_m() != p.cell_m)
    throw InputError("partial image grid does not match program grid");
  if (known_mask.grid_n() != p.grid_n)
    throw InputError("known mask grid does not match program grid");
  return run(p, partial, &known_mask, component_source);
}

namespace {

constexpr char kHexDigits[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

[[noreturn]] void parse_fail(int line, const std::string& what) {
  throw InputError("line " + std::to_string(line) + ": " + what);
}

int parse_int_field(const std::string& token, const std::string& key, int line) {
  const std::string prefix = key + "=";
  if (token.rfind(prefix, 0) != 0)
    parse_fail(line, "expected '" + key + "=<int>', got '" + token + "'");
  const char* first = token.data() + prefix.size();
  const char* last = token.data() + token.size();
  int value = 0;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    parse_fail(line, "field '" + key + "' is not an integer: '" + token + "'");
  return value;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace

std::string serialize(const Program& p) {
  validate(p);
  std::ostringstream out;
  out << "gridsynth-program v1 N=" << p.grid_n << " M=" << p.cell_m << "\n";
  for (const auto& [s, comp] : p.pairs) {
    out << "loop n=" << s.n << " a=" << s.a << " b=" << s.b << " n2=" << s.n2
        << " a2=" << s.a2 << " b2=" << s.b2 << " comp=";
    if (comp.is_cell()) {
      out << "cell:" << comp.cell().t << "," << comp.cell().u;
    } else {
      out << "raw:";
      for (std::uint8_t byte : comp.raw())
        out << kHexDigits[byte >> 4] << kHexDigits[byte & 15];
    }
    out << "\n";
  }
  return out.str();
}

Program parse_program(const std::string& text) {
  std::vector<std::string> lines;
  {
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
  }
  if (lines.empty()) throw InputError("line 1: missing header");

  const std::vector<std::string> head = split_ws(lines[0]);
  if (head.size() != 4 || head[0] != "gridsynth-program" || head[1] != "v1")
    parse_fail(1, "expected 'gridsynth-program v1 N=<int> M=<int>'");
  Program p;
  p.grid_n = parse_int_field(head[2], "N", 1);
  p.cell_m = parse_int_field(head[3], "M", 1);
  if (p.grid_n < 1) parse_fail(1, "field 'N' must be >= 1");
  if (p.cell_m < 1) parse_fail(1, "field 'M' must be >= 1");

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const int line = static_cast<int>(li) + 1;
    if (lines[li].empty()) parse_fail(line, "empty line");
    const std::vector<std::string> tok = split_ws(lines[li]);
    if (tok.empty() || tok[0] != "loop")
      parse_fail(line, "expected a 'loop' line");
    if (tok.size() != 8)
      parse_fail(line, "expected 8 fields, got " + std::to_string(tok.size()));
    Sketch s;
    s.n = parse_int_field(tok[1], "n", line);
    s.a = parse_int_field(tok[2], "a", line);
    s.b = parse_int_field(tok[3], "b", line);
    s.n2 = parse_int_field(tok[4], "n2", line);
    s.a2 = parse_int_field(tok[5], "a2", line);
    s.b2 = parse_int_field(tok[6], "b2", line);
    if (!sketch_fits(s, p.grid_n))
      parse_fail(line, "sketch out of bounds for grid N=" + std::to_string(p.grid_n));

    const std::string& ct = tok[7];
    if (ct.rfind("comp=", 0) != 0) parse_fail(line, "expected 'comp=<spec>'");
    const std::string spec = ct.substr(5);
    Component comp;
    if (spec.rfind("cell:", 0) == 0) {
      const std::string ref = spec.substr(5);
      const std::size_t comma = ref.find(',');
      if (comma == std::string::npos) parse_fail(line, "expected 'cell:<t>,<u>'");
      int t = 0, u = 0;
      const char* tb = ref.data();
      auto r1 = std::from_chars(tb, tb + comma, t);
      auto r2 = std::from_chars(tb + comma + 1, ref.data() + ref.size(), u);
      if (r1.ec != std::errc() || r1.ptr != tb + comma || r2.ec != std::errc() ||
          r2.ptr != ref.data() + ref.size())
        parse_fail(line, "expected 'cell:<t>,<u>'");
      if (t < 1 || t > p.grid_n || u < 1 || u > p.grid_n)
        parse_fail(line, "component cell outside grid N=" + std::to_string(p.grid_n));
      comp.source = CellIndex{t, u};
    } else if (spec.rfind("raw:", 0) == 0) {
      const std::string hex = spec.substr(4);
      const std::size_t want = 2 * 3 * static_cast<std::size_t>(p.cell_m) * p.cell_m;
      if (hex.size() != want)
        parse_fail(line, "raw payload has " + std::to_string(hex.size()) +
                             " hex digits, expected " + std::to_string(want));
      std::vector<std::uint8_t> bytes(hex.size() / 2);
      for (std::size_t i = 0; i < bytes.size(); ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) parse_fail(line, "invalid hex digit in raw payload");
        bytes[i] = static_cast<std::uint8_t>((hi << 4) | lo);
      }
      comp.source = std::move(bytes);
    } else {
      parse_fail(line, "unknown component spec '" + spec + "'");
    }
    p.pairs.emplace_back(s, std::move(comp));
  }
  validate(p);
  return p;
}

}  // namespace gridsynth
