#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "gridsynth/grid.hpp"

namespace gridsynth {

// A doubly nested for-loop skeleton: iteration (i, j), i in [1,n], j in [1,n2],
// writes one tile at grid cell (a*i + b, a2*j + b2). Field order matches the
// canonical (n, a, b, n2, a2, b2) ordering used for comparisons.
struct Sketch {
  int n = 1;   // row iteration count
  int a = 1;   // row stride
  int b = 0;   // row offset
  int n2 = 1;  // column iteration count
  int a2 = 1;  // column stride
  int b2 = 0;  // column offset

  bool operator==(const Sketch&) const = default;
  auto operator<=>(const Sketch&) const = default;
};

bool sketch_fits(const Sketch& s, int grid_n);
void validate(const Sketch& s, int grid_n);

// A tile to fill a sketch's hole: either a reference to a cell of a source
// image (resolved at execution time) or embedded raw RGB8 pixels.
struct Component {
  std::variant<CellIndex, std::vector<std::uint8_t>> source;

  bool is_cell() const { return std::holds_alternative<CellIndex>(source); }
  CellIndex cell() const { return std::get<CellIndex>(source); }
  const std::vector<std::uint8_t>& raw() const {
    return std::get<std::vector<std::uint8_t>>(source);
  }

  bool operator==(const Component&) const = default;
};

struct Program {
  int grid_n = 0;
  int cell_m = 0;
  std::vector<std::pair<Sketch, Component>> pairs;

  bool operator==(const Program&) const = default;
};

void validate(const Program& p);

struct StructureRendering {
  GridImage image;
  CellSet covered;  // cells written by execution
};

// The cells a sketch writes, in execution (row-major loop) order. Strides
// >= 1 make all n*n2 cells distinct.
std::vector<CellIndex> cover(const Sketch& s);

// Same cells as a packed set.
CellSet cover_cells(const Sketch& s, int grid_n);

// B[t,u,t',u'] = 1 iff both cells are in cover(s): the outer product of the
// cover indicator with itself.
SimilarityTensor sketch_tensor(const Sketch& s, int grid_n);

// Elementwise OR of the per-sketch tensors; all zeros for an empty program.
SimilarityTensor program_tensor(const Program& p);

// Executes the program over a copy of the background. Pairs run in list
// order and loop iterations row-major, so later writes win on overlap.
// component_source resolves cell-referenced components; it may be null when
// every component embeds its pixels.
StructureRendering execute(const Program& p, const GridImage& background,
                           const GridImage* component_source = nullptr);
StructureRendering execute(const Program& p, Rgb background,
                           const GridImage* component_source = nullptr);

// As execute, but over the partial image: cells marked known are never
// overwritten.
StructureRendering execute_onto(const Program& p, const GridImage& partial,
                                const CellSet& known_mask,
                                const GridImage* component_source = nullptr);

// Line-oriented text format:
//   gridsynth-program v1 N=<int> M=<int>
//   loop n=<int> a=<int> b=<int> n2=<int> a2=<int> b2=<int> comp=<spec>
// where <spec> is cell:<t>,<u> or raw:<hex> (row-major RGB8, 6*M*M digits).
std::string serialize(const Program& p);

// Inverse of serialize; rejects malformed input with line-numbered messages.
Program parse_program(const std::string& text);

}  // namespace gridsynth
