#pragma once
// Normal disc types, matching equations, bounded enumeration, cutting.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "kx/handles.hpp"

namespace kx {

struct NormalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ResourceLimit : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Arc of a disc boundary across an island: ports a < b of 1-handle k at end e.
struct IslandArc {
  int k, e, a, b;
  auto operator<=>(const IslandArc&) const = default;
};

struct DiscType {
  int id = -1;
  int zero = -1;
  std::string kind;          // "triangle" | "square" | "polygon"
  int index = 0;             // corner / separation index within its kind
  std::vector<int> bridges;  // in cycle order
  std::vector<IslandArc> arcs;
  std::vector<Port> ports;  // all bridge ends used
};

std::vector<DiscType> enumerate_disc_types(const HandleStructure& h);

using Coords = std::vector<std::int64_t>;

struct Equation {
  std::vector<std::pair<int, int>> terms;  // (type, coefficient)
  std::string origin;
};

struct NormalSystem {
  const HandleStructure* h = nullptr;
  std::vector<DiscType> types;
  std::vector<std::vector<int>> types_at;  // per 0-handle
  std::vector<std::vector<char>> compat;   // type x type (same 0-handle only)
  std::vector<Equation> equations;

  explicit NormalSystem(const HandleStructure& h);
  int size() const { return static_cast<int>(types.size()); }
  bool satisfies(const Coords& x) const;
  bool admissible(const Coords& x, std::string* why = nullptr) const;
  std::int64_t weight(const Coords& x) const;
  // Link of a boundary component: the sum of the disc types parallel to
  // its regions. which = 3-handle id, or -1 for the manifold boundary.
  Coords link(int which) const;
  int type_of(int zero, std::vector<int> bridges) const;
  nlohmann::json coords_json(const Coords& x) const;
  Coords coords_from_json(const nlohmann::json& j) const;
};

// Pairwise compatibility of two disc types in one 0-handle.
bool compatible(const HandleStructure& h, const DiscType& s, const DiscType& t);

// Matching equations only (the redundant 2-handle equalities included).
std::vector<Equation> matching_equations(const HandleStructure& h, const std::vector<DiscType>& types);

struct EnumOptions {
  std::int64_t weight_bound = 0;
  std::int64_t node_limit = 200000000;
  bool parallel = true;
};
std::vector<Coords> enumerate_admissible(const NormalSystem& s, const EnumOptions& opt);

struct SurfacePiece {
  char kind;      // 'd' disc, 'b' band in a 1-handle, 'p' disc in a 2-handle
  int handle;     // 0-handle for discs, 1-handle for bands, 2-handle for points
  int index;      // type id for discs, arc instance for bands, level for points
};

struct CutComplex {
  HandleStructure h;
  std::vector<int> parent0, parent1, parent2;
  std::vector<int> level2;         // slab level of each new 2-handle
  std::vector<int> bridge_parent;  // original bridge of each new bridge
  std::vector<SurfacePiece> pieces;
  int euler_before = 0;
  int surface_euler = 0;
  int first_piece = 0;  // ids below this are S pieces from earlier cuts
};

// Handle components: for each, the member ids per index.
std::vector<std::array<std::vector<int>, 4>> handle_components(const HandleStructure& h);

CutComplex cut_along(const NormalSystem& s, const Coords& x);

struct SurfaceComponent {
  int euler = 0;
  bool orientable = true;
  bool separating = false;
  std::int64_t weight = 0;
};

struct NormalSurface {
  Coords coords;
  int euler = 0;
  int euler_from_cells = 0;  // half the Euler characteristic of the cut copies
  bool orientable = true;
  bool connected = false;
  std::int64_t weight = 0;
  std::vector<SurfaceComponent> components;
  Coords read_back;
  nlohmann::json to_json() const;
};

NormalSurface realize_surface(const NormalSystem& s, const Coords& x);

// Disc-type coordinates recovered from a cut complex.
Coords read_back(const NormalSystem& s, const CutComplex& c);

}  // namespace kx
