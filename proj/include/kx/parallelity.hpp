#pragma once
// Parallelity handles and bundles, annular simplification, Case 2A surgery,
// boundary curve straightening; product test complexes.

#include <array>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kx/handles.hpp"

namespace kx {

struct ParallelityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---- polyhedral cell complexes and their dual handle structures ----

struct Cell {
  std::vector<std::vector<int>> faces;          // global vertex ids, any orientation
  std::map<int, std::array<double, 3>> coord;   // this cell's own embedding
  std::string prov;
};
struct CellComplex {
  std::vector<Cell> cells;
  std::vector<std::pair<int, int>> seam_edges;  // boundary edges carrying the boundary of S
  // boundary cell faces lying in S, keyed by sorted vertex set
  std::set<std::vector<int>> s_faces;
};
// 0-handles = cells, 1-handles = shared faces, 2-handles = interior edges,
// seams along the marked edges, 3-handles inside interior vertex links.
HandleStructure from_cells(const CellComplex& cx);

// F x I with S = F x {0,1} (boundary walls free, seams on the corners).
// kind: "annulus", "mobius" (twisted), "torus".
CellComplex surface_product(const std::string& kind, int n);
// Product over a disc: a parallel central column inside two rings that are
// not products (their shared wall is split); outer wall free.
CellComplex nested_product(int n);
// Twisted I-bundle over a Moebius band inside the same two rings.
CellComplex mobius_collar(int n);

// Handles of one component as a standalone structure.
HandleStructure extract_component(const HandleStructure& h, const std::array<std::vector<int>, 4>& comp);

// ---- parallelity ----

struct HandleRef {
  int index = 0, id = 0;
  auto operator<=>(const HandleRef&) const = default;
};

struct ParallelityInfo {
  HandleRef handle;
  std::array<std::vector<int>, 2> sides;  // S faces of D^2 x {0}, D^2 x {1}
};
std::vector<ParallelityInfo> find_parallelity_handles(const HandleStructure& h);
bool is_parallelity_handle(const Complex& k, HandleRef r, ParallelityInfo* info = nullptr);

struct BundleComponent {
  std::vector<HandleRef> handles;
  std::string base;  // disc | annulus | mobius | torus | klein | other
  int base_euler = 0;
  int base_boundary = 0;
  bool base_orientable = true;
  std::vector<int> horizontal;  // S faces
  std::vector<int> vertical;    // faces shared with the outside or on the free boundary
  int vertical_components = 0;
  int vertical_free = 0;  // vertical components lying on the free boundary
};
struct ParallelityBundle {
  std::vector<BundleComponent> components;
  nlohmann::json to_json() const;
};
ParallelityBundle assemble_bundle(const HandleStructure& h);

struct GpbReport {
  std::array<ClauseReport, 5> clause;
  bool ok() const;
  nlohmann::json to_json() const;
};
GpbReport verify_gpb(const HandleStructure& h, const std::vector<HandleRef>& candidate);

struct AnnularMove {
  std::vector<HandleRef> region;  // P
  std::vector<int> inner;         // faces of G
  std::vector<int> outer;         // S faces of G'
  std::vector<HandleRef> bundle;  // the bundle component with G in its vertical boundary
  std::string certificate;        // "parallelity-region" | "enclosed"
  nlohmann::json to_json() const;
};
std::optional<AnnularMove> find_annular_move(const HandleStructure& h);

// Remove a set of handles; faces they shared with the rest become boundary
// labelled S. old -> new id maps are reported per index (-1 removed).
struct Removal {
  HandleStructure h;
  std::array<std::vector<int>, 4> new_id;
};
Removal remove_handles(const HandleStructure& h, const std::vector<HandleRef>& gone);
Removal apply_annular_move(const HandleStructure& h, const AnnularMove& m);

struct AnnularLog {
  HandleStructure result;
  bool lemma_ok = true;  // surviving parallelity handles stayed parallelity handles
  std::vector<nlohmann::json> steps;
};
AnnularLog simplify_annular(const HandleStructure& h);

HandleStructure replace_disc_bundles(const HandleStructure& h);

struct SolidTorusReport {
  HandleStructure h;
  int max_islands = 0;  // per 0-handle
  int max_alphas = 0;   // per 1-handle
  bool hypotheses_ok = false;
};
SolidTorusReport attach_solid_torus(const HandleStructure& h);

// ---- boundary curves ----

// A closed curve in the boundary: alternating regions and gap strips.
struct BoundaryCurve {
  std::vector<int> regions;  // Complex face ids
  std::vector<int> gaps;     // gaps[i] joins regions[i] and regions[i+1]
};
// Mod-2 homology class of a curve in the face set f, as a reduced vector.
std::vector<char> mod2_class(const Complex& k, const std::vector<int>& f, const BoundaryCurve& c);
// Shortest curve in f with the class of `target`, passing each region and
// gap at most once.
BoundaryCurve straighten_boundary_curve(const Complex& k, const std::vector<int>& f, const BoundaryCurve& target);
// Cycle basis of the region/gap graph of f (for building targets).
std::vector<BoundaryCurve> curve_basis(const Complex& k, const std::vector<int>& f);

}  // namespace kx
