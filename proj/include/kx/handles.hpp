#pragma once
// Handle structures on 3-manifolds stored through their 2-skeleton
// boundary data: 1-handles carry ordered attaching strips (alphas),
// 2-handles attach along alternating alpha/bridge words, 3-handles cap
// sphere components of the boundary of the 0-, 1- and 2-handles.

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kx/diagram.hpp"

namespace kx {

struct HandleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// An attaching strip end: alpha a of 1-handle k at end e.
struct Port {
  int k = -1, a = -1, e = 0;
  auto operator<=>(const Port&) const = default;
};

struct ZeroHandle {
  std::string prov;
  bool exceptional = false;
};

// Cross-section boundary, counterclockwise seen from the 0-handle at end 0:
// alpha[0], gap[0], alpha[1], gap[1], ...
struct OneHandle {
  std::array<int, 2> end{-1, -1};   // 0-handle at each end
  std::array<int, 2> site{-1, -1};  // island slot on that 0-handle
  std::vector<int> owner;           // 2-handle per alpha
  std::string prov;
  bool exceptional = false;
  int n() const { return static_cast<int>(owner.size()); }
};

struct Bridge {
  int zero = -1;
  Port p, q;
  int owner = -1;
};

// seam: zero-width marker carrying a boundary curve of a partial label;
// not counted as a handle.
struct TwoHandle {
  std::string prov;
  bool seam = false;
  bool exceptional = false;
};

enum class FaceType : int { Island = 0, BridgeF = 1, Alpha = 2, Region = 3, Gap = 4, Cap = 5 };

struct ThreeHandle {
  FaceType type = FaceType::Region;  // a face of its attaching sphere
  int corner = -1;
  std::string prov;
};

struct HandleStructure {
  std::vector<ZeroHandle> zero;
  std::vector<OneHandle> one;
  std::vector<Bridge> bridges;
  std::vector<TwoHandle> two;
  std::vector<ThreeHandle> three;
  // Faces of the boundary marked as lying in S: (type, corner) -> piece.
  std::map<std::pair<int, int>, int> s_label;

  int corner_count() const;
  int corner_offset(int k) const;
  int corner(int k, int a, int e, int s) const { return corner_offset(k) + 4 * a + 2 * e + s; }
  int count(int index) const;  // seams excluded
  int euler() const { return count(0) - count(1) + count(2) - count(3); }
};

// first/last corner of a port in counterclockwise order seen from its
// 0-handle.
inline int port_first_s(int e) { return e == 0 ? 0 : 1; }
inline int port_last_s(int e) { return e == 0 ? 1 : 0; }

// Derived 2-complex: every handle boundary decomposed into faces.
struct Complex {
  struct Face {
    FaceType type;
    std::vector<int> corners;  // cycle
    std::vector<int> edges;    // merged edge ids, degenerate ones removed
    int zero = -1, one = -1, two = -1, bridge = -1;
    int alpha = -1, end = -1;  // for islands and alpha strips
    bool degenerate = false;
    int three = -1;  // 3-handle covering it (boundary faces only)
    int s = -1;      // S piece, -1 if none
  };
  struct Edge {
    char type;  // 'P','A','G','B'
    int u, v;   // merged vertices
    std::vector<int> faces;
  };

  explicit Complex(const HandleStructure& h);

  const HandleStructure* h;
  int ncorner = 0;
  std::vector<int> mA, mG, mB, mP;  // partner corner per matching
  std::vector<int> vid;             // merged vertex per corner
  int nvert = 0;
  std::vector<Face> faces;
  std::vector<Edge> edges;
  // face id per corner for each type (Island..Cap)
  std::array<std::vector<int>, 6> face_at;

  int face_of(FaceType t, int corner) const { return face_at[static_cast<int>(t)][corner]; }
  bool boundary_face(int f) const {
    auto t = faces[f].type;
    return !faces[f].degenerate &&
           (t == FaceType::Region || t == FaceType::Gap || t == FaceType::Cap);
  }
  // Faces in the boundary of a handle (index, id).
  std::vector<int> handle_faces(int index, int id) const;
  // Which handles (index, id) contain face f.
  std::vector<std::pair<int, int>> face_handles(int f) const;
};

// Euler characteristic, component count, boundary circle count of the
// subcomplex spanned by a face set.
struct SurfaceStats {
  int euler = 0;
  int components = 0;
  int boundary_circles = 0;
  int faces = 0;
};
SurfaceStats surface_stats(const Complex& k, const std::vector<int>& face_set);
// Components of a face set under edge adjacency.
std::vector<std::vector<int>> face_components(const Complex& k, const std::vector<int>& face_set);

struct BoundaryComponent {
  std::vector<int> faces;
  int euler = 0;
  int three = -1;  // covering 3-handle or -1 for the manifold boundary
  bool has_s = false;
  bool all_s = false;
};

struct Census {
  std::array<int, 4> handles{};
  int euler = 0;
  int seams = 0;
  int exceptional_zero = 0;
  std::vector<BoundaryComponent> boundary;  // components of the boundary of 0+1+2 handles
  int boundary_tori() const;
  int free_boundary_components() const;
  bool single_torus_boundary() const;
};
Census census(const HandleStructure& h);

struct ClauseReport {
  bool ok = true;
  std::vector<std::string> issues;
};
struct ConventionReport {
  std::array<ClauseReport, 4> clause;
  bool ok() const {
    return clause[0].ok && clause[1].ok && clause[2].ok && clause[3].ok;
  }
  nlohmann::json to_json() const;
};
ConventionReport verify_convention(const HandleStructure& h);

struct BoundaryPattern {
  int zero = -1;
  int islands = 0;
  int bridges = 0;     // non-seam bridges
  int regions = 0;
  std::vector<std::pair<int, int>> island_of;        // (1-handle, end) per island
  std::vector<std::array<int, 3>> bridge_edges;      // (island i, island j, bridge id)
  bool is_k4() const;
};
BoundaryPattern boundary_pattern(const HandleStructure& h, int zero);

// 2-handles as port cycles; returns per-cycle list of (alpha ports).
std::vector<std::vector<Port>> port_cycles(const HandleStructure& h);
// Recompute 2-handle records from port cycles; keeps seam flags.
void rederive_two_handles(HandleStructure& h, const std::vector<std::string>* prov = nullptr);

nlohmann::json to_json(const HandleStructure& h);
HandleStructure handles_from_json(const nlohmann::json& j);

// Triangulation with oriented tetrahedra; gluing of face f of tet t.
struct Triangulation {
  struct Glue {
    int tet = -1;
    std::array<int, 4> perm{};  // vertex map t -> tet
  };
  std::vector<std::array<Glue, 4>> glue;
  std::vector<std::string> tet_prov;
  std::vector<std::array<std::string, 4>> vertex_name;  // per tet vertex role
};
// Where the dual handles came from.
struct DualInfo {
  std::map<std::pair<int, int>, std::pair<int, int>> face_handle;  // (tet, face) -> (1-handle, end)
  std::vector<std::array<int, 3>> two_edge;                       // 2-handle -> (tet, v, w)
};
// Dual handle structure: 0-handles = tets, 1-handles = glued faces,
// 2-handles = edge classes, 3-handles on vertices with sphere links.
HandleStructure from_triangulation(const Triangulation& t, DualInfo* info = nullptr);
// Adds a 3-handle on every sphere component of the boundary that has none.
void cap_spheres(HandleStructure& h, const std::string& prov_prefix = "sphere");
// First word of a provenance tag.
std::string prov_kind(const std::string& prov);
Triangulation diagram_triangulation(const Diagram& d);

HandleStructure build_exterior_handles(const Diagram& d, bool exceptional);

}  // namespace kx
