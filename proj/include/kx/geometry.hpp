#pragma once
// Exact rational polyhedral geometry for 0- and 1-handles: the canonical
// 0-handle solid, flat-polygon normal discs, vertical projection counts.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

#include "kx/diagram.hpp"
#include "kx/handles.hpp"

namespace kx {

using Q = mpq_class;

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct P3 {
  Q x, y, z;
  bool operator==(const P3& o) const { return x == o.x && y == o.y && z == o.z; }
};
P3 operator+(const P3& a, const P3& b);
P3 operator-(const P3& a, const P3& b);
P3 operator*(const Q& s, const P3& a);
Q dot(const P3& a, const P3& b);
P3 cross(const P3& a, const P3& b);

enum class PolyFace : int { Island = 0, Bridge = 1, Region = 2 };

struct AffinePolyhedron {
  std::vector<P3> vertices;
  std::vector<std::vector<int>> faces;  // counterclockwise seen from outside
  std::vector<PolyFace> kind;
  std::vector<int> group;  // island / bridge / region index of each face
  P3 star_center;
  nlohmann::json to_json() const;
};

// The 0-handle solid: 4 island hexagons, 6 bridge quadrilaterals and 4
// regions of 4 triangles each. Not convex.
AffinePolyhedron canonical_zero_handle();

bool faces_planar_convex(const AffinePolyhedron& p);
// v strictly on the inner side of every face plane.
bool star_shaped(const AffinePolyhedron& p, const P3& v);
bool is_convex(const AffinePolyhedron& p);
// Visibility by exact ray casting from v to sample points of every face.
bool visible_from(const AffinePolyhedron& p, const P3& v, int samples_per_face);

// Closed polyline on the boundary: points[i] lies in the interior of an
// edge, and the arc points[i] -> points[i+1] is straight inside faces[i].
struct SurfaceCurve {
  std::vector<P3> points;
  std::vector<int> faces;
  int inside = -1;  // a whole face on the cap side; -1 picks the smaller side
};

// Boundary of a normal triangle around region r (0..3) or a normal square
// around regions r and its partner across bridge b; s[i] in (0,1) is the
// position of point i along its edge, measured from the enclosed side.
SurfaceCurve triangle_curve(const AffinePolyhedron& p, int region, const std::vector<Q>& s);
SurfaceCurve square_curve(const AffinePolyhedron& p, int bridge, const std::vector<Q>& s);

struct FlatPolygonDisc {
  std::vector<std::vector<P3>> polygons;
  std::vector<P3> boundary;
  int nesting_index = 0;
  int annulus_polygons = 0;
  int cap_polygons = 0;
};

Q nesting_scale(int nesting_index);
FlatPolygonDisc realize_normal_disc(const AffinePolyhedron& p, const SurfaceCurve& c, int nesting_index);

// Exact intersection of two planar convex polygons, as the extreme points
// of the common set (empty when disjoint).
std::vector<P3> polygon_intersection(const std::vector<P3>& a, const std::vector<P3>& b);
// Polygons of one disc meet only along common vertices and edges.
bool disc_embedded(const FlatPolygonDisc& d);
bool discs_disjoint(const FlatPolygonDisc& a, const FlatPolygonDisc& b);

// Straight-arc paths tagged per segment with their handle.
struct PathSegment {
  int index = 0;  // 0 or 1
  int handle = -1;
  bool product = false;
};
struct StraightArcPath {
  std::vector<P3> points;            // consecutive segments share endpoints
  std::vector<PathSegment> segment;  // segment i joins points i, i+1
  bool closed = false;
};

struct CrossingCount {
  std::int64_t total = 0;
  std::map<int, std::int64_t> per_zero;  // 0-handle -> crossings
  std::int64_t outside = 0;              // pairs not both in one 0-handle
  std::map<int, int> segments_per_zero;
  nlohmann::json to_json() const;
};

// Transverse double points of the vertical projection. Degenerate
// positions are resolved by a symbolic per-vertex displacement; pairs whose
// projections coincide are not crossings.
CrossingCount project_and_count(const std::vector<StraightArcPath>& paths);
CrossingCount project_and_count_serial(const std::vector<StraightArcPath>& paths);

// Affine data of a handle structure placed over a grid embedding.
struct OneHandleGeometry {
  std::vector<std::array<Q, 2>> section;  // convex polygon in (offset, height)
  std::vector<P3> core;                   // horizontal polyline between 0-handles
  std::vector<std::array<Q, 2>> normal;   // per core segment, left normal
  std::string kind;                       // crossing-square, edge-following, exceptional
  // Product fiber over the section point (u, w).
  std::vector<P3> fiber(const Q& u, const Q& w) const;
};
struct AffineStructure {
  std::vector<AffinePolyhedron> zero;
  std::vector<P3> zero_center;
  std::vector<OneHandleGeometry> one;
};
AffineStructure assign_affine(const HandleStructure& h, const Diagram& d, const GridEmbedding& e);

StraightArcPath path_from_json(const nlohmann::json& j);
nlohmann::json path_to_json(const StraightArcPath& p);

}  // namespace kx
