#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "kx/diagram.hpp"
#include "kx/geometry.hpp"
#include "kx/handles.hpp"
#include "kx/ledger.hpp"

using namespace kx;

namespace {

Q det3(const P3& a, const P3& b, const P3& c) { return dot(a, cross(b, c)); }

// signed volumes of the cones from v over a fan of every face
bool cones_positive(const AffinePolyhedron& p, const P3& v) {
  for (auto& f : p.faces)
    for (size_t i = 1; i + 1 < f.size(); ++i) {
      P3 a = p.vertices[f[0]] - v, b = p.vertices[f[i]] - v, c = p.vertices[f[i + 1]] - v;
      if (sgn(det3(a, b, c)) <= 0) return false;
    }
  return true;
}

Q orient2(const std::array<Q, 2>& a, const std::array<Q, 2>& b, const std::array<Q, 2>& c) {
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

bool on_seg(const std::array<Q, 2>& a, const std::array<Q, 2>& b, const std::array<Q, 2>& p) {
  return std::min(a[0], b[0]) <= p[0] && p[0] <= std::max(a[0], b[0]) && std::min(a[1], b[1]) <= p[1] &&
         p[1] <= std::max(a[1], b[1]);
}

// closed segments meet
bool segments_meet(const std::array<Q, 2>& a, const std::array<Q, 2>& b, const std::array<Q, 2>& c,
                   const std::array<Q, 2>& d) {
  int d1 = sgn(orient2(c, d, a)), d2 = sgn(orient2(c, d, b)), d3 = sgn(orient2(a, b, c)), d4 = sgn(orient2(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && on_seg(c, d, a)) return true;
  if (d2 == 0 && on_seg(c, d, b)) return true;
  if (d3 == 0 && on_seg(a, b, c)) return true;
  if (d4 == 0 && on_seg(a, b, d)) return true;
  return false;
}

std::vector<std::array<Q, 2>> flat(const std::vector<P3>& v) {
  std::vector<std::array<Q, 2>> out;
  for (auto& p : v) out.push_back({p.x, p.y});
  return out;
}

bool polylines_meet(const std::vector<std::array<Q, 2>>& a, const std::vector<std::array<Q, 2>>& b) {
  for (size_t i = 0; i + 1 < a.size(); ++i)
    for (size_t j = 0; j + 1 < b.size(); ++j)
      if (segments_meet(a[i], a[i + 1], b[j], b[j + 1])) return true;
  return false;
}

std::set<int> shared_vertices(const AffinePolyhedron& p, int f, int g) {
  std::set<int> a(p.faces[f].begin(), p.faces[f].end()), out;
  for (int v : p.faces[g])
    if (a.count(v)) out.insert(v);
  return out;
}

std::vector<Q> fractions(int n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> k(1, 15);
  std::vector<Q> s;
  for (int i = 0; i < n; ++i) {
    s.push_back(Q(k(rng), 16));
    s.back().canonicalize();
  }
  return s;
}

}  // namespace

TEST_CASE("canonical 0-handle solid") {
  auto p = canonical_zero_handle();
  int n[3] = {0, 0, 0};
  for (auto k : p.kind) ++n[static_cast<int>(k)];
  CHECK(n[0] == 4);
  CHECK(n[1] == 6);
  CHECK(n[2] == 16);
  CHECK(p.faces.size() == 26);
  CHECK(faces_planar_convex(p));
  CHECK(star_shaped(p, p.star_center));
  CHECK(cones_positive(p, p.star_center));
  CHECK_FALSE(is_convex(p));
  CHECK(visible_from(p, p.star_center, 3));
  // every face planar: all vertices on the plane of the first three
  for (auto& f : p.faces) {
    P3 nrm = cross(p.vertices[f[1]] - p.vertices[f[0]], p.vertices[f[2]] - p.vertices[f[0]]);
    for (int v : f) CHECK(dot(nrm, p.vertices[v] - p.vertices[f[0]]) == 0);
  }
}

TEST_CASE("star-shapedness agrees with the cone test and implies visibility") {
  auto p = canonical_zero_handle();
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> k(-12, 12);
  int inside = 0, outside = 0;
  for (int i = 0; i < 300; ++i) {
    P3 v{Q(k(rng), 4), Q(k(rng), 4), Q(k(rng), 4)};
    v.x.canonicalize();
    v.y.canonicalize();
    v.z.canonicalize();
    bool s = star_shaped(p, v);
    CHECK(s == cones_positive(p, v));
    if (s) {
      ++inside;
      CHECK(visible_from(p, v, 2));
    } else {
      ++outside;
    }
  }
  CHECK(inside > 0);
  CHECK(outside > 0);
}

TEST_CASE("flat polygon discs") {
  auto p = canonical_zero_handle();
  for (int r = 0; r < 4; ++r) {
    auto d = realize_normal_disc(p, triangle_curve(p, r, fractions(6, r)), 0);
    CHECK(d.polygons.size() == 16);
    CHECK(d.annulus_polygons == 6);
    CHECK(d.cap_polygons == 10);
    CHECK(disc_embedded(d));
  }
  for (int b = 0; b < 6; ++b) {
    auto d = realize_normal_disc(p, square_curve(p, b, fractions(8, 10 + b)), 0);
    CHECK(d.polygons.size() == 25);
    CHECK(d.annulus_polygons == 8);
    CHECK(disc_embedded(d));
  }
  // parallel copies: nesting n sits on the curve at depth (n+1)/12
  auto at = [](int k, int n) { return std::vector<Q>(k, Q(n + 1, 12)); };
  auto d0 = realize_normal_disc(p, triangle_curve(p, 0, at(6, 0)), 0);
  auto d1 = realize_normal_disc(p, triangle_curve(p, 0, at(6, 1)), 1);
  CHECK(discs_disjoint(d0, d1));
  // a triangle and a square of crossing types meet
  auto sq = realize_normal_disc(p, square_curve(p, 0, std::vector<Q>(8, Q(1, 2))), 0);
  CHECK(d0.boundary.size() == 6);
  CHECK(sq.boundary.size() == 8);
  CHECK(nesting_scale(0) > nesting_scale(1));
}

TEST_CASE("polygon intersection") {
  std::vector<P3> a{{0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {0, 2, 0}};
  std::vector<P3> b{{1, 1, 0}, {3, 1, 0}, {3, 3, 0}, {1, 3, 0}};
  std::vector<P3> c{{5, 5, 0}, {6, 5, 0}, {6, 6, 0}};
  std::vector<P3> v{{1, -1, -1}, {1, 3, -1}, {1, 3, 1}, {1, -1, 1}};
  CHECK(polygon_intersection(a, b).size() == 4);
  CHECK(polygon_intersection(a, c).empty());
  CHECK(polygon_intersection(a, v).size() == 2);
}

TEST_CASE("translation invariance") {
  auto p = canonical_zero_handle();
  P3 t{Q(7, 3), Q(-5), Q(11, 2)};
  auto q = p;
  for (auto& v : q.vertices) v = v + t;
  q.star_center = p.star_center + t;
  auto s = fractions(8, 99);
  auto a = realize_normal_disc(p, square_curve(p, 2, s), 3);
  auto b = realize_normal_disc(q, square_curve(q, 2, s), 3);
  REQUIRE(a.polygons.size() == b.polygons.size());
  for (size_t i = 0; i < a.polygons.size(); ++i) {
    REQUIRE(a.polygons[i].size() == b.polygons[i].size());
    for (size_t j = 0; j < a.polygons[i].size(); ++j) CHECK(a.polygons[i][j] + t == b.polygons[i][j]);
  }
  CHECK(star_shaped(q, q.star_center));
}

TEST_CASE("curves cross the islands and bridges the face census counts") {
  auto p = canonical_zero_handle();
  // K4 incidence read off the solid: bridge g joins the islands it touches
  std::vector<int> island_face(4, -1);
  for (int f = 0; f < (int)p.faces.size(); ++f)
    if (p.kind[f] == PolyFace::Island) island_face[p.group[f]] = f;
  std::map<int, std::pair<int, int>> bridge_ends;
  for (int f = 0; f < (int)p.faces.size(); ++f) {
    if (p.kind[f] != PolyFace::Bridge) continue;
    std::vector<int> ends;
    for (int i = 0; i < 4; ++i)
      if (!shared_vertices(p, f, island_face[i]).empty()) ends.push_back(i);
    REQUIRE(ends.size() == 2);
    bridge_ends[p.group[f]] = {ends[0], ends[1]};
  }
  auto crossed = [&](const SurfaceCurve& c) {
    std::set<int> isl;
    std::set<std::pair<int, int>> br;
    for (int f : c.faces) {
      if (p.kind[f] == PolyFace::Island) isl.insert(p.group[f]);
      if (p.kind[f] == PolyFace::Bridge) br.insert(bridge_ends[p.group[f]]);
    }
    return std::pair(isl, br);
  };
  for (int r = 0; r < 4; ++r) {
    // triangle types are named by the island the region stays away from
    int away = -1;
    for (int i = 0; i < 4; ++i) {
      bool touch = false;
      for (int f = 0; f < (int)p.faces.size(); ++f)
        if (p.kind[f] == PolyFace::Region && p.group[f] == r && !shared_vertices(p, f, island_face[i]).empty())
          touch = true;
      if (!touch) {
        CHECK(away < 0);
        away = i;
      }
    }
    REQUIRE(away >= 0);
    auto [isl, br] = crossed(triangle_curve(p, r, fractions(6, 1)));
    auto wi = islands_crossed(false, away);
    auto wb = bridges_crossed(false, away);
    CHECK(isl == std::set<int>(wi.begin(), wi.end()));
    CHECK(br == std::set<std::pair<int, int>>(wb.begin(), wb.end()));
  }
  for (int b = 0; b < 6; ++b) {
    auto [i, j] = bridge_ends[b];
    int other = 0;
    for (int k = 1; k < 4; ++k)
      if (k != i && k != j) {
        other = k;
        break;
      }
    // the type is named by the partner of island 0
    int partner = i == 0 ? j : j == 0 ? i : 6 - i - j;
    (void)other;
    int type = partner - 1;
    auto [isl, br] = crossed(square_curve(p, b, fractions(8, 2)));
    auto wb = bridges_crossed(true, type);
    CHECK(isl.size() == 4);
    CHECK(br == std::set<std::pair<int, int>>(wb.begin(), wb.end()));
  }
  DiscCensus none;
  CHECK(faces_after_cut(none).faces == static_cast<long>(p.faces.size()));
}

TEST_CASE("affine structure over the trefoil") {
  GridEmbedding e;
  Diagram d = braid_closure(2, {1, 1, 1}, &e);
  for (bool ex : {false, true}) {
    HandleStructure h = build_exterior_handles(d, ex);
    auto a = assign_affine(h, d, e);
    CHECK(a.zero.size() == (ex ? 14u : 12u));
    CHECK(a.one.size() == h.one.size());
    for (size_t z = 0; z < a.zero.size(); ++z) {
      CHECK(faces_planar_convex(a.zero[z]));
      CHECK(star_shaped(a.zero[z], a.zero[z].star_center));
      CHECK(cones_positive(a.zero[z], a.zero[z].star_center));
    }
    // fibers of one 1-handle project to equal or disjoint arcs
    for (auto& g : a.one) {
      std::vector<std::array<Q, 2>> pts = g.section;
      Q cu = 0, cw = 0;
      for (auto& s : g.section) {
        cu += s[0];
        cw += s[1];
      }
      pts.push_back({cu / Q(long(g.section.size())), cw / Q(long(g.section.size()))});
      for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) {
          auto fi = flat(g.fiber(pts[i][0], pts[i][1]));
          auto fj = flat(g.fiber(pts[j][0], pts[j][1]));
          if (fi == fj) continue;
          CHECK_FALSE(polylines_meet(fi, fj));
        }
    }
  }
}
