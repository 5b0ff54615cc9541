#include "kx/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

namespace kx {

static Q frac(long a, long b) {
  Q q(a, b);
  q.canonicalize();
  return q;
}

P3 operator+(const P3& a, const P3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
P3 operator-(const P3& a, const P3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
P3 operator*(const Q& s, const P3& a) { return {s * a.x, s * a.y, s * a.z}; }
Q dot(const P3& a, const P3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
P3 cross(const P3& a, const P3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

namespace {

bool is_zero(const P3& a) { return sgn(a.x) == 0 && sgn(a.y) == 0 && sgn(a.z) == 0; }

// normal of a planar polygon from its first non-collinear triple
P3 poly_normal(const std::vector<P3>& v) {
  P3 n{0, 0, 0};
  for (size_t i = 0; i < v.size(); ++i) {
    const P3& a = v[i];
    const P3& b = v[(i + 1) % v.size()];
    // Newell
    n.x += (a.y - b.y) * (a.z + b.z);
    n.y += (a.z - b.z) * (a.x + b.x);
    n.z += (a.x - b.x) * (a.y + b.y);
  }
  return n;
}

std::vector<P3> face_points(const AffinePolyhedron& p, int f) {
  std::vector<P3> r;
  for (int v : p.faces[f]) r.push_back(p.vertices[v]);
  return r;
}

nlohmann::json pt_json(const P3& a) { return {a.x.get_str(), a.y.get_str(), a.z.get_str()}; }

bool on_open_segment(const P3& x, const P3& a, const P3& b) {
  P3 d = b - a, w = x - a;
  if (!is_zero(cross(d, w))) return false;
  Q t = dot(w, d), l = dot(d, d);
  return sgn(t) > 0 && t < l;
}

bool on_closed_segment(const P3& x, const P3& a, const P3& b) {
  if (x == a || x == b) return true;
  return on_open_segment(x, a, b);
}

}  // namespace

nlohmann::json AffinePolyhedron::to_json() const {
  nlohmann::json j;
  for (auto& v : vertices) j["vertices"].push_back(pt_json(v));
  static const char* names[] = {"island", "bridge", "region"};
  for (size_t f = 0; f < faces.size(); ++f)
    j["faces"].push_back({{"vertices", faces[f]}, {"kind", names[static_cast<int>(kind[f])]}, {"group", group[f]}});
  j["star_center"] = pt_json(star_center);
  return j;
}

AffinePolyhedron canonical_zero_handle() {
  // Start from the permutations of (0, +-1, +-2); hexagons normal to
  // (+-1,+-1,+-1) split into islands (odd number of minus signs) and
  // regions, squares normal to the axes are bridges.
  AffinePolyhedron p;
  std::vector<std::array<int, 3>> iv;
  int perm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  for (auto& pm : perm)
    for (int s1 : {-1, 1})
      for (int s2 : {-1, 1}) {
        int val[3] = {0, s1, 2 * s2};
        std::array<int, 3> c{};
        for (int i = 0; i < 3; ++i) c[pm[i]] = val[i];
        iv.push_back(c);
      }
  std::sort(iv.begin(), iv.end());
  iv.erase(std::unique(iv.begin(), iv.end()), iv.end());
  auto adj = [&](int a, int b) {
    int d = 0;
    for (int i = 0; i < 3; ++i) d += (iv[a][i] - iv[b][i]) * (iv[a][i] - iv[b][i]);
    return d == 2;
  };
  // cycle of the vertices satisfying n.x == level, ccw about n
  auto cycle = [&](std::array<int, 3> n, int level) {
    std::vector<int> on;
    for (int i = 0; i < static_cast<int>(iv.size()); ++i)
      if (n[0] * iv[i][0] + n[1] * iv[i][1] + n[2] * iv[i][2] == level) on.push_back(i);
    std::vector<int> cyc{on[0]};
    while (cyc.size() < on.size())
      for (int w : on)
        if (adj(cyc.back(), w) && std::find(cyc.begin(), cyc.end(), w) == cyc.end()) {
          cyc.push_back(w);
          break;
        }
    auto v = [&](int i) { return iv[i]; };
    std::array<int, 3> a = v(cyc[0]), b = v(cyc[1]), c = v(cyc[2]);
    int u[3] = {b[0] - a[0], b[1] - a[1], b[2] - a[2]}, w[3] = {c[0] - b[0], c[1] - b[1], c[2] - b[2]};
    int cr[3] = {u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]};
    if (cr[0] * n[0] + cr[1] * n[1] + cr[2] * n[2] < 0) std::reverse(cyc.begin() + 1, cyc.end());
    return cyc;
  };
  std::vector<std::array<int, 3>> islands, regions;
  for (int a : {1, -1})
    for (int b : {1, -1})
      for (int c : {1, -1}) ((a * b * c < 0) ? islands : regions).push_back({a, b, c});
  std::vector<std::vector<int>> icyc, rcyc, bcyc;
  for (auto& n : islands) icyc.push_back(cycle(n, 3));
  for (auto& n : regions) rcyc.push_back(cycle(n, 3));
  for (int ax = 0; ax < 3; ++ax)
    for (int s : {1, -1}) {
      std::array<int, 3> n{0, 0, 0};
      n[ax] = s;
      bcyc.push_back(cycle(n, 2));
    }
  // push islands outward by different amounts so the regions are skew
  const Q shift[4] = {Q(1, 2), Q(1, 4), Q(0), Q(0)};
  p.vertices.resize(iv.size());
  for (int i = 0; i < static_cast<int>(iv.size()); ++i) p.vertices[i] = {iv[i][0], iv[i][1], iv[i][2]};
  for (int k = 0; k < 4; ++k)
    for (int i : icyc[k]) p.vertices[i] = p.vertices[i] + shift[k] * P3{islands[k][0], islands[k][1], islands[k][2]};
  for (int k = 0; k < 4; ++k) {
    p.faces.push_back(icyc[k]);
    p.kind.push_back(PolyFace::Island);
    p.group.push_back(k);
  }
  for (int k = 0; k < 6; ++k) {
    p.faces.push_back(bcyc[k]);
    p.kind.push_back(PolyFace::Bridge);
    p.group.push_back(k);
  }
  p.star_center = {0, 0, 0};
  for (int k = 0; k < 4; ++k) {
    auto& h = rcyc[k];
    // two ways to cut the hexagon into 4 triangles; take the one that
    // folds inward
    std::vector<std::vector<int>> best;
    for (int o = 0; o < 2; ++o) {
      std::vector<std::vector<int>> t = {{h[o], h[o + 2], h[(o + 4) % 6]},
                                         {h[o], h[o + 1], h[o + 2]},
                                         {h[o + 2], h[o + 3], h[(o + 4) % 6]},
                                         {h[(o + 4) % 6], h[(o + 5) % 6], h[o]}};
      auto pts = [&](const std::vector<int>& f) {
        std::vector<P3> r;
        for (int v : f) r.push_back(p.vertices[v]);
        return r;
      };
      P3 n = poly_normal(pts(t[0]));
      bool reflex = false;
      for (int e = 1; e < 4; ++e) {
        int apex = t[e][1];
        if (sgn(dot(n, p.vertices[apex] - p.vertices[t[0][0]])) > 0) reflex = true;
      }
      if (reflex || (o == 1 && best.empty())) {
        best = t;
        break;
      }
    }
    for (auto& f : best) {
      p.faces.push_back(f);
      p.kind.push_back(PolyFace::Region);
      p.group.push_back(k);
    }
  }
  return p;
}

bool faces_planar_convex(const AffinePolyhedron& p) {
  for (size_t f = 0; f < p.faces.size(); ++f) {
    auto v = face_points(p, static_cast<int>(f));
    P3 n = poly_normal(v);
    if (is_zero(n)) return false;
    for (auto& x : v)
      if (sgn(dot(n, x - v[0])) != 0) return false;
    for (size_t i = 0; i < v.size(); ++i) {
      P3 c = cross(v[(i + 1) % v.size()] - v[i], v[(i + 2) % v.size()] - v[(i + 1) % v.size()]);
      if (sgn(dot(c, n)) <= 0) return false;
    }
  }
  return true;
}

bool star_shaped(const AffinePolyhedron& p, const P3& v) {
  for (size_t f = 0; f < p.faces.size(); ++f) {
    auto pts = face_points(p, static_cast<int>(f));
    if (sgn(dot(poly_normal(pts), v - pts[0])) >= 0) return false;
  }
  return true;
}

bool is_convex(const AffinePolyhedron& p) {
  for (size_t f = 0; f < p.faces.size(); ++f) {
    auto pts = face_points(p, static_cast<int>(f));
    P3 n = poly_normal(pts);
    for (auto& x : p.vertices)
      if (sgn(dot(n, x - pts[0])) > 0) return false;
  }
  return true;
}

bool visible_from(const AffinePolyhedron& p, const P3& v, int samples) {
  // sample points: convex combinations of a face's vertices with weights
  // from a small deterministic table; the open segment v->x must not meet
  // any face
  for (size_t f = 0; f < p.faces.size(); ++f) {
    auto pts = face_points(p, static_cast<int>(f));
    for (int s = 0; s < samples; ++s) {
      P3 x{0, 0, 0};
      Q tot = 0;
      for (size_t i = 0; i < pts.size(); ++i) {
        Q w = 1 + static_cast<long>((s * 7 + i * 3 + f) % 5);
        x = x + w * pts[i];
        tot += w;
      }
      x = (1 / tot) * x;
      for (size_t g = 0; g < p.faces.size(); ++g) {
        auto gp = face_points(p, static_cast<int>(g));
        P3 n = poly_normal(gp);
        Q dv = dot(n, v - gp[0]), dx = dot(n, x - gp[0]);
        if (sgn(dv) == sgn(dx)) continue;  // both on one side (or both in plane)
        if (sgn(dx) == 0) continue;        // x on that plane: endpoint contact
        Q t = dv / (dv - dx);              // point v + t (x - v)
        if (t <= 0 || t >= 1) continue;
        P3 y = v + t * (x - v);
        // y inside the convex face g?
        bool inside = true;
        for (size_t i = 0; i < gp.size() && inside; ++i)
          if (sgn(dot(cross(gp[(i + 1) % gp.size()] - gp[i], y - gp[i]), n)) < 0) inside = false;
        if (inside) return false;
      }
    }
  }
  return true;
}

namespace {

// faces of p containing both vertices a and b
std::vector<int> faces_with(const AffinePolyhedron& p, std::initializer_list<int> vs) {
  std::vector<int> r;
  for (size_t f = 0; f < p.faces.size(); ++f) {
    bool all = true;
    for (int v : vs)
      if (std::find(p.faces[f].begin(), p.faces[f].end(), v) == p.faces[f].end()) all = false;
    if (all) r.push_back(static_cast<int>(f));
  }
  return r;
}

SurfaceCurve curve_around(const AffinePolyhedron& p, const std::set<int>& U, const std::vector<Q>& s) {
  std::set<int> uv;
  for (int f : U) uv.insert(p.faces[f].begin(), p.faces[f].end());
  // boundary edges of U, oriented as in their U face
  std::map<int, int> next;
  for (int f : U) {
    auto& c = p.faces[f];
    for (size_t i = 0; i < c.size(); ++i) {
      int a = c[i], b = c[(i + 1) % c.size()];
      bool inner = false;
      for (int g : faces_with(p, {a, b}))
        if (g != f && U.count(g)) inner = true;
      if (!inner) next[a] = b;
    }
  }
  std::vector<int> cyc{next.begin()->first};
  while (next[cyc.back()] != cyc[0]) cyc.push_back(next[cyc.back()]);
  // leaving edges
  std::vector<std::pair<int, int>> leave;
  for (int h : cyc) {
    for (size_t w = 0; w < p.vertices.size(); ++w) {
      if (uv.count(static_cast<int>(w))) continue;
      if (!faces_with(p, {h, static_cast<int>(w)}).empty()) {
        // an edge iff two faces share it consecutively; check adjacency in a face
        bool edge = false;
        for (int f : faces_with(p, {h, static_cast<int>(w)})) {
          auto& c = p.faces[f];
          for (size_t i = 0; i < c.size(); ++i)
            if ((c[i] == h && c[(i + 1) % c.size()] == static_cast<int>(w)) ||
                (c[i] == static_cast<int>(w) && c[(i + 1) % c.size()] == h))
              edge = true;
        }
        if (edge) leave.push_back({h, static_cast<int>(w)});
      }
    }
  }
  if (s.size() != leave.size())
    throw GeometryError("curve needs " + std::to_string(leave.size()) + " edge positions");
  SurfaceCurve c;
  for (size_t i = 0; i < leave.size(); ++i) {
    auto [h, w] = leave[i];
    Q si = s[i];
    si.canonicalize();  // callers may hand in unreduced num/den pairs
    if (si <= 0 || si >= 1) throw GeometryError("edge position outside (0,1)");
    c.points.push_back(p.vertices[h] + si * (p.vertices[w] - p.vertices[h]));
  }
  for (size_t i = 0; i < leave.size(); ++i) {
    auto [h1, w1] = leave[i];
    auto [h2, w2] = leave[(i + 1) % leave.size()];
    auto f = faces_with(p, {h1, w1, h2, w2});
    if (f.size() != 1) throw GeometryError("no face carries the arc");
    c.faces.push_back(f[0]);
  }
  c.inside = *U.begin();
  return c;
}

}  // namespace

SurfaceCurve triangle_curve(const AffinePolyhedron& p, int region, const std::vector<Q>& s) {
  std::set<int> U;
  for (size_t f = 0; f < p.faces.size(); ++f)
    if (p.kind[f] == PolyFace::Region && p.group[f] == region) U.insert(static_cast<int>(f));
  if (U.empty()) throw GeometryError("no such region");
  return curve_around(p, U, s);
}

SurfaceCurve square_curve(const AffinePolyhedron& p, int bridge, const std::vector<Q>& s) {
  int bf = -1;
  for (size_t f = 0; f < p.faces.size(); ++f)
    if (p.kind[f] == PolyFace::Bridge && p.group[f] == bridge) bf = static_cast<int>(f);
  if (bf < 0) throw GeometryError("no such bridge");
  std::set<int> regs;
  auto& c = p.faces[bf];
  for (size_t i = 0; i < c.size(); ++i)
    for (int g : faces_with(p, {c[i], c[(i + 1) % c.size()]}))
      if (p.kind[g] == PolyFace::Region) regs.insert(p.group[g]);
  std::set<int> U{bf};
  for (size_t f = 0; f < p.faces.size(); ++f)
    if (p.kind[f] == PolyFace::Region && regs.count(p.group[f])) U.insert(static_cast<int>(f));
  return curve_around(p, U, s);
}

Q nesting_scale(int n) {
  if (n < 0 || n > 62) throw GeometryError("nesting index out of range");
  return frac(63 - n, 64);
}

FlatPolygonDisc realize_normal_disc(const AffinePolyhedron& p, const SurfaceCurve& c, int n) {
  const int m = static_cast<int>(c.points.size());
  if (m < 3 || static_cast<int>(c.faces.size()) != m) throw GeometryError("boundary is not a closed polyline");
  // locate every point on the interior of exactly one edge
  std::vector<std::pair<int, int>> edge(m, {-1, -1});
  for (int i = 0; i < m; ++i) {
    for (size_t f = 0; f < p.faces.size(); ++f) {
      auto& cy = p.faces[f];
      for (size_t k = 0; k < cy.size(); ++k) {
        int a = cy[k], b = cy[(k + 1) % cy.size()];
        if (on_open_segment(c.points[i], p.vertices[a], p.vertices[b])) {
          std::pair<int, int> e{std::min(a, b), std::max(a, b)};
          if (edge[i].first >= 0 && edge[i] != e) throw GeometryError("boundary point on two edges");
          edge[i] = e;
        }
      }
    }
    if (edge[i].first < 0) throw GeometryError("boundary point not interior to an edge");
  }
  std::set<std::pair<int, int>> seen(edge.begin(), edge.end());
  std::set<int> crossed(c.faces.begin(), c.faces.end());
  if (static_cast<int>(seen.size()) != m || static_cast<int>(crossed.size()) != m)
    throw GeometryError("boundary not embedded");
  auto has = [&](int f, std::pair<int, int> e) {
    auto& cy = p.faces[f];
    return std::find(cy.begin(), cy.end(), e.first) != cy.end() && std::find(cy.begin(), cy.end(), e.second) != cy.end();
  };
  for (int i = 0; i < m; ++i)
    if (!has(c.faces[i], edge[i]) || !has(c.faces[i], edge[(i + 1) % m]))
      throw GeometryError("boundary arc not a straight arc in one face");
  // components of the uncrossed faces
  const int F = static_cast<int>(p.faces.size());
  std::vector<int> comp(F, -1);
  int ncomp = 0;
  for (int f = 0; f < F; ++f) {
    if (crossed.count(f) || comp[f] >= 0) continue;
    std::vector<int> st{f};
    comp[f] = ncomp;
    while (!st.empty()) {
      int g = st.back();
      st.pop_back();
      auto& cy = p.faces[g];
      for (size_t k = 0; k < cy.size(); ++k)
        for (int h : faces_with(p, {cy[k], cy[(k + 1) % cy.size()]}))
          if (!crossed.count(h) && comp[h] < 0) {
            comp[h] = ncomp;
            st.push_back(h);
          }
    }
    ++ncomp;
  }
  if (ncomp != 2) throw GeometryError("boundary does not separate the faces into two discs");
  int size[2] = {0, 0};
  for (int f = 0; f < F; ++f)
    if (comp[f] >= 0) ++size[comp[f]];
  int side = size[1] < size[0] ? 1 : 0;
  if (c.inside >= 0) {
    if (c.inside >= F || comp[c.inside] < 0) throw GeometryError("cap face is crossed by the boundary");
    side = comp[c.inside];
  }
  std::set<int> uv;
  for (int f = 0; f < F; ++f)
    if (comp[f] == side) uv.insert(p.faces[f].begin(), p.faces[f].end());

  const P3& v = p.star_center;
  Q lam = nesting_scale(n);
  auto dil = [&](const P3& x) { return v + lam * (x - v); };
  FlatPolygonDisc d;
  d.boundary = c.points;
  d.nesting_index = n;
  for (int i = 0; i < m; ++i) {
    const P3& a = c.points[i];
    const P3& b = c.points[(i + 1) % m];
    d.polygons.push_back({a, b, dil(b), dil(a)});
  }
  d.annulus_polygons = m;
  for (int f = 0; f < F; ++f)
    if (comp[f] == side) {
      std::vector<P3> poly;
      for (int x : p.faces[f]) poly.push_back(dil(p.vertices[x]));
      d.polygons.push_back(poly);
    }
  for (int i = 0; i < m; ++i) {
    auto& cy = p.faces[c.faces[i]];
    const int k = static_cast<int>(cy.size());
    auto pos = [&](std::pair<int, int> e) {
      for (int j = 0; j < k; ++j)
        if (std::min(cy[j], cy[(j + 1) % k]) == e.first && std::max(cy[j], cy[(j + 1) % k]) == e.second) return j;
      return -1;
    };
    int ja = pos(edge[i]), jb = pos(edge[(i + 1) % m]);
    std::vector<P3> piece{dil(c.points[i])};
    int step = uv.count(cy[(ja + 1) % k]) ? 1 : -1;
    int j = step == 1 ? (ja + 1) % k : ja;
    int stop_edge = jb;
    for (int guard = 0; guard <= k; ++guard) {
      if (!uv.count(cy[j])) throw GeometryError("boundary arc does not cut its face cleanly");
      piece.push_back(dil(p.vertices[cy[j]]));
      int e = step == 1 ? j : (j - 1 + k) % k;  // edge leaving j in the walk direction
      if (e == stop_edge) break;
      j = (j + step + k) % k;
    }
    piece.push_back(dil(c.points[(i + 1) % m]));
    d.polygons.push_back(piece);
  }
  d.cap_polygons = static_cast<int>(d.polygons.size()) - m;
  return d;
}

namespace {

int dominant_axis(const P3& n) {
  Q ax = abs(n.x), ay = abs(n.y), az = abs(n.z);
  if (ax >= ay && ax >= az) return 0;
  if (ay >= az) return 1;
  return 2;
}

std::array<Q, 2> drop(const P3& a, int axis) {
  if (axis == 0) return {a.y, a.z};
  if (axis == 1) return {a.z, a.x};
  return {a.x, a.y};
}

Q cross2(const std::array<Q, 2>& o, const std::array<Q, 2>& a, const std::array<Q, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

// points of convex polygon a on the plane (n, p0): vertices on it and
// proper edge crossings
std::vector<P3> plane_cut(const std::vector<P3>& a, const P3& n, const P3& p0) {
  std::vector<P3> r;
  const size_t k = a.size();
  std::vector<Q> d(k);
  for (size_t i = 0; i < k; ++i) d[i] = dot(n, a[i] - p0);
  for (size_t i = 0; i < k; ++i) {
    size_t j = (i + 1) % k;
    if (sgn(d[i]) == 0) r.push_back(a[i]);
    if (sgn(d[i]) * sgn(d[j]) < 0) {
      Q t = d[i] / (d[i] - d[j]);
      r.push_back(a[i] + t * (a[j] - a[i]));
    }
  }
  return r;
}

}  // namespace

std::vector<P3> polygon_intersection(const std::vector<P3>& a, const std::vector<P3>& b) {
  P3 na = poly_normal(a), nb = poly_normal(b);
  P3 dir = cross(na, nb);
  if (is_zero(dir)) {
    if (sgn(dot(na, b[0] - a[0])) != 0) return {};
    // coplanar: clip a by b in 2D
    int ax = dominant_axis(na);
    auto to2 = [&](const std::vector<P3>& v) {
      std::vector<std::pair<std::array<Q, 2>, P3>> r;
      for (auto& x : v) r.push_back({drop(x, ax), x});
      return r;
    };
    auto A = to2(a), B = to2(b);
    auto orient = [&](auto& poly) {
      Q area = 0;
      for (size_t i = 0; i < poly.size(); ++i) area += cross2(poly[0].first, poly[i].first, poly[(i + 1) % poly.size()].first);
      if (sgn(area) < 0) std::reverse(poly.begin(), poly.end());
    };
    orient(A);
    orient(B);
    auto out = A;
    for (size_t i = 0; i < B.size() && !out.empty(); ++i) {
      auto& e0 = B[i];
      auto& e1 = B[(i + 1) % B.size()];
      decltype(out) nxt;
      for (size_t j = 0; j < out.size(); ++j) {
        auto& p = out[j];
        auto& q = out[(j + 1) % out.size()];
        Q sp = cross2(e0.first, e1.first, p.first), sq = cross2(e0.first, e1.first, q.first);
        if (sgn(sp) >= 0) nxt.push_back(p);
        if (sgn(sp) * sgn(sq) < 0) {
          Q t = sp / (sp - sq);
          P3 x = p.second + t * (q.second - p.second);
          nxt.push_back({drop(x, ax), x});
        }
      }
      out = nxt;
    }
    std::vector<P3> r;
    for (auto& x : out)
      if (std::find(r.begin(), r.end(), x.second) == r.end()) r.push_back(x.second);
    return r;
  }
  auto sa = plane_cut(a, nb, b[0]);
  auto sb = plane_cut(b, na, a[0]);
  if (sa.empty() || sb.empty()) return {};
  auto range = [&](const std::vector<P3>& s) {
    size_t lo = 0, hi = 0;
    for (size_t i = 1; i < s.size(); ++i) {
      if (dot(dir, s[i]) < dot(dir, s[lo])) lo = i;
      if (dot(dir, s[i]) > dot(dir, s[hi])) hi = i;
    }
    return std::pair{s[lo], s[hi]};
  };
  auto [alo, ahi] = range(sa);
  auto [blo, bhi] = range(sb);
  P3 lo = dot(dir, alo) >= dot(dir, blo) ? alo : blo;
  P3 hi = dot(dir, ahi) <= dot(dir, bhi) ? ahi : bhi;
  if (dot(dir, lo) > dot(dir, hi)) return {};
  if (lo == hi) return {lo};
  return {lo, hi};
}

bool disc_embedded(const FlatPolygonDisc& d) {
  const size_t n = d.polygons.size();
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      auto I = polygon_intersection(d.polygons[i], d.polygons[j]);
      if (I.empty()) continue;
      std::vector<P3> shared;
      for (auto& x : d.polygons[i])
        if (std::find(d.polygons[j].begin(), d.polygons[j].end(), x) != d.polygons[j].end()) shared.push_back(x);
      for (auto& x : I) {
        bool ok = false;
        if (shared.size() == 1) ok = x == shared[0];
        if (shared.size() == 2) ok = on_closed_segment(x, shared[0], shared[1]);
        if (!ok) return false;
      }
    }
  return true;
}

bool discs_disjoint(const FlatPolygonDisc& a, const FlatPolygonDisc& b) {
  for (auto& x : a.polygons)
    for (auto& y : b.polygons)
      if (!polygon_intersection(x, y).empty()) return false;
  return true;
}

std::vector<P3> OneHandleGeometry::fiber(const Q& u, const Q& w) const {
  std::vector<P3> r;
  const size_t k = core.size();
  for (size_t i = 0; i < k; ++i) {
    std::array<Q, 2> off;
    if (i == 0) {
      off = normal[0];
    } else if (i + 1 == k) {
      off = normal[k - 2];
    } else {
      auto& a = normal[i - 1];
      auto& b = normal[i];
      if (a == b) {
        off = a;
      } else if (sgn(a[0] * b[0] + a[1] * b[1]) == 0) {
        off = {a[0] + b[0], a[1] + b[1]};
      } else {
        throw GeometryError("core turns by other than a right angle");
      }
    }
    r.push_back({core[i].x + u * off[0], core[i].y + u * off[1], core[i].z + w});
  }
  return r;
}

namespace {

using I2 = std::array<long, 2>;

// unit axis direction from a to b (grid polylines)
std::array<Q, 2> axis_dir(const std::array<Q, 2>& a, const std::array<Q, 2>& b) {
  Q dx = b[0] - a[0], dy = b[1] - a[1];
  if (sgn(dx) != 0 && sgn(dy) != 0) throw GeometryError("embedding is not axis aligned");
  return {Q(sgn(dx)), Q(sgn(dy))};
}

std::array<Q, 2> left(const std::array<Q, 2>& d) { return {-d[1], d[0]}; }

// offset of a polyline by delta to the side with left normal scaled by
// `side`; ends are pulled in by `inset` along the path
std::vector<P3> offset_path(const std::vector<std::array<Q, 2>>& pts, int side, const Q& delta, const Q& inset_start,
                            const Q& inset_end) {
  const size_t k = pts.size();
  std::vector<std::array<Q, 2>> dir;
  for (size_t i = 0; i + 1 < k; ++i) dir.push_back(axis_dir(pts[i], pts[i + 1]));
  std::vector<P3> r;
  for (size_t i = 0; i < k; ++i) {
    std::array<Q, 2> off{0, 0}, along{0, 0};
    if (i == 0) {
      auto n = left(dir[0]);
      off = n;
      along = {inset_start * dir[0][0], inset_start * dir[0][1]};
    } else if (i + 1 == k) {
      auto n = left(dir[k - 2]);
      off = n;
      along = {-inset_end * dir[k - 2][0], -inset_end * dir[k - 2][1]};
    } else {
      auto a = left(dir[i - 1]), b = left(dir[i]);
      off = a == b ? a : std::array<Q, 2>{a[0] + b[0], a[1] + b[1]};
    }
    Q s = delta * side;
    r.push_back({pts[i][0] + s * off[0] + along[0], pts[i][1] + s * off[1] + along[1], 0});
  }
  // drop interior points that do not turn
  std::vector<P3> out{r[0]};
  for (size_t i = 1; i + 1 < r.size(); ++i) {
    P3 a = r[i] - out.back(), b = r[i + 1] - r[i];
    if (!is_zero(cross(a, b))) out.push_back(r[i]);
  }
  out.push_back(r.back());
  return out;
}

void set_normals(OneHandleGeometry& g) {
  g.normal.clear();
  for (size_t i = 0; i + 1 < g.core.size(); ++i) {
    Q dx = g.core[i + 1].x - g.core[i].x, dy = g.core[i + 1].y - g.core[i].y;
    Q l = abs(dx) + abs(dy);
    if (sgn(l) == 0) throw GeometryError("degenerate core segment");
    g.normal.push_back({-dy / l, dx / l});
  }
}

AffinePolyhedron placed(const AffinePolyhedron& c, const P3& at, const Q& scale) {
  AffinePolyhedron p = c;
  for (auto& v : p.vertices) v = at + scale * v;
  p.star_center = at + scale * c.star_center;
  return p;
}

}  // namespace

AffineStructure assign_affine(const HandleStructure& h, const Diagram& d, const GridEmbedding& e) {
  const int nc = d.crossing_count();
  if (static_cast<int>(e.crossing_point.size()) != nc || static_cast<int>(e.arc_path.size()) != d.arc_count())
    throw GeometryError("embedding does not match the diagram");
  const Q delta(1, 4), scale(1, 64);
  auto q2 = [](const I2& a) { return std::array<Q, 2>{Q(a[0]), Q(a[1])}; };
  for (int x = 0; x < nc; ++x)
    for (int y = x + 1; y < nc; ++y)
      if (e.crossing_point[x] == e.crossing_point[y]) throw GeometryError("embedding degenerate: coincident crossings");
  // path of a label oriented away from crossing x at position i
  auto path_from = [&](int x, int i) {
    int lab = d.crossings[x].label[i];
    std::vector<std::array<Q, 2>> pts;
    for (auto& p : e.arc_path[lab - 1]) pts.push_back(q2(p));
    if (!d.outgoing(x, i)) std::reverse(pts.begin(), pts.end());
    if (pts.size() < 2 || pts.front() != q2(e.crossing_point[x])) throw GeometryError("arc path does not start at its crossing");
    return pts;
  };
  auto dir_at = [&](int x, int i) {
    auto p = path_from(x, i);
    return axis_dir(p[0], p[1]);
  };
  AffineStructure a;
  AffinePolyhedron canon = canonical_zero_handle();
  const int nz = static_cast<int>(h.zero.size());
  a.zero_center.assign(nz, P3{});
  std::vector<char> placed_z(nz, 0);
  // crossing 0-handles: "corner:x<c>q<q>"
  auto corner_of = [&](int z) -> std::pair<int, int> {
    int x, q;
    if (std::sscanf(h.zero[z].prov.c_str(), "corner:x%dq%d", &x, &q) == 2) return {x, q};
    return {-1, -1};
  };
  for (int z = 0; z < nz; ++z) {
    auto [x, q] = corner_of(z);
    if (x < 0) continue;
    auto d0 = dir_at(x, q), d1 = dir_at(x, (q + 1) % 4);
    auto X = q2(e.crossing_point[x]);
    a.zero_center[z] = {X[0] + delta * (d0[0] + d1[0]), X[1] + delta * (d0[1] + d1[1]), 0};
    placed_z[z] = 1;
  }
  // exceptional 0-handles sit on either side of the midpoint of the first
  // segment of their label
  int exc_label = -1;
  for (int z = 0; z < nz; ++z)
    if (h.zero[z].exceptional) {
      int lab, w;
      if (std::sscanf(h.zero[z].prov.c_str(), "exceptional:label%d/%d", &lab, &w) != 2)
        throw GeometryError("unrecognised exceptional 0-handle");
      exc_label = lab;
    }
  std::array<Q, 2> mid{0, 0};
  if (exc_label > 0) {
    auto& ap = e.arc_path[exc_label - 1];
    mid = {frac(ap[0][0] + ap[1][0], 2), frac(ap[0][1] + ap[1][1], 2)};
  }
  const std::vector<std::array<Q, 2>> hexagon = {{1, 0}, {Q(1, 2), 1}, {Q(-1, 2), 1}, {-1, 0}, {Q(-1, 2), -1}, {Q(1, 2), -1}};
  const std::vector<std::array<Q, 2>> pentagon = {{1, 0}, {0, 1}, {-1, 0}, {Q(-1, 2), -1}, {Q(1, 2), -1}};
  const std::vector<std::array<Q, 2>> square = {{1, -1}, {1, 1}, {-1, 1}, {-1, -1}};
  auto section = [&](const std::vector<std::array<Q, 2>>& s) {
    std::vector<std::array<Q, 2>> r;
    for (auto& p : s) r.push_back({p[0] * delta / 4, p[1] * delta / 4});
    return r;
  };
  a.one.resize(h.one.size());
  std::vector<std::pair<int, int>> exc_one;
  for (size_t k = 0; k < h.one.size(); ++k) {
    auto& o = h.one[k];
    auto& g = a.one[k];
    auto [x0, q0] = corner_of(o.end[0]);
    auto [x1, q1] = corner_of(o.end[1]);
    if (o.prov.rfind("crossing-square", 0) == 0) {
      g.kind = "crossing-square";
      g.section = section(hexagon);
      g.core = {a.zero_center[o.end[0]], a.zero_center[o.end[1]]};
    } else if (o.prov.rfind("edge-following", 0) == 0) {
      g.kind = "edge-following";
      g.section = section(pentagon);
      // orient from a crossing end
      int ze = x0 >= 0 ? 0 : 1;
      int xa = ze == 0 ? x0 : x1, qa = ze == 0 ? q0 : q1;
      int zb = o.end[1 - ze];
      auto [xb, qb] = corner_of(zb);
      if (xa < 0) throw GeometryError("edge-following handle without a crossing end");
      bool done = false;
      for (int i : {qa, (qa + 1) % 4}) {
        auto [px, pi] = d.partner(xa, i);
        int lab = d.crossings[xa].label[i];
        bool target_ok = xb >= 0 ? (px == xb && (pi == qb || pi == (qb + 1) % 4) && !(px == xa && pi == i))
                                 : lab == exc_label;
        if (!target_ok) continue;
        auto pts = path_from(xa, i);
        int other = i == qa ? (qa + 1) % 4 : qa;
        auto sd = dir_at(xa, other);
        auto n = left(axis_dir(pts[0], pts[1]));
        int side = (sd == n) ? 1 : -1;
        Q inset_end = delta;
        if (xb < 0) {
          // stop at the midpoint of the label's first segment
          std::vector<std::array<Q, 2>> cut;
          if (d.outgoing(xa, i)) {
            cut = {pts[0], mid};
          } else {
            cut.push_back(pts[0]);
            for (size_t t = 1; t + 1 < pts.size(); ++t) cut.push_back(pts[t]);
            cut.push_back(mid);
          }
          pts = cut;
          inset_end = 0;
        }
        auto core = offset_path(pts, side, delta, delta, inset_end);
        if (xb < 0) {
          if (placed_z[zb] && !(a.zero_center[zb] == core.back()))
            throw GeometryError("exceptional 0-handle placed inconsistently");
          a.zero_center[zb] = core.back();
          placed_z[zb] = 1;
        }
        if (ze == 1) std::reverse(core.begin(), core.end());
        g.core = core;
        done = true;
        break;
      }
      if (!done) throw GeometryError("edge-following handle does not follow an arc");
    } else {
      g.kind = "exceptional";
      g.section = section(square);
      exc_one.push_back({static_cast<int>(k), static_cast<int>(exc_one.size())});
    }
  }
  for (int z = 0; z < nz; ++z)
    if (!placed_z[z]) throw GeometryError("0-handle not placed");
  for (auto [k, w] : exc_one) {
    auto& g = a.one[k];
    auto& o = h.one[k];
    P3 p0 = a.zero_center[o.end[0]], p1 = a.zero_center[o.end[1]];
    // shift the two handles apart along the arc
    P3 t = cross(p1 - p0, P3{0, 0, 1});
    Q l = abs(t.x) + abs(t.y);
    Q s = (w == 0 ? delta : -delta) / (2 * l);
    g.core = {p0 + s * t, p1 + s * t};
  }
  // edge-following handles over one arc side run above and below it
  for (size_t k = 0; k < a.one.size(); ++k)
    for (size_t j = 0; j < k; ++j)
      if (a.one[j].core == a.one[k].core) {
        for (auto& x : a.one[j].core) x.z = delta / 2;
        for (auto& x : a.one[k].core) x.z = -delta / 2;
      }
  for (auto& g : a.one) set_normals(g);
  for (int z = 0; z < nz; ++z) a.zero.push_back(placed(canon, a.zero_center[z], scale));
  return a;
}

}  // namespace kx
