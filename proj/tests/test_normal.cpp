#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "kx/diagram.hpp"
#include "kx/geometry.hpp"
#include "kx/handles.hpp"
#include "kx/normal.hpp"
#include "kx/parallelity.hpp"

using namespace kx;

namespace {

const char* kTrefoil = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]";

struct Fixture {
  Diagram d = parse_pd(kTrefoil);
  HandleStructure h = build_exterior_handles(d, false);
  NormalSystem s{h};
};

// bridge subsets of the pattern graph that form one simple cycle
std::set<std::vector<int>> cycle_oracle(const BoundaryPattern& p) {
  std::set<std::vector<int>> out;
  const int m = static_cast<int>(p.bridge_edges.size());
  for (int mask = 1; mask < (1 << m); ++mask) {
    std::vector<int> deg(p.islands, 0);
    std::vector<std::array<int, 3>> used;
    for (int i = 0; i < m; ++i)
      if (mask >> i & 1) {
        used.push_back(p.bridge_edges[i]);
        ++deg[p.bridge_edges[i][0]];
        ++deg[p.bridge_edges[i][1]];
      }
    if (std::any_of(deg.begin(), deg.end(), [](int v) { return v != 0 && v != 2; })) continue;
    // connected?
    std::vector<int> comp(p.islands);
    for (int i = 0; i < p.islands; ++i) comp[i] = i;
    auto find = [&](int v) {
      while (comp[v] != v) v = comp[v];
      return v;
    };
    for (auto& e : used) comp[find(e[0])] = find(e[1]);
    std::set<int> roots;
    for (auto& e : used) roots.insert(find(e[0]));
    if (roots.size() != 1) continue;
    std::vector<int> b;
    for (auto& e : used) b.push_back(e[2]);
    std::sort(b.begin(), b.end());
    out.insert(b);
  }
  return out;
}

// backtracking over all vectors of weight <= w; an equation is checked once
// its last type is fixed
std::set<Coords> lattice_oracle(const NormalSystem& s, int w) {
  const int n = s.size();
  std::vector<std::vector<int>> closes(n);
  for (int q = 0; q < (int)s.equations.size(); ++q) {
    int last = -1;
    for (auto [t, c] : s.equations[q].terms) last = std::max(last, t);
    if (last >= 0) closes[last].push_back(q);
  }
  std::set<Coords> out;
  Coords x(n, 0);
  auto rec = [&](auto&& self, int t, int left) -> void {
    if (t == n) {
      if (s.admissible(x)) out.insert(x);
      return;
    }
    for (int v = 0; v <= left; ++v) {
      x[t] = v;
      bool ok = true;
      for (int q : closes[t]) {
        std::int64_t sum = 0;
        for (auto [u, c] : s.equations[q].terms) sum += c * x[u];
        if (sum != 0) ok = false;
      }
      if (ok) self(self, t + 1, left - v);
    }
    x[t] = 0;
  };
  rec(rec, 0, w);
  return out;
}

}  // namespace

TEST_CASE("disc types in a K4 0-handle are the cycles of the pattern") {
  Fixture f;
  for (int z = 0; z < f.h.count(0); ++z) {
    auto p = boundary_pattern(f.h, z);
    REQUIRE(p.is_k4());
    std::set<std::vector<int>> got;
    int tri = 0, sq = 0;
    for (int t : f.s.types_at[z]) {
      auto b = f.s.types[t].bridges;
      std::sort(b.begin(), b.end());
      got.insert(b);
      tri += f.s.types[t].kind == "triangle";
      sq += f.s.types[t].kind == "square";
    }
    CHECK(got == cycle_oracle(p));
    CHECK(tri == 4);
    CHECK(sq == 3);
  }
  HandleStructure ball;
  ball.zero.push_back({"ball", false});
  CHECK(enumerate_disc_types(ball).empty());
}

TEST_CASE("at most one square type at a time") {
  Fixture f;
  const int z = 0;
  std::vector<int> tri, sq;
  for (int t : f.s.types_at[z]) (f.s.types[t].kind == "square" ? sq : tri).push_back(t);
  for (int a : tri)
    for (int b : tri) CHECK(f.s.compat[a][b]);
  for (int a : tri)
    for (int b : sq) CHECK(f.s.compat[a][b]);
  for (int a : sq)
    for (int b : sq)
      if (a != b) CHECK_FALSE(f.s.compat[a][b]);
  // 4 triangles and one square can coexist
  CHECK(tri.size() + 1 == 5);
  // two realized squares of different types meet
  auto p = canonical_zero_handle();
  std::vector<Q> mid(8, Q(1, 2));
  auto d0 = realize_normal_disc(p, square_curve(p, 0, mid), 0);
  bool met = false;
  for (int b = 1; b < 6 && !met; ++b) {
    auto d1 = realize_normal_disc(p, square_curve(p, b, mid), 1);
    if (!discs_disjoint(d0, d1)) met = true;
  }
  CHECK(met);
}

TEST_CASE("peripheral torus") {
  Fixture f;
  Coords zero(f.s.size(), 0);
  CHECK(f.s.satisfies(zero));
  CHECK(f.s.admissible(zero));
  Coords L = f.s.link(-1);
  CHECK(f.s.admissible(L));
  // one triangle per free region of the boundary
  Complex k(f.h);
  int free_regions = 0;
  for (auto& fc : k.faces)
    if (fc.type == FaceType::Region && !fc.degenerate && fc.three < 0) ++free_regions;
  CHECK(f.s.weight(L) == free_regions);
  auto t = realize_surface(f.s, L);
  CHECK(t.euler == 0);
  CHECK(t.euler_from_cells == 0);
  CHECK(t.orientable);
  CHECK(t.connected);
  CHECK(t.components.size() == 1);
  CHECK(t.components[0].separating);
  CHECK(t.read_back == L);
  Coords L2 = L;
  for (auto& v : L2) v *= 2;
  auto t2 = realize_surface(f.s, L2);
  CHECK(t2.components.size() == 2);
  CHECK(t2.weight == 2 * t.weight);
  auto e = realize_surface(f.s, zero);
  CHECK(e.euler == 0);
  CHECK(e.weight == 0);
  CHECK(e.components.empty());
}

TEST_CASE("two square types in one 0-handle are inadmissible") {
  Fixture f;
  Coords x(f.s.size(), 0);
  std::vector<int> sq;
  for (int t : f.s.types_at[0])
    if (f.s.types[t].kind == "square") sq.push_back(t);
  x[sq[0]] = 1;
  x[sq[1]] = 1;
  CHECK_FALSE(f.s.admissible(x));
}

TEST_CASE("bounded enumeration agrees with the lattice scan") {
  Fixture f;
  EnumOptions o;
  o.weight_bound = 0;
  auto z = enumerate_admissible(f.s, o);
  REQUIRE(z.size() == 1);
  CHECK(std::all_of(z[0].begin(), z[0].end(), [](auto v) { return v == 0; }));
  for (int w : {4, 12}) {
    o.weight_bound = w;
    auto got = enumerate_admissible(f.s, o);
    std::set<Coords> gs(got.begin(), got.end());
    CHECK(gs.size() == got.size());
    CHECK(gs == lattice_oracle(f.s, w));
  }
  o.weight_bound = 30;
  o.node_limit = 5;
  CHECK_THROWS_AS(enumerate_admissible(f.s, o), ResourceLimit);
}

TEST_CASE("cutting") {
  Fixture f;
  Coords zero(f.s.size(), 0);
  auto id = cut_along(f.s, zero);
  CHECK(to_json(id.h).dump() == to_json(f.h).dump());
  auto c = cut_along(f.s, f.s.link(-1));
  auto comps = handle_components(c.h);
  CHECK(comps.size() == 2);
  int away = 0;
  for (auto& comp : comps) {
    auto sub = census(extract_component(c.h, comp));
    CHECK(sub.euler == 0);
    bool touches_dx = false, all_tori = true;
    for (auto& b : sub.boundary) {
      if (b.three >= 0) continue;
      if (!b.all_s) touches_dx = true;
      if (b.euler != 0) all_tori = false;
    }
    if (!touches_dx) {
      ++away;
      CHECK(all_tori);
    }
  }
  CHECK(away == 1);
  CHECK(read_back(f.s, c) == f.s.link(-1));
  // cutting doubles the surface: chi goes up by chi(S)
  Coords sphere = f.s.link(0);
  auto rs = realize_surface(f.s, sphere);
  CHECK(rs.euler == 2);
  CHECK(rs.euler_from_cells == 2);
  auto cs = cut_along(f.s, sphere);
  CHECK(cs.surface_euler == 2);
  CHECK(cs.h.euler() == f.h.euler() + cs.surface_euler);
  CHECK(handle_components(cs.h).size() == 2);
}
