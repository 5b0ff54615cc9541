#include <algorithm>
#include <numeric>
#include <set>

#include "kx/normal.hpp"

namespace kx {

namespace {

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

}  // namespace

std::vector<std::array<std::vector<int>, 4>> handle_components(const HandleStructure& h) {
  Complex k(h);
  std::array<int, 4> base{0, static_cast<int>(h.zero.size()), 0, 0};
  base[2] = base[1] + static_cast<int>(h.one.size());
  base[3] = base[2] + static_cast<int>(h.two.size());
  const int N = base[3] + static_cast<int>(h.three.size());
  Dsu d(N);
  for (int f = 0; f < static_cast<int>(k.faces.size()); ++f) {
    if (k.faces[f].degenerate) continue;
    auto hs = k.face_handles(f);
    for (std::size_t i = 1; i < hs.size(); ++i)
      d.unite(base[hs[0].first] + hs[0].second, base[hs[i].first] + hs[i].second);
  }
  std::map<int, std::array<std::vector<int>, 4>> g;
  for (int i = 0; i < 4; ++i) {
    int n = (i < 3 ? base[i + 1] : N) - base[i];
    for (int id = 0; id < n; ++id) {
      if (i == 2 && h.two[id].seam) continue;
      g[d.find(base[i] + id)][i].push_back(id);
    }
  }
  std::vector<std::array<std::vector<int>, 4>> out;
  for (auto& [r, c] : g) out.push_back(std::move(c));
  std::sort(out.begin(), out.end());
  return out;
}

CutComplex cut_along(const NormalSystem& s, const Coords& x) {
  const HandleStructure& h = *s.h;
  std::string why;
  if (!s.admissible(x, &why)) throw NormalError("surface not normal: " + why);
  for (auto& t : h.two)
    if (t.seam) throw NormalError("cutting a structure with seams is not supported");
  Complex old(h);
  const int K = static_cast<int>(h.one.size());

  // arc instances per 1-handle
  struct Inst {
    int a, b;  // alpha endpoints, a < b
    int j;
  };
  std::vector<std::vector<Inst>> inst(K);
  std::vector<std::map<std::pair<int, int>, int>> fam_first(K);  // family -> first instance
  std::vector<std::map<std::pair<int, int>, std::int64_t>> mult(K);
  for (auto& t : s.types)
    if (x[t.id])
      for (auto& a : t.arcs)
        if (a.e == 0) mult[a.k][{a.a, a.b}] += x[t.id];
  for (int k = 0; k < K; ++k)
    for (auto& [f, m] : mult[k]) {
      fam_first[k][f] = static_cast<int>(inst[k].size());
      for (int j = 0; j < m; ++j) inst[k].push_back({f.first, f.second, j});
    }

  // endpoint order along each alpha, from s = 0
  std::vector<std::vector<std::vector<int>>> along(K);
  std::vector<std::map<std::pair<int, int>, int>> where(K);  // (inst, side) -> position
  for (int k = 0; k < K; ++k) {
    const int n = h.one[k].n();
    along[k].assign(n, {});
    for (int a = 0; a < n; ++a)
      for (int d = 1; d < n; ++d) {
        int y = ((a - d) % n + n) % n;
        auto f = std::pair(std::min(a, y), std::max(a, y));
        auto it = mult[k].find(f);
        if (it == mult[k].end()) continue;
        int m = static_cast<int>(it->second), first = fam_first[k][f];
        for (int j = 0; j < m; ++j) {
          int jj = a == f.first ? j : m - 1 - j;
          int id = first + jj;
          where[k][{id, a == f.first ? 0 : 1}] = static_cast<int>(along[k][a].size());
          along[k][a].push_back(id);
        }
      }
  }
  // points on each 2-handle
  std::vector<int> P(h.two.size(), -1);
  for (int k = 0; k < K; ++k)
    for (int a = 0; a < h.one[k].n(); ++a) {
      int o = h.one[k].owner[a], c = static_cast<int>(along[k][a].size());
      if (P[o] >= 0 && P[o] != c) throw NormalError("inconsistent point count on a 2-handle");
      P[o] = c;
    }
  for (auto& p : P) p = std::max(p, 0);
  std::vector<int> cap0(h.two.size(), -1);
  for (int k = 0; k < K; ++k)
    for (int a = 0; a < h.one[k].n(); ++a) {
      int o = h.one[k].owner[a];
      if (cap0[o] < 0) cap0[o] = old.face_of(FaceType::Cap, h.corner(k, a, 0, 0));
    }
  auto aligned = [&](int k, int a) {
    return old.face_of(FaceType::Cap, h.corner(k, a, 0, 0)) == cap0[h.one[k].owner[a]];
  };

  CutComplex out;
  HandleStructure& H = out.h;
  // slabs
  std::vector<int> slab0(h.two.size());
  for (int o = 0; o < static_cast<int>(h.two.size()); ++o) {
    slab0[o] = static_cast<int>(H.two.size());
    for (int j = 0; j <= P[o]; ++j) {
      H.two.push_back({h.two[o].prov, false, h.two[o].exceptional});
      out.parent2.push_back(o);
      out.level2.push_back(j);
    }
  }
  auto level_of = [&](int k, int a, int i) {
    int c = static_cast<int>(along[k][a].size());
    return aligned(k, a) ? i : c - i;
  };

  // sub-polygons of each cross-section become the new 1-handles
  std::vector<std::vector<std::vector<std::pair<int, int>>>> newport(K);  // piece -> (K', a')
  struct Sep {
    int k, inst;  // inst < 0: old gap
  };
  std::vector<std::vector<Sep>> seps;
  for (int k = 0; k < K; ++k) {
    const int n = h.one[k].n();
    newport[k].assign(n, {});
    for (int a = 0; a < n; ++a) newport[k][a].assign(along[k][a].size() + 1, {-1, -1});
    for (int a0 = 0; a0 < n; ++a0)
      for (int i0 = 0; i0 <= static_cast<int>(along[k][a0].size()); ++i0) {
        if (newport[k][a0][i0].first >= 0) continue;
        const int id = static_cast<int>(H.one.size());
        OneHandle one;
        one.prov = h.one[k].prov;
        one.exceptional = h.one[k].exceptional;
        std::vector<Sep> sp;
        int a = a0, i = i0;
        do {
          newport[k][a][i] = {id, one.n()};
          one.owner.push_back(slab0[h.one[k].owner[a]] + level_of(k, a, i));
          if (i < static_cast<int>(along[k][a].size())) {
            int I = along[k][a][i];
            int side = inst[k][I].a == a ? 0 : 1;
            int y = side == 0 ? inst[k][I].b : inst[k][I].a;
            int p = where[k].at({I, 1 - side});
            sp.push_back({k, I});
            a = y;
            i = p + 1;
          } else {
            sp.push_back({k, -1 - a});
            a = (a + 1) % n;
            i = 0;
          }
        } while (!(a == a0 && i == i0));
        H.one.push_back(std::move(one));
        out.parent1.push_back(k);
        seps.push_back(std::move(sp));
      }
  }
  auto piece_of = [&](int k, int a, int s) {
    return newport[k][a][s == 0 ? 0 : along[k][a].size()];
  };
  auto map_corner = [&](int c) {
    // old corner -> new corner
    int k = 0;
    while (k + 1 < K && h.corner_offset(k + 1) <= c) ++k;
    int r = c - h.corner_offset(k);
    int a = r / 4, e = (r / 2) % 2, sd = r % 2;
    auto [K2, a2] = piece_of(k, a, sd);
    return H.corner(K2, a2, e, sd);
  };

  // sub-bridges, one per level
  std::vector<std::pair<Port, Port>> sub;
  for (int b = 0; b < static_cast<int>(h.bridges.size()); ++b) {
    const auto& br = h.bridges[b];
    int o = br.owner;
    for (int j = 0; j <= P[o]; ++j) {
      auto port = [&](const Port& p) {
        int c = static_cast<int>(along[p.k][p.a].size());
        int i = aligned(p.k, p.a) ? j : c - j;
        auto [K2, a2] = newport[p.k][p.a][i];
        return Port{K2, a2, p.e};
      };
      H.bridges.push_back({-1, port(br.p), port(br.q), slab0[o] + j});
      out.bridge_parent.push_back(b);
    }
  }

  // new 0-handles: components of islands, bridges and gap edges
  const int NC = H.corner_count();
  Dsu d(NC);
  for (int k = 0; k < static_cast<int>(H.one.size()); ++k) {
    int n = H.one[k].n();
    for (int a = 0; a < n; ++a)
      for (int e = 0; e < 2; ++e) {
        d.unite(H.corner(k, a, e, 0), H.corner(k, a, e, 1));
        d.unite(H.corner(k, a, e, 1), H.corner(k, (a + 1) % n, e, 0));
      }
  }
  for (auto& br : H.bridges) {
    d.unite(H.corner(br.p.k, br.p.a, br.p.e, 0), H.corner(br.q.k, br.q.a, br.q.e, 0));
  }
  std::map<std::pair<int, int>, int> zid;  // (parent, root corner) ordering
  std::map<int, int> root_zero;
  std::vector<std::pair<int, int>> roots;
  for (int k = 0; k < static_cast<int>(H.one.size()); ++k)
    for (int e = 0; e < 2; ++e) {
      int r = d.find(H.corner(k, 0, e, 0));
      if (!root_zero.count(r)) {
        root_zero[r] = -1;
        roots.push_back({h.one[out.parent1[k]].end[e], r});
      }
    }
  std::sort(roots.begin(), roots.end());
  for (auto [par, r] : roots) {
    root_zero[r] = static_cast<int>(H.zero.size());
    H.zero.push_back({h.zero[par].prov, h.zero[par].exceptional});
    out.parent0.push_back(par);
  }
  // island slots keep the order they had on the parent 0-handle
  std::vector<std::vector<std::array<int, 3>>> slots(H.zero.size());
  for (int k = 0; k < static_cast<int>(H.one.size()); ++k)
    for (int e = 0; e < 2; ++e) {
      int z = root_zero[d.find(H.corner(k, 0, e, 0))];
      H.one[k].end[e] = z;
      slots[z].push_back({h.one[out.parent1[k]].site[e], k, e});
    }
  for (auto& v : slots) {
    std::sort(v.begin(), v.end());
    for (int i = 0; i < static_cast<int>(v.size()); ++i) H.one[v[i][1]].site[v[i][2]] = i;
  }
  for (auto& br : H.bridges) br.zero = H.one[br.p.k].end[br.p.e];

  // old 3-handles and S labels follow their corners
  for (auto& t : h.three) H.three.push_back({t.type, map_corner(t.corner), t.prov});
  int next_piece = 0;
  for (auto& [key, piece] : h.s_label) {
    H.s_label[{key.first, map_corner(key.second)}] = piece;
    next_piece = std::max(next_piece, piece + 1);
  }

  Complex nk(H);
  // bands
  std::map<std::pair<int, int>, int> band_piece;
  for (int k = 0; k < K; ++k)
    for (int I = 0; I < static_cast<int>(inst[k].size()); ++I) {
      band_piece[{k, I}] = next_piece + static_cast<int>(out.pieces.size());
      out.pieces.push_back({'b', k, I});
    }
  // points
  std::map<std::pair<int, int>, int> point_piece;
  for (int o = 0; o < static_cast<int>(h.two.size()); ++o)
    for (int j = 0; j < P[o]; ++j) {
      point_piece[{o, j}] = next_piece + static_cast<int>(out.pieces.size());
      out.pieces.push_back({'p', o, j});
    }
  // discs: regions bounded by arcs, keyed by their least arc
  std::map<std::tuple<int, int, int>, int> disc_piece;
  std::vector<int> bridge_of(NC, -1);
  for (int b = 0; b < static_cast<int>(H.bridges.size()); ++b)
    for (auto p : {H.bridges[b].p, H.bridges[b].q})
      for (int sd = 0; sd < 2; ++sd) bridge_of[H.corner(p.k, p.a, p.e, sd)] = b;
  std::map<int, std::tuple<int, int, int>> region_key;
  for (int K2 = 0; K2 < static_cast<int>(H.one.size()); ++K2)
    for (int g = 0; g < H.one[K2].n(); ++g) {
      const auto& sp = seps[K2][g];
      if (sp.inst < 0) continue;
      H.s_label[{static_cast<int>(FaceType::Gap), H.corner(K2, g, 0, 1)}] = band_piece[{sp.k, sp.inst}];
      for (int e = 0; e < 2; ++e) {
        int f = nk.face_of(FaceType::Region, H.corner(K2, g, e, 1));
        auto key = std::tuple(sp.k, sp.inst, e);
        auto it = region_key.find(f);
        if (it == region_key.end() || key < it->second) region_key[f] = key;
      }
    }
  for (auto& [f, key] : region_key) {
    auto it = disc_piece.find(key);
    if (it == disc_piece.end()) {
      const auto& F = nk.faces[f];
      std::set<int> bs;
      const int m = static_cast<int>(F.corners.size());
      for (int i = 0; i < m; ++i) {
        int c = F.corners[i], c2 = F.corners[(i + 1) % m];
        if (nk.mB[c] == c2) bs.insert(out.bridge_parent[bridge_of[c]]);
      }
      int z = out.parent0[F.zero];
      int t = s.type_of(z, {bs.begin(), bs.end()});
      int id = next_piece + static_cast<int>(out.pieces.size());
      out.pieces.push_back({'d', z, t});
      it = disc_piece.emplace(key, id).first;
    }
    H.s_label[{static_cast<int>(FaceType::Region), nk.faces[f].corners[0]}] = it->second;
  }
  // slab caps facing a point
  for (int o = 0; o < static_cast<int>(h.two.size()); ++o) {
    if (P[o] == 0) continue;
    int k0 = -1, a0 = -1;
    for (int k = 0; k < K && k0 < 0; ++k)
      for (int a = 0; a < h.one[k].n(); ++a)
        if (h.one[k].owner[a] == o) {
          k0 = k;
          a0 = a;
          break;
        }
    bool al = aligned(k0, a0);
    for (int j = 0; j <= P[o]; ++j) {
      int i = al ? j : P[o] - j;
      auto [K2, a2] = newport[k0][a0][i];
      int s_low = al ? 0 : 1;
      if (j >= 1)
        H.s_label[{static_cast<int>(FaceType::Cap), H.corner(K2, a2, 0, s_low)}] = point_piece[{o, j - 1}];
      if (j < P[o])
        H.s_label[{static_cast<int>(FaceType::Cap), H.corner(K2, a2, 0, 1 - s_low)}] = point_piece[{o, j}];
    }
  }
  int discs = 0, bands = 0, points = 0;
  for (auto& p : out.pieces) (p.kind == 'd' ? discs : p.kind == 'b' ? bands : points)++;
  out.surface_euler = discs - bands + points;
  out.first_piece = next_piece;
  out.euler_before = h.euler();
  return out;
}

Coords read_back(const NormalSystem& s, const CutComplex& c) {
  Complex k(c.h);
  std::vector<int> bridge_of(k.ncorner, -1);
  for (int b = 0; b < static_cast<int>(c.h.bridges.size()); ++b)
    for (auto p : {c.h.bridges[b].p, c.h.bridges[b].q})
      for (int sd = 0; sd < 2; ++sd) bridge_of[c.h.corner(p.k, p.a, p.e, sd)] = b;
  std::map<int, int> type_of_piece;
  for (auto& f : k.faces) {
    if (f.type != FaceType::Region || f.s < c.first_piece || f.degenerate) continue;
    std::set<int> bs;
    const int m = static_cast<int>(f.corners.size());
    for (int i = 0; i < m; ++i) {
      int a = f.corners[i], b = f.corners[(i + 1) % m];
      if (k.mB[a] == b) bs.insert(c.bridge_parent[bridge_of[a]]);
    }
    int t = s.type_of(c.parent0[f.zero], {bs.begin(), bs.end()});
    if (t < 0) throw NormalError("cut region matches no disc type");
    auto [it, fresh] = type_of_piece.emplace(f.s, t);
    if (!fresh && it->second != t) throw NormalError("disc copies disagree on their type");
  }
  Coords x(s.size(), 0);
  for (auto [piece, t] : type_of_piece) ++x[t];
  return x;
}

NormalSurface realize_surface(const NormalSystem& s, const Coords& x) {
  NormalSurface ns;
  ns.coords = x;
  CutComplex c = cut_along(s, x);
  Complex k(c.h);
  std::vector<int> sfaces;
  for (int f = 0; f < static_cast<int>(k.faces.size()); ++f)
    if (k.faces[f].s >= 0 && !k.faces[f].degenerate) sfaces.push_back(f);
  const int first_new = c.first_piece;
  const int NP = static_cast<int>(c.pieces.size());
  auto local = [&](int piece) { return piece - first_new; };
  // pieces glue along shared edges of S
  Dsu d(NP);
  std::map<int, int> edge_piece;
  for (int f : sfaces) {
    int p = local(k.faces[f].s);
    if (p < 0) continue;
    for (int e : k.faces[f].edges) {
      auto [it, fresh] = edge_piece.try_emplace(e, p);
      if (!fresh) d.unite(p, it->second);
    }
  }
  std::map<int, int> comp;
  for (int p = 0; p < NP; ++p) comp.try_emplace(d.find(p), static_cast<int>(comp.size()));
  ns.components.assign(comp.size(), {});
  for (int p = 0; p < NP; ++p) {
    auto& sc = ns.components[comp[d.find(p)]];
    char kd = c.pieces[p].kind;
    sc.euler += kd == 'b' ? -1 : 1;
    if (kd == 'd') ++sc.weight;
  }
  // sides: components of the cut copies
  std::vector<int> own;
  for (int f : sfaces)
    if (local(k.faces[f].s) >= 0) own.push_back(f);
  auto scomps = face_components(k, own);
  auto hcomps = handle_components(c.h);
  std::map<int, int> zero_comp;
  for (int i = 0; i < static_cast<int>(hcomps.size()); ++i)
    for (int z : hcomps[i][0]) zero_comp[z] = i;
  std::vector<int> two_zero(c.h.two.size(), -1);
  for (auto& one : c.h.one)
    for (int o : one.owner) two_zero[o] = one.end[0];
  auto comp_of_face = [&](int f) {
    const auto& F = k.faces[f];
    if (F.zero >= 0) return zero_comp[F.zero];
    if (F.one >= 0) return zero_comp[c.h.one[F.one].end[0]];
    return zero_comp[two_zero[F.two]];
  };
  std::vector<std::vector<int>> sides(comp.size());
  for (auto& sc : scomps) sides[comp[d.find(local(k.faces[sc[0]].s))]].push_back(comp_of_face(sc[0]));
  const int nc = static_cast<int>(comp.size());
  for (int i = 0; i < nc; ++i) {
    auto& sc = ns.components[i];
    sc.orientable = sides[i].size() == 2;
    if (!sc.orientable) continue;
    Dsu g(static_cast<int>(hcomps.size()));
    for (int j = 0; j < nc; ++j)
      if (j != i && sides[j].size() == 2) g.unite(sides[j][0], sides[j][1]);
    sc.separating = g.find(sides[i][0]) != g.find(sides[i][1]);
  }
  std::sort(ns.components.begin(), ns.components.end(), [](auto& a, auto& b) {
    return std::tuple(a.weight, a.euler) < std::tuple(b.weight, b.euler);
  });
  ns.euler = c.surface_euler;
  ns.euler_from_cells = surface_stats(k, own).euler / 2;
  if (2 * ns.euler != surface_stats(k, own).euler && NP > 0)
    throw NormalError("Euler characteristic mismatch between cells and copies");
  ns.orientable = std::all_of(ns.components.begin(), ns.components.end(), [](auto& c) { return c.orientable; });
  ns.connected = ns.components.size() == 1;
  ns.weight = s.weight(x);
  ns.read_back = read_back(s, c);
  return ns;
}

nlohmann::json NormalSurface::to_json() const {
  nlohmann::json j;
  j["euler_characteristic"] = euler;
  j["euler_from_cells"] = euler_from_cells;
  j["orientable"] = orientable;
  j["connected"] = connected;
  j["weight"] = weight;
  j["components"] = nlohmann::json::array();
  for (auto& c : components)
    j["components"].push_back({{"euler_characteristic", c.euler},
                               {"orientable", c.orientable},
                               {"separating", c.separating},
                               {"weight", c.weight}});
  return j;
}

}  // namespace kx
