#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "kx/parallelity.hpp"

namespace kx {

namespace {

using Vec = std::array<double, 3>;

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

std::pair<int, int> ekey(int u, int v) { return {std::min(u, v), std::max(u, v)}; }

std::vector<int> sorted(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

// boundary status of a stretch of boundary
enum Status { kInterior = 0, kFree = 1, kS = 2 };

void merge_status(int& st, int v, const std::string& where) {
  if (st < 0) {
    st = v;
    return;
  }
  if (st != v) throw ParallelityError("boundary labels disagree at " + where + " (boundary of S must follow seams)");
}

}  // namespace

HandleStructure from_cells(const CellComplex& cx) {
  const int C = static_cast<int>(cx.cells.size());
  // outward orientation of every face
  std::vector<std::vector<std::vector<int>>> cyc(C);
  for (int c = 0; c < C; ++c) {
    const auto& cell = cx.cells[c];
    Vec cc{0, 0, 0};
    for (auto& [v, p] : cell.coord)
      for (int i = 0; i < 3; ++i) cc[i] += p[i] / cell.coord.size();
    for (auto f : cell.faces) {
      Vec n{0, 0, 0}, fc{0, 0, 0};
      const int m = static_cast<int>(f.size());
      for (int i = 0; i < m; ++i) {
        const Vec& a = cell.coord.at(f[i]);
        const Vec& b = cell.coord.at(f[(i + 1) % m]);
        n[0] += (a[1] - b[1]) * (a[2] + b[2]);
        n[1] += (a[2] - b[2]) * (a[0] + b[0]);
        n[2] += (a[0] - b[0]) * (a[1] + b[1]);
        for (int j = 0; j < 3; ++j) fc[j] += a[j] / m;
      }
      double dot = 0;
      for (int j = 0; j < 3; ++j) dot += n[j] * (fc[j] - cc[j]);
      if (dot < 0) std::reverse(f.begin(), f.end());
      cyc[c].push_back(f);
    }
  }
  std::map<std::vector<int>, std::vector<std::pair<int, int>>> by_key;
  for (int c = 0; c < C; ++c)
    for (int f = 0; f < static_cast<int>(cyc[c].size()); ++f) by_key[sorted(cyc[c][f])].push_back({c, f});
  std::set<std::pair<int, int>> boundary_edges, all_edges;
  std::map<int, std::vector<std::pair<int, int>>> vertex_bfaces;  // vertex -> boundary (cell, face)
  for (auto& [key, v] : by_key) {
    if (v.size() > 2) throw ParallelityError("a face is shared by more than two cells");
    if (v.size() == 2) {
      auto a = cyc[v[0].first][v[0].second];
      auto b = cyc[v[1].first][v[1].second];
      std::reverse(b.begin(), b.end());
      auto it = std::find(b.begin(), b.end(), a[0]);
      std::rotate(b.begin(), it, b.end());
      if (a != b) throw ParallelityError("cells are not consistently oriented");
    }
    const auto& f = cyc[v[0].first][v[0].second];
    for (std::size_t i = 0; i < f.size(); ++i) {
      auto e = ekey(f[i], f[(i + 1) % f.size()]);
      all_edges.insert(e);
      if (v.size() == 1) boundary_edges.insert(e);
    }
    if (v.size() == 1)
      for (int x : f) vertex_bfaces[x].push_back(v[0]);
  }
  auto glued = [&](int c, int f) { return by_key.at(sorted(cyc[c][f])).size() == 2; };
  auto partner = [&](int c, int f) {
    for (auto p : by_key.at(sorted(cyc[c][f])))
      if (p != std::pair(c, f)) return p;
    return std::pair(-1, -1);
  };
  auto is_s = [&](int c, int f) { return cx.s_faces.count(sorted(cyc[c][f])) > 0; };

  HandleStructure h;
  // 2-handles: interior edges, then seams
  std::map<std::pair<int, int>, int> edge_two;
  for (auto& e : all_edges)
    if (!boundary_edges.count(e)) {
      edge_two[e] = static_cast<int>(h.two.size());
      h.two.push_back({"edge:" + std::to_string(e.first) + "-" + std::to_string(e.second), false, false});
    }
  std::set<int> seam_vertex;
  for (auto [u, v] : cx.seam_edges) {
    if (!boundary_edges.count(ekey(u, v))) throw ParallelityError("seam edge is not on the boundary");
    seam_vertex.insert(u);
    seam_vertex.insert(v);
  }
  std::map<int, int> vix;
  for (int v : seam_vertex) vix[v] = static_cast<int>(vix.size());
  Dsu sd(static_cast<int>(vix.size()));
  for (auto [u, v] : cx.seam_edges) sd.unite(vix[u], vix[v]);
  std::map<int, int> seam_two;
  for (int v : seam_vertex) {
    int r = sd.find(vix[v]);
    if (!seam_two.count(r)) {
      seam_two[r] = static_cast<int>(h.two.size());
      h.two.push_back({"seam:" + std::to_string(seam_two.size() - 1), true, false});
    }
  }
  auto seam_owner = [&](int v) { return seam_two.at(sd.find(vix.at(v))); };

  for (int c = 0; c < C; ++c) h.zero.push_back({cx.cells[c].prov.empty() ? "cell:" + std::to_string(c) : cx.cells[c].prov, false});

  // 1-handles
  struct Item {
    bool vertex;
    int v, w;  // vertex v, or edge v->w
    int alpha;  // alpha index or -1
  };
  std::map<std::pair<int, int>, std::pair<int, int>> fh;  // (cell, face) -> (k, end)
  std::vector<std::vector<Item>> items;
  std::vector<std::map<std::pair<int, int>, int>> eport;
  std::vector<std::map<int, int>> vport;
  for (int c = 0; c < C; ++c)
    for (int f = 0; f < static_cast<int>(cyc[c].size()); ++f) {
      if (!glued(c, f)) continue;
      auto o = partner(c, f);
      if (o < std::pair(c, f)) continue;
      const int k = static_cast<int>(h.one.size());
      OneHandle one;
      one.end = {c, o.first};
      one.site = {f, o.second};
      one.prov = "face:" + std::to_string(c) + "/" + std::to_string(f);
      std::vector<Item> it;
      std::map<std::pair<int, int>, int> ep;
      std::map<int, int> vp;
      const auto& cy = cyc[c][f];
      const int m = static_cast<int>(cy.size());
      for (int i = 0; i < m; ++i) {
        int v = cy[i], w = cy[(i + 1) % m];
        Item vi{true, v, -1, -1};
        if (seam_vertex.count(v)) {
          vi.alpha = one.n();
          vp[v] = one.n();
          one.owner.push_back(seam_owner(v));
        }
        it.push_back(vi);
        Item ei{false, v, w, -1};
        if (!boundary_edges.count(ekey(v, w))) {
          ei.alpha = one.n();
          ep[ekey(v, w)] = one.n();
          one.owner.push_back(edge_two.at(ekey(v, w)));
        }
        it.push_back(ei);
      }
      fh[{c, f}] = {k, 0};
      fh[o] = {k, 1};
      h.one.push_back(std::move(one));
      items.push_back(std::move(it));
      eport.push_back(std::move(ep));
      vport.push_back(std::move(vp));
    }

  // bridges
  std::set<std::pair<int, int>> seam_set;
  for (auto [u, v] : cx.seam_edges) seam_set.insert(ekey(u, v));
  for (int c = 0; c < C; ++c) {
    std::map<std::pair<int, int>, std::vector<int>> faces_of_edge;
    std::map<int, std::vector<int>> glued_at;
    for (int f = 0; f < static_cast<int>(cyc[c].size()); ++f) {
      const auto& cy = cyc[c][f];
      for (std::size_t i = 0; i < cy.size(); ++i) {
        faces_of_edge[ekey(cy[i], cy[(i + 1) % cy.size()])].push_back(f);
        if (glued(c, f)) glued_at[cy[i]].push_back(f);
      }
    }
    for (auto& [e, fs] : faces_of_edge) {
      if (fs.size() != 2) throw ParallelityError("cell edge not on exactly two faces");
      if (edge_two.count(e)) {
        auto [k1, e1] = fh.at({c, fs[0]});
        auto [k2, e2] = fh.at({c, fs[1]});
        h.bridges.push_back({c, Port{k1, eport[k1].at(e), e1}, Port{k2, eport[k2].at(e), e2}, edge_two.at(e)});
      } else if (seam_set.count(e)) {
        auto end_port = [&](int x) {
          auto& g = glued_at[x];
          if (g.size() != 1) throw ParallelityError("seam vertex must lie on exactly one shared face of a cell");
          auto [k, ee] = fh.at({c, g[0]});
          return Port{k, vport[k].at(x), ee};
        };
        h.bridges.push_back({c, end_port(e.first), end_port(e.second), seam_owner(e.first)});
      }
    }
  }

  // labels
  Complex k(h);
  std::vector<int> status(k.faces.size(), -1);
  auto vertex_status = [&](int x, int c) {
    // boundary faces at vertex x, of cell c (or of every cell when c < 0)
    int st = -1;
    auto it = vertex_bfaces.find(x);
    if (it == vertex_bfaces.end()) return static_cast<int>(kInterior);
    for (auto [cc, f] : it->second)
      if (c < 0 || cc == c) merge_status(st, is_s(cc, f) ? kS : kFree, "vertex " + std::to_string(x));
    return st < 0 ? static_cast<int>(kInterior) : st;
  };
  auto edge_status = [&](int v, int w, int c, int skip) {
    int st = -1;
    for (int f = 0; f < static_cast<int>(cyc[c].size()); ++f) {
      if (f == skip) continue;
      const auto& cy = cyc[c][f];
      for (std::size_t i = 0; i < cy.size(); ++i)
        if (ekey(cy[i], cy[(i + 1) % cy.size()]) == ekey(v, w)) {
          if (glued(c, f)) throw ParallelityError("boundary edge on a shared face");
          merge_status(st, is_s(c, f) ? kS : kFree, "edge");
        }
    }
    return st;
  };
  auto set_face = [&](int face, int st) {
    if (status[face] < 0) status[face] = st;
    else if (status[face] != st) throw ParallelityError("a boundary face mixes S and free parts");
  };
  for (int kk = 0; kk < static_cast<int>(h.one.size()); ++kk) {
    const auto& it = items[kk];
    const int n = h.one[kk].n();
    const int L = static_cast<int>(it.size());
    int start = 0;
    while (it[start].alpha < 0) ++start;
    for (int a = 0; a < n; ++a) {
      // run after alpha a
      std::vector<Item> run;
      int pos = start;
      while (it[pos].alpha != a) pos = (pos + 1) % L;
      for (int p = (pos + 1) % L; it[p].alpha < 0; p = (p + 1) % L) run.push_back(it[p]);
      int gap_st = -1;
      for (int e = 0; e < 2; ++e) {
        int c = h.one[kk].end[e];
        int f = h.one[kk].site[e];
        int st = -1;
        bool has_edge = false;
        for (auto& r : run)
          if (!r.vertex) {
            has_edge = true;
            merge_status(st, edge_status(r.v, r.w, c, f), "gap run");
          }
        if (!has_edge)
          for (auto& r : run)
            if (r.vertex) merge_status(st, vertex_status(r.v, c), "gap vertex");
        if (st < 0) st = kInterior;
        set_face(k.face_of(FaceType::Region, h.corner(kk, a, e, 1)), st);
        merge_status(gap_st, st, "gap strip");
      }
      set_face(k.face_of(FaceType::Gap, h.corner(kk, a, 0, 1)), gap_st);
    }
  }
  // caps: the vertex at each end of the edge
  for (int kk = 0; kk < static_cast<int>(h.one.size()); ++kk) {
    const auto& it = items[kk];
    for (auto& r : it) {
      if (r.vertex || r.alpha < 0) continue;
      set_face(k.face_of(FaceType::Cap, h.corner(kk, r.alpha, 0, 0)), vertex_status(r.v, -1));
      set_face(k.face_of(FaceType::Cap, h.corner(kk, r.alpha, 0, 1)), vertex_status(r.w, -1));
    }
  }
  std::vector<int> bf;
  for (int f = 0; f < static_cast<int>(k.faces.size()); ++f)
    if (k.boundary_face(f)) {
      bf.push_back(f);
      if (status[f] < 0) throw ParallelityError("unlabelled boundary face");
      if (status[f] == kS) h.s_label[{static_cast<int>(k.faces[f].type), k.faces[f].corners.front()}] = 0;
    }
  for (auto& comp : face_components(k, bf)) {
    int inner = 0;
    for (int f : comp) inner += status[f] == kInterior;
    if (inner == 0) continue;
    if (inner != static_cast<int>(comp.size())) throw ParallelityError("vertex link meets the boundary");
    const auto& F = k.faces[comp.front()];
    h.three.push_back({F.type, F.corners.front(), "vertex-link"});
  }
  return h;
}

CellComplex surface_product(const std::string& kind, int n) {
  if (n < 3) throw ParallelityError("need at least 3 sectors");
  const bool torus = kind == "torus", mobius = kind == "mobius";
  if (!torus && !mobius && kind != "annulus") throw ParallelityError("unknown product kind " + kind);
  const int m = torus ? 3 : 2;
  auto gid = [&](int i, int j, int z) {
    if (i >= n) {
      i -= n;
      if (mobius) {
        j = m - j;
        z = 1 - z;
      }
    }
    if (torus) j %= m;
    return (i * (m + 1) + j) * 2 + z;
  };
  CellComplex cx;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) {
      Cell cell;
      cell.prov = kind + ":" + std::to_string(i) + "," + std::to_string(j);
      auto V = [&](int di, int dj, int z) {
        int id = gid(i + di, j + dj, z);
        cell.coord[id] = {double(i + di), double(j + dj), double(z)};
        return id;
      };
      std::vector<int> bot{V(0, 0, 0), V(1, 0, 0), V(1, 1, 0), V(0, 1, 0)};
      std::vector<int> top{V(0, 0, 1), V(1, 0, 1), V(1, 1, 1), V(0, 1, 1)};
      cell.faces = {bot, top,
                    {V(0, 0, 0), V(1, 0, 0), V(1, 0, 1), V(0, 0, 1)},
                    {V(0, 1, 0), V(1, 1, 0), V(1, 1, 1), V(0, 1, 1)},
                    {V(0, 0, 0), V(0, 1, 0), V(0, 1, 1), V(0, 0, 1)},
                    {V(1, 0, 0), V(1, 1, 0), V(1, 1, 1), V(1, 0, 1)}};
      cx.s_faces.insert(sorted(bot));
      cx.s_faces.insert(sorted(top));
      cx.cells.push_back(std::move(cell));
    }
  if (!torus)
    for (int i = 0; i < n; ++i)
      for (int z = 0; z < 2; ++z) {
        cx.seam_edges.push_back({gid(i, 0, z), gid(i + 1, 0, z)});
        cx.seam_edges.push_back({gid(i, m, z), gid(i + 1, m, z)});
      }
  return cx;
}

namespace {

// Two rings outside the circle at radius j0: the first is split along its
// outer wall, the second along its inner wall; the outer wall is free with
// seams on its corners.
void add_rings(CellComplex& cx, int U, int j0, const std::function<int(int, int, int)>& gid,
               const std::function<Vec(int, int, int)>& pos, const std::string& tag) {
  for (int l = 0; l < 2; ++l)
    for (int u = 0; u < U; ++u) {
      Cell c;
      c.prov = tag + "ring" + std::to_string(l + 1) + ":" + std::to_string(u);
      const int r0 = j0 + l, r1 = r0 + 1;
      const bool split_out = l == 0, split_in = l == 1;
      auto g = [&](int du, int r, int z) {
        int id = gid(u + du, r, z);
        c.coord[id] = pos(u + du, r, z);
        return id;
      };
      std::vector<int> bot{g(0, r0, 0), g(1, r0, 0), g(1, r1, 0), g(0, r1, 0)};
      std::vector<int> top{g(0, r0, 1), g(1, r0, 1), g(1, r1, 1), g(0, r1, 1)};
      c.faces = {bot, top};
      auto wall = [&](int r, bool split) {
        if (!split) {
          c.faces.push_back({g(0, r, 0), g(1, r, 0), g(1, r, 1), g(0, r, 1)});
        } else {
          c.faces.push_back({g(0, r, 0), g(1, r, 0), g(1, r, 2), g(0, r, 2)});
          c.faces.push_back({g(0, r, 2), g(1, r, 2), g(1, r, 1), g(0, r, 1)});
        }
      };
      wall(r0, split_in);
      wall(r1, split_out);
      for (int du = 0; du < 2; ++du) {
        std::vector<int> side{g(du, r0, 0), g(du, r1, 0)};
        if (split_out) side.push_back(g(du, r1, 2));
        side.push_back(g(du, r1, 1));
        side.push_back(g(du, r0, 1));
        if (split_in) side.push_back(g(du, r0, 2));
        c.faces.push_back(side);
      }
      cx.s_faces.insert(sorted(bot));
      cx.s_faces.insert(sorted(top));
      cx.cells.push_back(std::move(c));
    }
  for (int u = 0; u < U; ++u)
    for (int z = 0; z < 2; ++z) cx.seam_edges.push_back({gid(u, j0 + 2, z), gid(u + 1, j0 + 2, z)});
}

}  // namespace

CellComplex nested_product(int n) {
  if (n < 3) throw ParallelityError("need at least 3 sectors");
  // radius r in 1..3, z code 0 bottom, 1 top, 2 middle (r = 2 only)
  auto gid = [n](int i, int r, int z) { return ((i % n) * 4 + r) * 3 + z; };
  auto pos = [n](int i, int r, int z) -> Vec {
    double t = 2 * M_PI * i / n;
    return {r * std::cos(t), r * std::sin(t), z == 2 ? 0.5 : double(z)};
  };
  CellComplex cx;
  Cell w;
  w.prov = "column";
  std::vector<int> bot, top;
  for (int i = 0; i < n; ++i) {
    bot.push_back(gid(i, 1, 0));
    top.push_back(gid(i, 1, 1));
    for (int z = 0; z < 2; ++z) w.coord[gid(i, 1, z)] = pos(i, 1, z);
  }
  w.faces = {bot, top};
  for (int i = 0; i < n; ++i) w.faces.push_back({gid(i, 1, 0), gid(i + 1, 1, 0), gid(i + 1, 1, 1), gid(i, 1, 1)});
  cx.s_faces.insert(sorted(bot));
  cx.s_faces.insert(sorted(top));
  cx.cells.push_back(std::move(w));
  add_rings(cx, n, 1, gid, pos, "");
  return cx;
}

CellComplex mobius_collar(int n) {
  if (n < 2) throw ParallelityError("need at least 2 sectors");
  const int m = 2, W = m + 5;
  // unfolded angle u in [0, 2n); (u, j, z) ~ (u + n, m - j, 1 - z)
  auto gid = [n, m, W](int u, int j, int z) {
    u = ((u % (2 * n)) + 2 * n) % (2 * n);
    if (u >= n) {
      u -= n;
      j = m - j;
      if (z < 2) z = 1 - z;
    }
    return (u * W + (j + 2)) * 3 + z;
  };
  auto pos = [](int u, int j, int z) -> Vec { return {double(u), double(j), z == 2 ? 0.5 : double(z)}; };
  CellComplex cx;
  for (int u = 0; u < n; ++u)
    for (int j = 0; j < m; ++j) {
      Cell c;
      c.prov = "core:" + std::to_string(u) + "," + std::to_string(j);
      auto V = [&](int du, int dj, int z) {
        int id = gid(u + du, j + dj, z);
        c.coord[id] = pos(u + du, j + dj, z);
        return id;
      };
      std::vector<int> bot{V(0, 0, 0), V(1, 0, 0), V(1, 1, 0), V(0, 1, 0)};
      std::vector<int> top{V(0, 0, 1), V(1, 0, 1), V(1, 1, 1), V(0, 1, 1)};
      c.faces = {bot, top,
                 {V(0, 0, 0), V(1, 0, 0), V(1, 0, 1), V(0, 0, 1)},
                 {V(0, 1, 0), V(1, 1, 0), V(1, 1, 1), V(0, 1, 1)},
                 {V(0, 0, 0), V(0, 1, 0), V(0, 1, 1), V(0, 0, 1)},
                 {V(1, 0, 0), V(1, 1, 0), V(1, 1, 1), V(1, 0, 1)}};
      cx.s_faces.insert(sorted(bot));
      cx.s_faces.insert(sorted(top));
      cx.cells.push_back(std::move(c));
    }
  add_rings(cx, 2 * n, m, gid, pos, "collar");
  return cx;
}

HandleStructure extract_component(const HandleStructure& h, const std::array<std::vector<int>, 4>& comp) {
  std::array<std::vector<int>, 4> nid;
  nid[0].assign(h.zero.size(), -1);
  nid[1].assign(h.one.size(), -1);
  nid[2].assign(h.two.size(), -1);
  nid[3].assign(h.three.size(), -1);
  HandleStructure out;
  for (int z : comp[0]) {
    nid[0][z] = static_cast<int>(out.zero.size());
    out.zero.push_back(h.zero[z]);
  }
  // seams are not listed in components; keep those owned by kept handles
  std::vector<int> twos = comp[2];
  for (int k : comp[1])
    for (int o : h.one[k].owner)
      if (h.two[o].seam) twos.push_back(o);
  std::sort(twos.begin(), twos.end());
  twos.erase(std::unique(twos.begin(), twos.end()), twos.end());
  for (int o : twos) {
    nid[2][o] = static_cast<int>(out.two.size());
    out.two.push_back(h.two[o]);
  }
  for (int k : comp[1]) {
    nid[1][k] = static_cast<int>(out.one.size());
    OneHandle one = h.one[k];
    for (int e = 0; e < 2; ++e) one.end[e] = nid[0][one.end[e]];
    for (auto& o : one.owner) o = nid[2][o];
    out.one.push_back(std::move(one));
  }
  for (auto& b : h.bridges) {
    if (nid[0][b.zero] < 0) continue;
    Bridge nb = b;
    nb.zero = nid[0][b.zero];
    nb.p.k = nid[1][b.p.k];
    nb.q.k = nid[1][b.q.k];
    nb.owner = nid[2][b.owner];
    out.bridges.push_back(nb);
  }
  auto map_corner = [&](int c) {
    int k = 0;
    while (k + 1 < static_cast<int>(h.one.size()) && h.corner_offset(k + 1) <= c) ++k;
    if (nid[1][k] < 0) return -1;
    return out.corner_offset(nid[1][k]) + (c - h.corner_offset(k));
  };
  for (int t : comp[3]) {
    nid[3][t] = static_cast<int>(out.three.size());
    auto th = h.three[t];
    th.corner = map_corner(th.corner);
    out.three.push_back(th);
  }
  for (auto& [key, piece] : h.s_label) {
    int c = map_corner(key.second);
    if (c >= 0) out.s_label[{key.first, c}] = piece;
  }
  return out;
}

}  // namespace kx
