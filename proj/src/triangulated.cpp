#include <algorithm>
#include <numeric>
#include <set>

#include "kx/handles.hpp"

namespace kx {

namespace {

// Induced boundary orientation of the face opposite vertex f of [0123].
constexpr std::array<std::array<int, 3>, 4> kFaceOrient{{{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

struct UF {
  std::vector<int> p;
  explicit UF(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

int edge_index(int i, int j) {
  if (i > j) std::swap(i, j);
  static const int tbl[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  return tbl[i][j];
}

bool odd(const std::array<int, 4>& p) {
  int inv = 0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) inv += p[i] > p[j];
  return inv % 2 == 1;
}

}  // namespace

std::string prov_kind(const std::string& prov) { return prov.substr(0, prov.find(':')); }

HandleStructure from_triangulation(const Triangulation& t, DualInfo* info) {
  const int n = static_cast<int>(t.glue.size());
  HandleStructure h;
  for (int i = 0; i < n; ++i)
    h.zero.push_back({i < static_cast<int>(t.tet_prov.size()) ? t.tet_prov[i] : "tet:" + std::to_string(i), false});
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < 4; ++f) {
      const auto& g = t.glue[i][f];
      if (g.tet < 0 || g.tet >= n) throw HandleError("triangulation has an unglued face");
      if (!odd(g.perm)) throw HandleError("triangulation is not consistently oriented");
      const auto& back = t.glue[g.tet][g.perm[f]];
      if (back.tet != i || back.perm[g.perm[f]] != f) throw HandleError("gluing is not symmetric");
    }
  // Edge classes.
  UF eu(6 * n);
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < 4; ++f) {
      const auto& g = t.glue[i][f];
      for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b)
          if (a != f && b != f) eu.unite(6 * i + edge_index(a, b), 6 * g.tet + edge_index(g.perm[a], g.perm[b]));
    }
  std::map<int, int> cls;
  std::vector<std::array<int, 3>> two_edge;
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        int r = eu.find(6 * i + edge_index(a, b));
        if (cls.try_emplace(r, static_cast<int>(cls.size())).second) two_edge.push_back({i, a, b});
      }
  auto role = [&](int tet, int v) -> std::string {
    if (tet < static_cast<int>(t.vertex_name.size())) return t.vertex_name[tet][v];
    return std::to_string(v);
  };
  for (auto& te : two_edge) {
    std::string r1 = role(te[0], te[1]), r2 = role(te[0], te[2]);
    std::set<std::string> rs{r1, r2};
    std::string kind = "edge";
    if (rs == std::set<std::string>{"T", "B"}) kind = "region";
    else if (rs.count("T")) kind = "roof";
    else if (rs.count("B")) kind = "floor";
    else if (rs == std::set<std::string>{"P", "N"}) kind = "crossing-disc";
    h.two.push_back({kind + ":tet" + std::to_string(te[0]) + "/" + r1 + r2, false, false});
  }
  auto owner_of = [&](int tet, int a, int b) { return cls.at(eu.find(6 * tet + edge_index(a, b))); };

  // 1-handles, one per glued face pair.
  std::map<std::pair<int, int>, std::pair<int, int>> fh;
  for (int i = 0; i < n; ++i)
    for (int f = 0; f < 4; ++f) {
      const auto& g = t.glue[i][f];
      std::pair<int, int> me{i, f}, other{g.tet, g.perm[f]};
      if (other < me) continue;
      OneHandle o;
      o.end = {i, g.tet};
      o.site = {f, g.perm[f]};
      const auto& vs = kFaceOrient[f];
      std::set<std::string> roles;
      for (int a = 0; a < 3; ++a) {
        o.owner.push_back(owner_of(i, vs[a], vs[(a + 1) % 3]));
        roles.insert(role(i, vs[a]));
      }
      std::string kind = (roles.count("T") && roles.count("B")) ? "edge-following" : "crossing-square";
      o.prov = kind + ":tet" + std::to_string(i) + "f" + std::to_string(f) + "/tet" + std::to_string(g.tet) +
               "f" + std::to_string(g.perm[f]);
      int k = static_cast<int>(h.one.size());
      fh[me] = {k, 0};
      fh[other] = {k, 1};
      h.one.push_back(std::move(o));
    }
  // alpha index of edge {a,b} of tet `tet` on the island of face f.
  auto alpha_of = [&](int tet, int f, int a, int b) {
    auto [k, e] = fh.at({tet, f});
    int t0 = h.one[k].end[0], f0 = h.one[k].site[0];
    if (e == 1) {
      const auto& g = t.glue[tet][f];
      a = g.perm[a];
      b = g.perm[b];
    }
    const auto& vs = kFaceOrient[f0];
    for (int x = 0; x < 3; ++x) {
      int u = vs[x], w = vs[(x + 1) % 3];
      if ((u == a && w == b) || (u == b && w == a)) return Port{k, x, e};
    }
    (void)t0;
    throw HandleError("edge not on face");
  };
  for (int i = 0; i < n; ++i)
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        int others[2], m = 0;
        for (int v = 0; v < 4; ++v)
          if (v != a && v != b) others[m++] = v;
        Bridge br;
        br.zero = i;
        br.p = alpha_of(i, others[0], a, b);
        br.q = alpha_of(i, others[1], a, b);
        br.owner = owner_of(i, a, b);
        h.bridges.push_back(br);
      }
  if (info) {
    info->face_handle = fh;
    info->two_edge = two_edge;
  }
  return h;
}

void cap_spheres(HandleStructure& h, const std::string& prov_prefix) {
  Complex k(h);
  std::vector<int> bf;
  for (int f = 0; f < static_cast<int>(k.faces.size()); ++f)
    if (k.boundary_face(f) && k.faces[f].three < 0) bf.push_back(f);
  for (auto& comp : face_components(k, bf)) {
    if (surface_stats(k, comp).euler != 2) continue;
    const auto& F = k.faces[comp.front()];
    h.three.push_back({F.type, F.corners.front(), prov_prefix});
  }
}

Triangulation diagram_triangulation(const Diagram& d) {
  const int c = d.crossing_count();
  Triangulation t;
  t.glue.assign(4 * c, {});
  t.tet_prov.resize(4 * c);
  t.vertex_name.assign(4 * c, {"T", "B", "P", "N"});
  enum { T = 0, B = 1, P = 2, N = 3 };
  auto tet = [](int x, int q) { return 4 * x + ((q % 4) + 4) % 4; };
  auto set = [&](int t1, int f1, int t2, std::array<int, 4> perm) {
    t.glue[t1][f1] = {t2, perm};
    std::array<int, 4> inv{};
    for (int v = 0; v < 4; ++v) inv[perm[v]] = v;
    t.glue[t2][perm[f1]] = {t1, inv};
  };
  const std::array<int, 4> swapPN{T, B, N, P};
  for (int x = 0; x < c; ++x)
    for (int q = 0; q < 4; ++q) {
      t.tet_prov[tet(x, q)] = "corner:x" + std::to_string(x) + "q" + std::to_string(q);
      int s = (q + 1) % 4;
      int F = (s % 2 == 1) ? B : T;
      int opp = F == B ? T : B;
      set(tet(x, q), opp, tet(x, s), swapPN);
    }
  std::map<int, std::vector<std::pair<int, int>>> occ;
  for (int x = 0; x < c; ++x)
    for (int q = 0; q < 4; ++q) occ[d.crossings[x].label[q]].push_back({x, q});
  for (auto& [l, v] : occ) {
    auto [x, q] = v[0];
    auto [y, r] = v[1];
    set(tet(x, q), N, tet(y, r - 1), swapPN);
    set(tet(x, q - 1), P, tet(y, r), swapPN);
  }
  return t;
}

namespace {

// Splits 1-handle k at its middle by a new 0-handle; returns (Z, new k).
std::pair<int, int> split_one_handle(HandleStructure& h, int k) {
  int Z = static_cast<int>(h.zero.size());
  h.zero.push_back({"exceptional:split " + std::to_string(k), true});
  int kb = static_cast<int>(h.one.size());
  OneHandle nb = h.one[k];
  nb.end = {Z, h.one[k].end[1]};
  nb.site = {1, h.one[k].site[1]};
  h.one.push_back(nb);
  h.one[k].end[1] = Z;
  h.one[k].site[1] = 0;
  for (auto& b : h.bridges)
    for (Port* p : {&b.p, &b.q})
      if (p->k == k && p->e == 1) p->k = kb;
  auto remap = [&](int c) {
    int off = h.corner_offset(k);
    int n = h.one[k].n();
    if (c < off || c >= off + 4 * n) return c;
    int r = c - off;
    int a = r / 4, e = (r / 2) % 2, s = r % 2;
    return e == 1 ? h.corner(kb, a, 1, s) : c;
  };
  for (auto& t : h.three) t.corner = remap(t.corner);
  std::map<std::pair<int, int>, int> sl;
  for (auto& [key, v] : h.s_label) sl[{key.first, remap(key.second)}] = v;
  h.s_label = sl;
  for (int a = 0; a < h.one[k].n(); ++a)
    h.bridges.push_back({Z, Port{k, a, 1}, Port{kb, a, 0}, h.one[k].owner[a]});
  return {Z, kb};
}

// Replaces bridge b (p -> q) by p -> x and y -> q, where x, y are the ports
// of 1-handle j at end e in counterclockwise order.
void insert_island(HandleStructure& h, int b, int j, int e) {
  Port x = e == 0 ? Port{j, 0, 0} : Port{j, 1, 1};
  Port y = e == 0 ? Port{j, 1, 0} : Port{j, 0, 1};
  Bridge old = h.bridges[b];
  h.bridges[b] = {old.zero, old.p, x, old.owner};
  h.bridges.push_back({old.zero, y, old.q, old.owner});
}

int label_side_a(const HandleStructure& h, const Complex& k, int b) {
  const auto& br = h.bridges[b];
  int c = h.corner(br.p.k, br.p.a, br.p.e, port_last_s(br.p.e));
  return k.faces[k.face_of(FaceType::Region, c)].three;
}

}  // namespace

HandleStructure build_exterior_handles(const Diagram& d0, bool exceptional) {
  Diagram d = d0;
  validate(d);
  Triangulation t = diagram_triangulation(d);
  DualInfo info;
  HandleStructure h = from_triangulation(t, &info);
  cap_spheres(h);
  // name 3-handles by the tet vertex their representative region surrounds
  for (auto& th : h.three) {
    int c = th.corner;
    int k = 0;
    while (c >= 4 * h.one[k].n()) c -= 4 * h.one[k].n(), ++k;
    int a = c / 4, s = c % 2;
    const auto& vs = kFaceOrient[h.one[k].site[0]];
    int v = s == 0 ? vs[a] : vs[(a + 1) % 3];
    th.prov = "vertex:" + t.vertex_name[h.one[k].end[0]][v];
  }
  if (!exceptional) return h;

  // Lowest label: its two edge-following 1-handles.
  int lo = d.crossings[0].label[0];
  for (auto& cr : d.crossings)
    for (int l : cr.label) lo = std::min(lo, l);
  std::vector<std::pair<int, int>> occ;
  for (int x = 0; x < d.crossing_count(); ++x)
    for (int q = 0; q < 4; ++q)
      if (d.crossings[x].label[q] == lo) occ.push_back({x, q});
  const int N = 3, P = 2;
  int k1 = info.face_handle.at({4 * occ[0].first + occ[0].second, N}).first;
  int k2 = info.face_handle.at({4 * occ[0].first + (occ[0].second + 3) % 4, P}).first;
  auto find_alpha = [&](int k, const std::string& kind) {
    for (int a = 0; a < h.one[k].n(); ++a)
      if (prov_kind(h.two[h.one[k].owner[a]].prov) == kind) return a;
    throw HandleError("edge-following handle without " + kind);
  };
  int roof1 = find_alpha(k1, "roof"), roof2 = find_alpha(k2, "roof");
  int floor1 = find_alpha(k1, "floor"), floor2 = find_alpha(k2, "floor");
  if (h.one[k1].owner[roof1] != h.one[k2].owner[roof2] || h.one[k1].owner[floor1] != h.one[k2].owner[floor2])
    throw HandleError("edge-following handles of one label do not share roof and floor");
  h.one[k1].exceptional = h.one[k2].exceptional = false;
  auto [Z1, k1b] = split_one_handle(h, k1);
  auto [Z2, k2b] = split_one_handle(h, k2);
  h.zero[Z1].prov = "exceptional:label" + std::to_string(lo) + "/1";
  h.zero[Z2].prov = "exceptional:label" + std::to_string(lo) + "/2";
  (void)k1b;
  (void)k2b;
  auto pass_bridge = [&](int Z, int k, int a) {
    for (int b = 0; b < static_cast<int>(h.bridges.size()); ++b)
      if (h.bridges[b].zero == Z && h.bridges[b].p == Port{k, a, 1}) return b;
    throw HandleError("pass-through bridge missing");
  };
  std::vector<std::string> old_prov;
  for (auto& tw : h.two) old_prov.push_back(tw.prov);
  const char* names[2] = {"exceptional:up", "exceptional:down"};
  int alpha1[2] = {roof1, floor1}, alpha2[2] = {roof2, floor2};
  for (int w = 0; w < 2; ++w) {
    Complex k(h);
    int b1 = pass_bridge(Z1, k1, alpha1[w]);
    int b2 = pass_bridge(Z2, k2, alpha2[w]);
    // gap[1] faces side A at both ends.
    int l1a = label_side_a(h, k, b1);
    int l2a = label_side_a(h, k, b2);
    if (l1a != l2a) std::swap(h.bridges[b2].p, h.bridges[b2].q);
    int j = static_cast<int>(h.one.size());
    OneHandle e;
    e.end = {Z1, Z2};
    e.site = {2 + w, 2 + w};
    e.owner = {h.bridges[b1].owner, h.bridges[b1].owner};
    e.prov = names[w];
    e.exceptional = true;
    h.one.push_back(e);
    insert_island(h, b1, j, 0);
    insert_island(h, b2, j, 1);
  }
  rederive_two_handles(h, &old_prov);
  return h;
}

}  // namespace kx
