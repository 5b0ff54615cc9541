#include "kx/handles.hpp"

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <set>

namespace kx {

namespace {

struct UF {
  std::vector<int> p;
  explicit UF(int n = 0) : p(n) { std::iota(p.begin(), p.end(), 0); }
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

const char* kTypeName[] = {"island", "bridge", "alpha", "region", "gap", "cap"};

}  // namespace

int HandleStructure::corner_count() const {
  int n = 0;
  for (auto& o : one) n += 4 * o.n();
  return n;
}

int HandleStructure::corner_offset(int k) const {
  int n = 0;
  for (int i = 0; i < k; ++i) n += 4 * one[i].n();
  return n;
}

int HandleStructure::count(int index) const {
  switch (index) {
    case 0: return static_cast<int>(zero.size());
    case 1: return static_cast<int>(one.size());
    case 2: {
      int c = 0;
      for (auto& t : two) c += t.seam ? 0 : 1;
      return c;
    }
    default: return static_cast<int>(three.size());
  }
}

Complex::Complex(const HandleStructure& hs) : h(&hs) {
  const auto& H = hs;
  const int K = static_cast<int>(H.one.size());
  std::vector<int> off(K + 1, 0);
  for (int k = 0; k < K; ++k) off[k + 1] = off[k] + 4 * H.one[k].n();
  ncorner = off[K];
  auto C = [&](int k, int a, int e, int s) { return off[k] + 4 * a + 2 * e + s; };
  struct Info {
    int k, a, e, s;
  };
  std::vector<Info> info(ncorner);
  for (int k = 0; k < K; ++k)
    for (int a = 0; a < H.one[k].n(); ++a)
      for (int e = 0; e < 2; ++e)
        for (int s = 0; s < 2; ++s) info[C(k, a, e, s)] = {k, a, e, s};

  mA.assign(ncorner, -1);
  mG.assign(ncorner, -1);
  mB.assign(ncorner, -1);
  mP.assign(ncorner, -1);
  for (int c = 0; c < ncorner; ++c) {
    auto [k, a, e, s] = info[c];
    int n = H.one[k].n();
    mP[c] = C(k, a, e, 1 - s);
    mA[c] = C(k, a, 1 - e, s);
    mG[c] = s == 1 ? C(k, (a + 1) % n, e, 0) : C(k, (a + n - 1) % n, e, 1);
  }
  auto valid_port = [&](const Port& p) {
    return p.k >= 0 && p.k < K && p.a >= 0 && p.a < H.one[p.k].n() && (p.e == 0 || p.e == 1);
  };
  std::vector<int> bridge_of(ncorner, -1);
  for (int b = 0; b < static_cast<int>(H.bridges.size()); ++b) {
    const auto& br = H.bridges[b];
    if (!valid_port(br.p) || !valid_port(br.q))
      throw HandleError("bridge " + std::to_string(b) + " references an invalid port");
    if (br.p == br.q) throw HandleError("bridge " + std::to_string(b) + " joins a port to itself");
    int fp = C(br.p.k, br.p.a, br.p.e, port_first_s(br.p.e));
    int lp = C(br.p.k, br.p.a, br.p.e, port_last_s(br.p.e));
    int fq = C(br.q.k, br.q.a, br.q.e, port_first_s(br.q.e));
    int lq = C(br.q.k, br.q.a, br.q.e, port_last_s(br.q.e));
    for (int c : {fp, lp, fq, lq})
      if (bridge_of[c] >= 0)
        throw HandleError("port used by bridges " + std::to_string(bridge_of[c]) + " and " +
                          std::to_string(b));
    for (int c : {fp, lp, fq, lq}) bridge_of[c] = b;
    mB[lp] = fq;
    mB[fq] = lp;
    mB[fp] = lq;
    mB[lq] = fp;
  }
  for (int c = 0; c < ncorner; ++c)
    if (mB[c] < 0) {
      auto [k, a, e, s] = info[c];
      throw HandleError("port (" + std::to_string(k) + "," + std::to_string(a) + "," +
                        std::to_string(e) + ") has no bridge");
    }

  auto seam_alpha = [&](int k, int a) {
    int o = H.one[k].owner[a];
    return o >= 0 && o < static_cast<int>(H.two.size()) && H.two[o].seam;
  };
  auto seam_bridge = [&](int b) {
    int o = H.bridges[b].owner;
    return o >= 0 && o < static_cast<int>(H.two.size()) && H.two[o].seam;
  };

  // Vertices: corners merged across seams.
  UF vu(ncorner);
  for (int c = 0; c < ncorner; ++c)
    if (seam_alpha(info[c].k, info[c].a)) vu.unite(c, mP[c]);
  vid.assign(ncorner, -1);
  {
    std::map<int, int> root_id;
    for (int c = 0; c < ncorner; ++c) {
      int r = vu.find(c);
      auto it = root_id.try_emplace(r, static_cast<int>(root_id.size())).first;
      vid[c] = it->second;
    }
    nvert = static_cast<int>(root_id.size());
  }

  // Raw edges: one per matched pair and type; seams merge parallel ones.
  std::array<std::vector<int>, 4> raw;  // P, A, G, B
  std::vector<char> raw_type;
  std::vector<std::array<int, 2>> raw_ends;
  std::array<const std::vector<int>*, 4> mt{&mP, &mA, &mG, &mB};
  const char tchar[4] = {'P', 'A', 'G', 'B'};
  for (int t = 0; t < 4; ++t) {
    raw[t].assign(ncorner, -1);
    for (int c = 0; c < ncorner; ++c) {
      int d = (*mt[t])[c];
      if (raw[t][c] >= 0) continue;
      int id = static_cast<int>(raw_type.size());
      raw_type.push_back(tchar[t]);
      raw_ends.push_back({c, d});
      raw[t][c] = raw[t][d] = id;
    }
  }
  UF eu(static_cast<int>(raw_type.size()));
  std::vector<bool> raw_degenerate(raw_type.size(), false);
  for (int c = 0; c < ncorner; ++c) {
    auto [k, a, e, s] = info[c];
    if (seam_alpha(k, a)) {
      raw_degenerate[raw[0][c]] = true;
      eu.unite(raw[1][c], raw[1][mP[c]]);
    }
    if (seam_bridge(bridge_of[c])) {
      // the two sides of a seam bridge: c--mB[c] and mP[c]--mP[mB[c]]
      eu.unite(raw[3][c], raw[3][mP[c]]);
    }
  }
  std::vector<int> edge_id(raw_type.size(), -1);
  {
    std::map<int, int> root_id;
    for (int r = 0; r < static_cast<int>(raw_type.size()); ++r) {
      if (raw_degenerate[r]) continue;
      int root = eu.find(r);
      auto it = root_id.find(root);
      if (it == root_id.end()) {
        it = root_id.emplace(root, static_cast<int>(edges.size())).first;
        edges.push_back({raw_type[r], vid[raw_ends[r][0]], vid[raw_ends[r][1]], {}});
      }
      edge_id[r] = it->second;
    }
  }

  for (auto& v : face_at) v.assign(ncorner, -1);
  auto add_face = [&](Face f, const std::vector<int>& raw_edges) {
    int id = static_cast<int>(faces.size());
    std::set<int> seen;
    for (int r : raw_edges) {
      int e = edge_id[r];
      if (e < 0 || !seen.insert(e).second) continue;
      f.edges.push_back(e);
    }
    for (int c : f.corners) face_at[static_cast<int>(f.type)][c] = id;
    faces.push_back(std::move(f));
    return id;
  };

  // Islands
  for (int k = 0; k < K; ++k)
    for (int e = 0; e < 2; ++e) {
      Face f;
      f.type = FaceType::Island;
      f.one = k;
      f.zero = H.one[k].end[e];
      f.end = e;
      std::vector<int> re;
      for (int a = 0; a < H.one[k].n(); ++a) {
        f.corners.push_back(C(k, a, e, 0));
        f.corners.push_back(C(k, a, e, 1));
        re.push_back(raw[0][C(k, a, e, 0)]);
        re.push_back(raw[2][C(k, a, e, 1)]);
      }
      add_face(std::move(f), re);
    }
  // Bridges
  for (int b = 0; b < static_cast<int>(H.bridges.size()); ++b) {
    const auto& br = H.bridges[b];
    Face f;
    f.type = FaceType::BridgeF;
    f.bridge = b;
    f.zero = br.zero;
    f.two = br.owner;
    f.degenerate = seam_bridge(b);
    int fp = C(br.p.k, br.p.a, br.p.e, port_first_s(br.p.e));
    int lp = mP[fp];
    int fq = mB[lp];
    int lq = mP[fq];
    f.corners = {fp, lp, fq, lq};
    add_face(std::move(f), {raw[0][fp], raw[3][lp], raw[0][fq], raw[3][lq]});
  }
  // Alpha strips
  for (int k = 0; k < K; ++k)
    for (int a = 0; a < H.one[k].n(); ++a) {
      Face f;
      f.type = FaceType::Alpha;
      f.one = k;
      f.alpha = a;
      f.two = H.one[k].owner[a];
      f.degenerate = seam_alpha(k, a);
      int c00 = C(k, a, 0, 0), c01 = C(k, a, 0, 1), c11 = C(k, a, 1, 1), c10 = C(k, a, 1, 0);
      f.corners = {c00, c01, c11, c10};
      add_face(std::move(f), {raw[0][c00], raw[1][c01], raw[0][c11], raw[1][c10]});
    }
  // Boundary faces: alternating cycles.
  auto cycles = [&](FaceType type, int t1, int t2) {
    const auto& m1 = *mt[t1];
    const auto& m2 = *mt[t2];
    std::vector<bool> seen(ncorner, false);
    for (int c0 = 0; c0 < ncorner; ++c0) {
      if (seen[c0]) continue;
      Face f;
      f.type = type;
      std::vector<int> re;
      int c = c0;
      do {
        seen[c] = true;
        f.corners.push_back(c);
        int d = m1[c];
        re.push_back(raw[t1][c]);
        seen[d] = true;
        f.corners.push_back(d);
        re.push_back(raw[t2][d]);
        c = m2[d];
      } while (c != c0);
      auto [k, a, e, s] = info[c0];
      if (type == FaceType::Region) f.zero = H.one[k].end[e];
      if (type == FaceType::Gap) f.one = k;
      if (type == FaceType::Cap) {
        f.two = H.one[k].owner[a];
        f.degenerate = seam_alpha(k, a);
      }
      add_face(std::move(f), re);
    }
  };
  cycles(FaceType::Region, 2, 3);
  cycles(FaceType::Gap, 2, 1);
  cycles(FaceType::Cap, 3, 1);

  for (int f = 0; f < static_cast<int>(faces.size()); ++f)
    for (int e : faces[f].edges) edges[e].faces.push_back(f);

  for (auto& [key, piece] : H.s_label) {
    auto [t, c] = key;
    if (t < 0 || t > 5 || c < 0 || c >= ncorner)
      throw HandleError("S label references an invalid corner");
    faces[face_at[t][c]].s = piece;
  }
  // 3-handles cover the boundary component of their representative face.
  std::vector<int> bfaces;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f)
    if (boundary_face(f)) bfaces.push_back(f);
  auto comps = face_components(*this, bfaces);
  std::vector<int> comp_of(faces.size(), -1);
  for (int i = 0; i < static_cast<int>(comps.size()); ++i)
    for (int f : comps[i]) comp_of[f] = i;
  for (int t = 0; t < static_cast<int>(H.three.size()); ++t) {
    const auto& th = H.three[t];
    int ti = static_cast<int>(th.type);
    if (ti < 0 || ti > 5 || th.corner < 0 || th.corner >= ncorner)
      throw HandleError("3-handle " + std::to_string(t) + " has an invalid representative");
    int f = face_at[ti][th.corner];
    if (comp_of[f] < 0) throw HandleError("3-handle representative is not a boundary face");
    for (int g : comps[comp_of[f]]) {
      if (faces[g].three >= 0 && faces[g].three != t)
        throw HandleError("two 3-handles on one boundary component");
      faces[g].three = t;
    }
  }
}

std::vector<int> Complex::handle_faces(int index, int id) const {
  std::vector<int> out;
  for (int f = 0; f < static_cast<int>(faces.size()); ++f) {
    const auto& F = faces[f];
    if (F.degenerate) continue;
    bool in = false;
    switch (index) {
      case 0:
        in = F.zero == id &&
             (F.type == FaceType::Island || F.type == FaceType::BridgeF || F.type == FaceType::Region);
        break;
      case 1:
        in = F.one == id &&
             (F.type == FaceType::Island || F.type == FaceType::Alpha || F.type == FaceType::Gap);
        break;
      case 2:
        in = F.two == id &&
             (F.type == FaceType::BridgeF || F.type == FaceType::Alpha || F.type == FaceType::Cap);
        break;
      default: in = boundary_face(f) && F.three == id;
    }
    if (in) out.push_back(f);
  }
  return out;
}

std::vector<std::pair<int, int>> Complex::face_handles(int f) const {
  const auto& F = faces[f];
  std::vector<std::pair<int, int>> out;
  switch (F.type) {
    case FaceType::Island: out = {{0, F.zero}, {1, F.one}}; break;
    case FaceType::BridgeF: out = {{0, F.zero}, {2, F.two}}; break;
    case FaceType::Alpha: out = {{1, F.one}, {2, F.two}}; break;
    case FaceType::Region: out = {{0, F.zero}}; break;
    case FaceType::Gap: out = {{1, F.one}}; break;
    case FaceType::Cap: out = {{2, F.two}}; break;
  }
  if (boundary_face(f) && F.three >= 0) out.push_back({3, F.three});
  return out;
}

std::vector<std::vector<int>> face_components(const Complex& k, const std::vector<int>& face_set) {
  std::map<int, int> idx;
  for (int i = 0; i < static_cast<int>(face_set.size()); ++i) idx[face_set[i]] = i;
  UF uf(static_cast<int>(face_set.size()));
  std::map<int, int> first_face_on_edge;
  for (int i = 0; i < static_cast<int>(face_set.size()); ++i)
    for (int e : k.faces[face_set[i]].edges) {
      auto [it, fresh] = first_face_on_edge.try_emplace(e, i);
      if (!fresh) uf.unite(i, it->second);
    }
  std::map<int, std::vector<int>> groups;
  for (int i = 0; i < static_cast<int>(face_set.size()); ++i) groups[uf.find(i)].push_back(face_set[i]);
  std::vector<std::vector<int>> out;
  for (auto& [r, g] : groups) out.push_back(std::move(g));
  return out;
}

SurfaceStats surface_stats(const Complex& k, const std::vector<int>& face_set) {
  SurfaceStats st;
  std::set<int> verts;
  std::map<int, int> ecount;
  for (int f : face_set) {
    for (int c : k.faces[f].corners) verts.insert(k.vid[c]);
    for (int e : k.faces[f].edges) ++ecount[e];
  }
  st.faces = static_cast<int>(face_set.size());
  st.euler = static_cast<int>(verts.size()) - static_cast<int>(ecount.size()) + st.faces;
  st.components = static_cast<int>(face_components(k, face_set).size());
  // boundary circles: components of the graph of edges used once
  std::map<int, int> vix;
  std::vector<std::array<int, 2>> bedges;
  for (auto& [e, n] : ecount)
    if (n == 1) bedges.push_back({k.edges[e].u, k.edges[e].v});
  for (auto& be : bedges)
    for (int v : be) vix.try_emplace(v, static_cast<int>(vix.size()));
  UF uf(static_cast<int>(vix.size()));
  for (auto& be : bedges) uf.unite(vix[be[0]], vix[be[1]]);
  std::set<int> roots;
  for (auto& [v, i] : vix) roots.insert(uf.find(i));
  st.boundary_circles = static_cast<int>(roots.size());
  return st;
}

int Census::boundary_tori() const {
  int n = 0;
  for (auto& b : boundary)
    if (b.three < 0 && b.euler == 0) ++n;
  return n;
}

int Census::free_boundary_components() const {
  int n = 0;
  for (auto& b : boundary)
    if (b.three < 0) ++n;
  return n;
}

bool Census::single_torus_boundary() const {
  return free_boundary_components() == 1 && boundary_tori() == 1;
}

Census census(const HandleStructure& h) {
  Census c;
  for (int i = 0; i < 4; ++i) c.handles[i] = h.count(i);
  c.euler = h.euler();
  for (auto& t : h.two) c.seams += t.seam ? 1 : 0;
  for (auto& z : h.zero) c.exceptional_zero += z.exceptional ? 1 : 0;
  Complex k(h);
  std::vector<int> bf;
  for (int f = 0; f < static_cast<int>(k.faces.size()); ++f)
    if (k.boundary_face(f)) bf.push_back(f);
  for (auto& comp : face_components(k, bf)) {
    BoundaryComponent b;
    b.faces = comp;
    b.euler = surface_stats(k, comp).euler;
    b.three = k.faces[comp.front()].three;
    b.all_s = true;
    for (int f : comp) {
      b.has_s = b.has_s || k.faces[f].s >= 0;
      b.all_s = b.all_s && k.faces[f].s >= 0;
    }
    c.boundary.push_back(std::move(b));
  }
  return c;
}

nlohmann::json ConventionReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  const char* names[] = {"i", "ii", "iii", "iv"};
  for (int i = 0; i < 4; ++i) {
    j[names[i]]["ok"] = clause[i].ok;
    j[names[i]]["issues"] = clause[i].issues;
  }
  j["ok"] = ok();
  return j;
}

std::vector<std::vector<Port>> port_cycles(const HandleStructure& h) {
  std::map<Port, Port> across;  // bridge partner
  for (auto& b : h.bridges) {
    across[b.p] = b.q;
    across[b.q] = b.p;
  }
  std::set<Port> seen;
  std::vector<std::vector<Port>> out;
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k)
    for (int a = 0; a < h.one[k].n(); ++a) {
      Port start{k, a, 0};
      if (seen.count(start)) continue;
      std::vector<Port> cyc;
      Port p = start;
      while (!seen.count(p)) {
        seen.insert(p);
        cyc.push_back(p);
        Port o{p.k, p.a, 1 - p.e};
        seen.insert(o);
        cyc.push_back(o);
        auto it = across.find(o);
        if (it == across.end()) break;
        p = it->second;
      }
      out.push_back(std::move(cyc));
    }
  return out;
}

void rederive_two_handles(HandleStructure& h, const std::vector<std::string>* prov) {
  auto cyc = port_cycles(h);
  std::vector<TwoHandle> two;
  std::map<Port, int> new_owner;
  for (auto& c : cyc) {
    int old = h.one[c.front().k].owner[c.front().a];
    TwoHandle t;
    if (old >= 0 && old < static_cast<int>(h.two.size())) t = h.two[old];
    if (prov && old >= 0 && old < static_cast<int>(prov->size())) t.prov = (*prov)[old];
    int id = static_cast<int>(two.size());
    two.push_back(t);
    for (auto& p : c) new_owner[p] = id;
  }
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k)
    for (int a = 0; a < h.one[k].n(); ++a) h.one[k].owner[a] = new_owner.at(Port{k, a, 0});
  for (auto& b : h.bridges) b.owner = new_owner.at(b.p);
  h.two = std::move(two);
}

ConventionReport verify_convention(const HandleStructure& h) {
  ConventionReport r;
  auto fail = [&](int clause, const std::string& msg) {
    r.clause[clause].ok = false;
    if (r.clause[clause].issues.size() < 20) r.clause[clause].issues.push_back(msg);
  };
  const int Z = static_cast<int>(h.zero.size());
  const int K = static_cast<int>(h.one.size());
  const int T = static_cast<int>(h.two.size());
  bool structural = true;
  // (i) attachments reference lower-index handles correctly
  for (int k = 0; k < K; ++k) {
    for (int e = 0; e < 2; ++e)
      if (h.one[k].end[e] < 0 || h.one[k].end[e] >= Z) {
        fail(0, "1-handle " + std::to_string(k) + " end " + std::to_string(e) + " not on a 0-handle");
        structural = false;
      }
    for (int o : h.one[k].owner)
      if (o < 0 || o >= T) {
        fail(0, "1-handle " + std::to_string(k) + " strip with unknown 2-handle");
        structural = false;
      }
  }
  for (int b = 0; b < static_cast<int>(h.bridges.size()); ++b) {
    const auto& br = h.bridges[b];
    bool ok = br.zero >= 0 && br.zero < Z && br.owner >= 0 && br.owner < T;
    for (const Port* p : {&br.p, &br.q}) {
      ok = ok && p->k >= 0 && p->k < K && p->a >= 0 && p->a < h.one[p->k].n() && (p->e == 0 || p->e == 1);
      if (ok && h.one[p->k].end[p->e] != br.zero) ok = false;
    }
    if (!ok) {
      fail(0, "bridge " + std::to_string(b) + " attachment invalid");
      structural = false;
    }
  }
  // (ii) same-index handles disjoint
  {
    std::map<std::pair<int, int>, int> site_used;
    for (int k = 0; k < K; ++k)
      for (int e = 0; e < 2; ++e) {
        auto key = std::make_pair(h.one[k].end[e], h.one[k].site[e]);
        auto [it, fresh] = site_used.try_emplace(key, k);
        if (!fresh)
          fail(1, "1-handles " + std::to_string(it->second) + " and " + std::to_string(k) +
                      " overlap at island " + std::to_string(key.second) + " of 0-handle " +
                      std::to_string(key.first));
      }
  }
  if (!structural) return r;
  std::unique_ptr<Complex> kp;
  try {
    kp = std::make_unique<Complex>(h);
  } catch (const HandleError& ex) {
    fail(1, ex.what());
    return r;
  }
  const Complex& k = *kp;
  for (int z = 0; z < Z; ++z) {
    auto st = surface_stats(k, k.handle_faces(0, z));
    if (st.euler != 2 || st.components != 1 || st.boundary_circles != 0)
      fail(0, "0-handle " + std::to_string(z) + " boundary is not a sphere");
  }
  for (int i = 0; i < K; ++i) {
    auto st = surface_stats(k, k.handle_faces(1, i));
    if (st.euler != 2 || st.components != 1 || st.boundary_circles != 0)
      fail(0, "1-handle " + std::to_string(i) + " boundary is not a sphere");
  }
  for (int t = 0; t < T; ++t) {
    if (h.two[t].seam) continue;
    std::vector<int> att;
    for (int f : k.handle_faces(2, t))
      if (k.faces[f].type != FaceType::Cap) att.push_back(f);
    if (att.empty()) continue;  // reported under (iv)
    auto st = surface_stats(k, att);
    if (st.euler != 0 || st.components != 1 || st.boundary_circles != 2)
      fail(0, "2-handle " + std::to_string(t) + " attaching region is not an annulus");
  }
  {
    std::vector<int> bf;
    for (int f = 0; f < static_cast<int>(k.faces.size()); ++f)
      if (k.boundary_face(f)) bf.push_back(f);
    std::map<int, std::vector<int>> by_three;
    for (auto& comp : face_components(k, bf)) {
      int t = k.faces[comp.front()].three;
      if (t < 0) continue;
      by_three[t] = comp;
      auto st = surface_stats(k, comp);
      if (st.euler != 2) fail(0, "3-handle " + std::to_string(t) + " attached to a non-sphere");
    }
    for (int t = 0; t < static_cast<int>(h.three.size()); ++t)
      if (!by_three.count(t)) fail(1, "3-handle " + std::to_string(t) + " shares a boundary sphere");
  }
  // (iii) 1-handle / 2-handle intersections are product strips
  for (int b = 0; b < static_cast<int>(h.bridges.size()); ++b) {
    const auto& br = h.bridges[b];
    if (h.one[br.p.k].owner[br.p.a] != br.owner || h.one[br.q.k].owner[br.q.a] != br.owner)
      fail(2, "bridge " + std::to_string(b) + " owner differs from its strips");
  }
  {
    std::vector<int> caps(T, 0), cycles(T, 0), alphas(T, 0);
    for (auto& f : k.faces)
      if (f.type == FaceType::Cap && f.two >= 0) ++caps[f.two];
    for (auto& c : port_cycles(h)) {
      std::set<int> owners;
      for (auto& p : c) owners.insert(h.one[p.k].owner[p.a]);
      if (owners.size() != 1) fail(2, "attaching word crosses 2-handles");
      for (int o : owners) ++cycles[o];
    }
    for (auto& o : h.one)
      for (int t : o.owner) ++alphas[t];
    for (int t = 0; t < T; ++t) {
      if (h.two[t].seam) continue;
      if (alphas[t] > 0 && (caps[t] != 2 || cycles[t] != 1))
        fail(2, "2-handle " + std::to_string(t) + " has " + std::to_string(caps[t]) + " caps and " +
                    std::to_string(cycles[t]) + " attaching circles");
      // (iv)
      if (alphas[t] == 0) fail(3, "2-handle " + std::to_string(t) + " runs over no 1-handle");
    }
  }
  return r;
}

bool BoundaryPattern::is_k4() const {
  if (islands != 4 || bridges != 6) return false;
  std::set<std::pair<int, int>> pairs;
  for (auto& b : bridge_edges) {
    if (b[0] == b[1]) return false;
    pairs.insert({std::min(b[0], b[1]), std::max(b[0], b[1])});
  }
  return pairs.size() == 6;
}

BoundaryPattern boundary_pattern(const HandleStructure& h, int zero) {
  if (zero < 0 || zero >= static_cast<int>(h.zero.size()))
    throw HandleError("unknown 0-handle " + std::to_string(zero));
  BoundaryPattern bp;
  bp.zero = zero;
  std::map<std::pair<int, int>, int> idx;
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k)
    for (int e = 0; e < 2; ++e)
      if (h.one[k].end[e] == zero) {
        idx[{k, e}] = static_cast<int>(bp.island_of.size());
        bp.island_of.push_back({k, e});
      }
  bp.islands = static_cast<int>(bp.island_of.size());
  for (int b = 0; b < static_cast<int>(h.bridges.size()); ++b) {
    const auto& br = h.bridges[b];
    if (br.zero != zero) continue;
    if (br.owner >= 0 && h.two[br.owner].seam) continue;
    bp.bridge_edges.push_back({idx.at({br.p.k, br.p.e}), idx.at({br.q.k, br.q.e}), b});
  }
  bp.bridges = static_cast<int>(bp.bridge_edges.size());
  Complex k(h);
  for (auto& f : k.faces)
    if (f.type == FaceType::Region && f.zero == zero) ++bp.regions;
  return bp;
}

nlohmann::json to_json(const HandleStructure& h) {
  using nlohmann::json;
  json j;
  j["zero"] = json::array();
  for (auto& z : h.zero) j["zero"].push_back({{"prov", z.prov}, {"exceptional", z.exceptional}});
  j["one"] = json::array();
  for (auto& o : h.one)
    j["one"].push_back({{"end", o.end},
                        {"site", o.site},
                        {"owner", o.owner},
                        {"prov", o.prov},
                        {"exceptional", o.exceptional}});
  j["bridges"] = json::array();
  for (auto& b : h.bridges)
    j["bridges"].push_back({{"zero", b.zero},
                            {"p", {b.p.k, b.p.a, b.p.e}},
                            {"q", {b.q.k, b.q.a, b.q.e}},
                            {"owner", b.owner}});
  j["two"] = json::array();
  for (auto& t : h.two)
    j["two"].push_back({{"prov", t.prov}, {"seam", t.seam}, {"exceptional", t.exceptional}});
  j["three"] = json::array();
  for (auto& t : h.three)
    j["three"].push_back({{"face", kTypeName[static_cast<int>(t.type)]}, {"corner", t.corner}, {"prov", t.prov}});
  j["s_label"] = json::array();
  for (auto& [key, piece] : h.s_label)
    j["s_label"].push_back({kTypeName[key.first], key.second, piece});
  return j;
}

HandleStructure handles_from_json(const nlohmann::json& j) {
  HandleStructure h;
  auto type_of = [](const std::string& s) {
    for (int i = 0; i < 6; ++i)
      if (s == kTypeName[i]) return i;
    throw HandleError("unknown face type " + s);
  };
  for (auto& z : j.at("zero")) h.zero.push_back({z.at("prov"), z.at("exceptional")});
  for (auto& o : j.at("one")) {
    OneHandle x;
    x.end = o.at("end").get<std::array<int, 2>>();
    x.site = o.at("site").get<std::array<int, 2>>();
    x.owner = o.at("owner").get<std::vector<int>>();
    x.prov = o.at("prov");
    x.exceptional = o.at("exceptional");
    h.one.push_back(std::move(x));
  }
  for (auto& b : j.at("bridges")) {
    Bridge x;
    x.zero = b.at("zero");
    auto p = b.at("p").get<std::array<int, 3>>();
    auto q = b.at("q").get<std::array<int, 3>>();
    x.p = {p[0], p[1], p[2]};
    x.q = {q[0], q[1], q[2]};
    x.owner = b.at("owner");
    h.bridges.push_back(x);
  }
  for (auto& t : j.at("two")) h.two.push_back({t.at("prov"), t.at("seam"), t.at("exceptional")});
  for (auto& t : j.at("three"))
    h.three.push_back({static_cast<FaceType>(type_of(t.at("face"))), t.at("corner"), t.at("prov")});
  for (auto& s : j.at("s_label")) h.s_label[{type_of(s.at(0)), s.at(1).get<int>()}] = s.at(2).get<int>();
  return h;
}

}  // namespace kx
