#include <algorithm>
#include <deque>
#include <functional>
#include <numeric>

#include "kx/parallelity.hpp"

namespace kx {

namespace {

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

std::vector<HandleRef> all_handles(const HandleStructure& h, bool with_three = true) {
  std::vector<HandleRef> out;
  for (int i = 0; i < static_cast<int>(h.zero.size()); ++i) out.push_back({0, i});
  for (int i = 0; i < static_cast<int>(h.one.size()); ++i) out.push_back({1, i});
  for (int i = 0; i < static_cast<int>(h.two.size()); ++i)
    if (!h.two[i].seam) out.push_back({2, i});
  if (with_three)
    for (int i = 0; i < static_cast<int>(h.three.size()); ++i) out.push_back({3, i});
  return out;
}

int handle_total(const HandleStructure& h) { return h.count(0) + h.count(1) + h.count(2) + h.count(3); }

// faces of each handle, and handles of each face (seams left out)
struct Incidence {
  std::map<HandleRef, std::vector<int>> faces;
  std::vector<std::vector<HandleRef>> owners;
  explicit Incidence(const Complex& k) : owners(k.faces.size()) {
    for (int f = 0; f < static_cast<int>(k.faces.size()); ++f) {
      if (k.faces[f].degenerate) continue;
      for (auto [i, id] : k.face_handles(f)) {
        if (i == 2 && k.h->two[id].seam) continue;
        faces[{i, id}].push_back(f);
        owners[f].push_back({i, id});
      }
    }
  }
  const std::vector<int>& of(HandleRef r) const {
    static const std::vector<int> none;
    auto it = faces.find(r);
    return it == faces.end() ? none : it->second;
  }
};

bool on_dM(const Complex& k, int f) { return k.boundary_face(f) && k.faces[f].three < 0; }
bool in_s(const Complex& k, int f) { return k.boundary_face(f) && k.faces[f].s >= 0; }

bool edges_connected(const Complex& k, const std::vector<int>& es) {
  if (es.empty()) return false;
  std::map<int, int> vix;
  for (int e : es)
    for (int v : {k.edges[e].u, k.edges[e].v}) vix.try_emplace(v, static_cast<int>(vix.size()));
  Dsu d(static_cast<int>(vix.size()));
  for (int e : es) d.unite(vix[k.edges[e].u], vix[k.edges[e].v]);
  int roots = 0;
  for (int i = 0; i < static_cast<int>(vix.size()); ++i) roots += d.find(i) == i;
  return roots == 1;
}

bool parallelity_test(const Complex& k, const std::vector<int>& fs, ParallelityInfo* info) {
  std::vector<int> s, rest;
  for (int f : fs) (in_s(k, f) ? s : rest).push_back(f);
  if (s.empty() || rest.empty()) return false;
  auto sc = face_components(k, s);
  if (sc.size() != 2) return false;
  for (auto& c : sc) {
    auto st = surface_stats(k, c);
    if (st.euler != 1 || st.boundary_circles != 1) return false;
  }
  auto st = surface_stats(k, rest);
  if (st.components != 1 || st.euler != 0 || st.boundary_circles != 2) return false;
  std::array<std::set<int>, 2> side_edges;
  for (int j = 0; j < 2; ++j)
    for (int f : sc[j])
      for (int e : k.faces[f].edges) side_edges[j].insert(e);
  // every vertical face is beta x I: it reaches both ends in one arc each
  for (int f : rest)
    for (int j = 0; j < 2; ++j) {
      std::vector<int> shared;
      for (int e : k.faces[f].edges)
        if (side_edges[j].count(e)) shared.push_back(e);
      if (!edges_connected(k, shared)) return false;
    }
  if (info) {
    std::sort(sc[0].begin(), sc[0].end());
    std::sort(sc[1].begin(), sc[1].end());
    if (sc[1] < sc[0]) std::swap(sc[0], sc[1]);
    info->sides = {sc[0], sc[1]};
  }
  return true;
}

std::vector<ParallelityInfo> flags_of(const Complex& k, const Incidence& inc) {
  auto hs = all_handles(*k.h, false);
  std::vector<char> ok(hs.size(), 0);
  std::vector<ParallelityInfo> info(hs.size());
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < static_cast<int>(hs.size()); ++i) {
    info[i].handle = hs[i];
    ok[i] = parallelity_test(k, inc.of(hs[i]), &info[i]);
  }
  std::vector<ParallelityInfo> out;
  for (std::size_t i = 0; i < hs.size(); ++i)
    if (ok[i]) out.push_back(info[i]);
  return out;
}

struct BuiltComponent {
  BundleComponent c;
  std::set<HandleRef> members;
};

std::vector<BuiltComponent> components_of(const Complex& k, const Incidence& inc, const std::vector<HandleRef>& set) {
  std::map<HandleRef, int> idx;
  for (auto& r : set) idx.try_emplace(r, static_cast<int>(idx.size()));
  Dsu d(static_cast<int>(idx.size()));
  for (auto& ow : inc.owners) {
    int first = -1;
    for (auto& r : ow) {
      auto it = idx.find(r);
      if (it == idx.end()) continue;
      if (first < 0) first = it->second;
      else d.unite(first, it->second);
    }
  }
  std::map<int, std::vector<HandleRef>> groups;
  for (auto& [r, i] : idx) groups[d.find(i)].push_back(r);
  std::vector<BuiltComponent> out;
  for (auto& [root, g] : groups) {
    BuiltComponent b;
    b.c.handles = g;
    b.members.insert(g.begin(), g.end());
    std::set<int> fs;
    for (auto& r : g)
      for (int f : inc.of(r)) fs.insert(f);
    for (int f : fs) {
      if (in_s(k, f)) {
        b.c.horizontal.push_back(f);
        continue;
      }
      bool outside = false;
      for (auto& r : inc.owners[f]) outside = outside || !b.members.count(r);
      if (outside || on_dM(k, f)) b.c.vertical.push_back(f);
    }
    out.push_back(std::move(b));
  }
  std::sort(out.begin(), out.end(),
            [](const BuiltComponent& a, const BuiltComponent& b) { return a.c.handles < b.c.handles; });
  return out;
}

void classify(const Complex& k, BundleComponent& c) {
  auto st = surface_stats(k, c.horizontal);
  if (c.horizontal.empty() || st.euler % 2 != 0 || st.boundary_circles % 2 != 0 || st.components > 2)
    throw ParallelityError("incompatible I-structures in a bundle component");
  c.base_euler = st.euler / 2;
  c.base_boundary = st.boundary_circles / 2;
  c.base_orientable = st.components == 2;
  const int x = c.base_euler, b = c.base_boundary;
  if (c.base_orientable) {
    c.base = x == 1 && b == 1 ? "disc" : x == 0 && b == 2 ? "annulus" : x == 0 && b == 0 ? "torus" : "other";
  } else {
    c.base = x == 0 && b == 1 ? "mobius" : x == 0 && b == 0 ? "klein" : "other";
  }
  auto vc = face_components(k, c.vertical);
  c.vertical_components = static_cast<int>(vc.size());
  c.vertical_free = 0;
  for (auto& comp : vc) {
    bool free = true;
    for (int f : comp) free = free && on_dM(k, f);
    c.vertical_free += free;
  }
}

nlohmann::json refs_json(const std::vector<HandleRef>& rs) {
  auto j = nlohmann::json::array();
  for (auto& r : rs) j.push_back({r.index, r.id});
  return j;
}

nlohmann::json clause_json(const ClauseReport& c) { return {{"ok", c.ok}, {"issues", c.issues}}; }

// ---- rebuilding after handles change ----

enum class Relabel { Remove, Merge, Attach };

// Recomputes S labels and 3-handle representatives of nh. origin gives the
// old corner of each new corner (-1 for new ones); keep3 lists the old
// 3-handles kept, in their new order.
void relabel(const HandleStructure& oh, const Complex& ok, HandleStructure& nh, const std::vector<int>& origin,
             Relabel mode, const std::vector<int>& keep3) {
  nh.s_label.clear();
  nh.three.clear();
  Complex nk(nh);
  std::map<int, int> three_new;
  for (int i = 0; i < static_cast<int>(keep3.size()); ++i) three_new[keep3[i]] = i;
  std::vector<int> rep(keep3.size(), -1);
  for (int f = 0; f < static_cast<int>(nk.faces.size()); ++f) {
    if (!nk.boundary_face(f)) continue;
    const auto& F = nk.faces[f];
    std::set<int> cons;
    bool fresh = false;
    for (int c : F.corners) {
      if (origin[c] < 0) {
        fresh = true;
        continue;
      }
      int g = ok.face_of(F.type, origin[c]);
      if (!ok.faces[g].degenerate) cons.insert(g);
    }
    int s = -1, three = -1;
    if (!fresh && cons.size() == 1 && ok.faces[*cons.begin()].corners.size() == F.corners.size()) {
      s = ok.faces[*cons.begin()].s;
      three = ok.faces[*cons.begin()].three;
    } else {
      std::set<int> labels;
      for (int g : cons) {
        if (ok.faces[g].three >= 0)
          throw ParallelityError("unsupported configuration: the sphere of a 3-handle would change");
        labels.insert(ok.faces[g].s);
      }
      switch (mode) {
        case Relabel::Remove:
          if (labels.count(-1))
            throw ParallelityError("unsupported configuration: new boundary meets the free boundary");
          s = labels.empty() ? 0 : *labels.begin();
          break;
        case Relabel::Merge:
        case Relabel::Attach:
          if (labels.size() > 1) throw ParallelityError("unsupported configuration: S and free boundary merge");
          s = labels.empty() ? (mode == Relabel::Merge ? 0 : -1) : *labels.begin();
          break;
      }
    }
    if (s >= 0) nh.s_label[{static_cast<int>(F.type), F.corners.front()}] = s;
    if (three >= 0) {
      auto it = three_new.find(three);
      if (it == three_new.end()) throw ParallelityError("boundary sphere kept but its 3-handle removed");
      if (rep[it->second] < 0) rep[it->second] = f;
    }
  }
  for (int i = 0; i < static_cast<int>(keep3.size()); ++i) {
    if (rep[i] < 0) throw ParallelityError("3-handle lost its boundary sphere");
    const auto& F = nk.faces[rep[i]];
    nh.three.push_back({F.type, F.corners.front(), oh.three[keep3[i]].prov});
  }
}

// Corner origins when 1-handle k' of nh is old 1-handle old_one[k'] with
// alphas old_alpha[k'] (-1 for a new alpha).
std::vector<int> corner_origin(const HandleStructure& oh, const HandleStructure& nh, const std::vector<int>& old_one,
                               const std::vector<std::vector<int>>& old_alpha) {
  std::vector<int> origin(nh.corner_count(), -1);
  for (int k = 0; k < static_cast<int>(nh.one.size()); ++k)
    for (int a = 0; a < nh.one[k].n(); ++a) {
      if (old_alpha[k][a] < 0) continue;
      for (int e = 0; e < 2; ++e)
        for (int s = 0; s < 2; ++s) origin[nh.corner(k, a, e, s)] = oh.corner(old_one[k], old_alpha[k][a], e, s);
    }
  return origin;
}

}  // namespace

bool is_parallelity_handle(const Complex& k, HandleRef r, ParallelityInfo* info) {
  if (r.index < 0 || r.index > 2) return false;
  if (r.index == 2 && k.h->two[r.id].seam) return false;
  if (info) info->handle = r;
  return parallelity_test(k, k.handle_faces(r.index, r.id), info);
}

std::vector<ParallelityInfo> find_parallelity_handles(const HandleStructure& h) {
  Complex k(h);
  Incidence inc(k);
  return flags_of(k, inc);
}

ParallelityBundle assemble_bundle(const HandleStructure& h) {
  Complex k(h);
  Incidence inc(k);
  std::vector<HandleRef> flagged;
  for (auto& p : flags_of(k, inc)) flagged.push_back(p.handle);
  ParallelityBundle b;
  for (auto& bc : components_of(k, inc, flagged)) {
    classify(k, bc.c);
    b.components.push_back(std::move(bc.c));
  }
  return b;
}

nlohmann::json ParallelityBundle::to_json() const {
  auto arr = nlohmann::json::array();
  for (auto& c : components)
    arr.push_back({{"base", c.base},
                   {"base_euler", c.base_euler},
                   {"base_boundary", c.base_boundary},
                   {"base_orientable", c.base_orientable},
                   {"handles", refs_json(c.handles)},
                   {"horizontal_faces", c.horizontal.size()},
                   {"vertical_faces", c.vertical.size()},
                   {"vertical_components", c.vertical_components},
                   {"vertical_free", c.vertical_free}});
  return {{"components", arr}};
}

bool GpbReport::ok() const {
  for (auto& c : clause)
    if (!c.ok) return false;
  return true;
}

nlohmann::json GpbReport::to_json() const {
  nlohmann::json j;
  const char* names[] = {"i", "ii", "iii", "iv", "v"};
  for (int i = 0; i < 5; ++i) j[names[i]] = clause_json(clause[i]);
  j["ok"] = ok();
  return j;
}

GpbReport verify_gpb(const HandleStructure& h, const std::vector<HandleRef>& candidate) {
  GpbReport r;
  auto fail = [&](int i, const std::string& m) {
    r.clause[i].ok = false;
    if (r.clause[i].issues.size() < 20) r.clause[i].issues.push_back(m);
  };
  auto name = [](HandleRef x) { return std::to_string(x.index) + "-handle " + std::to_string(x.id); };
  // (iii) a union of handles
  std::set<HandleRef> seen;
  for (auto& x : candidate) {
    bool valid = x.index >= 0 && x.index <= 3 && x.id >= 0;
    if (valid) {
      const int n = x.index == 0   ? static_cast<int>(h.zero.size())
                    : x.index == 1 ? static_cast<int>(h.one.size())
                    : x.index == 2 ? static_cast<int>(h.two.size())
                                   : static_cast<int>(h.three.size());
      valid = x.id < n && !(x.index == 2 && h.two[x.id].seam);
    }
    if (!valid) fail(2, "not a handle: (" + std::to_string(x.index) + "," + std::to_string(x.id) + ")");
    else if (!seen.insert(x).second) fail(2, name(x) + " listed twice");
  }
  if (candidate.empty()) fail(2, "empty candidate");
  if (!r.clause[2].ok) {
    for (int i : {0, 1, 3, 4}) fail(i, "candidate is not a set of handles");
    return r;
  }
  Complex k(h);
  Incidence inc(k);
  std::vector<HandleRef> members(seen.begin(), seen.end());
  auto comps = components_of(k, inc, members);
  int s_euler = 0, b_euler = 0;
  for (auto& bc : comps) {
    int chi = 0;
    for (auto& x : bc.c.handles) chi += x.index % 2 == 0 ? 1 : -1;
    b_euler += chi;
    if (bc.c.horizontal.empty()) {
      fail(1, "component without horizontal boundary");
      continue;
    }
    auto st = surface_stats(k, bc.c.horizontal);
    s_euler += st.euler;
    // (i) an I-bundle: the two ends cover the base twice
    if (st.euler != 2 * chi || st.components > 2 || st.boundary_circles % 2 != 0)
      fail(0, "component at " + name(bc.c.handles.front()) + " is not an I-bundle (chi " + std::to_string(chi) +
                  ", ends chi " + std::to_string(st.euler) + ")");
    // (iv) handles on the vertical boundary are parallelity handles
    std::set<int> vert(bc.c.vertical.begin(), bc.c.vertical.end());
    for (auto& x : bc.c.handles) {
      bool touches = false;
      for (int f : inc.of(x)) touches = touches || vert.count(f);
      if (touches && !parallelity_test(k, inc.of(x), nullptr))
        fail(3, name(x) + " meets the vertical boundary but is not a parallelity handle");
    }
  }
  // (ii) the ends are exactly the part in S
  if (s_euler != 2 * b_euler)
    fail(1, "chi(B n S) = " + std::to_string(s_euler) + " but 2 chi(B) = " + std::to_string(2 * b_euler));
  // (v) the complement inherits a handle structure
  try {
    remove_handles(h, members);
  } catch (const std::exception& e) {
    fail(4, e.what());
  }
  return r;
}

Removal remove_handles(const HandleStructure& h, const std::vector<HandleRef>& gone_list) {
  const std::string bad = "complement does not inherit a handle structure: ";
  std::array<std::vector<char>, 4> gone{std::vector<char>(h.zero.size()), std::vector<char>(h.one.size()),
                                        std::vector<char>(h.two.size()), std::vector<char>(h.three.size())};
  for (auto& r : gone_list) {
    if (r.index < 0 || r.index > 3 || r.id < 0 || r.id >= static_cast<int>(gone[r.index].size()))
      throw ParallelityError("stale handle reference");
    gone[r.index][r.id] = 1;
  }
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k)
    if (!gone[1][k] && (gone[0][h.one[k].end[0]] || gone[0][h.one[k].end[1]]))
      throw ParallelityError(bad + "1-handle " + std::to_string(k) + " loses a 0-handle");
  // 2-handles (and seams) and what they run over
  std::vector<int> over_gone(h.two.size(), 0), over_kept(h.two.size(), 0);
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k)
    for (int o : h.one[k].owner) ++(gone[1][k] ? over_gone : over_kept)[o];
  for (auto& b : h.bridges) ++(gone[0][b.zero] ? over_gone : over_kept)[b.owner];
  for (int t = 0; t < static_cast<int>(h.two.size()); ++t) {
    if (h.two[t].seam) {
      if (over_gone[t] && over_kept[t])
        throw ParallelityError("unsupported configuration: seam " + std::to_string(t) + " crosses the removed region");
      if (over_gone[t]) gone[2][t] = 1;
      continue;
    }
    if (!gone[2][t] && over_gone[t])
      throw ParallelityError(bad + "2-handle " + std::to_string(t) + " runs over removed handles");
  }
  Removal out;
  for (int i = 0; i < 4; ++i) {
    out.new_id[i].assign(gone[i].size(), -1);
    int n = 0;
    for (std::size_t j = 0; j < gone[i].size(); ++j)
      if (!gone[i][j]) out.new_id[i][j] = n++;
  }
  HandleStructure& H = out.h;
  for (std::size_t z = 0; z < h.zero.size(); ++z)
    if (!gone[0][z]) H.zero.push_back(h.zero[z]);
  for (std::size_t t = 0; t < h.two.size(); ++t)
    if (!gone[2][t]) H.two.push_back(h.two[t]);
  std::vector<int> old_one;
  std::vector<std::vector<int>> old_alpha;
  std::map<std::pair<int, int>, int> alpha_new;
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k) {
    if (gone[1][k]) continue;
    OneHandle o = h.one[k];
    o.owner.clear();
    std::vector<int> oa;
    for (int a = 0; a < h.one[k].n(); ++a) {
      int t = h.one[k].owner[a];
      if (gone[2][t]) continue;
      alpha_new[{k, a}] = o.n();
      o.owner.push_back(out.new_id[2][t]);
      oa.push_back(a);
    }
    if (o.owner.empty())
      throw ParallelityError("unsupported configuration: 1-handle " + std::to_string(k) + " keeps no 2-handle");
    for (int e = 0; e < 2; ++e) o.end[e] = out.new_id[0][o.end[e]];
    H.one.push_back(std::move(o));
    old_one.push_back(k);
    old_alpha.push_back(std::move(oa));
  }
  for (auto& b : h.bridges) {
    if (gone[0][b.zero] || gone[2][b.owner]) continue;
    auto port = [&](Port p) { return Port{out.new_id[1][p.k], alpha_new.at({p.k, p.a}), p.e}; };
    H.bridges.push_back({out.new_id[0][b.zero], port(b.p), port(b.q), out.new_id[2][b.owner]});
  }
  std::vector<int> keep3;
  for (std::size_t t = 0; t < h.three.size(); ++t)
    if (!gone[3][t]) keep3.push_back(static_cast<int>(t));
  Complex ok(h);
  relabel(h, ok, H, corner_origin(h, H, old_one, old_alpha), Relabel::Remove, keep3);
  auto rep = verify_convention(H);
  if (!rep.ok()) {
    std::string why;
    for (auto& c : rep.clause)
      for (auto& m : c.issues) why += (why.empty() ? "" : "; ") + m;
    throw ParallelityError(bad + why);
  }
  return out;
}

nlohmann::json AnnularMove::to_json() const {
  return {{"region", refs_json(region)},
          {"bundle", refs_json(bundle)},
          {"inner_faces", inner.size()},
          {"outer_faces", outer.size()},
          {"certificate", certificate}};
}

std::optional<AnnularMove> find_annular_move(const HandleStructure& h) {
  Complex k(h);
  Incidence inc(k);
  std::vector<HandleRef> flagged;
  for (auto& p : flags_of(k, inc)) flagged.push_back(p.handle);
  std::set<HandleRef> flag_set(flagged.begin(), flagged.end());
  std::vector<int> dM;
  for (int f = 0; f < static_cast<int>(k.faces.size()); ++f)
    if (on_dM(k, f)) dM.push_back(f);
  auto dM_comps = face_components(k, dM);
  std::vector<int> dM_comp(k.faces.size(), -1);
  for (int i = 0; i < static_cast<int>(dM_comps.size()); ++i)
    for (int f : dM_comps[i]) dM_comp[f] = i;

  std::optional<AnnularMove> best;
  for (auto& bc : components_of(k, inc, flagged)) {
    classify(k, bc.c);
    for (auto& A : face_components(k, bc.c.vertical)) {
      bool interior = true;
      for (int f : A) interior = interior && !on_dM(k, f);
      auto st = surface_stats(k, A);
      if (!interior || st.euler != 0 || st.boundary_circles != 2) continue;
      std::set<int> aset(A.begin(), A.end());
      // the side of A holding the bundle component
      std::set<HandleRef> P(bc.members.begin(), bc.members.end());
      std::deque<HandleRef> q(bc.members.begin(), bc.members.end());
      while (!q.empty()) {
        auto x = q.front();
        q.pop_front();
        for (int f : inc.of(x)) {
          if (aset.count(f)) continue;
          for (auto& y : inc.owners[f])
            if (P.insert(y).second) q.push_back(y);
        }
      }
      bool separates = true;
      for (int f : A) {
        int in = 0;
        for (auto& y : inc.owners[f]) in += P.count(y);
        separates = separates && in < static_cast<int>(inc.owners[f].size());
      }
      if (!separates) continue;
      std::vector<int> sf;
      std::set<int> freef;
      bool flags_inside = true;
      for (auto& x : P)
        for (int f : inc.of(x)) {
          for (auto& y : inc.owners[f]) flags_inside = flags_inside && (!flag_set.count(y) || P.count(y));
          if (!on_dM(k, f)) continue;
          if (k.faces[f].s >= 0) sf.push_back(f);
          else freef.insert(f);
        }
      if (!flags_inside) continue;
      std::sort(sf.begin(), sf.end());
      sf.erase(std::unique(sf.begin(), sf.end()), sf.end());
      auto ss = surface_stats(k, sf);
      if (sf.empty() || ss.components != 1 || ss.euler != 0 || ss.boundary_circles != 2) continue;
      // free boundary inside P must be whole boundary components
      bool whole = true;
      for (int f : freef)
        for (int g : dM_comps[dM_comp[f]]) whole = whole && freef.count(g);
      if (!whole) continue;
      AnnularMove m;
      m.region.assign(P.begin(), P.end());
      m.bundle = bc.c.handles;
      m.inner = A;
      m.outer = sf;
      m.certificate = P.size() == bc.members.size() ? "parallelity-region" : "enclosed";
      try {
        remove_handles(h, m.region);
      } catch (const ParallelityError&) {
        continue;
      }
      if (!best || m.region.size() < best->region.size() ||
          (m.region.size() == best->region.size() && m.region < best->region))
        best = std::move(m);
    }
  }
  return best;
}

Removal apply_annular_move(const HandleStructure& h, const AnnularMove& m) {
  if (m.region.empty()) throw ParallelityError("empty annular move");
  for (auto& r : m.region) {
    bool ok = r.id >= 0 && ((r.index == 0 && r.id < static_cast<int>(h.zero.size())) ||
                            (r.index == 1 && r.id < static_cast<int>(h.one.size())) ||
                            (r.index == 2 && r.id < static_cast<int>(h.two.size()) && !h.two[r.id].seam) ||
                            (r.index == 3 && r.id < static_cast<int>(h.three.size())));
    if (!ok) throw ParallelityError("stale annular move");
  }
  return remove_handles(h, m.region);
}

AnnularLog simplify_annular(const HandleStructure& h) {
  AnnularLog log;
  log.result = h;
  for (int step = 0;; ++step) {
    auto m = find_annular_move(log.result);
    if (!m) break;
    std::vector<HandleRef> before;
    for (auto& p : find_parallelity_handles(log.result)) before.push_back(p.handle);
    auto r = apply_annular_move(log.result, *m);
    std::set<HandleRef> after;
    for (auto& p : find_parallelity_handles(r.h)) after.insert(p.handle);
    bool lemma = true;
    for (auto& x : before) {
      int nid = r.new_id[x.index][x.id];
      if (nid >= 0 && !after.count({x.index, nid})) lemma = false;
    }
    const int n0 = handle_total(log.result), n1 = handle_total(r.h);
    const int e0 = log.result.euler(), e1 = r.h.euler();
    if (n1 >= n0) throw ParallelityError("annular move did not remove handles");
    log.lemma_ok = log.lemma_ok && lemma;
    log.steps.push_back({{"step", step},
                         {"move", m->to_json()},
                         {"handles_before", n0},
                         {"handles_after", n1},
                         {"euler_before", e0},
                         {"euler_after", e1},
                         {"parallelity_kept", lemma}});
    log.result = std::move(r.h);
  }
  return log;
}

HandleStructure replace_disc_bundles(const HandleStructure& h) {
  auto bundle = assemble_bundle(h);
  if (bundle.components.empty()) return h;
  const std::string unsupported = "unsupported configuration: ";
  std::vector<int> comp0(h.zero.size(), -1), comp1(h.one.size(), -1), comp2(h.two.size(), -1);
  for (int i = 0; i < static_cast<int>(bundle.components.size()); ++i) {
    const auto& c = bundle.components[i];
    if (c.base != "disc") throw ParallelityError("non-disc bundle component (" + c.base + ")");
    for (auto& r : c.handles) (r.index == 0 ? comp0 : r.index == 1 ? comp1 : comp2)[r.id] = i;
  }
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k) {
    for (int e = 0; e < 2; ++e)
      if (comp0[h.one[k].end[e]] >= 0 && comp1[k] < 0)
        throw ParallelityError(unsupported + "bundle 0-handle meets an outside 1-handle");
    if (comp1[k] < 0) continue;
    for (int o : h.one[k].owner)
      if (comp2[o] < 0) throw ParallelityError(unsupported + "bundle 1-handle meets an outside 2-handle");
    for (int e = 0; e < 2; ++e)
      if (comp0[h.one[k].end[e]] < 0 && h.one[k].n() != 2)
        throw ParallelityError(unsupported + "bundle 1-handle island with more than two strips");
  }
  HandleStructure H;
  std::vector<int> new0(h.zero.size(), -1), new1(h.one.size(), -1), new2(h.two.size(), -1);
  for (std::size_t z = 0; z < h.zero.size(); ++z)
    if (comp0[z] < 0) {
      new0[z] = static_cast<int>(H.zero.size());
      H.zero.push_back(h.zero[z]);
    }
  for (std::size_t t = 0; t < h.two.size(); ++t)
    if (comp2[t] < 0) {
      new2[t] = static_cast<int>(H.two.size());
      H.two.push_back(h.two[t]);
    }
  const int first_new = static_cast<int>(H.two.size());
  for (std::size_t i = 0; i < bundle.components.size(); ++i)
    H.two.push_back({"bundle:" + std::to_string(i), false, false});
  auto owner_new = [&](int t) { return comp2[t] >= 0 ? first_new + comp2[t] : new2[t]; };
  std::vector<int> old_one;
  std::vector<std::vector<int>> old_alpha;
  for (int k = 0; k < static_cast<int>(h.one.size()); ++k) {
    if (comp1[k] >= 0) continue;
    new1[k] = static_cast<int>(H.one.size());
    OneHandle o = h.one[k];
    for (auto& t : o.owner) t = owner_new(t);
    for (int e = 0; e < 2; ++e) o.end[e] = new0[o.end[e]];
    H.one.push_back(std::move(o));
    old_one.push_back(k);
    std::vector<int> oa(h.one[k].n());
    std::iota(oa.begin(), oa.end(), 0);
    old_alpha.push_back(std::move(oa));
  }
  std::map<Port, std::pair<int, Port>> across;  // port -> (bridge, partner)
  for (int b = 0; b < static_cast<int>(h.bridges.size()); ++b) {
    across[h.bridges[b].p] = {b, h.bridges[b].q};
    across[h.bridges[b].q] = {b, h.bridges[b].p};
  }
  auto moved = [&](Port p) { return Port{new1[p.k], p.a, p.e}; };
  std::set<Port> done;
  for (auto& b : h.bridges) {
    if (comp0[b.zero] >= 0) continue;
    if (comp2[b.owner] < 0) {
      H.bridges.push_back({new0[b.zero], moved(b.p), moved(b.q), new2[b.owner]});
      continue;
    }
    // chains of bundle bridges and islands between two outside strips
    for (Port start : {b.p, b.q}) {
      if (comp1[start.k] >= 0 || done.count(start)) continue;
      Port q = across.at(start).second;
      while (comp1[q.k] >= 0) {
        Port next{q.k, 1 - q.a, q.e};
        q = across.at(next).second;
      }
      done.insert(start);
      done.insert(q);
      H.bridges.push_back({new0[b.zero], moved(start), moved(q), owner_new(b.owner)});
    }
  }
  std::vector<int> keep3(h.three.size());
  std::iota(keep3.begin(), keep3.end(), 0);
  Complex ok(h);
  relabel(h, ok, H, corner_origin(h, H, old_one, old_alpha), Relabel::Merge, keep3);
  auto rep = verify_convention(H);
  if (!rep.ok()) throw ParallelityError("replacing bundles broke the handle convention: " + rep.to_json().dump());
  if (H.euler() != h.euler()) throw ParallelityError("replacing bundles changed the Euler characteristic");
  return H;
}

SolidTorusReport attach_solid_torus(const HandleStructure& h) {
  Complex ok(h);
  auto find_one = [&](const std::string& prov) {
    for (int k = 0; k < static_cast<int>(h.one.size()); ++k)
      if (h.one[k].exceptional && h.one[k].prov == prov) return k;
    throw ParallelityError("exceptional remnants absent");
  };
  const int U = find_one("exceptional:up"), D = find_one("exceptional:down");
  auto free_gap = [&](int k) {
    int g = -1;
    for (int a = 0; a < h.one[k].n(); ++a) {
      int f = ok.face_of(FaceType::Gap, h.corner(k, a, 0, 1));
      if (on_dM(ok, f) && ok.faces[f].s < 0) {
        if (g >= 0) throw ParallelityError("exceptional 1-handle with several free gaps");
        g = a;
      }
    }
    if (g < 0) throw ParallelityError("exceptional remnants absent");
    return g;
  };
  const int gU = free_gap(U), gD = free_gap(D);
  // end of D at the 0-handle of each end of U
  std::array<int, 2> eD{};
  for (int e = 0; e < 2; ++e) {
    eD[e] = h.one[D].end[0] == h.one[U].end[e] ? 0 : h.one[D].end[1] == h.one[U].end[e] ? 1 : -1;
    if (eD[e] < 0) throw ParallelityError("exceptional 1-handles do not share their 0-handles");
    int ru = ok.face_of(FaceType::Region, h.corner(U, gU, e, 1));
    int rd = ok.face_of(FaceType::Region, h.corner(D, gD, eD[e], 1));
    if (ru != rd) throw ParallelityError("free gaps of the exceptional 1-handles lie in different regions");
  }
  HandleStructure H = h;
  const int M = static_cast<int>(H.two.size());
  H.two.push_back({"meridian", false, true});
  const int pU = gU + 1, pD = gD + 1;  // new strip right after the free gap
  auto shift = [&](Port& p) {
    if (p.k == U && p.a >= pU) ++p.a;
    if (p.k == D && p.a >= pD) ++p.a;
  };
  for (auto& b : H.bridges) {
    shift(b.p);
    shift(b.q);
  }
  H.one[U].owner.insert(H.one[U].owner.begin() + pU, M);
  H.one[D].owner.insert(H.one[D].owner.begin() + pD, M);
  for (int e = 0; e < 2; ++e) H.bridges.push_back({h.one[U].end[e], Port{U, pU, e}, Port{D, pD, eD[e]}, M});
  std::vector<int> old_one(H.one.size());
  std::iota(old_one.begin(), old_one.end(), 0);
  std::vector<std::vector<int>> old_alpha;
  for (int k = 0; k < static_cast<int>(H.one.size()); ++k) {
    std::vector<int> oa(h.one[k].n());
    std::iota(oa.begin(), oa.end(), 0);
    if (k == U) oa.insert(oa.begin() + pU, -1);
    if (k == D) oa.insert(oa.begin() + pD, -1);
    old_alpha.push_back(std::move(oa));
  }
  std::vector<int> keep3(h.three.size());
  std::iota(keep3.begin(), keep3.end(), 0);
  relabel(h, ok, H, corner_origin(h, H, old_one, old_alpha), Relabel::Attach, keep3);
  // fill the sphere left by the meridian disc
  auto cen = census(H);
  int sphere = -1;
  for (int i = 0; i < static_cast<int>(cen.boundary.size()); ++i) {
    const auto& b = cen.boundary[i];
    if (b.three < 0 && b.euler == 2 && !b.has_s) {
      if (sphere >= 0) throw ParallelityError("several free spheres after the meridian disc");
      sphere = i;
    }
  }
  if (sphere < 0) throw ParallelityError("meridian disc did not leave a free sphere");
  {
    Complex nk(H);
    const auto& F = nk.faces[cen.boundary[sphere].faces.front()];
    H.three.push_back({F.type, F.corners.front(), "filling"});
  }
  SolidTorusReport rep;
  std::vector<int> islands(H.zero.size(), 0);
  for (auto& o : H.one) {
    ++islands[o.end[0]];
    ++islands[o.end[1]];
    int n = 0;
    for (int t : o.owner) n += H.two[t].seam ? 0 : 1;
    rep.max_alphas = std::max(rep.max_alphas, n);
  }
  for (int n : islands) rep.max_islands = std::max(rep.max_islands, n);
  auto after = census(H);
  rep.hypotheses_ok = rep.max_islands <= 4 && rep.max_alphas <= 3 && H.euler() == 0 &&
                      after.single_torus_boundary() && verify_convention(H).ok();
  rep.h = std::move(H);
  return rep;
}

// ---- boundary curves ----

namespace {

// Regions of f as vertices, gap strips of f as edges; caps of f give the
// relations of the mod-2 homology.
struct CurveGraph {
  std::map<int, int> vix;                  // region face -> vertex
  std::vector<int> vface;                  // vertex -> region face
  std::vector<std::array<int, 3>> edges;   // (u, v, gap face)
  std::map<int, int> eix;                  // gap face -> edge
  std::vector<std::vector<char>> relations;  // reduced row echelon rows
  std::vector<int> pivot;
};

int corner_end(int c) { return (c / 2) % 2; }

CurveGraph curve_graph(const Complex& k, const std::vector<int>& f) {
  CurveGraph g;
  std::set<int> fset(f.begin(), f.end());
  for (int x : f)
    if (k.faces[x].type == FaceType::Region && !k.faces[x].degenerate) {
      g.vix[x] = static_cast<int>(g.vface.size());
      g.vface.push_back(x);
    }
  for (int x : f) {
    const auto& F = k.faces[x];
    if (F.type != FaceType::Gap || F.degenerate) continue;
    std::array<int, 2> r{-1, -1};
    for (int c : F.corners) r[corner_end(c)] = k.face_of(FaceType::Region, c);
    if (!g.vix.count(r[0]) || !g.vix.count(r[1])) continue;
    g.eix[x] = static_cast<int>(g.edges.size());
    g.edges.push_back({g.vix[r[0]], g.vix[r[1]], x});
  }
  const int E = static_cast<int>(g.edges.size());
  std::vector<std::vector<char>> rows;
  for (int x : f) {
    const auto& F = k.faces[x];
    if (F.type != FaceType::Cap || F.degenerate) continue;
    std::vector<char> row(E, 0);
    bool inside = true;
    for (int c : F.corners) inside = inside && fset.count(k.face_of(FaceType::Region, c));
    for (int e : F.edges) {
      if (k.edges[e].type != 'A') continue;
      for (int y : k.edges[e].faces)
        if (k.faces[y].type == FaceType::Gap) {
          auto it = g.eix.find(y);
          if (it == g.eix.end()) inside = false;
          else row[it->second] ^= 1;
        }
    }
    if (inside) rows.push_back(std::move(row));
  }
  // reduced row echelon form over GF(2)
  int r = 0;
  for (int col = 0; col < E && r < static_cast<int>(rows.size()); ++col) {
    int p = -1;
    for (int i = r; i < static_cast<int>(rows.size()); ++i)
      if (rows[i][col]) {
        p = i;
        break;
      }
    if (p < 0) continue;
    std::swap(rows[r], rows[p]);
    for (int i = 0; i < static_cast<int>(rows.size()); ++i)
      if (i != r && rows[i][col])
        for (int j = 0; j < E; ++j) rows[i][j] ^= rows[r][j];
    g.pivot.push_back(col);
    ++r;
  }
  rows.resize(r);
  g.relations = std::move(rows);
  return g;
}

std::vector<char> reduce(const CurveGraph& g, std::vector<char> v) {
  for (std::size_t i = 0; i < g.relations.size(); ++i)
    if (v[g.pivot[i]])
      for (std::size_t j = 0; j < v.size(); ++j) v[j] ^= g.relations[i][j];
  return v;
}

std::vector<char> class_of(const Complex& k, const CurveGraph& g, const BoundaryCurve& c) {
  if (c.regions.size() != c.gaps.size() || c.regions.empty()) throw ParallelityError("malformed boundary curve");
  std::vector<char> v(g.edges.size(), 0);
  const int n = static_cast<int>(c.gaps.size());
  for (int i = 0; i < n; ++i) {
    auto it = g.eix.find(c.gaps[i]);
    if (it == g.eix.end()) throw ParallelityError("curve leaves the subsurface");
    auto [u, w, x] = g.edges[it->second];
    auto a = g.vix.find(c.regions[i]), b = g.vix.find(c.regions[(i + 1) % n]);
    if (a == g.vix.end() || b == g.vix.end()) throw ParallelityError("curve leaves the subsurface");
    if (!((u == a->second && w == b->second) || (w == a->second && u == b->second)))
      throw ParallelityError("curve gap does not join its regions");
    v[it->second] ^= 1;
  }
  (void)k;
  return reduce(g, v);
}

}  // namespace

std::vector<char> mod2_class(const Complex& k, const std::vector<int>& f, const BoundaryCurve& c) {
  return class_of(k, curve_graph(k, f), c);
}

std::vector<BoundaryCurve> curve_basis(const Complex& k, const std::vector<int>& f) {
  auto g = curve_graph(k, f);
  const int V = static_cast<int>(g.vface.size());
  std::vector<std::vector<std::pair<int, int>>> adj(V);  // (vertex, edge)
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    adj[g.edges[e][0]].push_back({g.edges[e][1], e});
    if (g.edges[e][0] != g.edges[e][1]) adj[g.edges[e][1]].push_back({g.edges[e][0], e});
  }
  std::vector<int> parent(V, -1), pedge(V, -1), depth(V, -1);
  std::vector<char> tree(g.edges.size(), 0);
  for (int s = 0; s < V; ++s) {
    if (depth[s] >= 0) continue;
    depth[s] = 0;
    std::deque<int> q{s};
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (auto [w, e] : adj[u])
        if (depth[w] < 0) {
          depth[w] = depth[u] + 1;
          parent[w] = u;
          pedge[w] = e;
          tree[e] = 1;
          q.push_back(w);
        }
    }
  }
  std::vector<BoundaryCurve> out;
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    if (tree[e]) continue;
    int u = g.edges[e][0], w = g.edges[e][1];
    // path u -> lca <- w
    std::vector<int> up, wp, ue, we;
    int a = u, b = w;
    up.push_back(a);
    wp.push_back(b);
    while (a != b) {
      if (depth[a] >= depth[b]) {
        ue.push_back(pedge[a]);
        a = parent[a];
        up.push_back(a);
      } else {
        we.push_back(pedge[b]);
        b = parent[b];
        wp.push_back(b);
      }
    }
    // cycle: w -> ... -> lca -> ... -> u, then e back to w
    BoundaryCurve c;
    std::vector<int> verts(wp.begin(), wp.end());
    std::vector<int> eds(we.begin(), we.end());
    for (int i = static_cast<int>(up.size()) - 2; i >= 0; --i) {
      verts.push_back(up[i]);
      eds.push_back(ue[i]);
    }
    eds.push_back(e);
    for (int v : verts) c.regions.push_back(g.vface[v]);
    for (int x : eds) c.gaps.push_back(g.edges[x][2]);
    out.push_back(std::move(c));
  }
  return out;
}

BoundaryCurve straighten_boundary_curve(const Complex& k, const std::vector<int>& f, const BoundaryCurve& target) {
  if (f.empty()) throw ParallelityError("empty boundary subsurface");
  auto g = curve_graph(k, f);
  auto want = class_of(k, g, target);
  const int V = static_cast<int>(g.vface.size());
  std::vector<std::vector<std::pair<int, int>>> adj(V);
  for (int e = 0; e < static_cast<int>(g.edges.size()); ++e) {
    adj[g.edges[e][0]].push_back({g.edges[e][1], e});
    if (g.edges[e][0] != g.edges[e][1]) adj[g.edges[e][1]].push_back({g.edges[e][0], e});
  }
  std::int64_t budget = 20000000;
  std::vector<int> path, pedges;
  std::vector<char> onpath(V, 0);
  std::optional<BoundaryCurve> found;
  // simple cycles by increasing length; s is the least vertex on the cycle
  std::function<bool(int, int, int)> dfs = [&](int s, int u, int left) -> bool {
    if (--budget < 0) return true;
    for (auto [w, e] : adj[u]) {
      if (!pedges.empty() && e == pedges.back()) continue;
      if (w == s && left == 1) {
        std::vector<char> v(g.edges.size(), 0);
        for (int x : pedges) v[x] ^= 1;
        v[e] ^= 1;
        if (reduce(g, v) == want) {
          BoundaryCurve c;
          for (int x : path) c.regions.push_back(g.vface[x]);
          for (int x : pedges) c.gaps.push_back(g.edges[x][2]);
          c.gaps.push_back(g.edges[e][2]);
          found = std::move(c);
          return true;
        }
        continue;
      }
      if (left == 1 || w <= s || onpath[w]) continue;
      onpath[w] = 1;
      path.push_back(w);
      pedges.push_back(e);
      bool stop = dfs(s, w, left - 1);
      path.pop_back();
      pedges.pop_back();
      onpath[w] = 0;
      if (stop) return true;
    }
    return false;
  };
  for (int len = 1; len <= V && !found && budget >= 0; ++len)
    for (int s = 0; s < V && !found && budget >= 0; ++s) {
      path = {s};
      pedges.clear();
      onpath[s] = 1;
      dfs(s, s, len);
      onpath[s] = 0;
    }
  if (!found) {
    if (budget < 0) throw ParallelityError("curve search budget exhausted");
    throw ParallelityError("class not realizable in the subsurface");
  }
  return *found;
}

}  // namespace kx
