#include "kx/normal.hpp"

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace kx {

namespace {

bool seam_bridge(const HandleStructure& h, int b) {
  int o = h.bridges[b].owner;
  return o >= 0 && o < static_cast<int>(h.two.size()) && h.two[o].seam;
}

struct Dsu {
  std::vector<int> p;
  explicit Dsu(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  void unite(int a, int b) { p[find(a)] = find(b); }
};

// Port of bridge b on island (k,e).
Port port_on(const Bridge& br, int k, int e) {
  if (br.p.k == k && br.p.e == e) return br.p;
  return br.q;
}

}  // namespace

std::vector<DiscType> enumerate_disc_types(const HandleStructure& h) {
  std::vector<DiscType> out;
  for (int z = 0; z < static_cast<int>(h.zero.size()); ++z) {
    // islands of z, ordered by site
    std::vector<std::pair<int, int>> isl;
    for (int k = 0; k < static_cast<int>(h.one.size()); ++k)
      for (int e = 0; e < 2; ++e)
        if (h.one[k].end[e] == z) isl.push_back({k, e});
    std::sort(isl.begin(), isl.end(), [&](auto x, auto y) {
      return std::pair(h.one[x.first].site[x.second], x) < std::pair(h.one[y.first].site[y.second], y);
    });
    std::map<std::pair<int, int>, int> iid;
    for (int i = 0; i < static_cast<int>(isl.size()); ++i) iid[isl[i]] = i;
    struct E {
      int u, v, b;
    };
    std::vector<E> es;
    for (int b = 0; b < static_cast<int>(h.bridges.size()); ++b) {
      const auto& br = h.bridges[b];
      if (br.zero != z || seam_bridge(h, b)) continue;
      es.push_back({iid.at({br.p.k, br.p.e}), iid.at({br.q.k, br.q.e}), b});
    }
    const int n = static_cast<int>(isl.size());
    std::vector<std::vector<int>> inc(n);
    for (int i = 0; i < static_cast<int>(es.size()); ++i) {
      inc[es[i].u].push_back(i);
      if (es[i].v != es[i].u) inc[es[i].v].push_back(i);
    }
    // simple cycles: start at their smallest vertex
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> cycles;  // edge indices in order
    auto record = [&](const std::vector<int>& cyc) {
      std::vector<int> key;
      for (int i : cyc) key.push_back(es[i].b);
      std::sort(key.begin(), key.end());
      if (seen.insert(key).second) cycles.push_back(cyc);
    };
    for (int s = 0; s < n; ++s) {
      for (int i : inc[s])
        if (es[i].u == es[i].v) record({i});
      std::vector<int> path;
      std::vector<char> on(n, 0);
      std::function<void(int)> dfs = [&](int v) {
        for (int i : inc[v]) {
          if (es[i].u == es[i].v) continue;
          if (!path.empty() && path.back() == i) continue;
          int w = es[i].u == v ? es[i].v : es[i].u;
          if (w == s && !path.empty()) {
            path.push_back(i);
            record(path);
            path.pop_back();
          } else if (w > s && !on[w]) {
            on[w] = 1;
            path.push_back(i);
            dfs(w);
            path.pop_back();
            on[w] = 0;
          }
        }
      };
      on[s] = 1;
      dfs(s);
    }
    std::vector<DiscType> local;
    for (auto& cyc : cycles) {
      DiscType t;
      t.zero = z;
      const int m = static_cast<int>(cyc.size());
      for (int i : cyc) t.bridges.push_back(es[i].b);
      if (m == 1) {
        const auto& br = h.bridges[t.bridges[0]];
        t.arcs.push_back({br.p.k, br.p.e, std::min(br.p.a, br.q.a), std::max(br.p.a, br.q.a)});
      } else {
        // vertex shared by consecutive edges i and i+1
        for (int i = 0; i < m; ++i) {
          const auto& e1 = es[cyc[i]];
          const auto& e2 = es[cyc[(i + 1) % m]];
          int v = (e1.u == e2.u || e1.u == e2.v) ? e1.u : e1.v;
          if (m == 2) v = (i == 0) ? es[cyc[0]].u : es[cyc[0]].v;
          auto [k, e] = isl[v];
          Port a = port_on(h.bridges[e1.b], k, e), b = port_on(h.bridges[e2.b], k, e);
          if (m == 2) {
            // both bridges join the same two islands
            const auto& b1 = h.bridges[e1.b];
            const auto& b2 = h.bridges[e2.b];
            a = (b1.p.k == k && b1.p.e == e) ? b1.p : b1.q;
            b = (b2.p.k == k && b2.p.e == e) ? b2.p : b2.q;
          }
          t.arcs.push_back({k, e, std::min(a.a, b.a), std::max(a.a, b.a)});
        }
      }
      std::sort(t.arcs.begin(), t.arcs.end());
      for (int b : t.bridges) {
        t.ports.push_back(h.bridges[b].p);
        t.ports.push_back(h.bridges[b].q);
      }
      std::sort(t.ports.begin(), t.ports.end());
      t.kind = m == 3 ? "triangle" : m == 4 ? "square" : "polygon";
      local.push_back(std::move(t));
    }
    std::sort(local.begin(), local.end(), [](const DiscType& a, const DiscType& b) {
      auto ka = std::pair(a.bridges.size(), a.ports), kb = std::pair(b.bridges.size(), b.ports);
      return ka < kb;
    });
    // triangle index: the island it encircles; others numbered in order
    std::map<std::string, int> next;
    for (auto& t : local) {
      if (t.kind == "triangle" && n == 4) {
        std::set<int> used;
        for (auto& a : t.arcs) used.insert(iid.at({a.k, a.e}));
        for (int v = 0; v < n; ++v)
          if (!used.count(v)) t.index = v + 1;
      } else {
        t.index = ++next[t.kind];
      }
      t.id = static_cast<int>(out.size());
      out.push_back(std::move(t));
    }
  }
  return out;
}

bool compatible(const HandleStructure& h, const DiscType& s, const DiscType& t) {
  if (s.zero != t.zero) return true;
  if (s.ports == t.ports) return true;
  const int N = h.corner_count();
  auto side_check = [&](const DiscType& c1, const DiscType& c2) {
    Dsu d(N);
    std::set<Port> on1(c1.ports.begin(), c1.ports.end());
    for (int k = 0; k < static_cast<int>(h.one.size()); ++k) {
      int n = h.one[k].n();
      for (int e = 0; e < 2; ++e) {
        if (h.one[k].end[e] != c1.zero) continue;
        for (int a = 0; a < n; ++a) {
          d.unite(h.corner(k, a, e, 1), h.corner(k, (a + 1) % n, e, 0));
          if (!on1.count(Port{k, a, e})) d.unite(h.corner(k, a, e, 0), h.corner(k, a, e, 1));
        }
      }
    }
    for (auto& br : h.bridges) {
      if (br.zero != c1.zero) continue;
      d.unite(h.corner(br.p.k, br.p.a, br.p.e, port_last_s(br.p.e)),
              h.corner(br.q.k, br.q.a, br.q.e, port_first_s(br.q.e)));
      d.unite(h.corner(br.p.k, br.p.a, br.p.e, port_first_s(br.p.e)),
              h.corner(br.q.k, br.q.a, br.q.e, port_last_s(br.q.e)));
    }
    int side = -1;
    for (auto& p : c2.ports) {
      if (on1.count(p)) continue;
      int r = d.find(h.corner(p.k, p.a, p.e, 0));
      if (side < 0) side = r;
      else if (side != r) return false;
    }
    return true;
  };
  return side_check(s, t) && side_check(t, s);
}

std::vector<Equation> matching_equations(const HandleStructure&, const std::vector<DiscType>& types) {
  std::vector<Equation> out;
  // arcs through each 1-handle
  std::map<std::tuple<int, int, int>, std::map<int, int>> arc;  // (k,a,b) -> type -> coeff
  std::map<std::pair<int, int>, std::map<int, int>> pts;      // (k,a) -> type -> coeff
  for (auto& t : types) {
    for (auto& a : t.arcs) {
      int sgn = a.e == 0 ? 1 : -1;
      arc[{a.k, a.a, a.b}][t.id] += sgn;
    }
    for (auto& p : t.ports) pts[{p.k, p.a}][t.id] += p.e == 0 ? 1 : -1;
  }
  auto emit = [&](const std::map<int, int>& m, const std::string& origin) {
    Equation q;
    for (auto [t, c] : m)
      if (c != 0) q.terms.push_back({t, c});
    if (!q.terms.empty()) {
      q.origin = origin;
      out.push_back(std::move(q));
    }
  };
  for (auto& [key, m] : arc) {
    auto [k, a, b] = key;
    emit(m, "arc:" + std::to_string(k) + ":" + std::to_string(a) + "-" + std::to_string(b));
  }
  for (auto& [key, m] : pts)
    emit(m, "alpha:" + std::to_string(key.first) + ":" + std::to_string(key.second));
  return out;
}

NormalSystem::NormalSystem(const HandleStructure& hs) : h(&hs) {
  types = enumerate_disc_types(hs);
  types_at.assign(hs.zero.size(), {});
  for (auto& t : types) types_at[t.zero].push_back(t.id);
  compat.assign(types.size(), std::vector<char>(types.size(), 1));
  for (auto& v : types_at)
    for (int i : v)
      for (int j : v)
        if (i < j) compat[i][j] = compat[j][i] = compatible(hs, types[i], types[j]) ? 1 : 0;
  equations = matching_equations(hs, types);
}

bool NormalSystem::satisfies(const Coords& x) const {
  if (static_cast<int>(x.size()) != size()) return false;
  for (auto& q : equations) {
    std::int64_t s = 0;
    for (auto [t, c] : q.terms) s += c * x[t];
    if (s != 0) return false;
  }
  return true;
}

bool NormalSystem::admissible(const Coords& x, std::string* why) const {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  if (static_cast<int>(x.size()) != size()) return fail("coordinate vector has the wrong length");
  for (auto v : x)
    if (v < 0) return fail("negative coordinate");
  if (!satisfies(x)) return fail("matching equations fail");
  for (auto& v : types_at)
    for (int i : v)
      for (int j : v)
        if (i < j && x[i] && x[j] && !compat[i][j])
          return fail("disc types " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
  // arcs through a 1-handle may not cross
  std::map<int, std::set<std::pair<int, int>>> fam;
  for (auto& t : types)
    if (x[t.id])
      for (auto& a : t.arcs) fam[a.k].insert({a.a, a.b});
  for (auto& [k, s] : fam)
    for (auto [a, b] : s)
      for (auto [c, d] : s) {
        bool in1 = a < c && c < b, in2 = a < d && d < b;
        if ((c != a && c != b && d != a && d != b) && in1 != in2)
          return fail("arcs cross in 1-handle " + std::to_string(k));
      }
  return true;
}

std::int64_t NormalSystem::weight(const Coords& x) const {
  return std::accumulate(x.begin(), x.end(), std::int64_t{0});
}

int NormalSystem::type_of(int zero, std::vector<int> bridges) const {
  std::sort(bridges.begin(), bridges.end());
  for (int id : types_at.at(zero)) {
    auto b = types[id].bridges;
    std::sort(b.begin(), b.end());
    if (b == bridges) return id;
  }
  return -1;
}

Coords NormalSystem::link(int which) const {
  Complex k(*h);
  Coords x(types.size(), 0);
  std::vector<int> bridge_of(k.ncorner, -1);
  for (int b = 0; b < static_cast<int>(h->bridges.size()); ++b) {
    const auto& br = h->bridges[b];
    for (auto p : {br.p, br.q})
      for (int s = 0; s < 2; ++s) bridge_of[h->corner(p.k, p.a, p.e, s)] = b;
  }
  for (auto& f : k.faces) {
    if (f.type != FaceType::Region || f.degenerate || f.three != which) continue;
    std::set<int> bs;
    const int m = static_cast<int>(f.corners.size());
    for (int i = 0; i < m; ++i) {
      int c = f.corners[i], d = f.corners[(i + 1) % m];
      if (k.mB[c] == d && !seam_bridge(*h, bridge_of[c])) bs.insert(bridge_of[c]);
    }
    if (bs.empty()) continue;
    int t = type_of(f.zero, {bs.begin(), bs.end()});
    if (t < 0) throw NormalError("region without a parallel disc type");
    x[t] += 1;
  }
  return x;
}

nlohmann::json NormalSystem::coords_json(const Coords& x) const {
  nlohmann::json j = nlohmann::json::object();
  for (int i = 0; i < size(); ++i)
    if (x[i]) j["d" + std::to_string(i)] = x[i];
  return j;
}

Coords NormalSystem::coords_from_json(const nlohmann::json& j) const {
  Coords x(types.size(), 0);
  if (j.is_array()) {
    if (static_cast<int>(j.size()) != size()) throw NormalError("coordinate vector has the wrong length");
    for (int i = 0; i < size(); ++i) x[i] = j[i].get<std::int64_t>();
    return x;
  }
  for (auto& [key, v] : j.items()) {
    if (key.size() < 2 || key[0] != 'd') throw NormalError("bad disc type key " + key);
    int i = std::stoi(key.substr(1));
    if (i < 0 || i >= size()) throw NormalError("unknown disc type " + key);
    x[i] = v.get<std::int64_t>();
  }
  return x;
}

namespace {

class Enumerator {
 public:
  Enumerator(const NormalSystem& s, const EnumOptions& o) : s_(s), h_(*s.h), opt_(o) {
    const int Z = static_cast<int>(h_.zero.size());
    // breadth-first order through the 1-handles
    std::vector<char> seen(Z, 0);
    for (int r = 0; r < Z; ++r) {
      if (seen[r]) continue;
      seen[r] = 1;
      std::vector<int> q{r};
      for (std::size_t i = 0; i < q.size(); ++i) {
        order_.push_back(q[i]);
        for (auto& one : h_.one)
          for (int e = 0; e < 2; ++e)
            if (one.end[e] == q[i] && one.end[1 - e] >= 0 && !seen[one.end[1 - e]]) {
              seen[one.end[1 - e]] = 1;
              q.push_back(one.end[1 - e]);
            }
      }
    }
    pos_.assign(Z, 0);
    for (int i = 0; i < Z; ++i) pos_[order_[i]] = i;
    std::map<std::tuple<int, int, int>, int> fid;
    for (auto& t : s_.types)
      for (auto& a : t.arcs) {
        auto key = std::tuple(a.k, a.a, a.b);
        if (!fid.count(key)) fid[key] = static_cast<int>(fid.size());
        contrib_[{a.k, a.e}].push_back({t.id, fid[key]});
      }
    nfam_ = static_cast<int>(fid.size());
  }

  // Local solutions of the first handle (no constraints from others).
  std::vector<Coords> roots() {
    std::vector<Coords> out;
    Coords x(s_.size(), 0);
    root_mode_ = true;
    roots_ = &out;
    handle(x, 0, opt_.weight_bound);
    root_mode_ = false;
    return out;
  }

  void from_root(Coords x, std::vector<Coords>& out) {
    out_ = &out;
    std::int64_t used = s_.weight(x);
    next(x, 1, opt_.weight_bound - used);
  }

  std::atomic<std::int64_t>* nodes = nullptr;
  std::atomic<bool>* abort = nullptr;

 private:
  const NormalSystem& s_;
  const HandleStructure& h_;
  EnumOptions opt_;
  std::vector<int> order_, pos_;
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> contrib_;
  int nfam_ = 0;
  bool root_mode_ = false;
  std::vector<Coords>* roots_ = nullptr;
  std::vector<Coords>* out_ = nullptr;
  std::int64_t local_nodes_ = 0;

  bool tick() {
    if (++local_nodes_ >= 4096) {
      std::int64_t n = nodes->fetch_add(local_nodes_) + local_nodes_;
      local_nodes_ = 0;
      if (n > opt_.node_limit) abort->store(true);
    }
    return !abort->load(std::memory_order_relaxed);
  }

  // lower bound on discs still needed in unassigned handles
  std::int64_t lower_bound(const Coords& x, int depth) const {
    std::int64_t lb = 0;
    for (std::size_t i = depth; i < order_.size(); ++i) {
      int u = order_[i];
      std::int64_t best = 0;
      for (std::size_t k = 0; k < h_.one.size(); ++k)
        for (int e = 0; e < 2; ++e) {
          if (h_.one[k].end[e] != u) continue;
          int w = h_.one[k].end[1 - e];
          if (w < 0 || pos_[w] >= static_cast<int>(depth)) continue;
          auto it = contrib_.find({static_cast<int>(k), 1 - e});
          if (it == contrib_.end()) continue;
          std::int64_t sum = 0;
          for (auto [t, f] : it->second) sum += x[t];
          best = std::max(best, sum);
        }
      lb += best;
    }
    return lb;
  }

  void next(Coords& x, int depth, std::int64_t budget) {
    if (abort->load(std::memory_order_relaxed)) return;
    if (depth == static_cast<int>(order_.size())) {
      if (s_.admissible(x)) out_->push_back(x);
      return;
    }
    if (lower_bound(x, depth) > budget) return;
    handle(x, depth, budget);
  }

  void handle(Coords& x, int depth, std::int64_t budget) {
    const int z = order_[depth];
    const auto& L = s_.types_at[z];
    const int m = static_cast<int>(L.size());
    std::vector<std::int64_t> target(nfam_, -1), partial(nfam_, 0);
    std::vector<int> last(nfam_, -1);
    // self-glued 1-handles: checked once the handle is filled
    std::vector<std::pair<int, int>> self;
    for (int k = 0; k < static_cast<int>(h_.one.size()); ++k) {
      const auto& one = h_.one[k];
      for (int e = 0; e < 2; ++e) {
        if (one.end[e] != z) continue;
        int w = one.end[1 - e];
        if (w == z) {
          if (e == 0) self.push_back({k, 0});
          continue;
        }
        if (pos_[w] > depth) continue;
        auto mine = contrib_.find({k, e});
        if (mine != contrib_.end())
          for (auto [t, f] : mine->second) target[f] = 0;
        auto it = contrib_.find({k, 1 - e});
        if (it != contrib_.end())
          for (auto [t, f] : it->second) target[f] = std::max<std::int64_t>(target[f], 0) + x[t];
      }
    }
    std::vector<std::vector<int>> cons(m);
    for (int i = 0; i < m; ++i) {
      auto& t = s_.types[L[i]];
      for (auto& a : t.arcs) {
        auto& v = contrib_.at({a.k, a.e});
        for (auto [tt, f] : v)
          if (tt == t.id && target[f] >= 0) {
            cons[i].push_back(f);
            last[f] = i;
          }
      }
    }
    // families with a positive target that no local type can carry
    for (int f = 0; f < nfam_; ++f)
      if (target[f] > 0 && last[f] < 0) return;
    std::vector<int> chosen;
    std::function<void(int, std::int64_t)> rec = [&](int i, std::int64_t rem) {
      if (!tick()) return;
      if (i == m) {
        for (int f = 0; f < nfam_; ++f)
          if (target[f] >= 0 && partial[f] != target[f]) return;
        for (auto [k, e] : self) {
          std::map<std::pair<int, int>, std::int64_t> bal;
          for (auto [t, f] : contrib_[{k, 0}]) bal[{f, 0}] += x[t];
          for (auto [t, f] : contrib_[{k, 1}]) bal[{f, 0}] -= x[t];
          for (auto& [key, v] : bal)
            if (v != 0) return;
        }
        if (root_mode_) {
          roots_->push_back(x);
          return;
        }
        next(x, depth + 1, rem);
        return;
      }
      const int t = L[i];
      std::int64_t ub = rem;
      for (int f : cons[i]) ub = std::min(ub, target[f] - partial[f]);
      bool ok_nonzero = true;
      for (int c : chosen)
        if (!s_.compat[t][c]) ok_nonzero = false;
      if (!ok_nonzero) ub = 0;
      for (std::int64_t v = 0; v <= ub; ++v) {
        x[t] = v;
        for (int f : cons[i]) partial[f] += v;
        bool closed = true;
        for (int f : cons[i])
          if (last[f] == i && partial[f] != target[f]) closed = false;
        if (closed) {
          if (v > 0) chosen.push_back(t);
          rec(i + 1, rem - v);
          if (v > 0) chosen.pop_back();
        }
        for (int f : cons[i]) partial[f] -= v;
      }
      x[t] = 0;
    };
    rec(0, budget);
  }
};

bool coords_less(const Coords& a, const Coords& b) {
  std::int64_t wa = std::accumulate(a.begin(), a.end(), std::int64_t{0});
  std::int64_t wb = std::accumulate(b.begin(), b.end(), std::int64_t{0});
  if (wa != wb) return wa < wb;
  return a < b;
}

}  // namespace

std::vector<Coords> enumerate_admissible(const NormalSystem& s, const EnumOptions& opt) {
  if (opt.weight_bound < 0) throw NormalError("weight bound must be non-negative");
  std::atomic<std::int64_t> nodes{0};
  std::atomic<bool> abort{false};
  std::vector<Coords> roots;
  {
    Enumerator e(s, opt);
    e.nodes = &nodes;
    e.abort = &abort;
    roots = e.roots();
  }
  std::vector<std::vector<Coords>> part(roots.size());
  const int R = static_cast<int>(roots.size());
  if (opt.parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int i = 0; i < R; ++i) {
      Enumerator e(s, opt);
      e.nodes = &nodes;
      e.abort = &abort;
      e.from_root(roots[i], part[i]);
    }
  } else {
    for (int i = 0; i < R; ++i) {
      Enumerator e(s, opt);
      e.nodes = &nodes;
      e.abort = &abort;
      e.from_root(roots[i], part[i]);
    }
  }
  if (abort.load())
    throw ResourceLimit("enumeration exceeded the node limit of " + std::to_string(opt.node_limit) +
                        " at weight bound " + std::to_string(opt.weight_bound));
  std::vector<Coords> out;
  for (auto& p : part) out.insert(out.end(), p.begin(), p.end());
  std::sort(out.begin(), out.end(), coords_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace kx
