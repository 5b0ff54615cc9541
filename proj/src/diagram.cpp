#include "kx/diagram.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <regex>
#include <sstream>

namespace kx {

namespace {

struct UnionFind {
  std::vector<int> p;
  explicit UnionFind(int n) : p(n) { std::iota(p.begin(), p.end(), 0); }
  int find(int x) { return p[x] == x ? x : p[x] = find(p[x]); }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    p[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

// Orient every component and fill d.out_. Explicit signs (nonzero) are
// used to orient components that never pass under.
void orient(Diagram& d) {
  const int c = d.crossing_count();
  d.out_.assign(c, {false, false, false, false});
  std::vector<std::array<bool, 4>> seen(c, {false, false, false, false});
  for (int x0 = 0; x0 < c; ++x0) {
    for (int i0 = 0; i0 < 4; ++i0) {
      if (seen[x0][i0]) continue;
      // Collect the component as a cyclic list of (crossing, position)
      // pairs: entering at one position, leaving at the opposite one.
      std::vector<std::pair<int, int>> enter;
      int x = x0, i = i0;
      while (!seen[x][i]) {
        seen[x][i] = true;
        seen[x][(i + 2) % 4] = true;
        enter.push_back({x, i});
        auto [y, j] = d.partner_[x][(i + 2) % 4];
        x = y;
        i = j;
      }
      // Decide direction: forward means entering at the recorded position.
      int vote = 0;  // +1 forward, -1 backward
      for (auto [x1, i1] : enter) {
        if (i1 % 2 == 0) {
          int want = (i1 == 0) ? 1 : -1;
          if (vote == 0) vote = want;
          else if (vote != want)
            throw DiagramError("inconsistent orientation: an under-strand must enter at position 0");
        }
      }
      if (vote == 0) {
        // Only over-crossings: use an explicit sign if present.
        auto [x1, i1] = enter.front();
        int s = d.crossings[x1].sign;
        // entering at position 3 means over runs 3 -> 1, which is positive.
        bool forward_positive = (i1 == 3);
        if (s == 0 || (s > 0) == forward_positive) vote = 1;
        else vote = -1;
      }
      for (auto [x1, i1] : enter) {
        if (vote > 0) d.out_[x1][(i1 + 2) % 4] = true;
        else d.out_[x1][i1] = true;
      }
    }
  }
}

}  // namespace

std::pair<int, int> Diagram::partner(int x, int i) const { return partner_[x][i]; }

bool Diagram::outgoing(int x, int i) const { return out_[x][i]; }

int Diagram::component_count() const {
  const int c = crossing_count();
  std::vector<std::array<bool, 4>> seen(c, {false, false, false, false});
  int comps = 0;
  for (int x0 = 0; x0 < c; ++x0)
    for (int i0 = 0; i0 < 4; ++i0) {
      if (seen[x0][i0]) continue;
      ++comps;
      int x = x0, i = i0;
      while (!seen[x][i]) {
        seen[x][i] = seen[x][(i + 2) % 4] = true;
        auto [y, j] = partner_[x][(i + 2) % 4];
        x = y;
        i = j;
      }
    }
  return comps;
}

std::vector<std::vector<std::pair<int, int>>> Diagram::faces() const {
  const int c = crossing_count();
  std::vector<std::array<bool, 4>> seen(c, {false, false, false, false});
  std::vector<std::vector<std::pair<int, int>>> out;
  for (int x0 = 0; x0 < c; ++x0)
    for (int i0 = 0; i0 < 4; ++i0) {
      if (seen[x0][i0]) continue;
      std::vector<std::pair<int, int>> f;
      int x = x0, i = i0;
      while (!seen[x][i]) {
        seen[x][i] = true;
        f.push_back({x, i});
        auto [y, j] = partner_[x][i];
        x = y;
        i = (j + 1) % 4;
      }
      out.push_back(std::move(f));
    }
  return out;
}

void validate(Diagram& d) {
  const int c = d.crossing_count();
  if (c == 0) throw DiagramError("empty input");
  std::map<int, std::vector<std::pair<int, int>>> occ;
  for (int x = 0; x < c; ++x)
    for (int i = 0; i < 4; ++i) occ[d.crossings[x].label[i]].push_back({x, i});
  for (auto& [l, v] : occ)
    if (v.size() != 2)
      throw DiagramError("label multiplicity: label " + std::to_string(l) + " occurs " +
                         std::to_string(v.size()) + " times");
  if (static_cast<int>(occ.size()) != 2 * c) throw DiagramError("label multiplicity");
  d.partner_.assign(c, {});
  for (auto& [l, v] : occ) {
    d.partner_[v[0].first][v[0].second] = v[1];
    d.partner_[v[1].first][v[1].second] = v[0];
  }
  UnionFind uf(c);
  for (auto& [l, v] : occ) uf.unite(v[0].first, v[1].first);
  for (int x = 0; x < c; ++x)
    if (uf.find(x) != 0) throw DiagramError("disconnected diagram");
  const int faces = static_cast<int>(d.faces().size());
  if (c - 2 * c + faces != 2)
    throw DiagramError("non-planar: V - E + F = " + std::to_string(faces - c));
  orient(d);
  for (int x = 0; x < c; ++x) {
    int inferred = d.out_[x][1] ? 1 : -1;
    if (d.crossings[x].sign == 0) d.crossings[x].sign = inferred;
    else if (d.crossings[x].sign != inferred)
      throw DiagramError("sign marker contradicts orientation at crossing " + std::to_string(x));
  }
}

Diagram parse_pd(const std::string& text) {
  static const std::regex tuple(
      R"(X\s*\[\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\]\s*([+-])?)");
  Diagram d;
  std::string rest;
  auto it = std::sregex_iterator(text.begin(), text.end(), tuple);
  std::size_t last = 0;
  for (; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    rest += text.substr(last, m.position() - last);
    last = m.position() + m.length();
    Crossing cr;
    for (int k = 0; k < 4; ++k) cr.label[k] = std::stoi(m[k + 1].str());
    if (m[5].matched) cr.sign = m[5].str() == "+" ? 1 : -1;
    d.crossings.push_back(cr);
  }
  rest += text.substr(last);
  for (char ch : rest)
    if (!std::isspace(static_cast<unsigned char>(ch)) && ch != ',')
      throw DiagramError("unrecognised token near '" + rest.substr(0, 20) + "'");
  validate(d);
  return d;
}

Diagram parse_gauss(const std::string& text) {
  static const std::regex tok(R"(([OUou])\s*(\d+)\s*([+-]))");
  struct Occ {
    bool over;
    int id;
    int sign;
  };
  std::vector<Occ> seq;
  std::string rest;
  std::size_t last = 0;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), tok); it != std::sregex_iterator();
       ++it) {
    rest += text.substr(last, it->position() - last);
    last = it->position() + it->length();
    char t = (*it)[1].str()[0];
    seq.push_back({t == 'O' || t == 'o', std::stoi((*it)[2].str()), (*it)[3].str() == "+" ? 1 : -1});
  }
  rest += text.substr(last);
  for (char ch : rest)
    if (!std::isspace(static_cast<unsigned char>(ch)) && ch != ',')
      throw DiagramError("unrecognised Gauss token");
  if (seq.empty()) throw DiagramError("empty input");
  const int n = static_cast<int>(seq.size());
  std::map<int, std::array<int, 2>> where;  // id -> {over occurrence, under occurrence}
  std::map<int, int> count;
  for (int k = 0; k < n; ++k) {
    auto& w = where.try_emplace(seq[k].id, std::array<int, 2>{-1, -1}).first->second;
    int slot = seq[k].over ? 0 : 1;
    if (w[slot] != -1) throw DiagramError("label multiplicity: crossing repeated with same role");
    w[slot] = k;
    ++count[seq[k].id];
  }
  Diagram d;
  for (auto& [id, w] : where) {
    if (w[0] < 0 || w[1] < 0) throw DiagramError("label multiplicity: crossing " + std::to_string(id));
    if (seq[w[0]].sign != seq[w[1]].sign) throw DiagramError("sign mismatch at crossing " + std::to_string(id));
    // Edge k runs from occurrence k to k+1 and carries label k+1.
    auto in = [&](int k) { return ((k - 1 + n) % n) + 1; };
    auto out = [&](int k) { return k + 1; };
    int u = w[1], o = w[0];
    Crossing cr;
    cr.sign = seq[o].sign;
    if (cr.sign > 0) cr.label = {in(u), out(o), out(u), in(o)};
    else cr.label = {in(u), in(o), out(u), out(o)};
    d.crossings.push_back(cr);
  }
  validate(d);
  return d;
}

int writhe(const Diagram& d) {
  int w = 0;
  for (auto& c : d.crossings) w += c.sign;
  return w;
}

DiagramStats stats(const Diagram& d) { return {d.crossing_count(), writhe(d)}; }

Diagram add_kinks(const Diagram& d0, int target) {
  Diagram d = d0;
  int w = writhe(d);
  while (w != target) {
    int s = target > w ? 1 : -1;
    int lo = d.crossings[0].label[0], hi = lo;
    for (auto& c : d.crossings)
      for (int l : c.label) lo = std::min(lo, l), hi = std::max(hi, l);
    // Locate the head (incoming end) of the lowest labelled arc.
    int hx = -1, hi_pos = -1;
    for (int x = 0; x < d.crossing_count(); ++x)
      for (int i = 0; i < 4; ++i)
        if (d.crossings[x].label[i] == lo && !d.out_[x][i]) hx = x, hi_pos = i;
    const int m = hi + 1, n = hi + 2;
    d.crossings[hx].label[hi_pos] = n;
    Crossing k;
    k.sign = s;
    if (s > 0) k.label = {lo, n, m, m};
    else k.label = {lo, m, m, n};
    d.crossings.push_back(k);
    validate(d);
    w += s;
  }
  return d;
}

std::string to_pd(const Diagram& d) {
  std::ostringstream os;
  for (std::size_t x = 0; x < d.crossings.size(); ++x) {
    auto& c = d.crossings[x];
    if (x) os << ' ';
    os << "X[" << c.label[0] << ',' << c.label[1] << ',' << c.label[2] << ',' << c.label[3] << ']'
       << (c.sign > 0 ? '+' : '-');
  }
  return os.str();
}

nlohmann::json to_json(const Diagram& d) {
  nlohmann::json j;
  j["crossings"] = nlohmann::json::array();
  j["signs"] = nlohmann::json::array();
  for (auto& c : d.crossings) {
    j["crossings"].push_back(c.label);
    j["signs"].push_back(c.sign);
  }
  j["crossing_count"] = d.crossing_count();
  j["writhe"] = writhe(d);
  return j;
}

Diagram diagram_from_json(const nlohmann::json& j) {
  Diagram d;
  if (!j.contains("crossings")) throw DiagramError("missing crossings");
  const auto& cs = j.at("crossings");
  for (std::size_t x = 0; x < cs.size(); ++x) {
    Crossing c;
    c.label = cs[x].get<std::array<int, 4>>();
    if (j.contains("signs")) c.sign = j["signs"].at(x).get<int>();
    d.crossings.push_back(c);
  }
  validate(d);
  return d;
}

Diagram braid_closure(int n, const std::vector<int>& word, GridEmbedding* emb) {
  if (n < 1) throw DiagramError("braid needs a strand");
  using Pt = std::array<long, 2>;
  // Edge ids are provisional; union-find merges the closure.
  std::vector<std::vector<Pt>> path;
  auto new_edge = [&](Pt start) {
    path.push_back({start});
    return static_cast<int>(path.size()) - 1;
  };
  std::vector<int> at(n);
  for (int p = 0; p < n; ++p) at[p] = new_edge({0, 4L * p});
  std::vector<int> first = at;
  struct Raw {
    std::array<int, 4> e;
    int sign;
  };
  std::vector<Raw> raw;
  std::vector<Pt> cpt;
  const long m = static_cast<long>(word.size());
  for (long j = 0; j < m; ++j) {
    int g = word[j];
    int p = std::abs(g) - 1;
    if (p < 0 || p + 1 >= n) throw DiagramError("braid generator out of range");
    const long X = 4 * j, Y = 4L * p;
    Pt c{X + 2, Y + 2};
    int a_in = at[p], b_in = at[p + 1];
    path[a_in].insert(path[a_in].end(), {Pt{X + 2, Y}, c});
    path[b_in].insert(path[b_in].end(), {Pt{X + 1, Y + 4}, Pt{X + 1, Y + 2}, c});
    int a_out = new_edge(c), b_out = new_edge(c);
    path[a_out].insert(path[a_out].end(), {Pt{X + 2, Y + 4}, Pt{X + 4, Y + 4}});
    path[b_out].insert(path[b_out].end(), {Pt{X + 3, Y + 2}, Pt{X + 3, Y}, Pt{X + 4, Y}});
    Raw r;
    r.sign = g > 0 ? 1 : -1;
    if (r.sign > 0) r.e = {a_in, b_out, a_out, b_in};
    else r.e = {b_in, a_in, b_out, a_out};
    raw.push_back(r);
    cpt.push_back(c);
    at[p] = b_out;
    at[p + 1] = a_out;
  }
  // Closure: the edge at position p on the right continues into first[p].
  std::vector<int> merged(path.size(), -1);
  for (int p = 0; p < n; ++p) {
    int e = at[p], f = first[p];
    long off = 4L * (n - p);
    long W = 4 * m;
    auto& P = path[e];
    P.insert(P.end(), {Pt{W, 4L * p}, Pt{W + off, 4L * p}, Pt{W + off, 4L * n + off},
                       Pt{-off, 4L * n + off}, Pt{-off, 4L * p}});
    P.insert(P.end(), path[f].begin(), path[f].end());
    merged[f] = e;
  }
  auto canon = [&](int e) { return merged[e] >= 0 ? merged[e] : e; };
  // Relabel by walking the knot from crossing 0 along its under-strand.
  Diagram d;
  for (auto& r : raw) {
    Crossing c;
    c.sign = r.sign;
    for (int i = 0; i < 4; ++i) c.label[i] = canon(r.e[i]);
    d.crossings.push_back(c);
  }
  if (d.crossings.empty()) throw DiagramError("empty input");
  // Map provisional ids to labels 1..2c along the orientation.
  std::map<int, int> label;
  {
    std::map<int, std::array<int, 2>> tail;  // edge -> (crossing, position) where it leaves
    for (int x = 0; x < d.crossing_count(); ++x) {
      auto& e = raw[x].e;
      // outgoing positions: positive {1,2}, negative {2,3}
      if (raw[x].sign > 0) tail[canon(e[1])] = {x, 1}, tail[canon(e[2])] = {x, 2};
      else tail[canon(e[2])] = {x, 2}, tail[canon(e[3])] = {x, 3};
    }
    int e = canon(raw[0].e[2]);
    int next = 1;
    while (!label.count(e)) {
      label[e] = next++;
      // find the crossing where e ends and continue straight through.
      int hx = -1, hp = -1;
      for (int x = 0; x < d.crossing_count() && hx < 0; ++x)
        for (int i = 0; i < 4; ++i)
          if (d.crossings[x].label[i] == e && tail[e] != std::array<int, 2>{x, i}) {
            hx = x;
            hp = i;
            break;
          }
      e = d.crossings[hx].label[(hp + 2) % 4];
    }
    for (auto& [k, v] : tail)
      if (!label.count(k)) label[k] = next++;
  }
  for (auto& c : d.crossings)
    for (auto& l : c.label) l = label.at(l);
  validate(d);
  if (emb) {
    emb->arc_path.assign(d.arc_count(), {});
    for (std::size_t e = 0; e < path.size(); ++e) {
      if (merged[e] >= 0 || !label.count(static_cast<int>(e))) continue;
      auto P = path[e];
      // drop repeated points
      std::vector<Pt> Q;
      for (auto& q : P)
        if (Q.empty() || Q.back() != q) Q.push_back(q);
      emb->arc_path[label[static_cast<int>(e)] - 1] = Q;
    }
    emb->crossing_point = cpt;
  }
  return d;
}

Diagram random_knot_diagram(unsigned long seed, int cmin, int cmax, std::vector<int>* word_out,
                            int* strands_out) {
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    int n = std::uniform_int_distribution<int>(2, 5)(rng);
    int L = std::uniform_int_distribution<int>(cmin, cmax)(rng);
    if (L < n - 1) continue;
    std::vector<int> w(L);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<bool> used(n, false);
    for (auto& g : w) {
      int i = std::uniform_int_distribution<int>(1, n - 1)(rng);
      g = std::bernoulli_distribution(0.5)(rng) ? i : -i;
      used[i] = true;
      std::swap(perm[i - 1], perm[i]);
    }
    bool conn = true;
    for (int i = 1; i < n; ++i) conn = conn && used[i];
    if (!conn) continue;
    int len = 0, p = 0;
    do {
      p = perm[p];
      ++len;
    } while (p != 0);
    if (len != n) continue;
    if (word_out) *word_out = w;
    if (strands_out) *strands_out = n;
    return braid_closure(n, w);
  }
  throw DiagramError("could not sample a knot diagram");
}

}  // namespace kx
