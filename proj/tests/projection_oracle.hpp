#pragma once
// All-pairs segment intersection on concretely perturbed vertices.
// Vertex g (global order over all paths) moves by eps*(g+1, (g+1)^2) with
// eps = 2^-40; crossings are found by solving for both segment parameters.

#include <map>
#include <random>
#include <vector>

#include "kx/geometry.hpp"

namespace oracle {

using kx::Q;

struct Count {
  long total = 0, outside = 0;
  std::map<int, long> per_zero;
};

inline Count brute_force_crossings(const std::vector<kx::StraightArcPath>& paths) {
  struct S {
    int a, b, zero;
  };
  std::vector<std::array<Q, 2>> raw, pt;
  std::vector<S> seg;
  for (auto& p : paths) {
    int base = (int)raw.size(), k = (int)p.points.size();
    for (auto& x : p.points) raw.push_back({x.x, x.y});
    int ns = p.closed ? k : k - 1;
    for (int i = 0; i < ns; ++i)
      seg.push_back({base + i, base + (i + 1) % k, p.segment[i].index == 0 ? p.segment[i].handle : -1});
  }
  Q eps(1);
  eps /= Q(1L << 40);
  for (size_t g = 0; g < raw.size(); ++g) {
    Q s(long(g + 1));
    pt.push_back({raw[g][0] + eps * s, raw[g][1] + eps * s * s});
  }
  Count c;
  for (size_t i = 0; i < seg.size(); ++i)
    for (size_t j = i + 1; j < seg.size(); ++j) {
      auto s = seg[i], t = seg[j];
      if (s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b) continue;
      bool same = (raw[s.a] == raw[t.a] && raw[s.b] == raw[t.b]) || (raw[s.a] == raw[t.b] && raw[s.b] == raw[t.a]);
      if (same) continue;
      // p + x r = q + y w
      Q rx = pt[s.b][0] - pt[s.a][0], ry = pt[s.b][1] - pt[s.a][1];
      Q wx = pt[t.b][0] - pt[t.a][0], wy = pt[t.b][1] - pt[t.a][1];
      Q dx = pt[t.a][0] - pt[s.a][0], dy = pt[t.a][1] - pt[s.a][1];
      Q den = rx * wy - ry * wx;
      if (den == 0) continue;
      Q x = (dx * wy - dy * wx) / den, y = (dx * ry - dy * rx) / den;
      if (x <= 0 || x >= 1 || y <= 0 || y >= 1) continue;
      ++c.total;
      if (s.zero >= 0 && s.zero == t.zero)
        ++c.per_zero[s.zero];
      else
        ++c.outside;
    }
  return c;
}

// Random family of at most max_segments segments on a small integer grid, so
// that collinear and shared-position vertices are common.
inline std::vector<kx::StraightArcPath> random_family(std::mt19937& rng, int max_segments, int grid = 6) {
  std::uniform_int_distribution<int> coord(0, grid), npts(2, 6), handle(0, 2), coin(0, 3);
  std::vector<kx::StraightArcPath> out;
  int used = 0;
  while (true) {
    kx::StraightArcPath p;
    int k = npts(rng);
    p.closed = k >= 3 && coin(rng) == 0;
    int ns = p.closed ? k : k - 1;
    if (used + ns > max_segments) break;
    used += ns;
    for (int i = 0; i < k; ++i) p.points.push_back({coord(rng), coord(rng), coord(rng)});
    for (int i = 0; i < ns; ++i) {
      kx::PathSegment s;
      s.index = coin(rng) == 0 ? 1 : 0;
      s.handle = handle(rng);
      p.segment.push_back(s);
    }
    out.push_back(p);
  }
  return out;
}

template <class C>
bool same_count(const C& got, const Count& want) {
  if (got.total != want.total || got.outside != want.outside) return false;
  std::map<int, long> g;
  for (auto& [z, n] : got.per_zero)
    if (n) g[z] = n;
  return g == want.per_zero;
}

}  // namespace oracle
