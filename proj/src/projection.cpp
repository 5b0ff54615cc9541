#include <algorithm>

#include <omp.h>

#include "kx/geometry.hpp"

namespace kx {

namespace {

struct Seg {
  int a, b;  // global vertex ids
  int zero;  // 0-handle id or -1
};

struct Flat {
  std::vector<std::array<Q, 2>> p;  // projected vertices
  std::vector<Seg> seg;
};

Flat flatten(const std::vector<StraightArcPath>& paths) {
  Flat f;
  for (auto& path : paths) {
    const int base = static_cast<int>(f.p.size());
    const int k = static_cast<int>(path.points.size());
    const int ns = path.closed ? k : k - 1;
    if (static_cast<int>(path.segment.size()) != ns) throw GeometryError("segment tags do not match the path");
    for (auto& x : path.points) f.p.push_back({x.x, x.y});
    for (int i = 0; i < ns; ++i) {
      auto& t = path.segment[i];
      f.seg.push_back({base + i, base + (i + 1) % k, t.index == 0 ? t.handle : -1});
    }
  }
  return f;
}

// symbolic displacement of vertex g: eps * (g+1, (g+1)^2)
std::array<Q, 2> disp(int g) {
  long s = g + 1;
  return {Q(s), Q(s * s)};
}

Q det(const std::array<Q, 2>& u, const std::array<Q, 2>& w) { return u[0] * w[1] - u[1] * w[0]; }

int orient(const Flat& f, int i, int j, int k) {
  std::array<Q, 2> u{f.p[j][0] - f.p[i][0], f.p[j][1] - f.p[i][1]};
  std::array<Q, 2> w{f.p[k][0] - f.p[i][0], f.p[k][1] - f.p[i][1]};
  int s = sgn(det(u, w));
  if (s) return s;
  auto di = disp(i), dj = disp(j), dk = disp(k);
  std::array<Q, 2> up{dj[0] - di[0], dj[1] - di[1]}, wp{dk[0] - di[0], dk[1] - di[1]};
  s = sgn(det(u, wp) + det(up, w));
  if (s) return s;
  s = sgn(det(up, wp));
  if (s) return s;
  throw GeometryError("unresolved degeneracy in projection");
}

bool same_projection(const Flat& f, const Seg& s, const Seg& t) {
  return (f.p[s.a] == f.p[t.a] && f.p[s.b] == f.p[t.b]) || (f.p[s.a] == f.p[t.b] && f.p[s.b] == f.p[t.a]);
}

bool crosses(const Flat& f, const Seg& s, const Seg& t) {
  if (s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b) return false;
  if (same_projection(f, s, t)) return false;
  return orient(f, s.a, s.b, t.a) != orient(f, s.a, s.b, t.b) && orient(f, t.a, t.b, s.a) != orient(f, t.a, t.b, s.b);
}

void tally(CrossingCount& c, const Seg& s, const Seg& t) {
  ++c.total;
  if (s.zero >= 0 && s.zero == t.zero)
    ++c.per_zero[s.zero];
  else
    ++c.outside;
}

void segment_census(CrossingCount& c, const Flat& f) {
  for (auto& s : f.seg)
    if (s.zero >= 0) ++c.segments_per_zero[s.zero];
}

}  // namespace

nlohmann::json CrossingCount::to_json() const {
  nlohmann::json j;
  j["total"] = total;
  j["outside_zero_handles"] = outside;
  j["per_zero_handle"] = nlohmann::json::array();
  for (auto& [z, n] : per_zero) {
    int segs = segments_per_zero.count(z) ? segments_per_zero.at(z) : 0;
    j["per_zero_handle"].push_back({{"handle", z}, {"crossings", n}, {"segments", segs}});
  }
  return j;
}

CrossingCount project_and_count_serial(const std::vector<StraightArcPath>& paths) {
  Flat f = flatten(paths);
  CrossingCount c;
  segment_census(c, f);
  const int n = static_cast<int>(f.seg.size());
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (crosses(f, f.seg[i], f.seg[j])) tally(c, f.seg[i], f.seg[j]);
  return c;
}

CrossingCount project_and_count(const std::vector<StraightArcPath>& paths) {
  Flat f = flatten(paths);
  CrossingCount c;
  segment_census(c, f);
  const int n = static_cast<int>(f.seg.size());
  const int nt = omp_get_max_threads();
  std::vector<CrossingCount> part(nt);
  std::vector<std::string> err(nt);
#pragma omp parallel for schedule(dynamic, 8)
  for (int i = 0; i < n; ++i) {
    auto& mine = part[omp_get_thread_num()];
    try {
      for (int j = i + 1; j < n; ++j)
        if (crosses(f, f.seg[i], f.seg[j])) tally(mine, f.seg[i], f.seg[j]);
    } catch (const GeometryError& e) {
      err[omp_get_thread_num()] = e.what();
    }
  }
  for (auto& e : err)
    if (!e.empty()) throw GeometryError(e);
  // integer sums: the order of merging does not change the result
  for (auto& p : part) {
    c.total += p.total;
    c.outside += p.outside;
    for (auto& [z, k] : p.per_zero) c.per_zero[z] += k;
  }
  return c;
}

StraightArcPath path_from_json(const nlohmann::json& j) {
  StraightArcPath p;
  auto q = [](const nlohmann::json& v) {
    if (v.is_string()) {
      Q r(v.get<std::string>());
      r.canonicalize();
      return r;
    }
    return Q(v.get<long>());
  };
  for (auto& x : j.at("points")) p.points.push_back({q(x.at(0)), q(x.at(1)), q(x.at(2))});
  p.closed = j.value("closed", false);
  const size_t ns = p.closed ? p.points.size() : p.points.size() - 1;
  if (j.contains("segments")) {
    for (auto& s : j.at("segments"))
      p.segment.push_back({s.value("index", 0), s.value("handle", -1), s.value("product", false)});
  } else {
    p.segment.assign(ns, PathSegment{0, -1, false});
  }
  if (p.points.size() < 2 || p.segment.size() != ns) throw GeometryError("malformed path");
  for (auto& s : p.segment)
    if (s.index != 0 && s.index != 1) throw GeometryError("segment handle index must be 0 or 1");
  return p;
}

nlohmann::json path_to_json(const StraightArcPath& p) {
  nlohmann::json j;
  for (auto& x : p.points) j["points"].push_back({x.x.get_str(), x.y.get_str(), x.z.get_str()});
  for (auto& s : p.segment) j["segments"].push_back({{"index", s.index}, {"handle", s.handle}, {"product", s.product}});
  j["closed"] = p.closed;
  return j;
}

}  // namespace kx
