// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "kx/diagram.hpp"
#include "kx/geometry.hpp"
#include "kx/handles.hpp"
#include "kx/ledger.hpp"
#include "kx/normal.hpp"
#include "kx/parallelity.hpp"
#include "projection_oracle.hpp"

using namespace kx;

namespace {

const char* kTrefoil = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]";
constexpr int kWeightBound = 24;

using Clock = std::chrono::steady_clock;
double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Result {
  bool ok = true;
  std::ostringstream note;
  void need(bool c, const std::string& what) {
    if (!c && ok) note << "first failure: " << what << "; ";
    ok = ok && c;
  }
};

Result constants() {
  Result r;
  auto t0 = Clock::now();
  auto p = canonical_zero_handle();
  MeasuredCounts m;
  m.uncut_faces = static_cast<long>(p.faces.size());
  m.triangle_polygons = static_cast<long>(
      realize_normal_disc(p, triangle_curve(p, 0, std::vector<Q>(6, Q(1, 3))), 0).polygons.size());
  m.square_polygons = static_cast<long>(
      realize_normal_disc(p, square_curve(p, 0, std::vector<Q>(8, Q(1, 3))), 0).polygons.size());
  auto checks = verify_constants(m);
  int bad = 0;
  for (auto& c : checks)
    if (!c.ok) {
      ++bad;
      r.need(false, c.name);
    }
  double dt = since(t0);
  r.need(dt < 1.0, "runtime");
  r.note << checks.size() << " constants, " << bad << " mismatched, " << dt << " s";
  return r;
}

Result handle_census() {
  Result r;
  auto t0 = Clock::now();
  int fails = 0;
  for (int i = 0; i < 200; ++i) {
    Diagram d = random_knot_diagram(1000 + i, 3, 12);
    const int c = d.crossing_count();
    bool good = c >= 3 && c <= 12;
    for (bool ex : {true, false}) {
      auto cen = census(build_exterior_handles(d, ex));
      good = good && cen.handles[0] == (ex ? 4 * c + 2 : 4 * c) && cen.handles[3] == 2 && cen.euler == 0 &&
             cen.handles[0] - cen.handles[1] + cen.handles[2] - cen.handles[3] == 0 && cen.single_torus_boundary();
    }
    if (!good) {
      ++fails;
      r.need(false, "diagram seed " + std::to_string(1000 + i));
    }
  }
  double dt = since(t0);
  r.need(dt < 30.0, "runtime");
  r.note << "200 diagrams, " << fails << " failures, " << dt << " s";
  return r;
}

Result flat_polygons() {
  Result r;
  auto p = canonical_zero_handle();
  int discs = 0, pairs = 0;
  auto run = [&](bool square, int which) {
    std::vector<FlatPolygonDisc> nest;
    for (int n = 0; n < 10; ++n) {
      // copy n runs along the edges at depth (n+1)/12
      Q s(n + 1, 12);
      s.canonicalize();
      auto c = square ? square_curve(p, which, std::vector<Q>(8, s)) : triangle_curve(p, which, std::vector<Q>(6, s));
      auto d = realize_normal_disc(p, c, n);
      r.need(d.polygons.size() == (square ? 25u : 16u), "polygon count");
      r.need(disc_embedded(d), "embedded");
      nest.push_back(std::move(d));
      ++discs;
    }
    for (int a = 0; a < 10; ++a)
      for (int b = a + 1; b < 10; ++b) {
        r.need(discs_disjoint(nest[a], nest[b]), "disjoint nestings");
        ++pairs;
      }
  };
  for (int t = 0; t < 4; ++t) run(false, t);
  for (int b = 0; b < 6; ++b) run(true, b);
  r.note << discs << " discs, " << pairs << " nested pairs";
  return r;
}

Result projection() {
  Result r;
  std::mt19937 rng(2024);
  long crossings = 0;
  for (int i = 0; i < 500; ++i) {
    auto fam = oracle::random_family(rng, 40);
    auto got = project_and_count(fam);
    auto want = oracle::brute_force_crossings(fam);
    r.need(oracle::same_count(got, want), "family " + std::to_string(i));
    crossings += got.total;
  }
  r.note << "500 families, " << crossings << " crossings in total";
  return r;
}

Result normal_coordinates() {
  Result r;
  auto t0 = Clock::now();
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), false);
  NormalSystem s(h);
  EnumOptions o;
  o.weight_bound = kWeightBound;
  auto all = enumerate_admissible(s, o);
  double dt = since(t0);
  std::set<Coords> set(all.begin(), all.end());
  r.need(set.size() == all.size(), "duplicates");
  int sums = 0;
  for (size_t i = 0; i < all.size(); ++i)
    for (size_t j = i; j < all.size(); ++j) {
      Coords z = all[i];
      for (size_t k = 0; k < z.size(); ++k) z[k] += all[j][k];
      if (s.weight(z) > kWeightBound || !s.admissible(z)) continue;
      ++sums;
      r.need(set.count(z) > 0, "closure");
    }
  Coords L = s.link(-1);
  r.need(set.count(L) > 0, "peripheral torus missing");
  auto t = realize_surface(s, L);
  r.need(t.euler == 0 && t.orientable, "peripheral torus");
  for (auto& x : all) r.need(realize_surface(s, x).read_back == x, "read-back");
  r.need(dt < 60.0, "enumeration time");
  r.note << "W=" << kWeightBound << ", " << all.size() << " vectors, " << sums << " admissible sums, enumeration " << dt
         << " s";
  return r;
}

std::set<HandleRef> direct_check(const CutComplex& c) {
  std::set<HandleRef> out;
  Complex k(c.h);
  const int n[3] = {(int)c.h.zero.size(), (int)c.h.one.size(), (int)c.h.two.size()};
  for (int i = 0; i < 3; ++i)
    for (int id = 0; id < n[i]; ++id) {
      if (i == 2 && c.h.two[id].seam) continue;
      std::set<int> pieces;
      bool bad = false;
      for (int f : k.handle_faces(i, id)) {
        if (!k.boundary_face(f)) continue;
        if (k.faces[f].s < 0) bad = true;
        pieces.insert(k.faces[f].s);
      }
      if (bad || pieces.size() != 2) continue;
      auto& a = c.pieces[*pieces.begin()];
      auto& b = c.pieces[*pieces.rbegin()];
      if (a.kind != b.kind || (a.kind == 'd' && a.index != b.index)) continue;
      out.insert({i, id});
    }
  return out;
}

int handle_total(const HandleStructure& h) { return h.count(0) + h.count(1) + h.count(2) + h.count(3); }

Result parallelity() {
  Result r;
  Diagram d = parse_pd(kTrefoil);
  int flagged_total = 0;
  for (bool ex : {false, true}) {
    HandleStructure h = build_exterior_handles(d, ex);
    NormalSystem s(h);
    Coords x = s.link(-1);
    for (auto& v : x) v *= 2;
    auto c = cut_along(s, x);
    std::set<HandleRef> fl;
    for (auto& f : find_parallelity_handles(c.h)) fl.insert(f.handle);
    r.need(fl == direct_check(c), "flags differ from the direct product check");
    std::set<HandleRef> between;
    for (auto& comp : handle_components(c.h)) {
      auto cen = census(extract_component(c.h, comp));
      int s_tori = 0, other = 0;
      for (auto& b : cen.boundary) {
        if (b.three >= 0) continue;
        (b.all_s && b.euler == 0 ? s_tori : other)++;
      }
      if (s_tori != 2 || other) continue;
      for (int i = 0; i < 3; ++i)
        for (int id : comp[i])
          if (!(i == 2 && c.h.two[id].seam)) between.insert({i, id});
    }
    r.need(!between.empty(), "no slab between the copies");
    for (auto& b : between) r.need(fl.count(b) > 0, "slab handle not flagged");
    flagged_total += static_cast<int>(fl.size());
  }

  HandleStructure m = from_cells(mobius_collar(3));
  auto log = simplify_annular(m);
  r.need(!log.steps.empty() && log.lemma_ok, "annular loop");
  for (auto& st : log.steps) {
    r.need(st["handles_after"].get<int>() < st["handles_before"].get<int>(), "handle count did not drop");
    r.need(st["euler_after"] == st["euler_before"], "euler changed");
    r.need(st["parallelity_kept"].get<bool>(), "parallelity lost");
  }
  r.need(log.result.euler() == m.euler(), "euler after loop");

  HandleStructure n = from_cells(nested_product(4));
  auto rep = replace_disc_bundles(n);
  r.need(rep.euler() == n.euler() && verify_convention(rep).ok(), "disc bundle replacement");
  r.need(handle_total(rep) < handle_total(n), "disc bundle replacement kept the handles");

  HandleStructure e = build_exterior_handles(d, true);
  NormalSystem se(e);
  auto one = cut_along(se, se.link(-1));
  int attached = 0;
  for (auto& comp : handle_components(one.h)) {
    auto sub = extract_component(one.h, comp);
    if (census(sub).boundary.size() != 2) continue;
    auto st = attach_solid_torus(sub);
    auto cen = census(st.h);
    r.need(st.hypotheses_ok && st.max_islands <= 4 && st.max_alphas <= 3, "incidence bounds");
    r.need(cen.euler == 0 && cen.single_torus_boundary(), "solid torus result");
    ++attached;
  }
  r.need(attached > 0, "nothing to attach to");
  r.note << flagged_total << " flagged after doubling, " << log.steps.size() << " annular moves, " << attached
         << " solid torus attached";
  return r;
}

Result certificates() {
  Result r;
  auto dump = [](const BoundCertificate& c) { return c.to_json().dump(2) + "\n" + c.render_text(); };
  std::vector<std::function<BoundCertificate()>> make;
  for (long c : {3L, 7L, 12L, 100L}) make.push_back([c] { return main_bound(c); });
  for (long k : {0L, 3L, 9L})
    for (long t : {-4L, 0L, 5L}) make.push_back([k, t] { return cable_bound(k, t); });
  for (long k : {0L, 3L, 12L}) make.push_back([k] { return connected_sum_chain(k, PipelineFlags{true, true, true}); });
  for (auto& f : make) {
    auto a = f(), b = f();
    r.need(dump(a) == dump(b), "re-run differs");
    auto back = BoundCertificate::from_json(nlohmann::json::parse(a.to_json().dump()));
    r.need(dump(back) == dump(a), "serialized copy differs");
    std::string why;
    r.need(back.replay(&why), "replay: " + why);
  }
  r.note << make.size() << " certificates replayed";
  return r;
}

}  // namespace

int main() {
  const std::pair<const char*, Result (*)()> criteria[] = {
      {"constant-chain reproduction", constants},
      {"handle census on random diagrams", handle_census},
      {"flat-polygon realization", flat_polygons},
      {"projection count vs all-pairs oracle", projection},
      {"normal coordinates on the trefoil exterior", normal_coordinates},
      {"parallelity and simplification", parallelity},
      {"certificate replayability", certificates},
  };
  int failed = 0;
  for (auto& [name, fn] : criteria) {
    Result r;
    try {
      r = fn();
    } catch (const std::exception& e) {
      r.ok = false;
      r.note << "exception: " << e.what();
    }
    std::printf("%s %s (%s)\n", r.ok ? "PASS" : "FAIL", name, r.note.str().c_str());
    std::fflush(stdout);
    failed += !r.ok;
  }
  return failed ? 1 : 0;
}
