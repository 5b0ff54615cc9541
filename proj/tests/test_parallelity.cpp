#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "kx/diagram.hpp"
#include "kx/normal.hpp"
#include "kx/parallelity.hpp"

using namespace kx;

namespace {

const char* kTrefoil = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]";

int handle_total(const HandleStructure& h) { return h.count(0) + h.count(1) + h.count(2) + h.count(3); }

CutComplex cut_copies(const NormalSystem& s, int copies) {
  Coords x = s.link(-1);
  for (auto& v : x) v *= copies;
  return cut_along(s, x);
}

// a handle is a product D x I when its free boundary is two S faces of
// parallel pieces and nothing else
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
      if (a.kind != b.kind) continue;
      if (a.kind == 'd' && a.index != b.index) continue;
      out.insert({i, id});
    }
  return out;
}

std::set<HandleRef> flagged(const HandleStructure& h) {
  std::set<HandleRef> out;
  for (auto& f : find_parallelity_handles(h)) out.insert(f.handle);
  return out;
}

}  // namespace

TEST_CASE("doubled peripheral torus") {
  Diagram d = parse_pd(kTrefoil);
  for (bool ex : {false, true}) {
    HandleStructure h = build_exterior_handles(d, ex);
    NormalSystem s(h);
    auto c = cut_copies(s, 2);
    auto fl = flagged(c.h);
    CHECK(fl == direct_check(c));
    // the slab between the copies: two boundary tori, both in S
    std::set<HandleRef> between;
    for (auto& comp : handle_components(c.h)) {
      auto cen = census(extract_component(c.h, comp));
      int s_tori = 0, other = 0;
      for (auto& b : cen.boundary) {
        if (b.three >= 0) continue;
        if (b.all_s && b.euler == 0) ++s_tori;
        else ++other;
      }
      if (s_tori != 2 || other) continue;
      for (int i = 0; i < 3; ++i)
        for (int id : comp[i])
          if (!(i == 2 && c.h.two[id].seam)) between.insert({i, id});
    }
    CHECK_FALSE(between.empty());
    for (auto& r : between) CHECK(fl.count(r));
    // nothing touching the free boundary
    Complex k(c.h);
    for (auto& r : fl)
      for (int f : k.handle_faces(r.index, r.id))
        if (k.boundary_face(f)) CHECK(k.faces[f].s >= 0);

    auto b = assemble_bundle(c.h);
    int tori = 0;
    std::set<HandleRef> in_bundle;
    for (auto& comp : b.components) {
      if (comp.base == "torus") {
        ++tori;
        CHECK(std::set<HandleRef>(comp.handles.begin(), comp.handles.end()) == between);
      } else {
        CHECK(comp.base == "disc");
      }
      in_bundle.insert(comp.handles.begin(), comp.handles.end());
      CHECK(verify_gpb(c.h, comp.handles).ok());
    }
    CHECK(tori == 1);
    CHECK(in_bundle == fl);
  }
}

TEST_CASE("single copy") {
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), false);
  NormalSystem s(h);
  auto c = cut_copies(s, 1);
  auto fl = flagged(c.h);
  CHECK(fl == direct_check(c));
  CHECK(static_cast<int>(fl.size()) < handle_total(c.h));
  CHECK(flagged(h).empty());
  CHECK(assemble_bundle(h).components.empty());
}

TEST_CASE("bundle bases") {
  CHECK(assemble_bundle(from_cells(surface_product("annulus", 4))).components.at(0).base == "annulus");
  CHECK(assemble_bundle(from_cells(surface_product("torus", 3))).components.at(0).base == "torus");
  auto m = assemble_bundle(from_cells(mobius_collar(3)));
  REQUIRE(m.components.size() == 1);
  CHECK(m.components[0].base == "mobius");
  CHECK_FALSE(m.components[0].base_orientable);
}

TEST_CASE("generalised parallelity bundle clauses") {
  HandleStructure h = from_cells(nested_product(4));
  auto b = assemble_bundle(h);
  REQUIRE(b.components.size() == 1);
  auto all = b.components[0].handles;
  CHECK(verify_gpb(h, all).ok());
  // the vertical boundary is where the bundle meets handles outside it
  Complex k(h);
  int vf = b.components[0].vertical.front();
  HandleRef inside{-1, -1}, outside{-1, -1};
  for (auto [i, id] : k.face_handles(vf))
    (std::find(all.begin(), all.end(), HandleRef{i, id}) != all.end() ? inside : outside) = {i, id};
  REQUIRE(inside.index >= 0);
  REQUIRE(outside.index >= 0);
  std::vector<HandleRef> less;
  for (auto& r : all)
    if (r != inside) less.push_back(r);
  auto rl = verify_gpb(h, less);
  CHECK_FALSE(rl.ok());
  CHECK_FALSE(rl.clause[0].ok);
  // a non-product handle on the vertical boundary
  std::vector<HandleRef> more = all;
  more.push_back(outside);
  CHECK_FALSE(verify_gpb(h, more).clause[3].ok);
  // take every 1-handle of an outside 2-handle but leave the 2-handle behind
  std::set<HandleRef> in(all.begin(), all.end());
  int t = -1;
  for (int id = 0; id < (int)h.two.size() && t < 0; ++id)
    if (!h.two[id].seam && !in.count({2, id})) t = id;
  REQUIRE(t >= 0);
  std::vector<HandleRef> grab = all;
  for (int kk = 0; kk < (int)h.one.size(); ++kk)
    for (int o : h.one[kk].owner)
      if (o == t && !in.count({1, kk})) {
        grab.push_back({1, kk});
        in.insert({1, kk});
      }
  CHECK_FALSE(verify_gpb(h, grab).clause[4].ok);
}

TEST_CASE("annular simplification") {
  HandleStructure h = from_cells(mobius_collar(3));
  auto m = find_annular_move(h);
  REQUIRE(m.has_value());
  CHECK(m->certificate == "parallelity-region");
  CHECK_FALSE(m->inner.empty());
  auto r = apply_annular_move(h, *m);
  CHECK(handle_total(r.h) == handle_total(h) - static_cast<int>(m->region.size()));
  CHECK(r.h.euler() == h.euler());
  CHECK(verify_convention(r.h).ok());

  auto log = simplify_annular(h);
  CHECK(log.lemma_ok);
  CHECK_FALSE(log.steps.empty());
  for (auto& st : log.steps) {
    CHECK(st["handles_after"].get<int>() < st["handles_before"].get<int>());
    CHECK(st["euler_after"] == st["euler_before"]);
    CHECK(st["parallelity_kept"].get<bool>());
  }
  CHECK_FALSE(find_annular_move(log.result).has_value());
  CHECK_FALSE(find_annular_move(from_cells(surface_product("annulus", 4))).has_value());
  HandleStructure trefoil = build_exterior_handles(parse_pd(kTrefoil), false);
  CHECK_FALSE(find_annular_move(trefoil).has_value());
}

TEST_CASE("disc bundles become 2-handles") {
  HandleStructure h = from_cells(nested_product(4));
  auto b = assemble_bundle(h);
  REQUIRE(b.components.size() == 1);
  const int k = static_cast<int>(b.components[0].handles.size());
  auto r = replace_disc_bundles(h);
  CHECK(handle_total(r) == handle_total(h) - k + 1);
  CHECK(r.euler() == h.euler());
  CHECK(verify_convention(r).ok());
  HandleStructure empty = build_exterior_handles(parse_pd(kTrefoil), false);
  CHECK(to_json(replace_disc_bundles(empty)).dump() == to_json(empty).dump());
  CHECK_THROWS(replace_disc_bundles(from_cells(mobius_collar(3))));
}

TEST_CASE("solid torus attachment") {
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), true);
  NormalSystem s(h);
  auto c = cut_copies(s, 1);
  int done = 0;
  for (auto& comp : handle_components(c.h)) {
    auto sub = extract_component(c.h, comp);
    if (census(sub).boundary.size() != 2) continue;
    auto st = attach_solid_torus(sub);
    ++done;
    CHECK(st.hypotheses_ok);
    CHECK(st.max_islands <= 4);
    CHECK(st.max_alphas <= 3);
    auto cen = census(st.h);
    CHECK(cen.euler == 0);
    CHECK(cen.single_torus_boundary());
    CHECK(cen.handles[2] == census(sub).handles[2] + 1);
    CHECK(cen.handles[3] == census(sub).handles[3] + 1);
    CHECK(verify_convention(st.h).ok());
  }
  CHECK(done == 1);
}

TEST_CASE("boundary curve straightening") {
  HandleStructure ah = from_cells(surface_product("annulus", 4));
  Complex k(ah);
  std::vector<int> bf;
  for (int i = 0; i < (int)k.faces.size(); ++i)
    if (k.boundary_face(i) && k.faces[i].s < 0) bf.push_back(i);
  auto wall = face_components(k, bf).at(0);
  auto basis = curve_basis(k, wall);
  REQUIRE(basis.size() == 1);
  auto core = straighten_boundary_curve(k, wall, basis[0]);
  CHECK(mod2_class(k, wall, core) == mod2_class(k, wall, basis[0]));
  std::set<int> zeros, ones;
  for (int f : core.regions) zeros.insert(k.faces[f].zero);
  for (int g : core.gaps) ones.insert(k.faces[g].one);
  CHECK(zeros.size() == core.regions.size());
  CHECK(ones.size() == core.gaps.size());
  CHECK_THROWS(straighten_boundary_curve(k, {}, basis[0]));

  // punctured boundary torus of the trefoil exterior
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), false);
  Complex t(h);
  std::vector<int> f;
  int dropped = -1;
  for (int i = 0; i < (int)t.faces.size(); ++i)
    if (t.boundary_face(i) && t.faces[i].three < 0) {
      if (dropped < 0 && t.faces[i].type == FaceType::Region) {
        dropped = i;
        continue;
      }
      f.push_back(i);
    }
  int nonzero = 0;
  for (auto& target : curve_basis(t, f)) {
    auto want = mod2_class(t, f, target);
    if (std::none_of(want.begin(), want.end(), [](char x) { return x; })) continue;
    ++nonzero;
    auto cv = straighten_boundary_curve(t, f, target);
    CHECK(mod2_class(t, f, cv) == want);
    CHECK(cv.gaps.size() <= target.gaps.size());
    CHECK(std::set<int>(cv.regions.begin(), cv.regions.end()).size() == cv.regions.size());
  }
  CHECK(nonzero > 0);
}
