#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kx/diagram.hpp"
#include "kx/handles.hpp"

using namespace kx;

namespace {
const char* kTrefoil = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]";

int alternating(const HandleStructure& h) { return h.count(0) - h.count(1) + h.count(2) - h.count(3); }
}  // namespace

TEST_CASE("trefoil exterior handle counts") {
  Diagram d = parse_pd(kTrefoil);
  for (bool ex : {false, true}) {
    HandleStructure h = build_exterior_handles(d, ex);
    CHECK(h.count(0) == (ex ? 14 : 12));
    CHECK(h.count(3) == 2);
    CHECK(alternating(h) == 0);
    auto c = census(h);
    CHECK(c.euler == 0);
    CHECK(c.single_torus_boundary());
    CHECK(c.exceptional_zero == (ex ? 2 : 0));
    CHECK(verify_convention(h).ok());
  }
}

TEST_CASE("1-handle provenance partitions the 1-handles") {
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), true);
  int sq = 0, ef = 0, ex = 0;
  for (auto& o : h.one) {
    std::string k = prov_kind(o.prov);
    if (k == "crossing-square") ++sq;
    else if (k == "edge-following") ++ef;
    else if (k == "exceptional") ++ex;
  }
  CHECK(sq + ef + ex == h.count(1));
  CHECK(ex == 2);
  CHECK(sq > 0);
  CHECK(ef > 0);
}

TEST_CASE("convention violations are reported per clause") {
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), false);
  SUBCASE("2-handle that runs over no 1-handle") {
    HandleStructure g = h;
    g.two.push_back({"loose", false, false});
    auto r = verify_convention(g);
    CHECK_FALSE(r.clause[3].ok);
  }
  SUBCASE("two 1-handles on the same island") {
    HandleStructure g = h;
    OneHandle dup = g.one[0];
    dup.owner.clear();
    dup.prov = "duplicate";
    g.one.push_back(dup);
    auto r = verify_convention(g);
    CHECK_FALSE(r.clause[1].ok);
  }
}

TEST_CASE("boundary patterns") {
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), true);
  int k4 = 0;
  for (int z = 0; z < h.count(0); ++z) {
    auto p = boundary_pattern(h, z);
    // recount islands from the 1-handle ends
    int islands = 0;
    for (auto& o : h.one) islands += (o.end[0] == z) + (o.end[1] == z);
    CHECK(p.islands == islands);
    if (h.zero[z].exceptional) {
      CHECK(p.islands <= 4);
      CHECK_FALSE(p.is_k4());
    } else {
      CHECK(p.is_k4());
      CHECK(p.islands == 4);
      CHECK(p.bridges == 6);
      ++k4;
    }
  }
  CHECK(k4 == 12);
  HandleStructure ball;
  ball.zero.push_back({"ball", false});
  auto p = boundary_pattern(ball, 0);
  CHECK(p.bridges == 0);
  CHECK(p.islands == 0);
  CHECK_THROWS(boundary_pattern(ball, 3));
}

TEST_CASE("json round trip is exact") {
  HandleStructure h = build_exterior_handles(parse_pd(kTrefoil), true);
  auto j = to_json(h);
  HandleStructure g = handles_from_json(j);
  CHECK(to_json(g).dump() == j.dump());
}

TEST_CASE("random diagrams give knot exterior structures") {
  for (unsigned long s = 100; s < 120; ++s) {
    Diagram d = random_knot_diagram(s, 3, 8);
    const int c = d.crossing_count();
    for (bool ex : {false, true}) {
      HandleStructure h = build_exterior_handles(d, ex);
      CHECK(h.count(0) == 4 * c + (ex ? 2 : 0));
      CHECK(h.count(3) == 2);
      CHECK(alternating(h) == 0);
      CHECK(census(h).single_torus_boundary());
      CHECK(verify_convention(h).ok());
    }
  }
}
