#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kx/diagram.hpp"
#include "kx/geometry.hpp"
#include "kx/handles.hpp"
#include "projection_oracle.hpp"

using namespace kx;

namespace {

StraightArcPath open_path(std::vector<P3> pts, int index, int handle) {
  StraightArcPath p;
  p.points = std::move(pts);
  p.segment.assign(p.points.size() - 1, PathSegment{index, handle, false});
  return p;
}

}  // namespace

TEST_CASE("two segments crossing once") {
  std::vector<StraightArcPath> f{open_path({{0, 0, 0}, {2, 2, 0}}, 0, 0), open_path({{0, 2, 1}, {2, 0, 3}}, 0, 0)};
  auto c = project_and_count(f);
  CHECK(c.total == 1);
  CHECK(c.per_zero[0] == 1);
  CHECK(c.outside == 0);
  // different handles: counted outside
  f[1].segment[0].handle = 1;
  c = project_and_count(f);
  CHECK(c.total == 1);
  CHECK(c.outside == 1);
}

TEST_CASE("touching, collinear and stacked segments") {
  // endpoint on the interior of another segment: the perturbation decides
  std::vector<StraightArcPath> t{open_path({{0, 0, 0}, {4, 0, 0}}, 0, 0), open_path({{2, 0, 1}, {2, 3, 1}}, 0, 0)};
  CHECK(project_and_count(t).total == oracle::brute_force_crossings(t).total);
  // identical projections at different heights are not crossings
  std::vector<StraightArcPath> s{open_path({{0, 0, 0}, {4, 1, 0}}, 0, 0), open_path({{0, 0, 5}, {4, 1, 5}}, 0, 0)};
  CHECK(project_and_count(s).total == 0);
  // consecutive segments of a path share a vertex and never count
  std::vector<StraightArcPath> z{open_path({{0, 0, 0}, {4, 0, 0}, {0, 1, 0}, {4, 1, 0}}, 0, 0)};
  CHECK(project_and_count(z).total == oracle::brute_force_crossings(z).total);
}

TEST_CASE("product fibers of a 1-handle do not cross") {
  GridEmbedding e;
  Diagram d = braid_closure(2, {1, 1, 1}, &e);
  HandleStructure h = build_exterior_handles(d, false);
  auto a = assign_affine(h, d, e);
  for (size_t k = 0; k < a.one.size(); ++k) {
    auto& g = a.one[k];
    std::vector<StraightArcPath> fam;
    for (auto& v : g.section) {
      auto pts = g.fiber(v[0], v[1]);
      auto p = open_path(pts, 1, static_cast<int>(k));
      for (auto& s : p.segment) s.product = true;
      fam.push_back(p);
    }
    CHECK(project_and_count(fam).total == 0);
  }
}

TEST_CASE("random 6-segment families in one 0-handle match the all-pairs oracle") {
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> coord(-3, 3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<StraightArcPath> fam;
    for (int i = 0; i < 6; ++i)
      fam.push_back(open_path({{coord(rng), coord(rng), coord(rng)}, {coord(rng), coord(rng), coord(rng)}}, 0, 0));
    auto got = project_and_count(fam);
    auto want = oracle::brute_force_crossings(fam);
    CHECK(oracle::same_count(got, want));
    CHECK(got.per_zero[0] <= 15);
    CHECK(got.segments_per_zero[0] == 6);
  }
}

TEST_CASE("mixed families: parallel equals serial equals oracle") {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    auto fam = oracle::random_family(rng, 40);
    auto got = project_and_count(fam);
    auto ser = project_and_count_serial(fam);
    CHECK(got.to_json() == ser.to_json());
    CHECK(oracle::same_count(got, oracle::brute_force_crossings(fam)));
    for (auto& [z, n] : got.per_zero) {
      long m = got.segments_per_zero[z];
      CHECK(n <= m * (m - 1) / 2);
    }
  }
}

TEST_CASE("horizontal translation leaves the count unchanged") {
  std::mt19937 rng(31);
  P3 t{Q(7, 3), Q(-5, 2), Q(0)};
  for (int trial = 0; trial < 50; ++trial) {
    auto fam = oracle::random_family(rng, 30);
    auto moved = fam;
    for (auto& p : moved)
      for (auto& x : p.points) x = x + t;
    CHECK(project_and_count(fam).to_json() == project_and_count(moved).to_json());
  }
}

TEST_CASE("path json round trip and malformed input") {
  std::mt19937 rng(3);
  for (auto& p : oracle::random_family(rng, 20)) {
    auto q = path_from_json(path_to_json(p));
    CHECK(q.points == p.points);
    CHECK(q.closed == p.closed);
    CHECK(path_to_json(q) == path_to_json(p));
  }
  nlohmann::json j = {{"points", {{"1/2", 0, 0}, {"2/4", 1, 0}}}};
  auto p = path_from_json(j);
  CHECK(p.points[0].x == p.points[1].x);
  CHECK(p.points[1].x.get_str() == "1/2");
  CHECK_THROWS_AS(path_from_json(nlohmann::json{{"points", {{0, 0, 0}}}}), GeometryError);
  nlohmann::json bad = {{"points", {{0, 0, 0}, {1, 1, 1}}}, {"segments", {{{"index", 2}}}}};
  CHECK_THROWS_AS(path_from_json(bad), GeometryError);
}
