#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "kx/diagram.hpp"

using namespace kx;

namespace {

const char* kTrefoil = "X[1,4,2,5] X[3,6,4,1] X[5,2,6,3]";
const char* kFigureEight = "X[4,2,5,1] X[8,6,1,5] X[6,3,7,4] X[2,7,3,8]";

// face count straight from the tuples: follow a label to its other end, then
// turn to the next position counterclockwise
int oracle_faces(const std::vector<std::array<int, 4>>& x) {
  std::map<int, std::vector<std::pair<int, int>>> at;
  for (int c = 0; c < (int)x.size(); ++c)
    for (int i = 0; i < 4; ++i) at[x[c][i]].push_back({c, i});
  auto other = [&](int c, int i) {
    auto& v = at[x[c][i]];
    return v[0] == std::pair{c, i} ? v[1] : v[0];
  };
  std::set<std::pair<int, int>> seen;
  int faces = 0;
  for (int c = 0; c < (int)x.size(); ++c)
    for (int i = 0; i < 4; ++i) {
      if (seen.count({c, i})) continue;
      ++faces;
      std::pair<int, int> d{c, i};
      while (!seen.count(d)) {
        seen.insert(d);
        auto o = other(d.first, d.second);
        d = {o.first, (o.second + 1) % 4};
      }
    }
  return faces;
}

std::vector<std::array<int, 4>> tuples(const Diagram& d) {
  std::vector<std::array<int, 4>> v;
  for (auto& c : d.crossings) v.push_back(c.label);
  return v;
}

// walk the knot from an under strand (in at 0, out at 2); a crossing is
// positive when the over strand leaves through position 1
int oracle_writhe(const Diagram& d) {
  auto x = tuples(d);
  std::map<int, std::vector<std::pair<int, int>>> at;
  for (int c = 0; c < (int)x.size(); ++c)
    for (int i = 0; i < 4; ++i) at[x[c][i]].push_back({c, i});
  std::map<std::pair<int, int>, bool> out;
  std::pair<int, int> p{0, 2};
  while (!out.count(p)) {
    out[p] = true;
    auto& v = at[x[p.first][p.second]];
    auto q = v[0] == p ? v[1] : v[0];
    out[q] = false;
    p = {q.first, (q.second + 2) % 4};
  }
  int w = 0;
  for (int c = 0; c < (int)x.size(); ++c) w += out.at({c, 1}) ? 1 : -1;
  return w;
}

}  // namespace

TEST_CASE("trefoil PD parses to a planar connected diagram") {
  Diagram d = parse_pd(kTrefoil);
  CHECK(d.crossing_count() == 3);
  CHECK(d.component_count() == 1);
  CHECK(oracle_faces(tuples(d)) == d.crossing_count() + 2);
  CHECK(static_cast<int>(d.faces().size()) == oracle_faces(tuples(d)));
}

TEST_CASE("bad input is rejected") {
  CHECK_THROWS_AS(parse_pd(""), DiagramError);
  CHECK_THROWS_AS(parse_pd("X[1,4,2,5] X[3,6,4,1] X[5,2,6,7]"), DiagramError);
}

TEST_CASE("writhe agrees with the sign sum") {
  Diagram t = parse_pd(kTrefoil);
  Diagram f = parse_pd(kFigureEight);
  CHECK(writhe(t) == oracle_writhe(t));
  CHECK(std::abs(writhe(t)) == 3);
  CHECK(writhe(f) == oracle_writhe(f));
  CHECK(writhe(f) == 0);
  Diagram pos = braid_closure(2, {1, 1, 1});
  CHECK(writhe(pos) == 3);
  Diagram k1 = parse_pd("X[1,1,2,2]");
  CHECK(k1.crossing_count() == 1);
  CHECK(writhe(k1) == oracle_writhe(k1));
  CHECK(writhe(k1) == 1);
}

TEST_CASE("kinks move the writhe by one each") {
  Diagram t = braid_closure(2, {1, 1, 1});
  Diagram a = add_kinks(t, 0);
  CHECK(a.crossing_count() == 6);
  CHECK(writhe(a) == 0);
  Diagram same = add_kinks(t, 3);
  CHECK(to_pd(same) == to_pd(t));
  Diagram b = add_kinks(t, -4);
  CHECK(b.crossing_count() == 10);
  CHECK(writhe(b) == -4);
  CHECK(writhe(b) == oracle_writhe(b));
}

TEST_CASE("json and gauss round trips") {
  Diagram d = parse_pd(kFigureEight);
  Diagram e = diagram_from_json(to_json(d));
  CHECK(to_pd(e) == to_pd(d));
  CHECK(to_json(e) == to_json(d));
  Diagram g = parse_gauss("O1+ U2+ O3+ U1+ O2+ U3+");
  CHECK(g.crossing_count() == 3);
  CHECK(writhe(g) == 3);
}

TEST_CASE("random diagrams are valid") {
  for (unsigned long s = 1; s <= 40; ++s) {
    Diagram d = random_knot_diagram(s, 3, 12);
    CHECK(d.crossing_count() >= 3);
    CHECK(d.crossing_count() <= 12);
    CHECK(d.component_count() == 1);
    CHECK(oracle_faces(tuples(d)) == d.crossing_count() + 2);
    CHECK(writhe(d) == oracle_writhe(d));
  }
}
