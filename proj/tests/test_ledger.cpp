#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "kx/ledger.hpp"

using namespace kx;

namespace {

mpz_class z(const char* s) { return mpz_class(s); }

std::string dump(const BoundCertificate& c) { return c.to_json().dump(2); }

}  // namespace

TEST_CASE("faces after cutting one 0-handle") {
  DiscCensus max;
  max.triangles = {2, 2, 2, 2};
  max.squares = {2, 0, 0};
  auto f = faces_after_cut(max);
  CHECK(f.disc_faces == 178);
  CHECK(f.faces == 236);
  CHECK(f.non_parallelity_pieces <= 6);

  auto e = faces_after_cut(DiscCensus{});
  CHECK(e.faces == 26);
  CHECK(e.island_faces == 4);
  CHECK(e.bridge_faces == 6);
  CHECK(e.region_faces == 16);
  CHECK(e.disc_faces == 0);

  DiscCensus two;
  two.squares = {1, 1, 0};
  CHECK_THROWS_AS(faces_after_cut(two), LedgerError);
  DiscCensus neg;
  neg.triangles[1] = -1;
  CHECK_THROWS_AS(faces_after_cut(neg), LedgerError);
}

TEST_CASE("K4 incidences of the disc types") {
  for (int t = 0; t < 4; ++t) {
    CHECK(islands_crossed(false, t).size() == 3);
    CHECK(bridges_crossed(false, t).size() == 3);
  }
  for (int s = 0; s < 3; ++s) {
    CHECK(islands_crossed(true, s).size() == 4);
    auto b = bridges_crossed(true, s);
    CHECK(b.size() == 4);
    // the two bridges missed form a perfect matching of K4
    std::set<int> seen;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (std::find(b.begin(), b.end(), std::pair(i, j)) == b.end()) {
          seen.insert(i);
          seen.insert(j);
        }
    CHECK(seen.size() == 4);
  }
}

TEST_CASE("main bound") {
  auto c = main_bound(3);
  CHECK(c.value("arc_budget") == 6 * 48 * 236);
  CHECK(c.value("arc_budget") == 67968);
  mpz_class b = 67968;
  CHECK(c.value("per_handle_crossings") == b * b);
  // (14/3) * 67968^2 is an integer since 3 | 67968
  CHECK(c.value("per_c") == 14 * b * b / 3);
  CHECK(c.value("per_c") == z("21558362112"));
  CHECK(c.value("per_c_below") == 1);
  CHECK(c.value("zero_handle_bound") == 1);
  CHECK(c.value("closing") == z("4560000000000"));
  CHECK(c.value("closing_below") == 1);
  CHECK(c.value(c.final_step) == 3 * c.value("per_c"));
  CHECK_THROWS_AS(main_bound(2), LedgerError);
  CHECK_THROWS_AS(main_bound(1), LedgerError);
  mpz_class prev = 0;
  for (long n = 3; n <= 40; ++n) {
    auto m = main_bound(n);
    CHECK(m.value(m.final_step) >= prev);
    prev = m.value(m.final_step);
  }
}

TEST_CASE("cable bound") {
  auto c = cable_bound(7, 2);
  CHECK(c.value("gamma_cells") == 86);
  CHECK(c.value("cable_case1") == 86 * 85 / 2 * 8);
  CHECK(c.value("cable_case1") == 29240);
  CHECK(c.value("case2a_arcs") == 4 * 16 + 25 + 84);
  CHECK(c.value("case2a_per_cd") == 173 * 172 / 2 * 4);
  CHECK(c.value("cable_constant") == 119024);
  CHECK(c.value("case1_per_c") == (2048 * 14 + 2) / 3);
  CHECK(c.value("case1_per_c") == 9558);
  CHECK(c.value("closure") == z("2275262784"));
  CHECK(c.value("closure_below") == 1);
  CHECK(c.value(c.final_step) == 119024 * 9);
  auto neg = cable_bound(7, -2);
  CHECK(neg.value(neg.final_step) == c.value(c.final_step));
  for (long k = 0; k < 10; ++k)
    for (long t = 0; t < 10; ++t) {
      auto a = cable_bound(k, t);
      auto up_k = cable_bound(k + 1, t), up_t = cable_bound(k, t + 1);
      CHECK(up_k.value(up_k.final_step) >= a.value(a.final_step));
      CHECK(up_t.value(up_t.final_step) >= a.value(a.final_step));
    }
}

TEST_CASE("connected-sum chain") {
  PipelineFlags all{true, true, true};
  auto c = connected_sum_chain(3, all);
  CHECK(c.value(c.final_step) == 456);
  auto zc = connected_sum_chain(0, all);
  CHECK(zc.value(zc.final_step) == 0);
  CHECK(c.assertions.size() == 3);
  for (int i = 0; i < 3; ++i) {
    PipelineFlags f = all;
    (i == 0 ? f.no_exceptional_handles : i == 1 ? f.annular_simplifications_exhausted : f.non_meridional_annuli_asserted) =
        false;
    CHECK_THROWS_AS(connected_sum_chain(3, f), LedgerError);
  }
}

TEST_CASE("replay and serialization") {
  for (auto cert : {main_bound(3), main_bound(11), cable_bound(7, 2), cable_bound(0, 5),
                    connected_sum_chain(4, PipelineFlags{true, true, true})}) {
    std::string why;
    CHECK(cert.replay(&why));
    auto back = BoundCertificate::from_json(nlohmann::json::parse(dump(cert)));
    CHECK(dump(back) == dump(cert));
    CHECK(back.replay());
    CHECK(back.render_text() == cert.render_text());
    // a tampered value is caught
    auto bad = back;
    bad.steps[bad.steps.size() / 2].value += "1";
    CHECK_FALSE(bad.replay(&why));
    CHECK_FALSE(why.empty());
  }
  CHECK(dump(main_bound(5)) == dump(main_bound(5)));
  CHECK_THROWS(main_bound(3).value("no_such_step"));
}

TEST_CASE("quoted constants") {
  MeasuredCounts m{16, 25, 26};
  auto v = verify_constants(m);
  CHECK(v.size() >= 20);
  for (auto& c : v) CHECK_MESSAGE(c.ok, c.name);
  // a wrong measurement shows up as a mismatch
  MeasuredCounts off{15, 25, 26};
  bool any_bad = false;
  for (auto& c : verify_constants(off)) any_bad |= !c.ok;
  CHECK(any_bad);
}
