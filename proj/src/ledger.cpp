#include "kx/ledger.hpp"

#include <algorithm>
#include <sstream>

namespace kx {

namespace {

bool is_literal(const std::string& s) {
  if (s.empty()) return false;
  size_t i = s[0] == '-' ? 1 : 0;
  return i < s.size() && std::all_of(s.begin() + i, s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

mpz_class eval_op(const std::string& op, const std::vector<mpz_class>& a) {
  auto need = [&](size_t n) {
    if (a.size() < n) throw LedgerError("operation " + op + " needs " + std::to_string(n) + " operands");
  };
  if (op == "add" || op == "mul" || op == "max") {
    need(1);
    mpz_class r = a[0];
    for (size_t i = 1; i < a.size(); ++i) {
      if (op == "add") r += a[i];
      if (op == "mul") r *= a[i];
      if (op == "max") r = std::max(r, a[i]);
    }
    return r;
  }
  need(2);
  if (op == "sub") return a[0] - a[1];
  if (op == "div") {
    if (a[1] == 0 || a[0] % a[1] != 0) throw LedgerError("inexact division");
    return a[0] / a[1];
  }
  if (op == "ceil_div") {
    if (a[1] <= 0) throw LedgerError("bad divisor");
    mpz_class q;
    mpz_cdiv_q(q.get_mpz_t(), a[0].get_mpz_t(), a[1].get_mpz_t());
    return q;
  }
  if (op == "eq") return a[0] == a[1] ? 1 : 0;
  if (op == "le") return a[0] <= a[1] ? 1 : 0;
  if (op == "lt") return a[0] < a[1] ? 1 : 0;
  throw LedgerError("unknown operation " + op);
}

struct Env {
  std::map<std::string, mpz_class> v;
  mpz_class get(const std::string& s) const {
    if (is_literal(s)) return mpz_class(s);
    auto it = v.find(s);
    if (it == v.end()) throw LedgerError("unknown operand " + s);
    return it->second;
  }
};

class Chain {
 public:
  explicit Chain(BoundCertificate& c) : c_(c) {
    for (auto& [k, val] : c.inputs) env_.v[k] = mpz_class(val);
  }
  mpz_class add(const std::string& name, const std::string& formula, const std::string& op,
                const std::vector<std::string>& args, const std::string& anchor) {
    std::vector<mpz_class> a;
    for (auto& s : args) a.push_back(env_.get(s));
    mpz_class r = eval_op(op, a);
    if ((op == "le" || op == "lt" || op == "eq") && r != 1) throw LedgerError("inequality fails: " + formula);
    env_.v[name] = r;
    c_.steps.push_back({name, formula, op, args, r.get_str(), anchor});
    return r;
  }

 private:
  BoundCertificate& c_;
  Env env_;
};

const char* kTenTen = "30000000000";
const char* kThreeNine = "3000000000";
const char* kTenThirteen = "10000000000000";

}  // namespace

const LedgerStep& BoundCertificate::step(const std::string& name) const {
  for (auto& s : steps)
    if (s.name == name) return s;
  throw LedgerError("no step " + name);
}

mpz_class BoundCertificate::value(const std::string& name) const { return mpz_class(step(name).value); }

nlohmann::json BoundCertificate::to_json() const {
  nlohmann::json j;
  j["kind"] = kind;
  j["inputs"] = nlohmann::json::object();
  for (auto& [k, v] : inputs) j["inputs"][k] = v;
  j["assertions"] = assertions;
  j["steps"] = nlohmann::json::array();
  for (auto& s : steps)
    j["steps"].push_back({{"name", s.name}, {"formula", s.formula}, {"op", s.op}, {"args", s.args},
                          {"value", s.value}, {"anchor", s.anchor}});
  j["final"] = final_step;
  j["final_value"] = steps.empty() ? "" : step(final_step).value;
  j["rounding"] = rounding;
  return j;
}

BoundCertificate BoundCertificate::from_json(const nlohmann::json& j) {
  BoundCertificate c;
  c.kind = j.at("kind");
  for (auto& [k, v] : j.at("inputs").items()) c.inputs[k] = v.get<std::string>();
  c.assertions = j.at("assertions").get<std::vector<std::string>>();
  for (auto& s : j.at("steps"))
    c.steps.push_back({s.at("name"), s.at("formula"), s.at("op"), s.at("args").get<std::vector<std::string>>(),
                       s.at("value"), s.at("anchor")});
  c.final_step = j.at("final");
  c.rounding = j.at("rounding");
  return c;
}

bool BoundCertificate::replay(std::string* why) const {
  try {
    Env env;
    for (auto& [k, v] : inputs) env.v[k] = mpz_class(v);
    for (auto& s : steps) {
      std::vector<mpz_class> a;
      for (auto& x : s.args) a.push_back(env.get(x));
      mpz_class r = eval_op(s.op, a);
      if (r.get_str() != s.value) {
        if (why) *why = "step " + s.name + " evaluates to " + r.get_str() + " not " + s.value;
        return false;
      }
      if ((s.op == "le" || s.op == "lt" || s.op == "eq") && r != 1) {
        if (why) *why = "inequality " + s.name + " fails";
        return false;
      }
      env.v[s.name] = r;
    }
    step(final_step);
  } catch (const std::exception& e) {
    if (why) *why = e.what();
    return false;
  }
  return true;
}

std::string BoundCertificate::render_text() const {
  std::ostringstream o;
  o << kind << "\n";
  for (auto& [k, v] : inputs) o << "  input " << k << " = " << v << "\n";
  for (auto& a : assertions) o << "  assumes " << a << "\n";
  for (auto& s : steps) o << "  " << s.name << ": " << s.formula << " = " << s.value << "\n";
  o << "  bound: " << step(final_step).value << "\n";
  if (!rounding.empty()) o << "  rounding: " << rounding << "\n";
  return o.str();
}

std::vector<int> islands_crossed(bool square, int type) {
  std::vector<int> r;
  for (int i = 0; i < 4; ++i)
    if (square || i != type) r.push_back(i);
  return r;
}

std::vector<std::pair<int, int>> bridges_crossed(bool square, int type) {
  static const int part[3][4] = {{0, 0, 1, 1}, {0, 1, 0, 1}, {0, 1, 1, 0}};
  std::vector<std::pair<int, int>> r;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      bool hit = square ? part[type][i] != part[type][j] : (i != type && j != type);
      if (hit) r.push_back({i, j});
    }
  return r;
}

FaceCount faces_after_cut(const DiscCensus& c) {
  int sq_types = 0;
  for (long n : c.squares) {
    if (n < 0) throw LedgerError("negative disc count");
    sq_types += n > 0;
  }
  for (long n : c.triangles)
    if (n < 0) throw LedgerError("negative disc count");
  if (sq_types > 1) throw LedgerError("inadmissible census: two square types");
  FaceCount f;
  std::array<int, 4> island_types{};
  std::map<std::pair<int, int>, int> bridge_types;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) bridge_types[{i, j}] = 0;
  int present = 0;
  auto take = [&](bool square, int type, long n) {
    if (n == 0) return;
    ++present;
    for (int i : islands_crossed(square, type)) ++island_types[i];
    for (auto b : bridges_crossed(square, type)) ++bridge_types[b];
    // only the two outermost copies bound non-parallelity pieces
    f.disc_faces += std::min(n, 2L) * (square ? 25 : 16);
  };
  for (int r = 0; r < 4; ++r) take(false, r, c.triangles[r]);
  for (int j = 0; j < 3; ++j) take(true, j, c.squares[j]);
  for (int t : island_types) f.island_faces += 1 + t;
  for (auto& [b, t] : bridge_types) f.bridge_faces += 1 + t;
  f.region_faces = 4 * 4;
  f.faces = f.island_faces + f.bridge_faces + f.region_faces + f.disc_faces;
  f.non_parallelity_pieces = 1 + present;
  return f;
}

namespace {

void face_chain(Chain& ch) {
  FaceCount mx = faces_after_cut({{2, 2, 2, 2}, {2, 0, 0}});
  ch.add("triangle_polygons", "6 annulus quadrilaterals + 10 cap polygons", "add", {"6", "10"},
         "flat polygons of a normal triangle");
  ch.add("square_polygons", "8 annulus quadrilaterals + 17 cap polygons", "add", {"8", "17"},
         "flat polygons of a normal square");
  ch.add("uncut_faces", "4 island + 6 bridge + 4x4 region faces", "add", {"4", "6", "16"}, "faces of an uncut 0-handle");
  ch.add("disc_faces", "16 x 8 + 25 x 2", "add",
         {std::to_string(16 * 8), std::to_string(25 * 2)}, "faces from doubled triangles and square");
  ch.add("disc_faces_check", "disc faces equal the census count", "eq", {"disc_faces", std::to_string(mx.disc_faces)},
         "census cross-check");
  ch.add("cut_faces", "4 x 5 + 22 + 4 x 4 + disc_faces", "add", {"20", "22", "16", "disc_faces"},
         "faces of a non-parallelity 0-handle piece");
  ch.add("cut_faces_census", "cut faces equal the census count", "eq", {"cut_faces", std::to_string(mx.faces)},
         "census cross-check");
}

}  // namespace

BoundCertificate main_bound(long c) {
  if (c < 3) throw LedgerError("crossing count must be at least 3");
  BoundCertificate cert;
  cert.kind = "main-bound";
  cert.inputs["c"] = std::to_string(c);
  cert.rounding = "(14/3) carried exactly as 14 over 3; the product with 67968^2 is an integer";
  Chain ch(cert);
  face_chain(ch);
  ch.add("arc_budget", "6 x 48 x cut_faces", "mul", {"6", "48", "cut_faces"}, "straight arcs per 0-handle");
  ch.add("per_handle_crossings", "arc_budget^2", "mul", {"arc_budget", "arc_budget"}, "crossings per 0-handle");
  ch.add("four_c", "4c", "mul", {"4", "c"}, "0-handles at crossings");
  ch.add("zero_handles", "4c + 2", "add", {"four_c", "2"}, "0-handles with exceptional pair");
  ch.add("zero_handles_x3", "3 (4c + 2)", "mul", {"3", "zero_handles"}, "");
  ch.add("fourteen_c", "14c", "mul", {"14", "c"}, "");
  ch.add("zero_handle_bound", "3(4c+2) <= 14c", "le", {"zero_handles_x3", "fourteen_c"}, "4c+2 at most (14/3)c");
  ch.add("per_c_x3", "14 x arc_budget^2", "mul", {"14", "per_handle_crossings"}, "");
  ch.add("per_c", "(14/3) x arc_budget^2", "div", {"per_c_x3", "3"}, "crossings per unit c");
  ch.add("per_c_below", "per_c < 3 x 10^10", "lt", {"per_c", kTenTen}, "main constant");
  ch.add("total", "per_c x c", "mul", {"per_c", "c"}, "crossing bound for the companion diagram");
  ch.add("ten_ten_c", "3 x 10^10 x c", "mul", {kTenTen, "c"}, "");
  ch.add("total_below", "total < 3 x 10^10 x c", "lt", {"total", "ten_ten_c"}, "");
  ch.add("closing", "152 x 3 x 10^10", "mul", {"152", kTenTen}, "composite with the connected-sum constant");
  ch.add("closing_below", "152 x 3 x 10^10 < 10^13", "lt", {"closing", kTenThirteen}, "");
  cert.final_step = "total";
  return cert;
}

BoundCertificate cable_bound(long c_k, long t) {
  if (c_k < 0) throw LedgerError("negative crossing count");
  BoundCertificate cert;
  cert.kind = "cable-bound";
  cert.inputs["c_k"] = std::to_string(c_k);
  cert.inputs["t_abs"] = std::to_string(t < 0 ? -t : t);
  cert.assertions = {"the blackboard-framed boundary curve meets each 0-handle in at most two arcs"};
  cert.rounding = "2048 x 14/3 rounded up to the next integer";
  Chain ch(cert);
  face_chain(ch);
  ch.add("sum", "c(K) + |t|", "add", {"c_k", "t_abs"}, "");
  ch.add("kinked_crossings", "2c(K) + 2|t|", "mul", {"2", "sum"}, "diagram after kinks");
  ch.add("zero_handles", "4 c(D')", "mul", {"4", "kinked_crossings"}, "0-handles without exceptional pair");
  ch.add("eight_sum", "8 (c(K) + |t|)", "mul", {"8", "sum"}, "");
  ch.add("zero_handles_bound", "4 c(D') <= 8 (c(K) + |t|)", "le", {"zero_handles", "eight_sum"}, "");
  // Mobius-bundle case of the main argument
  ch.add("case1_arcs", "2 x 8 + 8 x 6", "add", {"16", "48"}, "arcs of the 2-cable per 0-handle");
  ch.add("case1_sq", "64 x 64", "mul", {"case1_arcs", "case1_arcs"}, "");
  ch.add("case1_per_handle", "64 x 64 / 2", "div", {"case1_sq", "2"}, "crossings per 0-handle");
  ch.add("case1_x14", "2048 x 14", "mul", {"case1_per_handle", "14"}, "");
  ch.add("case1_per_c", "ceil(2048 x 14 / 3)", "ceil_div", {"case1_x14", "3"}, "2-cable crossings per unit c(D)");
  // 2-cable theorem, first case
  ch.add("gamma_boundary_disc", "6 + 5", "add", {"6", "5"}, "1-cells from a disc meeting the boundary");
  ch.add("gamma_cells", "2 x 11 + 64", "add", {"gamma_boundary_disc", "gamma_boundary_disc", "case1_arcs"},
         "straight 1-cells per 0-handle");
  ch.add("gamma_pairs", "86 x 85", "mul", {"gamma_cells", "85"}, "");
  ch.add("cable_case1", "(86 x 85 / 2) x 8", "mul", {"gamma_pairs", "4"}, "crossings per unit c(K)+|t|");
  // second case
  ch.add("four_triangles", "4 x 16", "mul", {"4", "triangle_polygons"}, "");
  ch.add("case2a_arcs", "4 x 16 + 25 + 84", "add", {"four_triangles", "square_polygons", "84"},
         "arcs per 0-handle; 84 is quoted for discs meeting the boundary");
  ch.add("case2a_pairs", "173 x 172", "mul", {"case2a_arcs", "172"}, "");
  ch.add("case2a_per_cd", "(173 x 172 / 2) x 4", "mul", {"case2a_pairs", "2"}, "crossings per unit c(D')");
  ch.add("case2a_per_sum", "2 x 59512", "mul", {"2", "case2a_per_cd"}, "cable constant");
  ch.add("cable_constant", "max(29240, 119024)", "max", {"cable_case1", "case2a_per_sum"}, "");
  ch.add("bound", "cable_constant x (c(K) + |t|)", "mul", {"cable_constant", "sum"}, "companion crossing bound");
  ch.add("closure", "119024 x 2 x 9558", "mul", {"cable_constant", "2", "case1_per_c"}, "Mobius case of the main bound");
  ch.add("closure_below", "119024 x 2 x 9558 < 3 x 10^9", "lt", {"closure", kThreeNine}, "");
  cert.final_step = "bound";
  return cert;
}

BoundCertificate connected_sum_chain(long c_k, const PipelineFlags& f) {
  if (!f.no_exceptional_handles || !f.annular_simplifications_exhausted || !f.non_meridional_annuli_asserted)
    throw LedgerError("missing pipeline flags");
  if (c_k < 0) throw LedgerError("negative crossing count");
  BoundCertificate cert;
  cert.kind = "connected-sum-chain";
  cert.inputs["c_k"] = std::to_string(c_k);
  cert.assertions = {"handle structure built without exceptional handles",
                     "annular simplifications applied until none remain",
                     "the horizontal boundary annuli do not have meridional slope"};
  cert.rounding = "none; 152 is an external constant for the projected diagram";
  Chain ch(cert);
  ch.add("bound", "152 c(K)", "mul", {"152", "c_k"}, "diagram of the companion link");
  cert.final_step = "bound";
  return cert;
}

std::vector<ConstantCheck> verify_constants(const MeasuredCounts& m) {
  std::vector<ConstantCheck> out;
  auto main = main_bound(3);
  auto cable = cable_bound(1, 0);
  std::string why;
  if (!main.replay(&why) || !cable.replay(&why)) throw LedgerError("certificate replay failed: " + why);
  auto put = [&](const std::string& name, const std::string& quoted, const mpz_class& v) {
    out.push_back({name, quoted, v.get_str(), v.get_str() == quoted});
  };
  auto measured = [&](const std::string& name, const std::string& quoted, long meas, const mpz_class& chain) {
    mpz_class v = meas >= 0 ? mpz_class(meas) : chain;
    bool agree = meas < 0 || v == chain;
    out.push_back({name, quoted, v.get_str(), agree && v.get_str() == quoted});
  };
  measured("triangle polygons", "16", m.triangle_polygons, main.value("triangle_polygons"));
  measured("square polygons", "25", m.square_polygons, main.value("square_polygons"));
  measured("uncut 0-handle faces", "26", m.uncut_faces, main.value("uncut_faces"));
  FaceCount mx = faces_after_cut({{2, 2, 2, 2}, {2, 0, 0}});
  put("disc faces", "178", main.value("disc_faces"));
  put("disc faces (census)", "178", mx.disc_faces);
  put("cut 0-handle faces", "236", main.value("cut_faces"));
  put("cut 0-handle faces (census)", "236", mx.faces);
  put("non-parallelity pieces", "6", mx.non_parallelity_pieces);
  put("2-cable arcs per 0-handle", "64", cable.value("case1_arcs"));
  put("1-cells per 0-handle", "86", cable.value("gamma_cells"));
  put("arcs per 0-handle (second case)", "173", cable.value("case2a_arcs"));
  put("2-cable crossings per 0-handle", "2048", cable.value("case1_per_handle"));
  put("2-cable crossings per c(D)", "9558", cable.value("case1_per_c"));
  put("cable first case", "29240", cable.value("cable_case1"));
  put("cable second case per c(D')", "59512", cable.value("case2a_per_cd"));
  put("arc budget", "67968", main.value("arc_budget"));
  put("cable constant", "119024", cable.value("cable_constant"));
  put("(14/3) x 67968^2", "21558362112", main.value("per_c"));
  put("119024 x 2 x 9558", "2275262784", cable.value("closure"));
  put("21558362112 < 3 x 10^10", "1", main.value("per_c_below"));
  put("2275262784 < 3 x 10^9", "1", cable.value("closure_below"));
  put("152 x 3 x 10^10 < 10^13", "1", main.value("closing_below"));
  return out;
}

}  // namespace kx
