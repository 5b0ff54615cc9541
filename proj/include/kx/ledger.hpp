#pragma once
// Exact integer bookkeeping of the constant chains. Every certificate step
// carries a structured expression that replay() re-evaluates.

#include <array>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>
#include <json.hpp>

namespace kx {

struct LedgerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CoreCurveBudget {
  int arcs_per_1handle = 24;
  int arcs_per_0handle = 48;
  int arcs_per_face = 6;
  int zero_to_one = 4;  // components of a 0-handle meeting 1-handles
  int one_to_two = 3;   // components of a 1-handle meeting 2-handles
};

// An operand is a literal integer ("123") or the name of an earlier step or input.
struct LedgerStep {
  std::string name;
  std::string formula;  // human readable
  std::string op;       // add sub mul div ceil_div max eq le lt
  std::vector<std::string> args;
  std::string value;  // evaluated integer (1/0 for comparisons)
  std::string anchor;
};

struct BoundCertificate {
  std::string kind;
  std::map<std::string, std::string> inputs;
  std::vector<std::string> assertions;
  std::vector<LedgerStep> steps;
  std::string final_step;
  std::string rounding;

  const LedgerStep& step(const std::string& name) const;
  mpz_class value(const std::string& name) const;
  nlohmann::json to_json() const;
  static BoundCertificate from_json(const nlohmann::json& j);
  // Re-evaluates every step; false with a reason on the first mismatch.
  bool replay(std::string* why = nullptr) const;
  std::string render_text() const;
};

// Multiset of normal discs in one unexceptional 0-handle: triangle type r
// cuts off region r, square type j separates island pairs
// {0,1|2,3}, {0,2|1,3}, {0,3|1,2}.
struct DiscCensus {
  std::array<long, 4> triangles{};
  std::array<long, 3> squares{};
};
struct FaceCount {
  long faces = 0;
  long disc_faces = 0;
  long island_faces = 0;
  long bridge_faces = 0;
  long region_faces = 0;
  long non_parallelity_pieces = 0;
};
FaceCount faces_after_cut(const DiscCensus& c);
// Island and bridge faces crossed by each disc type: islands are vertices
// of K4, bridges its edges (i<j), regions its faces.
std::vector<int> islands_crossed(bool square, int type);
std::vector<std::pair<int, int>> bridges_crossed(bool square, int type);

BoundCertificate main_bound(long c);
BoundCertificate cable_bound(long c_k, long t);

struct PipelineFlags {
  bool no_exceptional_handles = false;
  bool annular_simplifications_exhausted = false;
  bool non_meridional_annuli_asserted = false;
};
BoundCertificate connected_sum_chain(long c_k, const PipelineFlags& flags);

// Counts measured elsewhere (geometry) that the constant check consumes.
struct MeasuredCounts {
  long triangle_polygons = -1;
  long square_polygons = -1;
  long uncut_faces = -1;
};
struct ConstantCheck {
  std::string name;
  std::string quoted;
  std::string derived;
  bool ok = false;
};
std::vector<ConstantCheck> verify_constants(const MeasuredCounts& m);

}  // namespace kx
