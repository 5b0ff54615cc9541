#pragma once
// Knot diagrams as signed 4-valent planar graphs (PD codes).

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace kx {

// Thrown for malformed or inconsistent diagram input.
struct DiagramError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One crossing X[a,b,c,d]: labels counterclockwise from the incoming
// under-strand. Positions 0 and 2 are under, 1 and 3 are over.
struct Crossing {
  std::array<int, 4> label{};
  int sign = 0;  // +1 or -1
};

struct Diagram {
  std::vector<Crossing> crossings;

  int crossing_count() const { return static_cast<int>(crossings.size()); }
  int arc_count() const { return 2 * crossing_count(); }

  // Position of the other occurrence of the label at (x, i).
  std::pair<int, int> partner(int x, int i) const;
  // True if label at (x, i) is oriented out of crossing x.
  bool outgoing(int x, int i) const;
  // Number of link components.
  int component_count() const;
  // Faces of the planar embedding, each as a cycle of (crossing, position).
  std::vector<std::vector<std::pair<int, int>>> faces() const;

  // Cached partner table, filled by validate().
  std::vector<std::array<std::pair<int, int>, 4>> partner_;
  // Orientation per (crossing, position): true when outgoing.
  std::vector<std::array<bool, 4>> out_;
};

struct DiagramStats {
  int crossing_count = 0;
  int writhe = 0;
};

// Parse whitespace separated X[a,b,c,d] tuples. An optional sign marker
// may follow each tuple: "+" or "-". Missing signs are inferred from the
// orientation obtained by walking the under-strands.
Diagram parse_pd(const std::string& text);

// Signed Gauss code: tokens like O1+ U2- ...; each crossing appears once as
// O and once as U with the same sign.
Diagram parse_gauss(const std::string& text);

// Checks multiplicity, connectivity and planarity; fills caches.
void validate(Diagram& d);

int writhe(const Diagram& d);
DiagramStats stats(const Diagram& d);

// Inserts |target - writhe| kinks on the lowest labelled arc.
Diagram add_kinks(const Diagram& d, int target_writhe);

std::string to_pd(const Diagram& d);
nlohmann::json to_json(const Diagram& d);
Diagram diagram_from_json(const nlohmann::json& j);

// Closure of a braid word on n strands: generator +i or -i means sigma_i
// (1-based). Also returns an axis-aligned grid embedding when requested.
struct GridEmbedding {
  // For each arc label, the polyline from tail crossing to head crossing.
  std::vector<std::vector<std::array<long, 2>>> arc_path;  // index label-1
  std::vector<std::array<long, 2>> crossing_point;
};
Diagram braid_closure(int strands, const std::vector<int>& word,
                      GridEmbedding* embedding = nullptr);

// Random knot diagram from a closed braid with crossing count in [cmin,cmax].
Diagram random_knot_diagram(unsigned long seed, int cmin, int cmax,
                            std::vector<int>* word_out = nullptr,
                            int* strands_out = nullptr);

}  // namespace kx
