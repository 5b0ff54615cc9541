// kx: batch front-end over the diagram, handle, normal surface,
// parallelity, geometry and ledger modules.

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "kx/diagram.hpp"
#include "kx/geometry.hpp"
#include "kx/handles.hpp"
#include "kx/ledger.hpp"
#include "kx/normal.hpp"
#include "kx/parallelity.hpp"

using namespace kx;
using nlohmann::json;

namespace {

const char* kVersion = "1.0.0";

enum Exit { kOk = 0, kConfig = 2, kInput = 3, kResource = 4, kConstants = 5 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;
  std::string input;
  bool exceptional = false;
  std::int64_t weight_bound = 4;
  std::int64_t node_limit = 200000000;
  std::string format = "json";
  bool assert_incompressible = false;
  bool assert_no_essential_annulus = false;
  bool assert_non_meridional = false;
  bool assert_annular_exhausted = false;
  std::string out;
  std::string surface = "peripheral";
  int copies = 1;
  long c = -1;
  long t = 0;
  std::string chain = "main";
};

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int n = 0;
  if (!EVP_Digest(data.data(), data.size(), md, &n, EVP_sha256(), nullptr)) throw std::runtime_error("digest failed");
  std::ostringstream o;
  for (unsigned i = 0; i < n; ++i) o << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return o.str();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

// PD text, Gauss code, a diagram JSON object, or "braid <strands>: <word>".
Diagram read_diagram(const std::string& text, GridEmbedding* emb = nullptr) {
  std::string t = trim(text);
  if (t.empty()) throw InputError("empty diagram");
  if (t[0] == '{') return diagram_from_json(json::parse(t));
  if (t.rfind("braid", 0) == 0) {
    std::istringstream in(t.substr(5));
    int strands = 0;
    char colon = 0;
    in >> strands >> colon;
    if (colon != ':') throw InputError("braid input is 'braid <strands>: <word>'");
    std::vector<int> word;
    int g;
    while (in >> g) word.push_back(g);
    return braid_closure(strands, word, emb);
  }
  if (t.find("X[") != std::string::npos) return parse_pd(t);
  return parse_gauss(t);
}

json census_json(const HandleStructure& h) {
  auto c = census(h);
  json j;
  j["handles"] = c.handles;
  j["euler"] = c.euler;
  j["seams"] = c.seams;
  j["exceptional_zero_handles"] = c.exceptional_zero;
  j["boundary_components"] = c.boundary.size();
  j["boundary_tori"] = c.boundary_tori();
  j["single_torus_boundary"] = c.single_torus_boundary();
  return j;
}

Coords surface_coords(const RunConfig& cfg, const NormalSystem& s) {
  Coords x;
  if (cfg.surface == "peripheral") {
    x = s.link(-1);
  } else {
    x = s.coords_from_json(json::parse(slurp(cfg.surface)));
  }
  for (auto& v : x) v *= cfg.copies;
  std::string why;
  if (!s.admissible(x, &why)) throw InputError("surface not admissible: " + why);
  return x;
}

void need(bool flag, const std::string& name, const std::string& cmd) {
  if (!flag) throw ConfigError(cmd + " needs --" + name + " (hypothesis cannot be checked by the tool)");
}

json run(const RunConfig& cfg, const std::string& input_text, int* status) {
  json r;
  const std::string& cmd = cfg.command;
  if (cmd == "verify-constants") {
    auto p = canonical_zero_handle();
    MeasuredCounts m;
    m.uncut_faces = static_cast<long>(p.faces.size());
    m.triangle_polygons =
        static_cast<long>(realize_normal_disc(p, triangle_curve(p, 0, std::vector<Q>(6, Q(1, 3))), 0).polygons.size());
    m.square_polygons =
        static_cast<long>(realize_normal_disc(p, square_curve(p, 0, std::vector<Q>(8, Q(1, 3))), 0).polygons.size());
    bool all = true;
    for (auto& c : verify_constants(m)) {
      r["checks"].push_back({{"name", c.name}, {"quoted", c.quoted}, {"derived", c.derived}, {"ok", c.ok}});
      all = all && c.ok;
    }
    r["all_confirmed"] = all;
    if (!all) *status = kConstants;
    return r;
  }
  if (cmd == "bound") {
    BoundCertificate cert;
    if (cfg.chain == "main") {
      if (cfg.c < 0) throw ConfigError("bound needs --c");
      cert = main_bound(cfg.c);
    } else if (cfg.chain == "cable") {
      if (cfg.c < 0) throw ConfigError("bound needs --c");
      cert = cable_bound(cfg.c, cfg.t);
    } else if (cfg.chain == "connected-sum") {
      if (cfg.c < 0) throw ConfigError("bound needs --c");
      need(cfg.assert_non_meridional, "assert-non-meridional", "bound --chain connected-sum");
      need(cfg.assert_annular_exhausted, "assert-annular-exhausted", "bound --chain connected-sum");
      if (cfg.exceptional) throw ConfigError("the connected-sum chain uses a structure without exceptional handles");
      PipelineFlags f{true, cfg.assert_annular_exhausted, cfg.assert_non_meridional};
      cert = connected_sum_chain(cfg.c, f);
    } else {
      throw ConfigError("unknown chain " + cfg.chain);
    }
    r["certificate"] = cert.to_json();
    return r;
  }
  if (cmd == "project") {
    auto j = json::parse(input_text);
    std::vector<StraightArcPath> paths;
    for (auto& p : j.at("paths")) paths.push_back(path_from_json(p));
    auto c = project_and_count(paths);
    r = c.to_json();
    return r;
  }
  GridEmbedding emb;
  Diagram d = read_diagram(input_text, &emb);
  if (cmd == "parse") {
    r["diagram"] = to_json(d);
    r["pd"] = to_pd(d);
    auto st = stats(d);
    r["crossings"] = st.crossing_count;
    r["writhe"] = st.writhe;
    r["components"] = d.component_count();
    return r;
  }
  HandleStructure h = build_exterior_handles(d, cfg.exceptional);
  if (cmd == "build-handles") {
    r["census"] = census_json(h);
    r["zero_handles"] = h.zero.size();
    r["convention_ok"] = verify_convention(h).ok();
    r["structure"] = to_json(h);
    if (!emb.crossing_point.empty()) {
      auto a = assign_affine(h, d, emb);
      int star = 0;
      for (auto& z : a.zero) star += star_shaped(z, z.star_center) && faces_planar_convex(z);
      r["affine"] = {{"zero_handles", a.zero.size()}, {"star_shaped", star}, {"one_handles", a.one.size()}};
    }
    return r;
  }
  NormalSystem s(h);
  if (cmd == "enumerate") {
    if (cfg.weight_bound < 0) throw ConfigError("weight bound must be non-negative");
    EnumOptions opt;
    opt.weight_bound = cfg.weight_bound;
    opt.node_limit = cfg.node_limit;
    auto all = enumerate_admissible(s, opt);
    r["disc_types"] = s.size();
    r["weight_bound"] = cfg.weight_bound;
    r["count"] = all.size();
    r["surfaces"] = json::array();
    for (auto& x : all) {
      auto ns = realize_surface(s, x);
      r["surfaces"].push_back({{"coords", s.coords_json(x)}, {"weight", ns.weight}, {"euler", ns.euler},
                               {"orientable", ns.orientable}, {"connected", ns.connected}});
    }
    return r;
  }
  Coords x = surface_coords(cfg, s);
  CutComplex c = cut_along(s, x);
  if (cmd == "cut") {
    r["census"] = census_json(c.h);
    r["euler_before"] = c.euler_before;
    r["surface_euler"] = c.surface_euler;
    r["pieces"] = c.pieces.size();
    r["components"] = handle_components(c.h).size();
    r["convention_ok"] = verify_convention(c.h).ok();
    return r;
  }
  if (cmd == "bundle") {
    auto flags = find_parallelity_handles(c.h);
    r["flagged"] = json::array();
    for (auto& f : flags) r["flagged"].push_back({f.handle.index, f.handle.id});
    r["bundle"] = assemble_bundle(c.h).to_json();
    return r;
  }
  if (cmd == "simplify") {
    need(cfg.assert_no_essential_annulus, "assert-no-essential-annulus", cmd);
    auto log = simplify_annular(c.h);
    r["steps"] = log.steps;
    r["lemma_ok"] = log.lemma_ok;
    r["before"] = census_json(c.h);
    r["after"] = census_json(log.result);
    r["assertions"] = {"no essential annulus in the parallelity handles"};
    return r;
  }
  if (cmd == "case2a") {
    need(cfg.assert_incompressible, "assert-incompressible", cmd);
    need(cfg.assert_no_essential_annulus, "assert-no-essential-annulus", cmd);
    if (!cfg.exceptional) throw ConfigError("case2a needs --exceptional");
    r["assertions"] = {"the surface is incompressible", "no essential annulus in the parallelity handles"};
    r["components"] = json::array();
    int attached = 0;
    for (auto& comp : handle_components(c.h)) {
      bool exc = false;
      for (int k : comp[1])
        if (c.h.one[k].exceptional) exc = true;
      if (!exc) continue;
      auto sub = extract_component(c.h, comp);
      json e;
      e["before"] = census_json(sub);
      HandleStructure base = sub;
      bool discs = true;
      for (auto& b : assemble_bundle(sub).components) discs = discs && b.base == "disc";
      if (discs) {
        base = replace_disc_bundles(sub);
        e["replaced"] = census_json(base);
      } else {
        e["replaced"] = nullptr;
        e["note"] = "bundle has a non-disc component; replacement skipped";
      }
      // only the component on the free boundary torus carries free exceptional gaps
      try {
        auto st = attach_solid_torus(base);
        e["after"] = census_json(st.h);
        e["max_islands"] = st.max_islands;
        e["max_alphas"] = st.max_alphas;
        e["hypotheses_ok"] = st.hypotheses_ok;
        ++attached;
      } catch (const ParallelityError& err) {
        e["after"] = nullptr;
        e["skipped"] = err.what();
      }
      r["components"].push_back(e);
    }
    if (!attached) throw InputError("no component meets the free boundary through the exceptional handles");
    r["attached"] = attached;
    return r;
  }
  throw ConfigError("unknown command " + cmd);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kx: handle structures, normal surfaces and crossing-number ledgers"};
  RunConfig cfg;
  app.require_subcommand(1, 1);
  const char* cmds[] = {"parse", "build-handles", "enumerate", "cut", "bundle", "simplify", "case2a", "project", "bound",
                        "verify-constants"};
  for (const char* name : cmds) {
    auto* sc = app.add_subcommand(name);
    sc->add_option("--input", cfg.input, "input file");
    sc->add_flag("--exceptional", cfg.exceptional, "add the exceptional handles");
    sc->add_option("--weight-bound", cfg.weight_bound, "enumeration weight bound");
    sc->add_option("--node-limit", cfg.node_limit, "enumeration search limit");
    sc->add_option("--format", cfg.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    sc->add_flag("--assert-incompressible", cfg.assert_incompressible);
    sc->add_flag("--assert-no-essential-annulus", cfg.assert_no_essential_annulus);
    sc->add_flag("--assert-non-meridional", cfg.assert_non_meridional);
    sc->add_flag("--assert-annular-exhausted", cfg.assert_annular_exhausted);
    sc->add_option("--out", cfg.out, "output file (default stdout)");
    sc->add_option("--surface", cfg.surface, "peripheral or a coordinate file");
    sc->add_option("--copies", cfg.copies, "multiple of the surface")->check(CLI::PositiveNumber);
    sc->add_option("--c", cfg.c, "crossing count");
    sc->add_option("--t", cfg.t, "twisting");
    sc->add_option("--chain", cfg.chain, "main, cable or connected-sum");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  int status = kOk;
  try {
    std::string text;
    bool needs_input = cfg.command != "bound" && cfg.command != "verify-constants";
    if (needs_input) {
      if (cfg.input.empty()) throw ConfigError(cfg.command + " needs --input");
      text = slurp(cfg.input);
    } else {
      std::ostringstream k;
      k << cfg.command << " chain=" << cfg.chain << " c=" << cfg.c << " t=" << cfg.t;
      text = k.str();
    }
    json result = run(cfg, text, &status);
    json doc;
    doc["tool"] = "kx";
    doc["version"] = kVersion;
    doc["command"] = cfg.command;
    doc["input_sha256"] = sha256_hex(text);
    doc["result"] = result;
    std::string body;
    if (cfg.format == "text") {
      std::ostringstream o;
      o << "kx " << kVersion << " " << cfg.command << " input " << sha256_hex(text) << "\n";
      if (cfg.command == "bound") {
        o << BoundCertificate::from_json(result["certificate"]).render_text();
      } else if (cfg.command == "verify-constants") {
        for (auto& c : result["checks"])
          o << (c["ok"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>() << " = "
            << c["derived"].get<std::string>() << " (quoted " << c["quoted"].get<std::string>() << ")\n";
      } else {
        o << result.dump(2) << "\n";
      }
      body = o.str();
    } else {
      body = doc.dump(2) + "\n";
    }
    if (cfg.out.empty()) {
      std::cout << body;
    } else {
      std::ofstream f(cfg.out, std::ios::binary);
      if (!f) throw ConfigError("cannot write " + cfg.out);
      f << body;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const ResourceLimit& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return kResource;
  } catch (const LedgerError& e) {
    std::cerr << "ledger error: " << e.what() << "\n";
    return cfg.command == "verify-constants" ? kConstants : kInput;
  } catch (const std::exception& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInput;
  }
  return status;
}
