// dyadic-lab: command-line front end. Exit codes: 0 pass, 1 a mathematical
// check failed, 2 bad input or usage.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include <CLI11.hpp>

#include "dyadic/io.hpp"

namespace fs = std::filesystem;
using namespace dyadic;
using io::json;

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kGenMaxDepth = 16;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  fs::path output = ".";
  bool record_timing = false;
  std::chrono::steady_clock::time_point start;
};

std::string num(double v) { return io::format_double(v); }

std::uint64_t default_seed() {
  const char* env = std::getenv("DYADIC_SEED");
  if (env == nullptr || *env == '\0') return 42;
  char* end = nullptr;
  const auto value = std::strtoull(env, &end, 10);
  if (*end != '\0') throw UsageError(std::string("DYADIC_SEED is not an unsigned integer: ") + env);
  return value;
}

json manifest(const Globals& g, const std::string& command, json config, std::optional<std::uint64_t> seed,
              json outcome) {
  json m{{"command", command},
         {"config", std::move(config)},
         {"version", DYADIC_VERSION},
         {"seed", seed ? json(*seed) : json(nullptr)},
         {"outcome", std::move(outcome)}};
  if (g.record_timing) {
    m["duration_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - g.start).count();
  }
  return m;
}

void emit(const Globals& g, const fs::path& name, json body, json man) {
  body["manifest"] = std::move(man);
  const fs::path path = name.is_absolute() ? name : g.output / name;
  io::write_json(path, body);
  std::printf("wrote %s\n", path.string().c_str());
}

NodeId parse_node(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("node must be written k,i: " + text);
  try {
    std::size_t used = 0;
    const int k = std::stoi(text.substr(0, comma), &used);
    if (used != comma) throw std::invalid_argument("k");
    const std::string rest = text.substr(comma + 1);
    const auto i = std::stoull(rest, &used);
    if (used != rest.size() || rest.front() == '-') throw std::invalid_argument("i");
    return NodeId{k, static_cast<std::size_t>(i)};
  } catch (const std::logic_error&) {
    throw UsageError("node must be written k,i: " + text);
  }
}

std::pair<int, int> parse_depth_range(const std::string& text) {
  try {
    std::size_t used = 0;
    const auto colon = text.find(':');
    const std::string first = text.substr(0, colon);
    const int lo = std::stoi(first, &used);
    if (used != first.size()) throw std::invalid_argument("lo");
    int hi = lo;
    if (colon != std::string::npos) {
      const std::string second = text.substr(colon + 1);
      hi = std::stoi(second, &used);
      if (used != second.size()) throw std::invalid_argument("hi");
    }
    if (hi < lo) throw UsageError("depth range is empty: " + text);
    return {lo, hi};
  } catch (const std::logic_error&) {
    throw UsageError("depth must be an integer or a range lo:hi, got " + text);
  }
}

StepFunction gaussian_function(const LatticeSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(spec.leaf_count()));
  for (auto& x : v) x = gauss(rng);
  return StepFunction::make(spec, v);
}

// ---------------------------------------------------------------------------

struct BellmanArgs {
  std::string family;
  std::optional<double> mbar;
  std::string grid;
  double tol = 1e-12;
  std::string grid_spec;
};

int verify_bellman(const Globals& g, const BellmanArgs& a) {
  if (a.family.empty() == a.grid.empty()) throw UsageError("give exactly one of --family A=<r> or --grid <file>");
  std::optional<BellmanCandidate> candidate;
  json config{{"tol", a.tol}};
  if (!a.family.empty()) {
    if (a.family.rfind("A=", 0) != 0) throw UsageError("--family expects A=<real>, got " + a.family);
    if (!a.mbar) throw UsageError("--family needs --mbar");
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(a.family.substr(2), &used);
      if (used != a.family.size() - 2) throw std::invalid_argument("A");
    } catch (const std::logic_error&) {
      throw UsageError("--family expects A=<real>, got " + a.family);
    }
    candidate = family_candidate(value, *a.mbar);
    config["family"] = {{"A", value}, {"mbar", *a.mbar}};
  } else {
    candidate = io::grid_candidate_from_json(io::read_json(a.grid));
    config["grid"] = a.grid;
  }

  GridSpec grid = GridSpec::make_default(candidate->mbar());
  if (!a.grid_spec.empty()) {
    double xmin = 0.0;
    double xmax = 0.0;
    int nx = 0;
    int ny = 0;
    char tail = 0;
    if (std::sscanf(a.grid_spec.c_str(), "%lf:%lf:%d:%d%c", &xmin, &xmax, &nx, &ny, &tail) != 4) {
      throw UsageError("--grid-spec expects xmin:xmax:nx:ny, got " + a.grid_spec);
    }
    grid = GridSpec::log_linear(candidate->mbar(), xmin, xmax, nx, ny);
    config["grid_spec"] = {{"x_min", xmin}, {"x_max", xmax}, {"nx", nx}, {"ny", ny}};
  }

  const auto report = verify_conditions(*candidate, grid, a.tol);
  for (const auto& c : report.conditions) {
    std::printf("%-17s %s  worst margin %s at (x=%s, y=%s)\n", c.name.c_str(), c.pass ? "pass" : "FAIL",
                num(c.worst_margin).c_str(), num(c.x).c_str(), num(c.y).c_str());
  }
  const bool pass = report.all_pass();
  emit(g, "bellman_report.json", json{{"report", io::to_json(report)}},
       manifest(g, "verify-bellman", config, std::nullopt, {{"pass", pass}, {"failing", report.failing()}}));
  return pass ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct LemmaArgs {
  std::string pair;
  std::string sm;
  int dim = 1;
  int depth = 4;
  std::optional<int> depth_n;
  std::optional<double> mbar;
  double tol = 1e-12;
  std::optional<std::uint64_t> seed;
};

int run_lemma(const Globals& g, const LemmaArgs& a) {
  if (!a.pair.empty() && !a.sm.empty()) throw UsageError("--pair and --sm are exclusive");
  json config{{"tol", a.tol}};
  std::optional<std::uint64_t> seed;
  AdmissiblePair pair;
  if (!a.pair.empty()) {
    const auto doc = io::read_json(a.pair);
    if (!doc.is_object() || !doc.contains("f") || !doc.contains("phi")) {
      throw ValidationError("pair file needs 'f' and 'phi' step functions");
    }
    const auto f = io::step_function_from_json(doc.at("f"));
    const auto phi = io::step_function_from_json(doc.at("phi"));
    pair = build_pair(f, phi);
    config["pair"] = a.pair;
  } else if (!a.sm.empty()) {
    pair = io::admissible_pair_from_json(io::read_json(a.sm));
    config["sm"] = a.sm;
  } else {
    seed = a.seed.value_or(default_seed());
    std::mt19937_64 rng(*seed);
    const auto spec = LatticeSpec::make(a.dim, a.depth);
    const auto f = gaussian_function(spec, rng);
    const auto phi = gaussian_function(spec, rng);
    pair = build_pair(f, phi);
    config["random"] = {{"dim", a.dim}, {"depth", a.depth}};
  }
  if (a.mbar) {
    pair.mbar = *a.mbar;
    config["mbar"] = *a.mbar;
  }
  const int depth_n = a.depth_n.value_or(pair.spec().depth);
  config["depth_n"] = depth_n;

  try {
    const auto trace = verify_key_lemma(default_candidate(pair), pair, depth_n, a.tol);
    const bool pass = trace.passed();
    std::printf("lhs %s\nrhs %s\nworst scaled node margin %s at (%d,%zu)\n%s\n", num(trace.lhs).c_str(),
                num(trace.rhs).c_str(), num(trace.worst_scaled_margin).c_str(), trace.worst_node.generation,
                trace.worst_node.index, pass ? "pass" : "FAIL");
    emit(g, "lemma_trace.json", json{{"trace", io::to_json(trace)}},
         manifest(g, "run-lemma", config, seed, {{"pass", pass}, {"lhs", trace.lhs}, {"rhs", trace.rhs}}));
    return pass ? kPass : kFail;
  } catch (const InadmissiblePairError& e) {
    std::printf("FAIL: %s\n", e.what());
    const auto first = e.report().first();
    emit(g, "lemma_trace.json", json{{"admissibility", io::to_json(e.report())}},
         manifest(g, "run-lemma", config, seed,
                  {{"pass", false}, {"inadmissible", true}, {"first_violation", first ? first->kind : ""}}));
    return kFail;
  }
}

// ---------------------------------------------------------------------------

struct DualityArgs {
  std::string f;
  std::string phi;
};

int check_duality(const Globals& g, const DualityArgs& a) {
  const auto f = io::read_step_function(a.f);
  const auto phi = io::read_step_function(a.phi);
  if (!(f.spec == phi.spec)) throw MismatchError("f and phi live on different lattices");
  const double sum = duality_sum(f, phi);
  const double bmo = bmo_norm(phi);
  const double tl = tl_norm(f);
  const double bound = kDualityConstant * bmo * tl;
  const bool holds = sum <= bound * (1.0 + 1e-9);
  json ratio_json = nullptr;
  std::string ratio_text = "undefined";
  if (bmo > 0.0 && tl > 0.0) {
    ratio_json = sum / (bmo * tl);
    ratio_text = num(sum / (bmo * tl));
  }
  std::printf("duality_sum %s\nbmo_norm(phi) %s\ntl_norm(f) %s\nbound %s\nratio %s\n%s\n", num(sum).c_str(),
              num(bmo).c_str(), num(tl).c_str(), num(bound).c_str(), ratio_text.c_str(), holds ? "pass" : "FAIL");
  const json body{{"duality_sum", sum}, {"bmo_norm_phi", bmo}, {"tl_norm_f", tl}, {"bound", bound},
                  {"ratio", ratio_json}, {"constant", kDualityConstant}};
  emit(g, "duality_report.json", body,
       manifest(g, "check-duality", {{"f", a.f}, {"phi", a.phi}}, std::nullopt, {{"pass", holds}}));
  return holds ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct SearchArgs {
  std::string depth = "6";
  int iterations = 10000;
  std::optional<std::uint64_t> seed;
  std::string strategy = "hybrid";
  int restarts = 8;
  bool trajectories = false;
};

int search_extremal(const Globals& g, const SearchArgs& a) {
  const auto [lo, hi] = parse_depth_range(a.depth);
  if (lo < 1 || hi > SearchConfig::kMaxDepth) {
    throw UsageError("search depth must lie in 1.." + std::to_string(SearchConfig::kMaxDepth));
  }
  SearchConfig base;
  base.iterations = a.iterations;
  base.seed = a.seed.value_or(default_seed());
  base.strategy = parse_strategy(a.strategy);
  base.restarts = a.restarts;
  base.record_trajectories = a.trajectories;

  bool all_pass = true;
  std::string csv = "depth,best_ratio,iterations,strategy\n";
  json rows = json::array();
  for (int depth = lo; depth <= hi; ++depth) {
    SearchConfig config = base;
    config.depth = depth;
    config.validate();
    const auto result = search(config);
    const auto cert = certify(result);
    all_pass = all_pass && cert.pass;
    std::printf("depth %d  best_ratio %s  restart %d  certify %s\n", depth, num(result.best_ratio).c_str(),
                result.best_restart, cert.pass ? "pass" : "FAIL");
    for (const auto& why : cert.failures) std::printf("  %s\n", why.c_str());

    const std::string suffix = "_d" + std::to_string(depth) + ".json";
    const json outcome{{"best_ratio", result.best_ratio}, {"certified", cert.pass}};
    emit(g, "search_result" + suffix, json{{"result", io::to_json(result)}, {"certification", io::to_json(cert)}},
         manifest(g, "search-extremal", io::to_json(config), config.seed, outcome));
    emit(g, "f_star" + suffix, io::to_json(reconstruct(result.f_star)),
         manifest(g, "search-extremal", io::to_json(config), config.seed, outcome));
    emit(g, "phi_star" + suffix, io::to_json(reconstruct(result.phi_star)),
         manifest(g, "search-extremal", io::to_json(config), config.seed, outcome));
    csv += std::to_string(depth) + "," + num(result.best_ratio) + "," + std::to_string(config.iterations) + "," +
           std::string(to_string(config.strategy)) + "\n";
    rows.push_back({{"depth", depth}, {"best_ratio", result.best_ratio}, {"certified", cert.pass}});
  }

  json config = io::to_json(base);
  config.erase("depth");
  config["depths"] = {lo, hi};
  const auto man = manifest(g, "search-extremal", config, base.seed, {{"pass", all_pass}, {"rows", rows}});
  const fs::path table = g.output / "ratio_vs_depth.csv";
  io::write_text(table, "# manifest " + man.dump() + "\n" + csv);
  std::printf("wrote %s\n", table.string().c_str());
  return all_pass ? kPass : kFail;
}

// ---------------------------------------------------------------------------

struct GenArgs {
  std::string kind = "random";
  std::string node;
  int depth = 4;
  int dim = 1;
  std::optional<std::uint64_t> seed;
  bool pair = false;
  std::string out_file;
};

int gen(const Globals& g, const GenArgs& a) {
  if (a.depth < 0 || a.dim * a.depth > kGenMaxDepth) {
    throw UsageError("gen keeps dim * depth <= " + std::to_string(kGenMaxDepth) + ", got dim " +
                     std::to_string(a.dim) + " depth " + std::to_string(a.depth));
  }
  const auto spec = LatticeSpec::make(a.dim, a.depth);
  json config{{"kind", a.kind}, {"dim", a.dim}, {"depth", a.depth}, {"pair", a.pair}};
  std::optional<std::uint64_t> seed;
  json body;

  if (a.kind == "random") {
    seed = a.seed.value_or(default_seed());
    std::mt19937_64 rng(*seed);
    const auto f = gaussian_function(spec, rng);
    body = a.pair ? json{{"f", io::to_json(f)}, {"phi", io::to_json(gaussian_function(spec, rng))}} : io::to_json(f);
  } else if (a.kind == "haar" || a.kind == "atom") {
    if (a.node.empty()) throw UsageError("--kind " + a.kind + " needs --node k,i");
    const NodeId node = parse_node(a.node);
    check_node(spec, node);
    config["node"] = a.node;
    StepFunction f;
    if (a.kind == "haar") {
      f = haar_function(spec, node);
    } else {
      // uniform profile, centred, scaled so its peak is 1/|I|
      seed = a.seed.value_or(default_seed());
      std::mt19937_64 rng(*seed);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      const auto [lo, hi] = leaf_range(spec, node);
      std::vector<double> profile(hi - lo);
      for (auto& x : profile) x = unit(rng);
      double mean = 0.0;
      for (double x : profile) mean += x;
      mean /= static_cast<double>(profile.size());
      double peak = 0.0;
      for (auto& x : profile) peak = std::max(peak, std::abs(x -= mean));
      for (auto& x : profile) x = peak > 0.0 ? x * (1.0 / measure(spec, node)) / peak : 0.0;
      f = make_atom(spec, node, profile);
    }
    body = a.pair ? json{{"f", io::to_json(f)}, {"phi", io::to_json(f)}} : io::to_json(f);
  } else if (a.kind == "sm") {
    seed = a.seed.value_or(default_seed());
    std::mt19937_64 rng(*seed);
    body = io::to_json(random_admissible_pair(spec, rng));
  } else {
    throw UsageError("--kind must be random, haar, atom or sm, got " + a.kind);
  }

  const fs::path target = a.out_file.empty() ? fs::path("gen_" + a.kind + ".json") : fs::path(a.out_file);
  emit(g, target, body, manifest(g, "gen", config, seed, {{"pass", true}}));
  return kPass;
}

}  // namespace

int main(int argc, char** argv) {
  Globals g;
  g.start = std::chrono::steady_clock::now();

  CLI::App app{"dyadic-lab: dyadic Haar analysis, Bellman certification and duality checks"};
  app.set_version_flag("--version", std::string(DYADIC_VERSION));
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--output", g.output, "Directory for output files")->capture_default_str();
  app.add_flag("--record-timing", g.record_timing, "Store wall-clock duration in the manifests");

  BellmanArgs bellman;
  auto* vb = app.add_subcommand("verify-bellman", "Check the Bellman conditions for a candidate");
  vb->add_option("--family", bellman.family, "Closed-form member, A=<real>");
  vb->add_option("--mbar", bellman.mbar, "Bound on the second argument");
  vb->add_option("--grid", bellman.grid, "Grid candidate JSON file");
  vb->add_option("--tol", bellman.tol, "Tolerance")->capture_default_str();
  vb->add_option("--grid-spec", bellman.grid_spec, "xmin:xmax:nx:ny for closed-form candidates");

  LemmaArgs lemma;
  auto* rl = app.add_subcommand("run-lemma", "Run the induction on scales for a pair");
  rl->add_option("--pair", lemma.pair, "JSON file with step functions 'f' and 'phi'");
  rl->add_option("--sm", lemma.sm, "JSON file with raw S, M functionals");
  rl->add_option("--dim", lemma.dim, "Dimension of a generated random pair")->capture_default_str();
  rl->add_option("--depth", lemma.depth, "Depth of a generated random pair")->capture_default_str();
  rl->add_option("--depth-n", lemma.depth_n, "Truncation level (default: lattice depth)");
  rl->add_option("--mbar", lemma.mbar, "Override the bound on M");
  rl->add_option("--tol", lemma.tol, "Tolerance")->capture_default_str();
  rl->add_option("--seed", lemma.seed, "Seed for a generated random pair");

  DualityArgs duality;
  auto* cd = app.add_subcommand("check-duality", "Evaluate the duality bound for two step functions");
  cd->add_option("--f", duality.f, "Step function f (JSON or CSV)")->required();
  cd->add_option("--phi", duality.phi, "Step function phi (JSON or CSV)")->required();

  SearchArgs searching;
  auto* se = app.add_subcommand("search-extremal", "Search for pairs with a large duality ratio");
  se->add_option("--depth", searching.depth, "Depth or range lo:hi")->capture_default_str();
  se->add_option("--iters", searching.iterations, "Iterations per restart")->capture_default_str();
  se->add_option("--seed", searching.seed, "Base seed");
  se->add_option("--strategy", searching.strategy, "random, coordinate_ascent or hybrid")->capture_default_str();
  se->add_option("--restarts", searching.restarts, "Independent restarts")->capture_default_str();
  se->add_flag("--trajectories", searching.trajectories, "Keep per-iteration incumbents");

  GenArgs generate;
  auto* ge = app.add_subcommand("gen", "Generate step functions or admissible pairs");
  ge->add_option("--kind", generate.kind, "random, haar, atom or sm")->capture_default_str();
  ge->add_option("--node", generate.node, "Node k,i for haar and atom");
  ge->add_option("--depth", generate.depth, "Lattice depth")->capture_default_str();
  ge->add_option("--dim", generate.dim, "Lattice dimension")->capture_default_str();
  ge->add_option("--seed", generate.seed, "Seed");
  ge->add_flag("--pair", generate.pair, "Emit {f, phi} for run-lemma --pair");
  ge->add_option("-o,--out-file", generate.out_file, "Output file (default gen_<kind>.json in --output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  int status = kUsage;
  try {
    if (*vb) status = verify_bellman(g, bellman);
    if (*rl) status = run_lemma(g, lemma);
    if (*cd) status = check_duality(g, duality);
    if (*se) status = search_extremal(g, searching);
    if (*ge) status = gen(g, generate);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  // without --record-timing the duration stays out of the outputs
  if (!g.record_timing) {
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - g.start).count();
    std::fprintf(stderr, "%s finished in %.3f s\n", app.get_subcommands().front()->get_name().c_str(), seconds);
  }
  return status;
}
