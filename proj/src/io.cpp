#include "dyadic/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dyadic::io {

namespace {

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

Eigen::VectorXd vector_from(const json& doc, const char* what) {
  if (!doc.is_array()) throw ValidationError(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) throw ValidationError(std::string(what) + " must contain only numbers");
    v(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
  }
  return v;
}

template <class T>
T field(const json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) throw ValidationError(std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("field '") + key + "': " + e.what());
  }
}

LatticeSpec spec_from(const json& doc) { return LatticeSpec::make(field<int>(doc, "dim"), field<int>(doc, "depth")); }

json functional_json(const NodeFunctional& f) {
  json out = json::array();
  for (const auto& level : f.levels) out.push_back(vector_json(level));
  return out;
}

NodeFunctional functional_from(const json& doc, const LatticeSpec& spec, const char* what) {
  if (!doc.is_array()) throw ValidationError(std::string(what) + " must be an array of per-generation arrays");
  NodeFunctional f(spec);
  if (doc.size() != f.levels.size()) {
    throw ValidationError(std::string(what) + " has " + std::to_string(doc.size()) + " generations, expected " +
                          std::to_string(f.levels.size()));
  }
  for (std::size_t k = 0; k < doc.size(); ++k) f.levels[k] = vector_from(doc[k], what);
  f.validate();
  return f;
}

json levels_json(const std::vector<Eigen::VectorXd>& levels) {
  json out = json::array();
  for (const auto& level : levels) out.push_back(vector_json(level));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + path.string());
  out << text;
}

void write_json(const std::filesystem::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

json to_json(const StepFunction& f) {
  return json{{"dim", f.spec.dim}, {"depth", f.spec.depth}, {"values", vector_json(f.values)}};
}

StepFunction step_function_from_json(const json& doc) {
  const auto spec = spec_from(doc);
  if (!doc.contains("values")) throw ValidationError("missing field 'values'");
  return StepFunction::make(spec, vector_from(doc.at("values"), "values"));
}

StepFunction step_function_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      values.push_back(std::stod(line, &used));
      if (line.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument("trailing text");
    } catch (const std::exception&) {
      throw ValidationError("CSV line is not a number: '" + line + "'");
    }
  }
  if (values.empty() || !std::has_single_bit(values.size())) {
    throw ValidationError("CSV step function needs a power-of-two number of values, got " + std::to_string(values.size()));
  }
  const int depth = std::bit_width(values.size()) - 1;
  return StepFunction::make(LatticeSpec::make(1, depth),
                            Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
}

StepFunction read_step_function(const std::filesystem::path& path) {
  if (path.extension() == ".csv") {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return step_function_from_csv(buffer.str());
  }
  return step_function_from_json(read_json(path));
}

json to_json(const HaarCoefficients& h) {
  return json{{"dim", h.spec.dim}, {"depth", h.spec.depth}, {"mean", h.mean}, {"coeffs", vector_json(h.coeffs)}};
}

HaarCoefficients haar_coefficients_from_json(const json& doc) {
  HaarCoefficients h{spec_from(doc), field<double>(doc, "mean"), vector_from(doc.at("coeffs"), "coeffs")};
  if (static_cast<std::size_t>(h.coeffs.size()) != h.spec.internal_count()) {
    throw ValidationError("coefficient count does not match the lattice");
  }
  return h;
}

json to_json(const AdmissiblePair& pair) {
  return json{{"dim", pair.spec().dim},
              {"depth", pair.spec().depth},
              {"S", functional_json(pair.s)},
              {"M", functional_json(pair.m)},
              {"mbar", pair.mbar}};
}

AdmissiblePair admissible_pair_from_json(const json& doc) {
  const auto spec = spec_from(doc);
  auto s = functional_from(doc.contains("S") ? doc.at("S") : json(), spec, "S");
  auto m = functional_from(doc.contains("M") ? doc.at("M") : json(), spec, "M");
  std::optional<double> mbar;
  if (doc.contains("mbar")) mbar = field<double>(doc, "mbar");
  return external_pair(std::move(s), std::move(m), mbar);
}

json grid_candidate_to_json(const BellmanCandidate& candidate) {
  if (candidate.form() != CandidateForm::grid_sampled) throw ValidationError("only grid candidates serialize to a grid");
  json rows = json::array();
  for (Eigen::Index i = 0; i < candidate.grid_values().rows(); ++i) {
    rows.push_back(vector_json(candidate.grid_values().row(i).transpose()));
  }
  return json{{"mbar", candidate.mbar()},
              {"x", vector_json(candidate.grid_x())},
              {"y", vector_json(candidate.grid_y())},
              {"values", rows}};
}

BellmanCandidate grid_candidate_from_json(const json& doc) {
  const double mbar = field<double>(doc, "mbar");
  if (!doc.contains("x") || !doc.contains("y") || !doc.contains("values")) {
    throw ValidationError("grid candidate needs 'x', 'y' and 'values'");
  }
  auto x = vector_from(doc.at("x"), "x");
  auto y = vector_from(doc.at("y"), "y");
  const auto& rows = doc.at("values");
  if (!rows.is_array() || rows.size() != static_cast<std::size_t>(x.size())) {
    throw ValidationError("'values' must hold one row per x node");
  }
  Eigen::MatrixXd values(x.size(), y.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = vector_from(rows[i], "values row");
    if (row.size() != y.size()) throw ValidationError("every 'values' row must hold one entry per y node");
    values.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return BellmanCandidate::sampled(mbar, std::move(x), std::move(y), std::move(values));
}

json to_json(const NodeId& node) { return json::array({node.generation, node.index}); }

json to_json(const ConditionReport& report) {
  json conditions = json::array();
  for (const auto& c : report.conditions) {
    conditions.push_back(json{{"name", c.name},
                              {"pass", c.pass},
                              {"worst_margin", c.worst_margin},
                              {"worst_value", c.worst_value},
                              {"threshold", c.threshold},
                              {"worst_location", json{{"x", c.x}, {"y", c.y}}},
                              {"evaluated", c.evaluated}});
  }
  return json{{"tol", report.tol}, {"all_pass", report.all_pass()}, {"failing", report.failing()}, {"conditions", conditions}};
}

json to_json(const VerificationReport& report) {
  json violations = json::array();
  for (const auto& v : report.violations) {
    violations.push_back(json{{"kind", v.kind}, {"node", to_json(v.node)}, {"amount", v.amount}});
  }
  json out{{"pass", report.pass()},
           {"tol", report.tol},
           {"nodes_checked", report.nodes_checked},
           {"violation_count", report.violation_count},
           {"violations", violations}};
  if (auto first = report.first()) out["first_violation"] = json{{"kind", first->kind}, {"node", to_json(first->node)}};
  return out;
}

json to_json(const InductionTrace& trace) {
  json levels = json::array();
  for (const auto& l : trace.levels) {
    levels.push_back(json{{"n", l.n},
                          {"lhs", l.lhs},
                          {"rhs", l.rhs},
                          {"holds", l.holds},
                          {"weighted_b", l.weighted_b},
                          {"chain", l.chain},
                          {"telescoping_holds", l.telescoping_holds},
                          {"identity_error", l.identity_error}});
  }
  return json{{"dim", trace.spec.dim},
              {"depth", trace.spec.depth},
              {"depth_n", trace.depth_n},
              {"mbar", trace.mbar},
              {"tol", trace.tol},
              {"passed", trace.passed()},
              {"nodes_hold", trace.nodes_hold},
              {"lemma_holds", trace.lemma_holds},
              {"telescoping_holds", trace.telescoping_holds},
              {"identity_holds", trace.identity_holds},
              {"lhs", trace.lhs},
              {"rhs", trace.rhs},
              {"F_k", trace.f_k},
              {"generation_min_scaled_margin", trace.generation_min_scaled_margin},
              {"worst_node", to_json(trace.worst_node)},
              {"worst_scaled_margin", trace.worst_scaled_margin},
              {"levels", levels},
              {"margins", levels_json(trace.margins)}};
}

json to_json(const SearchConfig& config) {
  return json{{"depth", config.depth},
              {"iterations", config.iterations},
              {"seed", config.seed},
              {"strategy", std::string(to_string(config.strategy))},
              {"restarts", config.restarts},
              {"record_trajectories", config.record_trajectories}};
}

json to_json(const SearchResult& result) {
  json out{{"config", to_json(result.config)},
           {"best_ratio", result.best_ratio},
           {"best_restart", result.best_restart},
           {"f_star", to_json(result.f_star)},
           {"phi_star", to_json(result.phi_star)},
           {"history", result.history},
           {"certificate",
            json{{"duality_sum", result.certificate.duality_sum},
                 {"bmo_norm", result.certificate.bmo_norm},
                 {"tl_norm", result.certificate.tl_norm}}}};
  if (!result.trajectories.empty()) out["trajectories"] = result.trajectories;
  return out;
}

SearchResult search_result_from_json(const json& doc) {
  SearchResult r;
  const auto config = field<json>(doc, "config");
  r.config.depth = field<int>(config, "depth");
  r.config.iterations = field<int>(config, "iterations");
  r.config.seed = field<std::uint64_t>(config, "seed");
  r.config.strategy = parse_strategy(field<std::string>(config, "strategy"));
  r.config.restarts = field<int>(config, "restarts");
  if (config.contains("record_trajectories")) r.config.record_trajectories = field<bool>(config, "record_trajectories");
  r.best_ratio = field<double>(doc, "best_ratio");
  r.best_restart = field<int>(doc, "best_restart");
  r.f_star = haar_coefficients_from_json(field<json>(doc, "f_star"));
  r.phi_star = haar_coefficients_from_json(field<json>(doc, "phi_star"));
  r.history = field<std::vector<double>>(doc, "history");
  const auto cert = field<json>(doc, "certificate");
  r.certificate = RatioCertificate{field<double>(cert, "duality_sum"), field<double>(cert, "bmo_norm"),
                                   field<double>(cert, "tl_norm")};
  if (doc.contains("trajectories")) r.trajectories = field<std::vector<std::vector<double>>>(doc, "trajectories");
  return r;
}

json to_json(const CertificationReport& report) {
  json tight = json::array();
  for (const auto& node : report.tight_nodes) tight.push_back(to_json(node));
  return json{{"pass", report.pass},
              {"failures", report.failures},
              {"ratio", report.ratio},
              {"recomputed",
               json{{"duality_sum", report.recomputed.duality_sum},
                    {"bmo_norm", report.recomputed.bmo_norm},
                    {"tl_norm", report.recomputed.tl_norm}}},
              {"lemma_passed", report.lemma_passed},
              {"lemma_lhs", report.lemma_lhs},
              {"lemma_rhs", report.lemma_rhs},
              {"tight_nodes", tight},
              {"min_active_scaled_margin", report.min_active_scaled_margin}};
}

}  // namespace dyadic::io
