#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dyadic/bellman.hpp"
#include "dyadic/duality_search.hpp"
#include "dyadic/haar.hpp"
#include "dyadic/lemma.hpp"

namespace dyadic::io {

using json = nlohmann::json;

/// %.17g, the round-trip-exact rendering used for CSV output.
[[nodiscard]] std::string format_double(double v);

/// Reads and parses a JSON document. Throws ValidationError on I/O or syntax errors.
[[nodiscard]] json read_json(const std::filesystem::path& path);
/// Writes `doc` indented by two spaces, newline-terminated.
void write_json(const std::filesystem::path& path, const json& doc);
void write_text(const std::filesystem::path& path, const std::string& text);

// {"dim": 1, "depth": k, "values": [...]}
[[nodiscard]] json to_json(const StepFunction& f);
[[nodiscard]] StepFunction step_function_from_json(const json& doc);
/// One value per line; the depth is log2 of the line count (dim 1).
[[nodiscard]] StepFunction step_function_from_csv(const std::string& text);
/// Dispatches on the extension: ".csv" is CSV, anything else JSON.
[[nodiscard]] StepFunction read_step_function(const std::filesystem::path& path);

// {"dim": 1, "depth": k, "mean": m, "coeffs": [...]}
[[nodiscard]] json to_json(const HaarCoefficients& h);
[[nodiscard]] HaarCoefficients haar_coefficients_from_json(const json& doc);

// {"dim", "depth", "S": [[gen 0], [gen 1], ...], "M": [...], "mbar"}
[[nodiscard]] json to_json(const AdmissiblePair& pair);
/// Loaded pairs are external: sibling equality is checked with a tolerance.
[[nodiscard]] AdmissiblePair admissible_pair_from_json(const json& doc);

// {"mbar", "x": [...], "y": [...], "values": [[B(x0, y0), B(x0, y1), ...], ...]}
[[nodiscard]] json grid_candidate_to_json(const BellmanCandidate& candidate);
[[nodiscard]] BellmanCandidate grid_candidate_from_json(const json& doc);

[[nodiscard]] json to_json(const NodeId& node);
[[nodiscard]] json to_json(const ConditionReport& report);
[[nodiscard]] json to_json(const VerificationReport& report);
[[nodiscard]] json to_json(const InductionTrace& trace);
[[nodiscard]] json to_json(const SearchConfig& config);
[[nodiscard]] json to_json(const SearchResult& result);
[[nodiscard]] SearchResult search_result_from_json(const json& doc);
[[nodiscard]] json to_json(const CertificationReport& report);

}  // namespace dyadic::io
