#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dyadic/haar.hpp"
#include "dyadic/lemma.hpp"

namespace dyadic {

/// The proven ceiling sqrt(2)/4 on duality_sum / (bmo_norm * tl_norm).
inline constexpr double kDualityConstant = 0.35355339059327376220;  // sqrt(2) / 4

enum class Strategy { random, coordinate_ascent, hybrid };

[[nodiscard]] std::string_view to_string(Strategy s);
/// Throws ValidationError for an unknown name.
[[nodiscard]] Strategy parse_strategy(std::string_view name);

struct SearchConfig {
  static constexpr int kMaxDepth = 12;

  int depth = 6;
  int iterations = 10000;
  std::uint64_t seed = 42;
  Strategy strategy = Strategy::hybrid;
  int restarts = 8;
  /// Keep the incumbent after every iteration of every restart.
  bool record_trajectories = false;

  /// 1 <= depth <= 12, iterations >= 1, 1 <= restarts <= 1024.
  void validate() const;
};

struct RatioCertificate {
  double duality_sum = 0.0;
  double bmo_norm = 0.0;
  double tl_norm = 0.0;
};

struct SearchResult {
  SearchConfig config;
  double best_ratio = 0.0;
  int best_restart = 0;
  HaarCoefficients f_star;
  HaarCoefficients phi_star;
  std::vector<double> history;                    // best ratio of each restart
  std::vector<std::vector<double>> trajectories;  // filled when config.record_trajectories
  RatioCertificate certificate;
};

/// duality_sum(f, phi) / (bmo_norm(phi) tl_norm(f)). Throws UndefinedRatioError
/// when either norm vanishes.
[[nodiscard]] double ratio(const StepFunction& f, const StepFunction& phi);
/// The same quotient from Haar coefficients (the means play no role).
[[nodiscard]] double ratio(const HaarCoefficients& f, const HaarCoefficients& phi);

/// Derivative-free maximisation of the ratio over mean-zero pairs.
///
/// Each restart r draws from its own generator seeded with seed + r. Restart 0
/// starts at f = phi = h_root; the others start from random coefficients.
/// Iteration 1 evaluates the starting point; each further iteration is one
/// Gaussian proposal (random), one golden-section line search along a
/// coefficient (coordinate_ascent), or the first half of one and the second
/// half of the other (hybrid). Moves are accepted only when they strictly
/// improve the incumbent. Restarts run on separate threads; the winner is the
/// largest ratio, ties going to the lower restart index.
[[nodiscard]] SearchResult search(const SearchConfig& config);

struct CertificationReport {
  bool pass = true;
  std::vector<std::string> failures;
  double ratio = 0.0;
  RatioCertificate recomputed;
  bool lemma_passed = false;
  double lemma_lhs = 0.0;
  double lemma_rhs = 0.0;
  /// Nodes with nonzero increments whose one-step margin is below 1e-6 * scale.
  std::vector<NodeId> tight_nodes;
  double min_active_scaled_margin = 0.0;
};

/// Recomputes the winner's quantities with the reference enumerations and
/// compares them to the stored values (1e-9 relative), then reruns the
/// induction on the winner pair with sample_candidate(mbar).
[[nodiscard]] CertificationReport certify(const SearchResult& result);

}  // namespace dyadic
