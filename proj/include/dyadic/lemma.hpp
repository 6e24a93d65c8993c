#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dyadic/bellman.hpp"
#include "dyadic/haar.hpp"
#include "dyadic/lattice.hpp"

namespace dyadic {

struct Violation {
  std::string kind;
  NodeId node;
  double amount = 0.0;  // how far past the tolerance, in the check's own units
};

/// Result of a node-by-node validation. Violations are listed in node order
/// (generation, then index); at most kMaxRecorded are kept, all are counted.
struct VerificationReport {
  static constexpr std::size_t kMaxRecorded = 64;

  double tol = 0.0;
  std::size_t nodes_checked = 0;
  std::size_t violation_count = 0;
  std::vector<Violation> violations;

  [[nodiscard]] bool pass() const { return violation_count == 0; }
  [[nodiscard]] std::optional<Violation> first() const;
  void record(Violation v);
};

/// Node functionals S and M with the bound mbar on M.
///
/// `exact_siblings` marks pairs whose sibling S values were written from one
/// shared computation; their sibling equality is checked bit for bit.
struct AdmissiblePair {
  NodeFunctional s;
  NodeFunctional m;
  double mbar = 0.0;
  bool exact_siblings = false;

  [[nodiscard]] const LatticeSpec& spec() const { return s.spec; }
};

/// Builds M_J = |J|^-1 sum_{I subset J} d^phi_I |I| and S_J = sum_{I strictly containing J} d^f_I
/// from squared increments (see square_increments), with mbar = max_J M_J.
/// In dimension one mbar equals bmo_norm(phi)^2.
[[nodiscard]] AdmissiblePair build_pair(const StepFunction& f, const StepFunction& phi);

/// Wraps externally supplied functionals. mbar defaults to max M.
[[nodiscard]] AdmissiblePair external_pair(NodeFunctional s, NodeFunctional m, std::optional<double> mbar = std::nullopt);

/// Checks siblings share S, S_child >= S_parent, S >= 0, M_J >= mean of children and 0 <= M <= mbar.
///
/// Sibling equality is exact when `exact_siblings` is set and otherwise
/// holds within tol * max(1, |S|); inequalities use the same hybrid slack.
[[nodiscard]] VerificationReport check_admissibility(const NodeFunctional& s, const NodeFunctional& m, double mbar,
                                                     double tol, bool exact_siblings = false);
[[nodiscard]] VerificationReport check_admissibility(const AdmissiblePair& pair, double tol);

/// sample_candidate(pair.mbar), or sample_candidate(1) when M vanishes
/// identically and mbar is 0 (any positive bound is valid then).
[[nodiscard]] BellmanCandidate default_candidate(const AdmissiblePair& pair);

class InadmissiblePairError : public ValidationError {
 public:
  explicit InadmissiblePairError(VerificationReport report);
  [[nodiscard]] const VerificationReport& report() const { return report_; }

 private:
  VerificationReport report_;
};

/// The two sides of the one-step inequality at an internal node J:
///
///   2^-dim sum_v B(S_{J^v}, M_{J^v})  >=  sqrt(2 mbar) sqrt((M_J - mean_v M_{J^v}) (S_{J^1} - S_J)) + B(S_J, M_J)
///
/// with mbar taken from the candidate. Nodes with S_J = S_{J^1} = 0 are
/// degenerate and report lhs = rhs = 0.
struct NodeCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double s_increment = 0.0;
  double m_drop = 0.0;
  bool degenerate = false;

  [[nodiscard]] double margin() const { return lhs - rhs; }
  [[nodiscard]] double scale() const;
};

[[nodiscard]] NodeCheck verify_node_inequality(const BellmanCandidate& b, const AdmissiblePair& pair, NodeId node);

/// Replaceable per-node predicate; defaults to verify_node_inequality.
using NodeInequality = std::function<NodeCheck(const BellmanCandidate&, const AdmissiblePair&, NodeId)>;

/// Summed bound at truncation level n, together with the telescoped chain
///   2^-dim n sum_{gen n} 2^-dim B(S, M)  >=  sum_{k<=n} 2^-dim k F_k + 2^-dim B(S_root, M_root).
struct LevelBound {
  int n = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = true;
  double weighted_b = 0.0;
  double chain = 0.0;
  bool telescoping_holds = true;
  double identity_error = 0.0;  // relative gap between sum 2^-dim k F_k and 2^-dim sqrt(2 mbar) lhs
};

struct InductionTrace {
  LatticeSpec spec;
  int depth_n = 0;
  double mbar = 0.0;  // constant of the candidate used for sqrt(2 mbar)
  double tol = 0.0;
  std::vector<double> f_k;                 // F_1 .. F_n, entry k-1 sums generation k-1
  std::vector<Eigen::VectorXd> margins;    // per generation 0..n-1, lhs - rhs at each node
  std::vector<Eigen::VectorXd> scales;     // matching NodeCheck::scale()
  std::vector<double> generation_min_scaled_margin;
  std::vector<LevelBound> levels;          // n = 1..depth_n
  double lhs = 0.0;
  double rhs = 0.0;
  NodeId worst_node;
  double worst_scaled_margin = 0.0;
  bool nodes_hold = true;
  bool lemma_holds = true;
  bool telescoping_holds = true;
  bool identity_holds = true;

  [[nodiscard]] bool passed() const { return nodes_hold && lemma_holds && telescoping_holds && identity_holds; }
};

/// Runs the induction on scales down to generation depth_n and checks every
/// per-node inequality, the summed bound at every level n <= depth_n and the
/// telescoping certificate. Throws InadmissiblePairError before computing
/// anything if the pair fails check_admissibility, and DomainError if the
/// candidate's mbar is below the pair's.
[[nodiscard]] InductionTrace verify_key_lemma(const BellmanCandidate& b, const AdmissiblePair& pair, int depth_n,
                                              double tol = 1e-12, const NodeInequality& inequality = {});

/// sum_J |(f, h_J)| |(phi, h_J)| over internal nodes of generation < max_generation
/// (default: all). Computed from the Haar coefficients and from
/// (1/4) sum |J| |Delta f_J| |Delta phi_J| independently; throws std::logic_error
/// if the two disagree beyond 1e-10 relative.
[[nodiscard]] double duality_sum(const StepFunction& f, const StepFunction& phi,
                                 std::optional<int> max_generation = std::nullopt);

struct AdversarialOptions {
  double zero_increment_probability = 0.25;
  double inflate_mbar_probability = 0.3;
};

/// A random admissible (S, M) not derived from any pair of functions: sibling S
/// equal, increments log-uniform over six decades with a share of exact zeros,
/// M built upward from random leaves. Marked external (tolerant sibling check).
[[nodiscard]] AdmissiblePair random_admissible_pair(const LatticeSpec& spec, std::mt19937_64& rng,
                                                    const AdversarialOptions& options = {});

}  // namespace dyadic
