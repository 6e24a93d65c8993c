#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dyadic/errors.hpp"

namespace dyadic {

/// Points at which the Bellman conditions are checked: x > 0 (typically log
/// spaced) and y in [0, mbar] (typically linear).
struct GridSpec {
  Eigen::VectorXd x;
  Eigen::VectorXd y;

  /// x log-spaced over [x_min, x_max] with nx points, y linear over [0, mbar] with ny points.
  static GridSpec log_linear(double mbar, double x_min, double x_max, int nx, int ny);
  /// 200 x-points over [1e-8, x_max], 101 y-points over [0, mbar].
  static GridSpec make_default(double mbar, double x_max = 1e4);
};

enum class CandidateForm { closed_form_family, grid_sampled };

/// Value and the partials the conditions need, at one point.
struct Partials {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double dxx = 0.0;
  double dyy = 0.0;
};

/// A candidate B on [0, inf) x [0, mbar]. Immutable after construction.
///
/// Closed-form members are B(x, y) = sqrt(x) (A - y) with analytic partials.
/// Grid-sampled members hold values on a tensor grid whose first x node is 0;
/// they are evaluated by bilinear interpolation and differentiated by
/// three-point finite differences on their own nodes.
class BellmanCandidate {
 public:
  /// sqrt(x) (a - y). Only checks that a and mbar are finite and mbar > 0.
  static BellmanCandidate closed_form(double a, double mbar);
  /// values(i, j) = B(x(i), y(j)); x strictly increasing from 0, y strictly increasing.
  static BellmanCandidate sampled(double mbar, Eigen::VectorXd x, Eigen::VectorXd y, Eigen::MatrixXd values);

  [[nodiscard]] CandidateForm form() const { return form_; }
  [[nodiscard]] double mbar() const { return mbar_; }
  /// The family parameter A, for closed-form candidates.
  [[nodiscard]] std::optional<double> family_parameter() const;

  /// B(x, y). Throws DomainError for x < 0 or, for sampled candidates, points off the grid.
  [[nodiscard]] double value(double x, double y) const;
  /// Analytic partials; closed form only. dx and dxx are NaN at x = 0.
  [[nodiscard]] Partials partials(double x, double y) const;
  /// Finite-difference partials at grid node (i, j); sampled only, requires x(i) > 0.
  [[nodiscard]] Partials node_partials(Eigen::Index i, Eigen::Index j) const;

  [[nodiscard]] const Eigen::VectorXd& grid_x() const { return x_; }
  [[nodiscard]] const Eigen::VectorXd& grid_y() const { return y_; }
  [[nodiscard]] const Eigen::MatrixXd& grid_values() const { return values_; }

 private:
  CandidateForm form_ = CandidateForm::closed_form_family;
  double mbar_ = 1.0;
  double a_ = 2.0;
  Eigen::VectorXd x_;
  Eigen::VectorXd y_;
  Eigen::MatrixXd values_;
};

/// sqrt(x) (2 mbar - y): the optimal member of the family.
[[nodiscard]] BellmanCandidate sample_candidate(double mbar);
/// sqrt(x) (a - y). Throws InfeasibleFamilyError unless a > mbar.
[[nodiscard]] BellmanCandidate family_candidate(double a, double mbar);

/// Lower bound (a - mbar)/2 of -B_x B_y over the family member.
[[nodiscard]] inline double family_mixed_constant(double a, double mbar) { return 0.5 * (a - mbar); }
/// Constant C1 with B <= C1 sqrt(x).
[[nodiscard]] inline double family_upper_constant(double a) { return a; }

inline constexpr std::string_view kLowerBound = "lower_bound";
inline constexpr std::string_view kUpperBound = "upper_bound";
inline constexpr std::string_view kMixedDerivative = "mixed_derivative";
inline constexpr std::string_view kConcaveX = "concave_x";
inline constexpr std::string_view kConvexY = "convex_y";
inline constexpr std::string_view kBoundaryZero = "boundary_zero";

/// Outcome of one condition "E >= c" over the grid.
///
/// margin = (E - c) / max(1, |c|), so the pass rule E >= c - tol max(1, |c|)
/// is the same as worst_margin >= -tol. `worst_value` is E at the worst point.
struct ConditionResult {
  std::string name;
  bool pass = true;
  double worst_margin = 0.0;
  double worst_value = 0.0;
  double threshold = 0.0;
  double x = 0.0;
  double y = 0.0;
  std::size_t evaluated = 0;
};

struct ConditionReport {
  double tol = 0.0;
  std::vector<ConditionResult> conditions;

  [[nodiscard]] bool all_pass() const;
  [[nodiscard]] std::vector<std::string> failing() const;
  /// Throws std::out_of_range for an unknown name.
  [[nodiscard]] const ConditionResult& at(std::string_view name) const;
};

/// Checks 0 <= B <= 2 mbar sqrt(x), -B_x B_y >= mbar/2, B_xx <= 0, B_yy >= 0 and
/// B(0, y) = 0.
///
/// Closed-form candidates are checked on `grid` with analytic partials.
/// Sampled candidates carry their own nodes and are checked there; `grid` is
/// ignored for them. Ties for the worst point go to the smallest x, then y.
[[nodiscard]] ConditionReport verify_conditions(const BellmanCandidate& candidate, const GridSpec& grid, double tol);

/// sqrt(2) a / sqrt(a - mbar), the constant the key lemma produces from a family member; +inf for a <= mbar.
[[nodiscard]] double family_ratio(double a, double mbar);

struct FamilyOptimum {
  double a_star = 0.0;
  double ratio_star = 0.0;
  int evaluations = 0;
};

/// Minimises family_ratio over a > mbar by golden-section search (bracket width 1e-9).
[[nodiscard]] FamilyOptimum optimize_family(double mbar);

}  // namespace dyadic
