#include "dyadic/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include "dyadic/golden.hpp"

namespace dyadic {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool strictly_increasing(const Eigen::VectorXd& v) {
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (!(v(i) > v(i - 1))) return false;
  }
  return true;
}

// First and second derivative at t of the quadratic through (t0,f0),(t1,f1),(t2,f2).
std::pair<double, double> three_point(double t, double t0, double t1, double t2, double f0, double f1, double f2) {
  const double w0 = 1.0 / ((t0 - t1) * (t0 - t2));
  const double w1 = 1.0 / ((t1 - t0) * (t1 - t2));
  const double w2 = 1.0 / ((t2 - t0) * (t2 - t1));
  const double first = f0 * w0 * (2 * t - t1 - t2) + f1 * w1 * (2 * t - t0 - t2) + f2 * w2 * (2 * t - t0 - t1);
  const double second = 2.0 * (f0 * w0 + f1 * w1 + f2 * w2);
  return {first, second};
}

// Stencil start for node i among nodes [lo, n): central when possible, one-sided at the ends.
Eigen::Index stencil_start(Eigen::Index i, Eigen::Index lo, Eigen::Index n) {
  if (i - 1 >= lo && i + 1 < n) return i - 1;
  if (i - 1 < lo) return i;
  return i - 2;
}

class Tracker {
 public:
  explicit Tracker(std::string_view name) { result_.name = name; }

  void observe(double value, double threshold, double x, double y) {
    const double margin = (value - threshold) / std::max(1.0, std::abs(threshold));
    if (result_.evaluated == 0 || margin < result_.worst_margin) {
      result_.worst_margin = margin;
      result_.worst_value = value;
      result_.threshold = threshold;
      result_.x = x;
      result_.y = y;
    }
    ++result_.evaluated;
  }

  ConditionResult finish(double tol) {
    result_.pass = result_.worst_margin >= -tol;
    return result_;
  }

 private:
  ConditionResult result_;
};

struct Trackers {
  Tracker lower{kLowerBound};
  Tracker upper{kUpperBound};
  Tracker mixed{kMixedDerivative};
  Tracker concave{kConcaveX};
  Tracker convex{kConvexY};
  Tracker boundary{kBoundaryZero};

  void interior(const Partials& p, double mbar, double x, double y) {
    lower.observe(p.value, 0.0, x, y);
    upper.observe(2.0 * mbar * std::sqrt(x) - p.value, 0.0, x, y);
    mixed.observe(-p.dx * p.dy, 0.5 * mbar, x, y);
    concave.observe(-p.dxx, 0.0, x, y);
    convex.observe(p.dyy, 0.0, x, y);
  }

  ConditionReport finish(double tol) {
    ConditionReport report;
    report.tol = tol;
    for (Tracker* t : {&lower, &upper, &mixed, &concave, &convex, &boundary}) report.conditions.push_back(t->finish(tol));
    return report;
  }
};

}  // namespace

GridSpec GridSpec::log_linear(double mbar, double x_min, double x_max, int nx, int ny) {
  if (!(x_min > 0.0) || !(x_max > x_min) || nx < 2 || ny < 2 || !(mbar > 0.0)) {
    throw ValidationError("grid needs 0 < x_min < x_max, mbar > 0 and at least two points per axis");
  }
  GridSpec g;
  g.x.resize(nx);
  const double lx0 = std::log10(x_min);
  const double lx1 = std::log10(x_max);
  for (int i = 0; i < nx; ++i) g.x(i) = std::pow(10.0, lx0 + (lx1 - lx0) * i / (nx - 1));
  g.x(0) = x_min;
  g.x(nx - 1) = x_max;
  g.y = Eigen::VectorXd::LinSpaced(ny, 0.0, mbar);
  return g;
}

GridSpec GridSpec::make_default(double mbar, double x_max) { return log_linear(mbar, 1e-8, x_max, 200, 101); }

BellmanCandidate BellmanCandidate::closed_form(double a, double mbar) {
  if (!std::isfinite(a) || !std::isfinite(mbar) || !(mbar > 0.0)) {
    throw DomainError("closed-form candidate needs finite A and mbar > 0");
  }
  BellmanCandidate c;
  c.form_ = CandidateForm::closed_form_family;
  c.a_ = a;
  c.mbar_ = mbar;
  return c;
}

BellmanCandidate BellmanCandidate::sampled(double mbar, Eigen::VectorXd x, Eigen::VectorXd y, Eigen::MatrixXd values) {
  if (!(mbar > 0.0) || !std::isfinite(mbar)) throw ValidationError("grid candidate needs mbar > 0");
  if (x.size() < 4 || y.size() < 3) {
    throw ValidationError("grid candidate needs x = 0 plus at least three positive x nodes and three y nodes");
  }
  if (x(0) != 0.0) throw ValidationError("grid candidate must include x = 0 as its first node");
  if (!strictly_increasing(x) || !strictly_increasing(y)) throw ValidationError("grid axes must be strictly increasing");
  if (!x.allFinite() || !y.allFinite()) throw ValidationError("grid axes contain non-finite values");
  if (y(0) < 0.0 || y(y.size() - 1) > mbar * (1.0 + 1e-12)) throw ValidationError("grid y axis leaves [0, mbar]");
  if (values.rows() != x.size() || values.cols() != y.size()) {
    throw ValidationError("grid values must be " + std::to_string(x.size()) + " x " + std::to_string(y.size()));
  }
  if (!values.allFinite()) throw ValidationError("grid candidate contains non-finite values");
  BellmanCandidate c;
  c.form_ = CandidateForm::grid_sampled;
  c.mbar_ = mbar;
  c.x_ = std::move(x);
  c.y_ = std::move(y);
  c.values_ = std::move(values);
  return c;
}

std::optional<double> BellmanCandidate::family_parameter() const {
  if (form_ == CandidateForm::closed_form_family) return a_;
  return std::nullopt;
}

double BellmanCandidate::value(double x, double y) const {
  if (!(x >= 0.0) || !std::isfinite(y)) throw DomainError("candidate evaluated outside x >= 0");
  if (form_ == CandidateForm::closed_form_family) return std::sqrt(x) * (a_ - y);

  const Eigen::Index nx = x_.size();
  const Eigen::Index ny = y_.size();
  const double slack = 1e-12 * std::max(1.0, mbar_);
  if (x > x_(nx - 1)) throw DomainError("x = " + std::to_string(x) + " beyond the sampled grid");
  if (y < y_(0) - slack || y > y_(ny - 1) + slack) {
    throw DomainError("y = " + std::to_string(y) + " outside the sampled grid");
  }
  y = std::clamp(y, y_(0), y_(ny - 1));
  auto cell = [](const Eigen::VectorXd& axis, double t) {
    const auto* end = axis.data() + axis.size();
    auto it = std::upper_bound(axis.data(), end, t);
    Eigen::Index hi = std::clamp<Eigen::Index>(it - axis.data(), 1, axis.size() - 1);
    return hi - 1;
  };
  const Eigen::Index i = cell(x_, x);
  const Eigen::Index j = cell(y_, y);
  const double tx = (x - x_(i)) / (x_(i + 1) - x_(i));
  const double ty = (y - y_(j)) / (y_(j + 1) - y_(j));
  return (1 - tx) * (1 - ty) * values_(i, j) + tx * (1 - ty) * values_(i + 1, j) + (1 - tx) * ty * values_(i, j + 1) +
         tx * ty * values_(i + 1, j + 1);
}

Partials BellmanCandidate::partials(double x, double y) const {
  if (form_ != CandidateForm::closed_form_family) {
    throw DomainError("analytic partials exist for closed-form candidates only");
  }
  if (!(x >= 0.0)) throw DomainError("candidate evaluated outside x >= 0");
  const double root = std::sqrt(x);
  Partials p;
  p.value = root * (a_ - y);
  p.dy = -root;
  p.dyy = 0.0;
  if (x > 0.0) {
    p.dx = (a_ - y) / (2.0 * root);
    p.dxx = -(a_ - y) / (4.0 * x * root);
  } else {
    p.dx = kNaN;
    p.dxx = kNaN;
  }
  return p;
}

Partials BellmanCandidate::node_partials(Eigen::Index i, Eigen::Index j) const {
  if (form_ != CandidateForm::grid_sampled) throw DomainError("node partials exist for sampled candidates only");
  if (i < 1 || i >= x_.size() || j < 0 || j >= y_.size()) throw DomainError("grid node out of range");
  Partials p;
  p.value = values_(i, j);
  // x = 0 never enters an x stencil
  const Eigen::Index ix = stencil_start(i, 1, x_.size());
  std::tie(p.dx, p.dxx) = three_point(x_(i), x_(ix), x_(ix + 1), x_(ix + 2), values_(ix, j), values_(ix + 1, j),
                                      values_(ix + 2, j));
  const Eigen::Index jy = stencil_start(j, 0, y_.size());
  std::tie(p.dy, p.dyy) = three_point(y_(j), y_(jy), y_(jy + 1), y_(jy + 2), values_(i, jy), values_(i, jy + 1),
                                      values_(i, jy + 2));
  return p;
}

BellmanCandidate sample_candidate(double mbar) {
  if (!(mbar > 0.0) || !std::isfinite(mbar)) throw DomainError("sample candidate needs mbar > 0");
  return BellmanCandidate::closed_form(2.0 * mbar, mbar);
}

BellmanCandidate family_candidate(double a, double mbar) {
  if (!(mbar > 0.0) || !std::isfinite(mbar)) throw DomainError("family candidate needs mbar > 0");
  if (!(a > mbar)) {
    throw InfeasibleFamilyError("family parameter A = " + std::to_string(a) + " must exceed mbar = " +
                                std::to_string(mbar) + " for -B_x B_y to stay positive");
  }
  return BellmanCandidate::closed_form(a, mbar);
}

bool ConditionReport::all_pass() const {
  return std::all_of(conditions.begin(), conditions.end(), [](const ConditionResult& c) { return c.pass; });
}

std::vector<std::string> ConditionReport::failing() const {
  std::vector<std::string> out;
  for (const auto& c : conditions) {
    if (!c.pass) out.push_back(c.name);
  }
  return out;
}

const ConditionResult& ConditionReport::at(std::string_view name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("no condition named " + std::string(name));
}

ConditionReport verify_conditions(const BellmanCandidate& candidate, const GridSpec& grid, double tol) {
  if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
  const double mbar = candidate.mbar();
  Trackers t;
  auto check_value = [](double v) {
    if (!std::isfinite(v)) throw ValidationError("candidate produced a non-finite value");
    return v;
  };

  if (candidate.form() == CandidateForm::closed_form_family) {
    if (grid.x.size() == 0 || grid.y.size() == 0) throw ValidationError("empty verification grid");
    if (!(grid.x.minCoeff() > 0.0)) throw ValidationError("derivative checks need x > 0");
    for (Eigen::Index i = 0; i < grid.x.size(); ++i) {
      for (Eigen::Index j = 0; j < grid.y.size(); ++j) {
        const Partials p = candidate.partials(grid.x(i), grid.y(j));
        check_value(p.value);
        t.interior(p, mbar, grid.x(i), grid.y(j));
      }
    }
    for (Eigen::Index j = 0; j < grid.y.size(); ++j) {
      t.boundary.observe(-std::abs(check_value(candidate.value(0.0, grid.y(j)))), 0.0, 0.0, grid.y(j));
    }
  } else {
    const auto& xs = candidate.grid_x();
    const auto& ys = candidate.grid_y();
    for (Eigen::Index i = 1; i < xs.size(); ++i) {
      for (Eigen::Index j = 0; j < ys.size(); ++j) t.interior(candidate.node_partials(i, j), mbar, xs(i), ys(j));
    }
    for (Eigen::Index j = 0; j < ys.size(); ++j) {
      t.boundary.observe(-std::abs(candidate.grid_values()(0, j)), 0.0, 0.0, ys(j));
    }
  }
  return t.finish(tol);
}

double family_ratio(double a, double mbar) {
  if (!(a > mbar)) return std::numeric_limits<double>::infinity();
  return std::sqrt(2.0) * a / std::sqrt(a - mbar);
}

FamilyOptimum optimize_family(double mbar) {
  if (!(mbar > 0.0) || !std::isfinite(mbar)) throw DomainError("optimize_family needs mbar > 0");
  const auto best = golden_section_minimize([mbar](double a) { return family_ratio(a, mbar); }, mbar, 5.0 * mbar, 1e-9);
  return FamilyOptimum{best.argument, best.value, best.evaluations};
}

}  // namespace dyadic
