#include <doctest.h>

#include <cmath>

#include "dyadic/bellman.hpp"

using namespace dyadic;
using doctest::Approx;

namespace {

// x = 0 followed by a log grid over [1e-4, 1e2]; y linear over [0, mbar].
BellmanCandidate sampled_from(double mbar, double (*b)(double, double)) {
  const int nx = 80;
  const int ny = 51;
  Eigen::VectorXd x(nx + 1);
  x(0) = 0.0;
  for (int i = 0; i < nx; ++i) x(i + 1) = std::pow(10.0, -4.0 + 6.0 * i / (nx - 1));
  Eigen::VectorXd y = Eigen::VectorXd::LinSpaced(ny, 0.0, mbar);
  Eigen::MatrixXd v(nx + 1, ny);
  for (int i = 0; i <= nx; ++i) {
    for (int j = 0; j < ny; ++j) v(i, j) = b(x(i), y(j));
  }
  return BellmanCandidate::sampled(mbar, x, y, v);
}

double sample_one(double x, double y) { return std::sqrt(x) * (2.0 - y); }
double perturbed_one(double x, double y) { return std::sqrt(x) * (2.0 - y) + 0.01 * y * y; }

}  // namespace

TEST_CASE("sample candidate values") {
  const auto b = sample_candidate(1.0);
  CHECK(b.value(1.0, 0.0) == 2.0);
  CHECK(b.value(0.0, 0.5) == 0.0);
  CHECK(b.family_parameter() == 2.0);
  for (double x : {1e-6, 0.3, 1.0, 40.0, 1e5}) {
    const auto p = b.partials(x, 1.0);
    CHECK(-p.dx * p.dy == Approx(0.5).epsilon(1e-14));
  }
  const auto p0 = b.partials(0.0, 0.25);
  CHECK(std::isnan(p0.dx));
  CHECK(std::isnan(p0.dxx));
  CHECK(p0.dy == 0.0);
  CHECK_THROWS_AS((void)sample_candidate(0.0), DomainError);
  CHECK_THROWS_AS((void)b.value(-1.0, 0.0), DomainError);
}

TEST_CASE("family members") {
  const auto same = family_candidate(2.0, 1.0);
  const auto ref = sample_candidate(1.0);
  for (double x : {0.0, 0.5, 3.0}) {
    for (double y : {0.0, 0.4, 1.0}) CHECK(same.value(x, y) == ref.value(x, y));
  }
  CHECK(family_mixed_constant(1.5, 1.0) == 0.25);
  CHECK(family_upper_constant(1.5) == 1.5);
  CHECK_THROWS_AS((void)family_candidate(1.0, 1.0), InfeasibleFamilyError);
  CHECK_THROWS_AS((void)family_candidate(0.5, 1.0), InfeasibleFamilyError);
}

TEST_CASE("sample candidate passes every condition for several mbar") {
  for (double mbar : {0.25, 0.5, 1.0, 2.0, 5.0}) {
    const auto report = verify_conditions(sample_candidate(mbar), GridSpec::make_default(mbar), 1e-12);
    CHECK(report.conditions.size() == 6);
    CHECK(report.all_pass());
    const auto& mixed = report.at(kMixedDerivative);
    CHECK(std::abs(mixed.worst_margin) <= 1e-15);
    CHECK(mixed.y == mbar);
    CHECK(mixed.evaluated == 200u * 101u);
    CHECK(report.at(kUpperBound).y == 0.0);
  }
}

TEST_CASE("weaker family members fail only the mixed-derivative check") {
  const auto grid = GridSpec::make_default(1.0);
  const auto weak = verify_conditions(family_candidate(1.2, 1.0), grid, 1e-12);
  CHECK(weak.failing() == std::vector<std::string>{std::string(kMixedDerivative)});
  CHECK(weak.at(kMixedDerivative).worst_value == Approx(0.1).epsilon(1e-12));
  CHECK(weak.at(kMixedDerivative).threshold == 0.5);

  const auto mid = verify_conditions(family_candidate(1.5, 1.0), grid, 1e-12);
  CHECK(mid.failing() == std::vector<std::string>{std::string(kMixedDerivative)});
  CHECK(mid.at(kMixedDerivative).worst_value == Approx(family_mixed_constant(1.5, 1.0)).epsilon(1e-12));

  // A > 2 mbar trades the mixed bound for the upper bound.
  const auto strong = verify_conditions(family_candidate(2.5, 1.0), grid, 1e-12);
  CHECK(strong.failing() == std::vector<std::string>{std::string(kUpperBound)});
}

TEST_CASE("pass flag equals worst margin against tolerance") {
  const auto grid = GridSpec::make_default(1.0);
  for (double a : {1.1, 1.5, 1.999, 2.0, 2.0 + 1e-13, 2.3}) {
    for (double tol : {1e-12, 1e-3, 0.5}) {
      const auto report = verify_conditions(family_candidate(a, 1.0), grid, tol);
      for (const auto& c : report.conditions) CHECK(c.pass == (c.worst_margin >= -tol));
    }
  }
}

TEST_CASE("scaling covariance of the family") {
  const auto b = family_candidate(3.7, 1.4);
  for (double lambda : {0.1, 1.0, 2.5, 1e3}) {
    for (double x : {0.0, 1e-5, 0.7, 9.0}) {
      for (double y : {0.0, 0.6, 1.4}) {
        CHECK(b.value(lambda * lambda * x, y) == Approx(lambda * b.value(x, y)).epsilon(1e-14));
      }
    }
  }
}

TEST_CASE("analytic partials agree with central differences on the default grid") {
  const double mbar = 1.0;
  const auto b = family_candidate(2.6, mbar);
  const auto grid = GridSpec::make_default(mbar);
  double worst = 0.0;
  for (const double x : grid.x) {
    for (const double y : grid.y) {
      const auto p = b.partials(x, y);
      const double hx = 1e-3 * x;
      const double hy = 1e-3;
      const double dx = (b.value(x + hx, y) - b.value(x - hx, y)) / (2.0 * hx);
      const double dxx = (b.value(x + hx, y) - 2.0 * b.value(x, y) + b.value(x - hx, y)) / (hx * hx);
      const double y0 = std::clamp(y, hy, mbar - hy);
      const double dy = (b.value(x, y0 + hy) - b.value(x, y0 - hy)) / (2.0 * hy);
      const double dyy = (b.value(x, y0 + hy) - 2.0 * b.value(x, y0) + b.value(x, y0 - hy)) / (hy * hy);
      worst = std::max({worst, std::abs(dx - p.dx) / std::abs(p.dx), std::abs(dxx - p.dxx) / std::abs(p.dxx),
                        std::abs(dy - p.dy) / std::abs(p.dy)});
      CHECK(std::abs(dyy - p.dyy) <= 1e-6 * std::max(1.0, std::abs(b.value(x, y0))));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("family optimisation") {
  const auto one = optimize_family(1.0);
  CHECK(std::abs(one.a_star - 2.0) < 1e-6);
  CHECK(std::abs(one.ratio_star - 2.0 * std::sqrt(2.0)) < 1e-6);
  CHECK(std::abs(optimize_family(3.0).a_star - 6.0) < 1e-6);
  CHECK(std::abs(optimize_family(0.5).ratio_star - 2.0) < 1e-6);
  CHECK(family_ratio(2.0, 1.0) == Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(std::isinf(family_ratio(1.0, 1.0)));

  for (double mbar : {0.25, 0.5, 1.0, 2.0, 5.0, 17.0}) {
    const auto opt = optimize_family(mbar);
    CHECK(std::abs(opt.a_star - 2.0 * mbar) < 1e-6 * std::max(1.0, mbar));
    const double h = 1e-4 * mbar;
    const double slope = (family_ratio(opt.a_star + h, mbar) - family_ratio(opt.a_star - h, mbar)) / (2.0 * h);
    CHECK(std::abs(slope) < 1e-6);
  }
}

TEST_CASE("grid-sampled candidates") {
  const auto base = sampled_from(1.0, sample_one);
  CHECK(base.form() == CandidateForm::grid_sampled);
  CHECK_FALSE(base.family_parameter().has_value());
  CHECK(base.value(base.grid_x()(40), 0.0) == Approx(2.0 * std::sqrt(base.grid_x()(40))).epsilon(1e-14));
  // bilinear between nodes: below the concave truth, within a grid step
  CHECK(base.value(1.0, 0.0) <= 2.0);
  CHECK(base.value(1.0, 0.0) == Approx(2.0).epsilon(1e-2));
  CHECK_THROWS_AS((void)base.value(1e3, 0.0), DomainError);

  // Second differences of data that is linear in y only vanish up to rounding
  // of order eps |B| / h^2, so sampled candidates need a looser tolerance.
  const double tol = 1e-9;
  const auto base_report = verify_conditions(base, GridSpec{}, tol);
  CHECK(base_report.at(kConvexY).pass);
  CHECK(base_report.at(kConcaveX).pass);
  CHECK(base_report.at(kBoundaryZero).pass);
  CHECK(base_report.at(kLowerBound).pass);
  CHECK(base_report.at(kUpperBound).pass);

  // B + 0.01 y^2: B_y picks up +0.02 y, so -B_x B_y drops below mbar/2 near y = mbar.
  const auto perturbed = verify_conditions(sampled_from(1.0, perturbed_one), GridSpec{}, tol);
  CHECK(perturbed.at(kConvexY).pass);
  CHECK(perturbed.at(kConcaveX).pass == base_report.at(kConcaveX).pass);
  CHECK(perturbed.at(kConcaveX).worst_margin == Approx(base_report.at(kConcaveX).worst_margin).epsilon(1e-9));
  const auto& mixed = perturbed.at(kMixedDerivative);
  CHECK_FALSE(mixed.pass);
  CHECK(mixed.y > 0.9);
  // analytic value of the perturbed mixed product at the reported point
  const double x = mixed.x;
  const double y = mixed.y;
  const double analytic = (2.0 - y) / (2.0 * std::sqrt(x)) * (std::sqrt(x) - 0.02 * y);
  CHECK(mixed.worst_value == Approx(analytic).epsilon(1e-2));
}

TEST_CASE("sampled candidate validation") {
  Eigen::VectorXd x(4);
  x << 0.0, 1.0, 2.0, 3.0;
  Eigen::VectorXd y(3);
  y << 0.0, 0.5, 1.0;
  CHECK_NOTHROW((void)BellmanCandidate::sampled(1.0, x, y, Eigen::MatrixXd::Zero(4, 3)));
  CHECK_THROWS_AS((void)BellmanCandidate::sampled(1.0, x, y, Eigen::MatrixXd::Zero(3, 3)), ValidationError);
  Eigen::VectorXd shifted = x.array() + 0.5;
  CHECK_THROWS_AS((void)BellmanCandidate::sampled(1.0, shifted, y, Eigen::MatrixXd::Zero(4, 3)), ValidationError);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(4, 3);
  bad(2, 1) = NAN;
  CHECK_THROWS_AS((void)BellmanCandidate::sampled(1.0, x, y, bad), ValidationError);
  CHECK_THROWS_AS((void)verify_conditions(sample_candidate(1.0), GridSpec{}, 1e-12), ValidationError);
}
