#include "dyadic/duality_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "dyadic/golden.hpp"
#include "dyadic/reference.hpp"

namespace dyadic {

namespace {

constexpr double kMinusInf = -std::numeric_limits<double>::infinity();

bool close_relative(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

// Ratio evaluation on heap-ordered coefficient vectors of a one-dimensional
// lattice: node p has children 2p+1 and 2p+2, generation k occupies
// [2^k - 1, 2^(k+1) - 1). Mirrors the NodeFunctional recurrences operation for
// operation, so results agree bit for bit with bmo_norm / tl_norm.
class FlatObjective {
 public:
  explicit FlatObjective(int depth)
      : depth_(depth),
        internal_((std::size_t{1} << depth) - 1),
        square_(internal_),
        tree_(2 * internal_ + 1),
        leaves_(internal_ + 1),
        products_(internal_) {}

  // -inf when either norm vanishes
  double operator()(const Eigen::VectorXd& f, const Eigen::VectorXd& phi) {
    const double tl = tl_norm(f);
    const double bmo = bmo_norm(phi);
    if (!(tl > 0.0) || !(bmo > 0.0)) return kMinusInf;
    for (std::size_t p = 0; p < internal_; ++p) {
      products_[p] = std::abs(f(static_cast<Eigen::Index>(p))) * std::abs(phi(static_cast<Eigen::Index>(p)));
    }
    return pairwise_sum(products_) / (bmo * tl);
  }

  double tl_norm(const Eigen::VectorXd& c) {
    fill_square(c);
    tree_[0] = 0.0;
    for (std::size_t p = 0; p < internal_; ++p) {
      const double next = tree_[p] + square_[p];
      tree_[2 * p + 1] = next;
      tree_[2 * p + 2] = next;
    }
    for (std::size_t i = 0; i <= internal_; ++i) leaves_[i] = std::sqrt(std::max(0.0, tree_[internal_ + i]));
    return std::ldexp(pairwise_sum(leaves_), -depth_);
  }

  double bmo_norm(const Eigen::VectorXd& c) {
    fill_square(c);
    std::fill(tree_.begin() + static_cast<std::ptrdiff_t>(internal_), tree_.end(), 0.0);
    double best = 0.0;
    for (std::size_t p = internal_; p-- > 0;) {
      tree_[p] = square_[p] + std::ldexp(tree_[2 * p + 1] + tree_[2 * p + 2], -1);
      best = std::max(best, tree_[p]);
    }
    return std::sqrt(best);
  }

 private:
  void fill_square(const Eigen::VectorXd& c) {
    for (int k = 0; k < depth_; ++k) {
      const std::size_t first = (std::size_t{1} << k) - 1;
      const double weight = std::ldexp(4.0, k);
      for (std::size_t p = first; p < 2 * first + 1; ++p) {
        const double v = c(static_cast<Eigen::Index>(p));
        square_[p] = v * v * weight;
      }
    }
  }

  int depth_;
  std::size_t internal_;
  std::vector<double> square_;
  std::vector<double> tree_;
  std::vector<double> leaves_;
  std::vector<double> products_;
};

struct RestartOutcome {
  double best = kMinusInf;
  Eigen::VectorXd f;
  Eigen::VectorXd phi;
  std::vector<double> trajectory;
};

double rms(const Eigen::VectorXd& v) { return v.norm() / std::sqrt(static_cast<double>(v.size())); }

RestartOutcome run_restart(const SearchConfig& config, int restart) {
  const auto n = static_cast<Eigen::Index>((std::size_t{1} << config.depth) - 1);
  std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(restart));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FlatObjective objective(config.depth);

  RestartOutcome out;
  if (restart == 0) {
    out.f = Eigen::VectorXd::Zero(n);
    out.f(0) = 1.0;
    out.phi = out.f;
  } else {
    out.f.resize(n);
    for (auto& v : out.f) v = gauss(rng);
    if (restart % 2 == 1) {
      out.phi = out.f;
    } else {
      out.phi.resize(n);
      for (auto& v : out.phi) v = gauss(rng);
    }
  }
  out.best = objective(out.f, out.phi);
  if (config.record_trajectories) {
    out.trajectory.reserve(static_cast<std::size_t>(config.iterations));
    out.trajectory.push_back(out.best);
  }

  const int random_until = config.strategy == Strategy::random           ? config.iterations
                           : config.strategy == Strategy::coordinate_ascent ? 1
                                                                            : (config.iterations + 1) / 2;
  double sigma = 0.3;
  Eigen::VectorXd trial_f;
  Eigen::VectorXd trial_phi;
  std::size_t coordinate = 0;

  for (int it = 2; it <= config.iterations; ++it) {
    if (it <= random_until) {
      trial_f = out.f;
      trial_phi = out.phi;
      Eigen::VectorXd& target = unit(rng) < 0.5 ? trial_f : trial_phi;
      const double step = sigma * std::max(rms(target), 1e-300);
      if (unit(rng) < 0.5) {
        const auto j = static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n)) % n;
        target(j) += step * gauss(rng);
      } else {
        for (auto& v : target) v += step * gauss(rng);
      }
      const double value = objective(trial_f, trial_phi);
      if (value > out.best) {
        out.best = value;
        out.f.swap(trial_f);
        out.phi.swap(trial_phi);
        sigma = std::min(1.0, sigma * 1.3);
      } else {
        sigma = std::max(1e-4, sigma * 0.97);
      }
    } else {
      const std::size_t total = 2 * static_cast<std::size_t>(n);
      const std::size_t slot = coordinate++ % total;
      const bool on_f = slot < static_cast<std::size_t>(n);
      const auto j = static_cast<Eigen::Index>(on_f ? slot : slot - static_cast<std::size_t>(n));
      trial_f = out.f;
      trial_phi = out.phi;
      Eigen::VectorXd& target = on_f ? trial_f : trial_phi;
      const double centre = target(j);
      const double width = 2.0 * std::max(std::abs(centre), rms(target));
      auto negated = [&](double t) {
        target(j) = t;
        return -objective(trial_f, trial_phi);
      };
      const auto line = golden_section_minimize(negated, centre - width, centre + width, 1e-7 * width, 60);
      target(j) = line.argument;
      const double value = objective(trial_f, trial_phi);
      if (value > out.best) {
        out.best = value;
        out.f.swap(trial_f);
        out.phi.swap(trial_phi);
      }
    }
    if (config.record_trajectories) out.trajectory.push_back(out.best);
  }
  return out;
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::random:
      return "random";
    case Strategy::coordinate_ascent:
      return "coordinate_ascent";
    case Strategy::hybrid:
      return "hybrid";
  }
  return "hybrid";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "random") return Strategy::random;
  if (name == "coordinate_ascent") return Strategy::coordinate_ascent;
  if (name == "hybrid") return Strategy::hybrid;
  throw ValidationError("unknown strategy '" + std::string(name) + "' (random, coordinate_ascent, hybrid)");
}

void SearchConfig::validate() const {
  if (depth < 1 || depth > kMaxDepth) {
    throw OutOfRangeError("search depth must lie in 1.." + std::to_string(kMaxDepth) + ", got " + std::to_string(depth));
  }
  if (iterations < 1) throw ValidationError("search needs at least one iteration");
  if (restarts < 1 || restarts > 1024) throw ValidationError("restarts must lie in 1..1024");
}

double ratio(const StepFunction& f, const StepFunction& phi) {
  if (!(f.spec == phi.spec)) throw MismatchError("f and phi live on different lattices");
  const double bmo = bmo_norm(phi);
  const double tl = tl_norm(f);
  if (!(bmo > 0.0) || !(tl > 0.0)) throw UndefinedRatioError("ratio undefined: a norm vanishes (constant function)");
  return duality_sum(f, phi) / (bmo * tl);
}

double ratio(const HaarCoefficients& f, const HaarCoefficients& phi) {
  if (!(f.spec == phi.spec)) throw MismatchError("f and phi live on different lattices");
  const double bmo = bmo_norm(phi);
  const double tl = tl_norm(f);
  if (!(bmo > 0.0) || !(tl > 0.0)) throw UndefinedRatioError("ratio undefined: a norm vanishes (constant function)");
  Eigen::VectorXd products = (f.coeffs.cwiseAbs().array() * phi.coeffs.cwiseAbs().array()).matrix();
  return pairwise_sum(products) / (bmo * tl);
}

SearchResult search(const SearchConfig& config) {
  config.validate();
  std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(config.restarts));
  {
    std::vector<std::jthread> workers;
    workers.reserve(outcomes.size());
    for (int r = 0; r < config.restarts; ++r) {
      workers.emplace_back([&outcomes, &config, r] { outcomes[static_cast<std::size_t>(r)] = run_restart(config, r); });
    }
  }

  SearchResult result;
  result.config = config;
  const auto spec = LatticeSpec::make(1, config.depth);
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    result.history.push_back(outcomes[r].best);
    if (r == 0 || outcomes[r].best > outcomes[static_cast<std::size_t>(result.best_restart)].best) {
      result.best_restart = static_cast<int>(r);
    }
    if (config.record_trajectories) result.trajectories.push_back(std::move(outcomes[r].trajectory));
  }
  const auto& winner = outcomes[static_cast<std::size_t>(result.best_restart)];
  result.best_ratio = winner.best;
  result.f_star = HaarCoefficients{spec, 0.0, winner.f};
  result.phi_star = HaarCoefficients{spec, 0.0, winner.phi};

  const auto f = reconstruct(result.f_star);
  const auto phi = reconstruct(result.phi_star);
  result.certificate = RatioCertificate{duality_sum(f, phi), bmo_norm(phi), tl_norm(f)};
  const double recomputed =
      result.certificate.duality_sum / (result.certificate.bmo_norm * result.certificate.tl_norm);
  if (!close_relative(recomputed, result.best_ratio, 1e-9)) {
    throw std::logic_error("incumbent ratio " + std::to_string(result.best_ratio) + " does not match recomputation " +
                           std::to_string(recomputed));
  }
  return result;
}

CertificationReport certify(const SearchResult& result) {
  CertificationReport report;
  auto fail = [&report](std::string why) {
    report.pass = false;
    report.failures.push_back(std::move(why));
  };
  const auto f = reconstruct(result.f_star);
  const auto phi = reconstruct(result.phi_star);
  report.recomputed = RatioCertificate{reference::duality_sum(f, phi), reference::bmo_norm(phi), reference::tl_norm(f)};
  const auto& ref = report.recomputed;
  if (!(ref.bmo_norm > 0.0) || !(ref.tl_norm > 0.0)) {
    fail("winner pair has a vanishing norm");
    return report;
  }
  report.ratio = ref.duality_sum / (ref.bmo_norm * ref.tl_norm);
  if (!close_relative(report.ratio, result.best_ratio, 1e-9)) fail("best_ratio disagrees with the reference recomputation");
  if (!close_relative(ref.duality_sum, result.certificate.duality_sum, 1e-9)) fail("duality_sum disagrees with the reference");
  if (!close_relative(ref.bmo_norm, result.certificate.bmo_norm, 1e-9)) fail("bmo_norm disagrees with the reference");
  if (!close_relative(ref.tl_norm, result.certificate.tl_norm, 1e-9)) fail("tl_norm disagrees with the reference");
  if (report.ratio > kDualityConstant + 1e-9) fail("ratio exceeds sqrt(2)/4");

  const auto pair = build_pair(f, phi);
  const auto candidate = default_candidate(pair);
  const auto trace = verify_key_lemma(candidate, pair, pair.spec().depth);
  report.lemma_passed = trace.passed();
  report.lemma_lhs = trace.lhs;
  report.lemma_rhs = trace.rhs;
  if (!report.lemma_passed) fail("induction on the winner pair failed");
  if (!close_relative(trace.lhs, 4.0 * ref.duality_sum, 1e-9)) fail("lemma left side differs from 4 * duality_sum");

  bool any_active = false;
  for (int k = 0; k < pair.spec().depth; ++k) {
    for (const NodeId node : nodes_at_generation(pair.spec(), k)) {
      const NodeCheck c = verify_node_inequality(candidate, pair, node);
      if (c.degenerate || c.s_increment == 0.0 || c.m_drop == 0.0) continue;
      const double scaled = c.margin() / c.scale();
      if (!any_active || scaled < report.min_active_scaled_margin) report.min_active_scaled_margin = scaled;
      any_active = true;
      if (c.margin() < 1e-6 * c.scale()) report.tight_nodes.push_back(node);
    }
  }
  return report;
}

}  // namespace dyadic
