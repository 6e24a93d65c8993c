#include "dyadic/lemma.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace dyadic {

namespace {

double slack(double tol, double v) { return tol * std::max(1.0, std::abs(v)); }

bool close_relative(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

std::string node_text(NodeId node) {
  return "(" + std::to_string(node.generation) + "," + std::to_string(node.index) + ")";
}

}  // namespace

std::optional<Violation> VerificationReport::first() const {
  if (violations.empty()) return std::nullopt;
  return violations.front();
}

void VerificationReport::record(Violation v) {
  ++violation_count;
  if (violations.size() < kMaxRecorded) violations.push_back(std::move(v));
}

InadmissiblePairError::InadmissiblePairError(VerificationReport report)
    : ValidationError("pair is not admissible: " +
                      (report.first() ? report.first()->kind + " at node " + node_text(report.first()->node)
                                      : std::string("unknown violation"))),
      report_(std::move(report)) {}

AdmissiblePair build_pair(const StepFunction& f, const StepFunction& phi) {
  if (!(f.spec == phi.spec)) throw MismatchError("f and phi live on different lattices");
  AdmissiblePair pair;
  pair.m = detail::subtree_means(square_increments(phi));
  pair.s = detail::ancestor_sums(square_increments(f));
  pair.mbar = detail::max_value(pair.m);
  pair.exact_siblings = true;
  return pair;
}

BellmanCandidate default_candidate(const AdmissiblePair& pair) {
  return sample_candidate(pair.mbar > 0.0 ? pair.mbar : 1.0);
}

AdmissiblePair external_pair(NodeFunctional s, NodeFunctional m, std::optional<double> mbar) {
  if (!(s.spec == m.spec)) throw MismatchError("S and M live on different lattices");
  s.validate();
  m.validate();
  AdmissiblePair pair;
  pair.mbar = mbar.value_or(detail::max_value(m));
  if (!std::isfinite(pair.mbar) || pair.mbar < 0.0) throw ValidationError("mbar must be finite and non-negative");
  pair.s = std::move(s);
  pair.m = std::move(m);
  pair.exact_siblings = false;
  return pair;
}

VerificationReport check_admissibility(const NodeFunctional& s, const NodeFunctional& m, double mbar, double tol,
                                       bool exact_siblings) {
  if (!(s.spec == m.spec)) throw MismatchError("S and M live on different lattices");
  s.validate();
  m.validate();
  VerificationReport report;
  report.tol = tol;
  const LatticeSpec& spec = s.spec;
  const auto b = spec.branching();
  for (int k = 0; k <= spec.depth; ++k) {
    for (const NodeId node : nodes_at_generation(spec, k)) {
      ++report.nodes_checked;
      const double sj = s.at(node);
      const double mj = m.at(node);
      if (sj < -tol) report.record({"s_nonnegative", node, -sj});
      if (mj < -tol) report.record({"m_range", node, -mj});
      if (mj > mbar + slack(tol, mbar)) report.record({"m_range", node, mj - mbar});
      if (k == spec.depth) continue;

      const NodeId first = child(spec, node, 0);
      const double s0 = s.at(first);
      for (std::size_t v = 1; v < b; ++v) {
        const double sv = s.at(NodeId{k + 1, first.index + v});
        const bool equal = exact_siblings ? sv == s0 : std::abs(sv - s0) <= slack(tol, s0);
        if (!equal) {
          report.record({"sibling_equality", node, std::abs(sv - s0)});
          break;
        }
      }
      if (s0 < sj - slack(tol, sj)) report.record({"s_monotone", node, sj - s0});
      const double mean = child_mean(m, node);
      if (mj < mean - slack(tol, mj)) report.record({"m_supermean", node, mean - mj});
    }
  }
  return report;
}

VerificationReport check_admissibility(const AdmissiblePair& pair, double tol) {
  return check_admissibility(pair.s, pair.m, pair.mbar, tol, pair.exact_siblings);
}

double NodeCheck::scale() const { return std::max({1.0, std::abs(lhs), std::abs(rhs)}); }

NodeCheck verify_node_inequality(const BellmanCandidate& b, const AdmissiblePair& pair, NodeId node) {
  const LatticeSpec& spec = pair.spec();
  check_node(spec, node);
  if (is_leaf(spec, node)) throw OutOfRangeError("the one-step inequality needs an internal node");
  if (b.mbar() < pair.mbar) {
    throw DomainError("candidate is defined for M <= " + std::to_string(b.mbar()) + " but the pair reaches " +
                      std::to_string(pair.mbar));
  }
  const NodeId first = child(spec, node, 0);
  const double s = pair.s.at(node);
  const double s0 = pair.s.at(first);
  const std::size_t branching = spec.branching();

  NodeCheck check;
  bool children_zero = true;
  for (std::size_t v = 0; v < branching; ++v) children_zero = children_zero && pair.s.at(NodeId{first.generation, first.index + v}) == 0.0;
  if (s == 0.0 && children_zero) {
    check.degenerate = true;
    return check;
  }

  std::vector<double> child_values(branching);
  for (std::size_t v = 0; v < branching; ++v) {
    const NodeId c{first.generation, first.index + v};
    child_values[v] = b.value(pair.s.at(c), pair.m.at(c));
  }
  check.lhs = std::ldexp(pairwise_sum(child_values), -spec.dim);
  check.s_increment = std::max(0.0, s0 - s);
  check.m_drop = std::max(0.0, pair.m.at(node) - child_mean(pair.m, node));
  check.rhs = std::sqrt(2.0 * b.mbar()) * std::sqrt(check.m_drop * check.s_increment) + b.value(s, pair.m.at(node));
  return check;
}

InductionTrace verify_key_lemma(const BellmanCandidate& b, const AdmissiblePair& pair, int depth_n, double tol,
                                const NodeInequality& inequality) {
  const LatticeSpec& spec = pair.spec();
  if (depth_n < 0 || depth_n > spec.depth) {
    throw OutOfRangeError("truncation level " + std::to_string(depth_n) + " outside 0.." + std::to_string(spec.depth));
  }
  if (auto report = check_admissibility(pair, tol); !report.pass()) throw InadmissiblePairError(std::move(report));
  if (b.mbar() < pair.mbar) {
    throw DomainError("candidate is defined for M <= " + std::to_string(b.mbar()) + " but the pair reaches " +
                      std::to_string(pair.mbar));
  }
  const NodeInequality& check_node_fn = inequality ? inequality : NodeInequality(verify_node_inequality);
  const double constant = std::sqrt(2.0 * b.mbar());

  InductionTrace trace;
  trace.spec = spec;
  trace.depth_n = depth_n;
  trace.mbar = b.mbar();
  trace.tol = tol;

  // sum over generation k of sqrt(increment products), used by F_{k+1} and the level sums
  std::vector<double> root_sums;
  bool first_node = true;
  for (int k = 0; k < depth_n; ++k) {
    const auto count = static_cast<Eigen::Index>(spec.count_at(k));
    Eigen::VectorXd margins(count);
    Eigen::VectorXd scales(count);
    Eigen::VectorXd roots(count);
    double gen_min = 0.0;
    for (const NodeId node : nodes_at_generation(spec, k)) {
      const auto i = static_cast<Eigen::Index>(node.index);
      const NodeCheck c = check_node_fn(b, pair, node);
      margins(i) = c.margin();
      scales(i) = c.scale();
      const double scaled = c.margin() / c.scale();
      if (node.index == 0 || scaled < gen_min) gen_min = scaled;
      if (first_node || scaled < trace.worst_scaled_margin) {
        trace.worst_scaled_margin = scaled;
        trace.worst_node = node;
        first_node = false;
      }
      const double ds = std::max(0.0, pair.s.at(child(spec, node, 0)) - pair.s.at(node));
      const double dm = std::max(0.0, pair.m.at(node) - child_mean(pair.m, node));
      roots(i) = std::sqrt(ds * dm);
    }
    if (gen_min < -tol) trace.nodes_hold = false;
    trace.margins.push_back(std::move(margins));
    trace.scales.push_back(std::move(scales));
    trace.generation_min_scaled_margin.push_back(gen_min);
    root_sums.push_back(pairwise_sum(roots));
    trace.f_k.push_back(constant * root_sums.back());
  }

  const double root_b = b.value(pair.s.at(kRoot), pair.m.at(kRoot));
  double lhs = 0.0;
  double weighted_f = 0.0;
  for (int n = 1; n <= depth_n; ++n) {
    LevelBound level;
    level.n = n;
    lhs += measure_at(spec, n - 1) * root_sums[static_cast<std::size_t>(n - 1)];
    weighted_f += measure_at(spec, n) * trace.f_k[static_cast<std::size_t>(n - 1)];
    level.lhs = lhs;
    level.rhs = constant * detail::leaf_sqrt_integral(pair.s, n);
    level.holds = level.lhs <= level.rhs + slack(tol, level.rhs);

    const auto& s_level = pair.s.generation(n);
    const auto& m_level = pair.m.generation(n);
    Eigen::VectorXd values(s_level.size());
    for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = b.value(s_level(i), m_level(i));
    level.weighted_b = std::ldexp(pairwise_sum(values), -spec.dim * (n + 1));
    level.chain = weighted_f + std::ldexp(root_b, -spec.dim);
    level.telescoping_holds =
        level.weighted_b >= level.chain - tol * std::max({1.0, std::abs(level.weighted_b), std::abs(level.chain)});

    const double expected = std::ldexp(constant * lhs, -spec.dim);
    const double denom = std::max(std::abs(expected), std::abs(weighted_f));
    level.identity_error = denom > 0.0 ? std::abs(expected - weighted_f) / denom : 0.0;

    trace.lemma_holds = trace.lemma_holds && level.holds;
    trace.telescoping_holds = trace.telescoping_holds && level.telescoping_holds;
    trace.identity_holds = trace.identity_holds && level.identity_error <= 1e-10;
    trace.levels.push_back(level);
  }
  if (depth_n == 0) {
    trace.lhs = 0.0;
    trace.rhs = constant * std::sqrt(std::max(0.0, pair.s.at(kRoot)));
  } else {
    trace.lhs = trace.levels.back().lhs;
    trace.rhs = trace.levels.back().rhs;
  }
  return trace;
}

double duality_sum(const StepFunction& f, const StepFunction& phi, std::optional<int> max_generation) {
  if (!(f.spec == phi.spec)) throw MismatchError("f and phi live on different lattices");
  const LatticeSpec& spec = f.spec;
  const int top = std::clamp(max_generation.value_or(spec.depth), 0, spec.depth);

  const auto hf = expand(f);
  const auto hphi = expand(phi);
  const auto n = static_cast<Eigen::Index>(generation_offset(spec, top));
  Eigen::VectorXd products = (hf.coeffs.head(n).cwiseAbs().array() * hphi.coeffs.head(n).cwiseAbs().array()).matrix();
  const double by_coefficients = pairwise_sum(products);

  const auto af = averages(f);
  const auto aphi = averages(phi);
  Eigen::VectorXd terms(n);
  for (int k = 0; k < top; ++k) {
    const auto& cf = af.generation(k + 1);
    const auto& cphi = aphi.generation(k + 1);
    const auto offset = static_cast<Eigen::Index>(generation_offset(spec, k));
    const double weight = 0.25 * measure_at(spec, k);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(spec.count_at(k)); ++i) {
      terms(offset + i) = weight * std::abs(cf(2 * i + 1) - cf(2 * i)) * std::abs(cphi(2 * i + 1) - cphi(2 * i));
    }
  }
  const double by_increments = pairwise_sum(terms);
  if (!close_relative(by_coefficients, by_increments, 1e-10)) {
    throw std::logic_error("duality sum routes disagree: " + std::to_string(by_coefficients) + " vs " +
                           std::to_string(by_increments));
  }
  return by_coefficients;
}

AdmissiblePair random_admissible_pair(const LatticeSpec& spec, std::mt19937_64& rng, const AdversarialOptions& options) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&] { return std::pow(10.0, -3.0 + 6.0 * unit(rng)); };
  auto increment = [&] { return unit(rng) < options.zero_increment_probability ? 0.0 : log_uniform(); };

  NodeFunctional s(spec);
  NodeFunctional m(spec);
  s.at(kRoot) = unit(rng) < 0.5 ? 0.0 : log_uniform();
  const auto b = static_cast<Eigen::Index>(spec.branching());
  for (int k = 0; k < spec.depth; ++k) {
    const auto& here = s.generation(k);
    auto& next = s.levels[static_cast<std::size_t>(k) + 1];
    for (Eigen::Index i = 0; i < here.size(); ++i) next.segment(i * b, b).setConstant(here(i) + increment());
  }
  for (auto& v : m.levels.back()) v = increment();
  for (int k = spec.depth - 1; k >= 0; --k) {
    auto& level = m.levels[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < level.size(); ++i) {
      level(i) = child_mean(m, NodeId{k, static_cast<std::size_t>(i)}) + increment();
    }
  }
  double mbar = detail::max_value(m);
  if (unit(rng) < options.inflate_mbar_probability) mbar *= 1.0 + unit(rng);
  if (mbar == 0.0) mbar = 1.0;
  return external_pair(std::move(s), std::move(m), mbar);
}

}  // namespace dyadic
