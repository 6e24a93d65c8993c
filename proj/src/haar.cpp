#include "dyadic/haar.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dyadic {

namespace {

void require_one_dimensional(const LatticeSpec& spec, const char* what) {
  if (spec.dim != 1) {
    throw ValidationError(std::string(what) + " is defined for dim = 1 only, got dim = " +
                          std::to_string(spec.dim));
  }
}

}  // namespace

StepFunction StepFunction::make(const LatticeSpec& spec, Eigen::VectorXd values) {
  const auto checked = LatticeSpec::make(spec.dim, spec.depth);
  if (static_cast<std::size_t>(values.size()) != checked.leaf_count()) {
    throw ValidationError("step function has " + std::to_string(values.size()) +
                          " values, lattice has " + std::to_string(checked.leaf_count()) + " leaves");
  }
  if (!values.allFinite()) throw ValidationError("step function contains non-finite values");
  return StepFunction{checked, std::move(values)};
}

StepFunction StepFunction::constant(const LatticeSpec& spec, double c) {
  return make(spec, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(spec.leaf_count()), c));
}

HaarCoefficients HaarCoefficients::zero(const LatticeSpec& spec) {
  return HaarCoefficients{spec, 0.0, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.internal_count()))};
}

NodeFunctional averages(const StepFunction& f) {
  NodeFunctional avg(f.spec);
  avg.levels.back() = f.values;
  for (int k = f.spec.depth - 1; k >= 0; --k) {
    auto& level = avg.levels[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < level.size(); ++i) level(i) = child_mean(avg, NodeId{k, static_cast<std::size_t>(i)});
  }
  return avg;
}

double average(const StepFunction& f, NodeId node) {
  check_node(f.spec, node);
  const auto [first, last] = leaf_range(f.spec, node);
  const std::span<const double> leaves(f.values.data() + first, last - first);
  return std::ldexp(pairwise_sum(leaves), -f.spec.dim * (f.spec.depth - node.generation));
}

NodeFunctional square_increments(const StepFunction& f) {
  const auto avg = averages(f);
  NodeFunctional d(f.spec);
  const auto b = static_cast<Eigen::Index>(f.spec.branching());
  for (int k = 0; k < f.spec.depth; ++k) {
    const auto& parent_avg = avg.generation(k);
    const auto& child_avg = avg.generation(k + 1);
    auto& out = d.levels[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (f.spec.dim == 1) {
        const double delta = child_avg(2 * i + 1) - child_avg(2 * i);
        out(i) = delta * delta;
      } else {
        double acc = 0.0;
        for (Eigen::Index v = 0; v < b; ++v) {
          const double dev = child_avg(i * b + v) - parent_avg(i);
          acc += dev * dev;
        }
        out(i) = std::ldexp(acc, 2 - f.spec.dim);
      }
    }
  }
  return d;
}

double haar_coefficient(const StepFunction& f, NodeId node) {
  require_one_dimensional(f.spec, "haar_coefficient");
  check_node(f.spec, node);
  if (is_leaf(f.spec, node)) throw OutOfRangeError("Haar coefficients live on internal nodes only");
  const double left = average(f, child(f.spec, node, 0));
  const double right = average(f, child(f.spec, node, 1));
  return 0.5 * std::sqrt(measure(f.spec, node)) * (left - right);
}

HaarCoefficients expand(const StepFunction& f) {
  require_one_dimensional(f.spec, "expand");
  const auto avg = averages(f);
  auto h = HaarCoefficients::zero(f.spec);
  h.mean = avg.generation(0)(0);
  for (int k = 0; k < f.spec.depth; ++k) {
    const double half_sqrt = 0.5 * std::sqrt(measure_at(f.spec, k));
    const auto& next = avg.generation(k + 1);
    const auto offset = static_cast<Eigen::Index>(generation_offset(f.spec, k));
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(f.spec.count_at(k)); ++i) {
      h.coeffs(offset + i) = half_sqrt * (next(2 * i) - next(2 * i + 1));
    }
  }
  return h;
}

StepFunction reconstruct(const HaarCoefficients& h) {
  require_one_dimensional(h.spec, "reconstruct");
  if (static_cast<std::size_t>(h.coeffs.size()) != h.spec.internal_count()) {
    throw MismatchError("coefficient vector has " + std::to_string(h.coeffs.size()) +
                        " entries, lattice has " + std::to_string(h.spec.internal_count()) +
                        " internal nodes");
  }
  Eigen::VectorXd current = Eigen::VectorXd::Constant(1, h.mean);
  for (int k = 0; k < h.spec.depth; ++k) {
    const double inv_sqrt = 1.0 / std::sqrt(measure_at(h.spec, k));
    const auto offset = static_cast<Eigen::Index>(generation_offset(h.spec, k));
    Eigen::VectorXd next(2 * current.size());
    for (Eigen::Index i = 0; i < current.size(); ++i) {
      const double step = h.coeffs(offset + i) * inv_sqrt;
      next(2 * i) = current(i) + step;
      next(2 * i + 1) = current(i) - step;
    }
    current = std::move(next);
  }
  return StepFunction::make(h.spec, std::move(current));
}

StepFunction haar_function(const LatticeSpec& spec, NodeId node) {
  require_one_dimensional(spec, "haar_function");
  check_node(spec, node);
  if (is_leaf(spec, node)) throw OutOfRangeError("Haar functions live on internal nodes only");
  Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.leaf_count()));
  const double height = 1.0 / std::sqrt(measure(spec, node));
  const auto [first, last] = leaf_range(spec, node);
  const std::size_t mid = first + (last - first) / 2;
  for (std::size_t i = first; i < last; ++i) values(static_cast<Eigen::Index>(i)) = i < mid ? height : -height;
  return StepFunction::make(spec, std::move(values));
}

double centered_l2_norm(const StepFunction& f) {
  const double mean = average(f, kRoot);
  Eigen::VectorXd sq = (f.values.array() - mean).square().matrix();
  return std::sqrt(std::ldexp(pairwise_sum(sq), -f.spec.dim * f.spec.depth));
}

namespace detail {

NodeFunctional subtree_means(const NodeFunctional& d) {
  NodeFunctional m(d.spec);
  for (int k = d.spec.depth - 1; k >= 0; --k) {
    auto& level = m.levels[static_cast<std::size_t>(k)];
    const auto& inc = d.generation(k);
    for (Eigen::Index i = 0; i < level.size(); ++i) {
      level(i) = inc(i) + child_mean(m, NodeId{k, static_cast<std::size_t>(i)});
    }
  }
  return m;
}

NodeFunctional ancestor_sums(const NodeFunctional& d) {
  NodeFunctional s(d.spec);
  const auto b = static_cast<Eigen::Index>(d.spec.branching());
  for (int k = 0; k < d.spec.depth; ++k) {
    const auto& here = s.generation(k);
    const auto& inc = d.generation(k);
    auto& next = s.levels[static_cast<std::size_t>(k) + 1];
    for (Eigen::Index i = 0; i < here.size(); ++i) {
      const double value = here(i) + inc(i);
      next.segment(i * b, b).setConstant(value);
    }
  }
  return s;
}

NodeFunctional square_increments(const HaarCoefficients& h) {
  NodeFunctional d(h.spec);
  for (int k = 0; k < h.spec.depth; ++k) {
    const auto offset = static_cast<Eigen::Index>(generation_offset(h.spec, k));
    const auto n = static_cast<Eigen::Index>(h.spec.count_at(k));
    // 4 c^2 / |I| with |I| = 2^-k
    d.levels[static_cast<std::size_t>(k)] = (h.coeffs.segment(offset, n).array().square() * std::ldexp(4.0, k)).matrix();
  }
  return d;
}

double max_value(const NodeFunctional& values) {
  double best = 0.0;
  for (const auto& level : values.levels) {
    if (level.size() > 0) best = std::max(best, level.maxCoeff());
  }
  return best;
}

double leaf_sqrt_integral(const NodeFunctional& s, int generation) {
  const auto& level = s.generation(generation);
  Eigen::VectorXd roots = level.cwiseMax(0.0).cwiseSqrt();
  return std::ldexp(pairwise_sum(roots), -s.spec.dim * generation);
}

}  // namespace detail

double bmo_norm(const StepFunction& phi) {
  require_one_dimensional(phi.spec, "bmo_norm");
  return std::sqrt(detail::max_value(detail::subtree_means(square_increments(phi))));
}

double bmo_norm(const HaarCoefficients& phi) {
  require_one_dimensional(phi.spec, "bmo_norm");
  return std::sqrt(detail::max_value(detail::subtree_means(detail::square_increments(phi))));
}

double tl_norm(const StepFunction& f) {
  require_one_dimensional(f.spec, "tl_norm");
  return detail::leaf_sqrt_integral(detail::ancestor_sums(square_increments(f)), f.spec.depth);
}

double tl_norm(const HaarCoefficients& f) {
  require_one_dimensional(f.spec, "tl_norm");
  return detail::leaf_sqrt_integral(detail::ancestor_sums(detail::square_increments(f)), f.spec.depth);
}

StepFunction make_atom(const LatticeSpec& spec, NodeId node, std::span<const double> profile) {
  require_one_dimensional(spec, "make_atom");
  check_node(spec, node);
  const auto [first, last] = leaf_range(spec, node);
  if (profile.size() != last - first) {
    throw ValidationError("atom profile has " + std::to_string(profile.size()) + " values, node covers " +
                          std::to_string(last - first) + " leaves");
  }
  const double bound = 1.0 / measure(spec, node);
  for (double v : profile) {
    if (!std::isfinite(v)) throw ValidationError("atom profile contains non-finite values");
    if (std::abs(v) > bound * (1.0 + 1e-12)) {
      throw ValidationError("atom value " + std::to_string(v) + " exceeds 1/|I| = " + std::to_string(bound));
    }
  }
  // integral of the atom; |integral| <= 1 for any admissible profile
  const double integral = std::ldexp(pairwise_sum(profile), -spec.depth);
  if (std::abs(integral) > 1e-12) {
    throw ValidationError("atom profile does not have mean zero (integral " + std::to_string(integral) + ")");
  }
  Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.leaf_count()));
  for (std::size_t i = 0; i < profile.size(); ++i) values(static_cast<Eigen::Index>(first + i)) = profile[i];
  return StepFunction::make(spec, std::move(values));
}

}  // namespace dyadic
