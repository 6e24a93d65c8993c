#pragma once

#include <span>

#include <Eigen/Core>

#include "dyadic/lattice.hpp"

namespace dyadic {

/// A function constant on each finest-generation cell of a lattice.
///
/// `values(i)` is the value on leaf i in index order. Averages work in any
/// dimension; the Haar machinery (coefficients, both norms, atoms) is one
/// dimensional and throws ValidationError for dim != 1.
struct StepFunction {
  LatticeSpec spec;
  Eigen::VectorXd values;

  /// Checks the length against the leaf count and that every value is finite.
  static StepFunction make(const LatticeSpec& spec, Eigen::VectorXd values);
  static StepFunction constant(const LatticeSpec& spec, double c);
};

/// Haar expansion f = mean + sum_I coeffs(I) h_I over internal nodes I.
///
/// `coeffs` is flat, generation by generation, index order within each
/// generation (see flat_index). Sign convention: h_I = +1/sqrt|I| on the left
/// half and -1/sqrt|I| on the right half.
struct HaarCoefficients {
  LatticeSpec spec;
  double mean = 0.0;
  Eigen::VectorXd coeffs;

  static HaarCoefficients zero(const LatticeSpec& spec);

  [[nodiscard]] double at(NodeId node) const { return coeffs(static_cast<Eigen::Index>(flat_index(spec, node))); }
  double& at(NodeId node) { return coeffs(static_cast<Eigen::Index>(flat_index(spec, node))); }
};

/// Averages of f over every node, generations 0..depth, by one bottom-up pass.
[[nodiscard]] NodeFunctional averages(const StepFunction& f);
[[nodiscard]] double average(const StepFunction& f, NodeId node);

/// Squared increments d_J on internal nodes (leaves carry 0).
///
/// In dimension one d_J = (<f>_{J+} - <f>_{J-})^2. For dim >= 2 the same
/// quantity is generalised as 4 * 2^-dim * sum_v (<f>_{J^v} - <f>_J)^2, which
/// reduces to the one-dimensional formula when dim = 1.
[[nodiscard]] NodeFunctional square_increments(const StepFunction& f);

/// (f, h_I) = (sqrt|I| / 2) (<f>_{I-} - <f>_{I+}). Throws OutOfRangeError on leaves.
[[nodiscard]] double haar_coefficient(const StepFunction& f, NodeId node);

[[nodiscard]] HaarCoefficients expand(const StepFunction& f);
[[nodiscard]] StepFunction reconstruct(const HaarCoefficients& h);

/// The Haar function h_I sampled on the leaves of `spec`.
[[nodiscard]] StepFunction haar_function(const LatticeSpec& spec, NodeId node);

/// ||f - <f>||_{L^2} over the whole torus.
[[nodiscard]] double centered_l2_norm(const StepFunction& f);

/// Dyadic BMO norm: sup_J ( |J|^-1 sum_{I subset J} (<phi>_{I+} - <phi>_{I-})^2 |I| )^{1/2},
/// the sup running over every node including leaves.
[[nodiscard]] double bmo_norm(const StepFunction& phi);
[[nodiscard]] double bmo_norm(const HaarCoefficients& phi);

/// Integral of the dyadic square function, computed exactly as a sum over leaves.
[[nodiscard]] double tl_norm(const StepFunction& f);
[[nodiscard]] double tl_norm(const HaarCoefficients& f);

/// Builds the atom supported on `node` whose values on the leaves below it are
/// `profile`. Rejects profiles with |value| > 1/|I| or a nonzero mean.
[[nodiscard]] StepFunction make_atom(const LatticeSpec& spec, NodeId node, std::span<const double> profile);

namespace detail {

/// M_J = (1/|J|) sum_{I subset J} d_I |I| by the recurrence M_J = d_J + mean(children).
[[nodiscard]] NodeFunctional subtree_means(const NodeFunctional& square_increments);
/// S_J = sum_{I strictly containing J} d_I, shared by siblings.
[[nodiscard]] NodeFunctional ancestor_sums(const NodeFunctional& square_increments);
/// Squared increments 4 c_I^2 / |I| read off a coefficient vector.
[[nodiscard]] NodeFunctional square_increments(const HaarCoefficients& h);
[[nodiscard]] double max_value(const NodeFunctional& values);
/// sum over leaves of |L| sqrt(S_L).
[[nodiscard]] double leaf_sqrt_integral(const NodeFunctional& ancestor_sums, int generation);

}  // namespace detail

}  // namespace dyadic
