#pragma once

#include <compare>
#include <cstddef>
#include <ranges>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "dyadic/errors.hpp"

namespace dyadic {

/// Largest admissible value of dim * depth; the finest generation holds at most 2^24 cells.
inline constexpr int kMaxLeafBits = 24;

/// Shape of a 2^dim-ary dyadic lattice on the unit torus/cube, cut off at generation `depth`.
struct LatticeSpec {
  int dim = 1;
  int depth = 0;

  /// Validating constructor. Throws OutOfRangeError for dim < 1, depth < 0 or too many leaves.
  static LatticeSpec make(int dim, int depth);

  [[nodiscard]] std::size_t branching() const { return std::size_t{1} << dim; }
  [[nodiscard]] std::size_t count_at(int generation) const {
    return std::size_t{1} << (dim * generation);
  }
  [[nodiscard]] std::size_t leaf_count() const { return count_at(depth); }
  /// Nodes in generations 0..depth.
  [[nodiscard]] std::size_t node_count() const;
  /// Nodes in generations 0..depth-1.
  [[nodiscard]] std::size_t internal_count() const;

  friend bool operator==(const LatticeSpec&, const LatticeSpec&) = default;
};

/// Address of a dyadic cube: generation k and index in [0, (2^dim)^k).
///
/// Children of (k, i) are (k+1, i * 2^dim + v). In dimension one v = 0 is the
/// left half and v = 1 the right half.
struct NodeId {
  int generation = 0;
  std::size_t index = 0;

  friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

inline constexpr NodeId kRoot{0, 0};

/// Throws OutOfRangeError unless `node` lies in generations 0..depth of `spec`.
void check_node(const LatticeSpec& spec, NodeId node);

[[nodiscard]] bool is_leaf(const LatticeSpec& spec, NodeId node);

/// Lebesgue measure (2^-dim)^generation. Exact in binary floating point.
[[nodiscard]] double measure(const LatticeSpec& spec, NodeId node);
[[nodiscard]] double measure_at(const LatticeSpec& spec, int generation);

[[nodiscard]] NodeId parent(const LatticeSpec& spec, NodeId node);
[[nodiscard]] NodeId child(const LatticeSpec& spec, NodeId node, std::size_t v);
/// All 2^dim children in index order. Throws OutOfRangeError at the finest generation.
[[nodiscard]] std::vector<NodeId> children(const LatticeSpec& spec, NodeId node);

/// Half-open range of finest-generation indices covered by `node`.
[[nodiscard]] std::pair<std::size_t, std::size_t> leaf_range(const LatticeSpec& spec, NodeId node);

/// Position of `node` in a flat array holding generations 0..depth back to back.
[[nodiscard]] std::size_t flat_index(const LatticeSpec& spec, NodeId node);
[[nodiscard]] std::size_t generation_offset(const LatticeSpec& spec, int generation);

/// Lazily yields every node of generation k in index order.
inline auto nodes_at_generation(const LatticeSpec& spec, int k) {
  if (k < 0 || k > spec.depth) {
    throw OutOfRangeError("generation " + std::to_string(k) + " outside 0.." +
                          std::to_string(spec.depth));
  }
  return std::views::iota(std::size_t{0}, spec.count_at(k)) |
         std::views::transform([k](std::size_t i) { return NodeId{k, i}; });
}

/// Sum by recursive halving. Fixed reduction order, so results do not depend
/// on how the caller's loops are scheduled.
[[nodiscard]] double pairwise_sum(std::span<const double> values);
[[nodiscard]] inline double pairwise_sum(const Eigen::VectorXd& values) {
  return pairwise_sum(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

/// A value attached to every node of generations 0..depth, stored one Eigen
/// vector per generation. Houses the S and M functionals.
struct NodeFunctional {
  LatticeSpec spec;
  std::vector<Eigen::VectorXd> levels;

  NodeFunctional() = default;
  /// All-zero functional on `spec`.
  explicit NodeFunctional(const LatticeSpec& spec);

  [[nodiscard]] double at(NodeId node) const {
    return levels[static_cast<std::size_t>(node.generation)](static_cast<Eigen::Index>(node.index));
  }
  double& at(NodeId node) {
    return levels[static_cast<std::size_t>(node.generation)](static_cast<Eigen::Index>(node.index));
  }
  [[nodiscard]] const Eigen::VectorXd& generation(int k) const {
    return levels[static_cast<std::size_t>(k)];
  }

  /// Shape and finiteness check for externally supplied data.
  void validate() const;
};

/// Arithmetic mean of the children of `node` under `values`, summed pairwise.
[[nodiscard]] double child_mean(const NodeFunctional& values, NodeId node);

}  // namespace dyadic
