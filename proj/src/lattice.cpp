#include "dyadic/lattice.hpp"

#include <cmath>
#include <string>

namespace dyadic {

namespace {

std::string describe(NodeId node) {
  return "(" + std::to_string(node.generation) + "," + std::to_string(node.index) + ")";
}

}  // namespace

LatticeSpec LatticeSpec::make(int dim, int depth) {
  if (dim < 1) throw OutOfRangeError("lattice dim must be >= 1, got " + std::to_string(dim));
  if (depth < 0) throw OutOfRangeError("lattice depth must be >= 0, got " + std::to_string(depth));
  if (dim > kMaxLeafBits || dim * depth > kMaxLeafBits) {
    throw OutOfRangeError("lattice with dim " + std::to_string(dim) + " and depth " +
                          std::to_string(depth) + " exceeds 2^" + std::to_string(kMaxLeafBits) +
                          " leaves");
  }
  return LatticeSpec{dim, depth};
}

std::size_t LatticeSpec::node_count() const { return generation_offset(*this, depth) + leaf_count(); }

std::size_t LatticeSpec::internal_count() const { return generation_offset(*this, depth); }

void check_node(const LatticeSpec& spec, NodeId node) {
  if (node.generation < 0 || node.generation > spec.depth ||
      node.index >= spec.count_at(node.generation)) {
    throw OutOfRangeError("node " + describe(node) + " outside lattice of depth " +
                          std::to_string(spec.depth));
  }
}

bool is_leaf(const LatticeSpec& spec, NodeId node) { return node.generation == spec.depth; }

double measure_at(const LatticeSpec& spec, int generation) {
  return std::ldexp(1.0, -spec.dim * generation);
}

double measure(const LatticeSpec& spec, NodeId node) {
  check_node(spec, node);
  return measure_at(spec, node.generation);
}

NodeId parent(const LatticeSpec& spec, NodeId node) {
  check_node(spec, node);
  if (node.generation == 0) throw OutOfRangeError("the root has no parent");
  return NodeId{node.generation - 1, node.index >> spec.dim};
}

NodeId child(const LatticeSpec& spec, NodeId node, std::size_t v) {
  check_node(spec, node);
  if (node.generation >= spec.depth) {
    throw OutOfRangeError("node " + describe(node) + " is at the finest generation and has no children");
  }
  if (v >= spec.branching()) throw OutOfRangeError("child slot " + std::to_string(v) + " out of range");
  return NodeId{node.generation + 1, (node.index << spec.dim) + v};
}

std::vector<NodeId> children(const LatticeSpec& spec, NodeId node) {
  std::vector<NodeId> out;
  out.reserve(spec.branching());
  for (std::size_t v = 0; v < spec.branching(); ++v) out.push_back(child(spec, node, v));
  return out;
}

std::pair<std::size_t, std::size_t> leaf_range(const LatticeSpec& spec, NodeId node) {
  check_node(spec, node);
  const int shift = spec.dim * (spec.depth - node.generation);
  return {node.index << shift, (node.index + 1) << shift};
}

std::size_t generation_offset(const LatticeSpec& spec, int generation) {
  // sum_{j<k} 2^(dim j) = (2^(dim k) - 1) / (2^dim - 1)
  return (spec.count_at(generation) - 1) / (spec.branching() - 1);
}

std::size_t flat_index(const LatticeSpec& spec, NodeId node) {
  check_node(spec, node);
  return generation_offset(spec, node.generation) + node.index;
}

double pairwise_sum(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

NodeFunctional::NodeFunctional(const LatticeSpec& s) : spec(s) {
  levels.reserve(static_cast<std::size_t>(s.depth) + 1);
  for (int k = 0; k <= s.depth; ++k) {
    levels.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.count_at(k))));
  }
}

void NodeFunctional::validate() const {
  if (levels.size() != static_cast<std::size_t>(spec.depth) + 1) {
    throw ValidationError("node functional has " + std::to_string(levels.size()) +
                          " generations, expected " + std::to_string(spec.depth + 1));
  }
  for (int k = 0; k <= spec.depth; ++k) {
    const auto& level = generation(k);
    if (static_cast<std::size_t>(level.size()) != spec.count_at(k)) {
      throw ValidationError("generation " + std::to_string(k) + " has " +
                            std::to_string(level.size()) + " values, expected " +
                            std::to_string(spec.count_at(k)));
    }
    if (!level.allFinite()) {
      throw ValidationError("generation " + std::to_string(k) + " contains non-finite values");
    }
  }
}

double child_mean(const NodeFunctional& values, NodeId node) {
  const auto& next = values.generation(node.generation + 1);
  const auto b = static_cast<Eigen::Index>(values.spec.branching());
  const Eigen::Index first = static_cast<Eigen::Index>(node.index) * b;
  return std::ldexp(pairwise_sum(std::span<const double>(next.data() + first, static_cast<std::size_t>(b))),
                    -values.spec.dim);
}

}  // namespace dyadic
