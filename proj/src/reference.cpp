#include "dyadic/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dyadic::reference {

namespace {

void require_dim1(const LatticeSpec& spec) {
  if (spec.dim != 1) throw ValidationError("reference routines are one dimensional");
}

// Increments of every internal node, flat layout, each from two direct scans.
std::vector<double> all_increments(const StepFunction& f) {
  std::vector<double> out(f.spec.internal_count());
  for (int k = 0; k < f.spec.depth; ++k) {
    for (const NodeId node : nodes_at_generation(f.spec, k)) out[flat_index(f.spec, node)] = increment(f, node);
  }
  return out;
}

}  // namespace

double average(const StepFunction& f, NodeId node) {
  const auto [first, last] = leaf_range(f.spec, node);
  double sum = 0.0;
  for (std::size_t i = first; i < last; ++i) sum += f.values(static_cast<Eigen::Index>(i));
  return sum / static_cast<double>(last - first);
}

double increment(const StepFunction& f, NodeId node) {
  require_dim1(f.spec);
  return reference::average(f, child(f.spec, node, 1)) - reference::average(f, child(f.spec, node, 0));
}

double bmo_norm(const StepFunction& phi) {
  require_dim1(phi.spec);
  const auto inc = all_increments(phi);
  double best = 0.0;
  for (int j = 0; j <= phi.spec.depth; ++j) {
    for (const NodeId top : nodes_at_generation(phi.spec, j)) {
      // every internal I inside J: generations j..depth-1, index range scaled from J's
      double sum = 0.0;
      for (int k = j; k < phi.spec.depth; ++k) {
        const std::size_t width = std::size_t{1} << (k - j);
        for (std::size_t i = top.index * width; i < (top.index + 1) * width; ++i) {
          const NodeId node{k, i};
          const double d = inc[flat_index(phi.spec, node)];
          sum += d * d * measure(phi.spec, node);
        }
      }
      best = std::max(best, sum / measure(phi.spec, top));
    }
  }
  return std::sqrt(best);
}

double tl_norm(const StepFunction& f) {
  require_dim1(f.spec);
  const auto inc = all_increments(f);
  double total = 0.0;
  for (const NodeId leaf : nodes_at_generation(f.spec, f.spec.depth)) {
    double square = 0.0;
    NodeId node = leaf;
    while (node.generation > 0) {
      node = parent(f.spec, node);
      const double d = inc[flat_index(f.spec, node)];
      square += d * d;
    }
    total += measure(f.spec, leaf) * std::sqrt(square);
  }
  return total;
}

double duality_sum(const StepFunction& f, const StepFunction& phi) {
  require_dim1(f.spec);
  if (!(f.spec == phi.spec)) throw MismatchError("f and phi live on different lattices");
  double total = 0.0;
  for (int k = 0; k < f.spec.depth; ++k) {
    for (const NodeId node : nodes_at_generation(f.spec, k)) {
      total += measure(f.spec, node) * std::abs(increment(f, node)) * std::abs(increment(phi, node));
    }
  }
  return 0.25 * total;
}

}  // namespace dyadic::reference
