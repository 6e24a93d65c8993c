#pragma once

// Brute-force oracles for the tests. Everything here works from the geometry
// of dyadic intervals (membership by midpoint, containment by endpoints) and
// literal inner products, never from the library's recurrences or index
// arithmetic.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dyadic/haar.hpp"

namespace oracle {

struct Interval {
  double lo;
  double hi;
  [[nodiscard]] double length() const { return hi - lo; }
  [[nodiscard]] bool contains(double t) const { return lo <= t && t < hi; }
  [[nodiscard]] bool contains(const Interval& other) const { return lo <= other.lo && other.hi <= hi; }
};

inline Interval interval(int generation, std::size_t index) {
  const double width = std::ldexp(1.0, -generation);
  return {static_cast<double>(index) * width, static_cast<double>(index + 1) * width};
}

inline double leaf_midpoint(int depth, std::size_t leaf) { return (static_cast<double>(leaf) + 0.5) * std::ldexp(1.0, -depth); }

/// (1/|J|) * integral over J, leaves found by midpoint membership.
inline double average(const std::vector<double>& values, int depth, const Interval& j) {
  double integral = 0.0;
  for (std::size_t leaf = 0; leaf < values.size(); ++leaf) {
    if (j.contains(leaf_midpoint(depth, leaf))) integral += values[leaf] * std::ldexp(1.0, -depth);
  }
  return integral / j.length();
}

inline double increment(const std::vector<double>& values, int depth, const Interval& j) {
  const double mid = 0.5 * (j.lo + j.hi);
  return average(values, depth, {mid, j.hi}) - average(values, depth, {j.lo, mid});
}

/// (f, h_I) as a literal inner product with h_I = +1/sqrt|I| on the left half.
inline double haar_inner_product(const std::vector<double>& values, int depth, const Interval& i) {
  const double mid = 0.5 * (i.lo + i.hi);
  const double height = 1.0 / std::sqrt(i.length());
  double sum = 0.0;
  for (std::size_t leaf = 0; leaf < values.size(); ++leaf) {
    const double t = leaf_midpoint(depth, leaf);
    if (!i.contains(t)) continue;
    sum += values[leaf] * (t < mid ? height : -height) * std::ldexp(1.0, -depth);
  }
  return sum;
}

inline std::vector<Interval> all_intervals(int max_generation) {
  std::vector<Interval> out;
  for (int k = 0; k <= max_generation; ++k) {
    for (std::size_t i = 0; i < (std::size_t{1} << k); ++i) out.push_back(interval(k, i));
  }
  return out;
}

/// sup over every J (leaves included) of (1/|J|) sum_{internal I subset J} Delta_I^2 |I|, square-rooted.
inline double bmo_norm(const std::vector<double>& values, int depth) {
  const auto internal = all_intervals(depth - 1);
  double best = 0.0;
  for (const auto& j : all_intervals(depth)) {
    double sum = 0.0;
    for (const auto& i : internal) {
      if (!j.contains(i)) continue;
      const double d = increment(values, depth, i);
      sum += d * d * i.length();
    }
    best = std::max(best, sum / j.length());
  }
  return std::sqrt(best);
}

/// integral over leaves of sqrt(sum_{internal I containing the leaf} Delta_I^2).
inline double tl_norm(const std::vector<double>& values, int depth) {
  const auto internal = all_intervals(depth - 1);
  double total = 0.0;
  for (std::size_t leaf = 0; leaf < values.size(); ++leaf) {
    const double t = leaf_midpoint(depth, leaf);
    double square = 0.0;
    for (const auto& i : internal) {
      if (!i.contains(t)) continue;
      const double d = increment(values, depth, i);
      square += d * d;
    }
    total += std::ldexp(1.0, -depth) * std::sqrt(square);
  }
  return total;
}

/// sum over internal I of |(f, h_I)| |(phi, h_I)|.
inline double duality_sum(const std::vector<double>& f, const std::vector<double>& phi, int depth) {
  double total = 0.0;
  for (const auto& i : all_intervals(depth - 1)) {
    total += std::abs(haar_inner_product(f, depth, i)) * std::abs(haar_inner_product(phi, depth, i));
  }
  return total;
}

/// ||f - <f>||^2 by direct integration.
inline double centered_l2_squared(const std::vector<double>& values, int depth) {
  const double mean = average(values, depth, {0.0, 1.0});
  double sum = 0.0;
  for (double v : values) sum += (v - mean) * (v - mean) * std::ldexp(1.0, -depth);
  return sum;
}

/// M_J and S_J straight from their defining sums.
inline double m_value(const std::vector<double>& phi, int depth, const Interval& j) {
  double sum = 0.0;
  for (const auto& i : all_intervals(depth - 1)) {
    if (!j.contains(i)) continue;
    const double d = increment(phi, depth, i);
    sum += d * d * i.length();
  }
  return sum / j.length();
}

inline double s_value(const std::vector<double>& f, int depth, const Interval& j) {
  double sum = 0.0;
  for (const auto& i : all_intervals(depth - 1)) {
    if (!i.contains(j) || i.length() == j.length()) continue;
    const double d = increment(f, depth, i);
    sum += d * d;
  }
  return sum;
}

inline std::vector<double> to_vector(const dyadic::StepFunction& f) { return {f.values.data(), f.values.data() + f.values.size()}; }

/// Random step function drawn from a mix of shapes: Gaussian, sparse spikes,
/// heavy-tailed, and piecewise-constant blocks.
inline dyadic::StepFunction random_step_function(const dyadic::LatticeSpec& spec, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::cauchy_distribution<double> heavy(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(spec.leaf_count());
  Eigen::VectorXd v(n);
  const int shape = static_cast<int>(unit(rng) * 4.0);
  switch (shape) {
    case 0:
      for (auto& x : v) x = gauss(rng);
      break;
    case 1:
      v.setZero();
      for (int s = 0; s < 3; ++s) v(static_cast<Eigen::Index>(unit(rng) * static_cast<double>(n)) % n) += 10.0 * gauss(rng);
      break;
    case 2:
      for (auto& x : v) x = std::clamp(heavy(rng), -1e6, 1e6);
      break;
    default: {
      const Eigen::Index block = std::max<Eigen::Index>(1, n >> (1 + static_cast<int>(unit(rng) * 3.0)));
      for (Eigen::Index i = 0; i < n; i += block) v.segment(i, std::min(block, n - i)).setConstant(gauss(rng));
      break;
    }
  }
  v.array() += 5.0 * gauss(rng);
  return dyadic::StepFunction::make(spec, v);
}

}  // namespace oracle
