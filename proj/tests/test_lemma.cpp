#include <doctest.h>

#include <cmath>
#include <random>

#include "dyadic/lemma.hpp"
#include "oracle.hpp"

using namespace dyadic;
using doctest::Approx;

namespace {

StepFunction random_function(const LatticeSpec& spec, std::mt19937_64& rng) {
  if (spec.dim == 1) return oracle::random_step_function(spec, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(spec.leaf_count()));
  for (auto& x : v) x = gauss(rng);
  return StepFunction::make(spec, v);
}

// LHS of the summed bound straight from its definition, node by node.
double naive_lemma_lhs(const AdmissiblePair& pair, int depth_n) {
  double total = 0.0;
  for (int k = 0; k < depth_n; ++k) {
    for (const NodeId j : nodes_at_generation(pair.spec(), k)) {
      const auto kids = children(pair.spec(), j);
      double mean = 0.0;
      for (const NodeId c : kids) mean += pair.m.at(c) / static_cast<double>(kids.size());
      total += measure(pair.spec(), j) * std::sqrt((pair.s.at(kids.front()) - pair.s.at(j)) * (pair.m.at(j) - mean));
    }
  }
  return total;
}

}  // namespace

TEST_CASE("zero phi gives zero M") {
  std::mt19937_64 rng(1);
  const auto spec = LatticeSpec::make(1, 5);
  const auto pair = build_pair(oracle::random_step_function(spec, rng), StepFunction::constant(spec, 0.0));
  for (const auto& level : pair.m.levels) CHECK(level.cwiseAbs().maxCoeff() == 0.0);
  CHECK(check_admissibility(pair, 1e-12).pass());
}

TEST_CASE("Haar pair functionals") {
  const auto spec = LatticeSpec::make(1, 4);
  const NodeId i{2, 1};
  const auto h = haar_function(spec, i);
  const auto pair = build_pair(h, h);
  const auto values = oracle::to_vector(h);
  CHECK(oracle::m_value(values, 4, oracle::interval(2, 1)) == Approx(16.0).epsilon(1e-14));
  CHECK(pair.m.at(i) == Approx(16.0).epsilon(1e-14));
  CHECK(pair.mbar == Approx(16.0).epsilon(1e-14));
  CHECK(pair.mbar == Approx(std::pow(bmo_norm(h), 2)).epsilon(1e-14));
  CHECK(pair.s.at(kRoot) == 0.0);
  for (std::size_t leaf = 4; leaf < 8; ++leaf) {
    CHECK(oracle::s_value(values, 4, oracle::interval(4, leaf)) == Approx(16.0).epsilon(1e-14));
    CHECK(pair.s.at(NodeId{4, leaf}) == Approx(16.0).epsilon(1e-14));
  }
  CHECK(pair.s.at(NodeId{4, 0}) == 0.0);
  CHECK(pair.m.levels.back().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("S and M agree with brute-force sums") {
  std::mt19937_64 rng(2);
  for (int depth = 1; depth <= 5; ++depth) {
    const auto spec = LatticeSpec::make(1, depth);
    for (int trial = 0; trial < 10; ++trial) {
      const auto f = oracle::random_step_function(spec, rng);
      const auto phi = oracle::random_step_function(spec, rng);
      const auto pair = build_pair(f, phi);
      const auto fv = oracle::to_vector(f);
      const auto pv = oracle::to_vector(phi);
      double max_m = 0.0;
      for (int k = 0; k <= depth; ++k) {
        for (const NodeId n : nodes_at_generation(spec, k)) {
          const auto j = oracle::interval(k, n.index);
          const double m = oracle::m_value(pv, depth, j);
          const double s = oracle::s_value(fv, depth, j);
          max_m = std::max(max_m, m);
          CHECK(pair.m.at(n) == Approx(m).epsilon(1e-10));
          CHECK(pair.s.at(n) == Approx(s).epsilon(1e-10));
        }
      }
      CHECK(pair.mbar == Approx(max_m).epsilon(1e-10));
    }
  }
}

TEST_CASE("recurrences for S and M on 1000 random pairs") {
  std::mt19937_64 rng(3);
  const auto spec = LatticeSpec::make(1, 8);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto f = oracle::random_step_function(spec, rng);
    const auto phi = oracle::random_step_function(spec, rng);
    const auto pair = build_pair(f, phi);
    const auto df = square_increments(f);
    const auto dphi = square_increments(phi);
    bool ok = true;
    for (int k = 0; k < spec.depth; ++k) {
      for (const NodeId j : nodes_at_generation(spec, k)) {
        const double drop = pair.m.at(j) - child_mean(pair.m, j);
        ok = ok && std::abs(drop - dphi.at(j)) <= 1e-10 * std::max(pair.m.at(j), 1e-300);
        for (const NodeId c : children(spec, j)) {
          ok = ok && std::abs(pair.s.at(c) - pair.s.at(j) - df.at(j)) <= 1e-10 * std::max(pair.s.at(c), 1e-300);
        }
      }
    }
    CHECK(ok);
  }
}

TEST_CASE("admissibility checks") {
  std::mt19937_64 rng(4);
  const auto spec = LatticeSpec::make(1, 4);
  const auto pair = build_pair(oracle::random_step_function(spec, rng), oracle::random_step_function(spec, rng));
  CHECK(pair.exact_siblings);
  CHECK(check_admissibility(pair, 1e-12).pass());

  auto s = pair.s;
  s.levels[4](5) += 0.1;
  const auto report = check_admissibility(s, pair.m, pair.mbar, 1e-12, true);
  CHECK_FALSE(report.pass());
  REQUIRE(report.violation_count == 1);
  CHECK(report.first()->kind == "sibling_equality");
  CHECK(report.first()->node == NodeId{3, 2});
  CHECK(report.first()->amount == Approx(0.1).epsilon(1e-6));

  NodeFunctional flat(spec);
  for (auto& level : flat.levels) level.setConstant(3.0);
  CHECK(check_admissibility(NodeFunctional(spec), flat, 3.0, 1e-12).pass());

  auto above = flat;
  above.levels[0](0) = 3.5;
  CHECK(check_admissibility(NodeFunctional(spec), above, 3.0, 1e-12).first()->kind == "m_range");

  auto sub = flat;
  sub.levels[0](0) = 2.0;
  CHECK(check_admissibility(NodeFunctional(spec), sub, 3.0, 1e-12).first()->kind == "m_supermean");

  auto falling = NodeFunctional(spec);
  falling.levels[0](0) = 1.0;
  CHECK(check_admissibility(falling, flat, 3.0, 1e-12).first()->kind == "s_monotone");

  // external pairs tolerate rounding in sibling S values
  auto rounded = pair.s;
  rounded.levels[3](5) = std::nextafter(rounded.levels[3](5), INFINITY);
  CHECK(check_admissibility(rounded, pair.m, pair.mbar, 1e-12, false).pass());
  CHECK_FALSE(check_admissibility(rounded, pair.m, pair.mbar, 1e-12, true).pass());
}

TEST_CASE("node inequality on degenerate and constant pairs") {
  const auto spec = LatticeSpec::make(1, 3);
  NodeFunctional m(spec);
  for (auto& level : m.levels) level.setConstant(0.7);
  const auto pair = external_pair(NodeFunctional(spec), m, 1.0);
  const auto b = sample_candidate(1.0);
  for (int k = 0; k < 3; ++k) {
    for (const NodeId n : nodes_at_generation(spec, k)) {
      const auto check = verify_node_inequality(b, pair, n);
      CHECK(check.degenerate);
      CHECK(check.margin() == 0.0);
    }
  }

  // S_J = 0 below a positive S_0
  NodeFunctional s(spec);
  s.levels[1].setConstant(2.0);
  s.levels[2].setConstant(2.0);
  s.levels[3].setConstant(2.0);
  const auto step = external_pair(s, m, 1.0);
  const auto root = verify_node_inequality(b, step, kRoot);
  CHECK_FALSE(root.degenerate);
  CHECK(root.margin() >= 0.0);

  CHECK_THROWS_AS((void)verify_node_inequality(sample_candidate(0.5), pair, kRoot), DomainError);
}

TEST_CASE("key lemma on the Haar pair") {
  const auto spec = LatticeSpec::make(1, 4);
  const auto h = haar_function(spec, NodeId{2, 1});
  const auto pair = build_pair(h, h);
  const auto trace = verify_key_lemma(default_candidate(pair), pair, 4);
  CHECK(trace.passed());
  CHECK(trace.lhs == Approx(4.0).epsilon(1e-14));
  CHECK(trace.rhs == Approx(4.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(naive_lemma_lhs(pair, 4) == Approx(4.0).epsilon(1e-14));
  for (const auto& g : trace.margins) CHECK(g.minCoeff() >= 0.0);
  CHECK(trace.levels.size() == 4);
  for (const auto& level : trace.levels) {
    CHECK(level.holds);
    CHECK(level.telescoping_holds);
    CHECK(level.identity_error <= 1e-10);
  }
  // the single active node is I itself
  CHECK(trace.f_k[2] > 0.0);
  CHECK(trace.f_k[0] == 0.0);
  CHECK(trace.f_k[3] == 0.0);
}

TEST_CASE("key lemma with S identically zero") {
  const auto spec = LatticeSpec::make(1, 4);
  std::mt19937_64 rng(5);
  const auto pair = build_pair(StepFunction::constant(spec, 2.0), oracle::random_step_function(spec, rng));
  const auto trace = verify_key_lemma(default_candidate(pair), pair, 4);
  CHECK(trace.passed());
  CHECK(trace.lhs == 0.0);
  CHECK(trace.rhs == 0.0);
}

TEST_CASE("key lemma rejects inadmissible pairs and oversized depth") {
  const auto spec = LatticeSpec::make(1, 3);
  NodeFunctional m(spec);
  m.levels[0](0) = -1.0;
  const auto pair = external_pair(NodeFunctional(spec), m, 1.0);
  CHECK_THROWS_AS((void)verify_key_lemma(sample_candidate(1.0), pair, 3), InadmissiblePairError);
  std::mt19937_64 rng(6);
  const auto good = build_pair(oracle::random_step_function(spec, rng), oracle::random_step_function(spec, rng));
  CHECK_THROWS_AS((void)verify_key_lemma(sample_candidate(good.mbar), good, 4), OutOfRangeError);
  CHECK_THROWS_AS((void)verify_key_lemma(sample_candidate(good.mbar * 0.5), good, 3), DomainError);
}

TEST_CASE("per-node margins are non-negative on random pairs in dims 1 and 2") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int dim = 1 + trial % 2;
    const int depth = dim == 1 ? 1 + trial % 8 : 1 + trial % 4;
    const auto spec = LatticeSpec::make(dim, depth);
    const auto pair = build_pair(random_function(spec, rng), random_function(spec, rng));
    CHECK(check_admissibility(pair, 1e-12).pass());
    const auto trace = verify_key_lemma(default_candidate(pair), pair, depth);
    CHECK(trace.passed());
    CHECK(trace.worst_scaled_margin >= -1e-12);
    CHECK(naive_lemma_lhs(pair, depth) == Approx(trace.lhs).epsilon(1e-10));
  }
}

TEST_CASE("summed bound equals four times the truncated duality sum") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto spec = LatticeSpec::make(1, 2 + trial % 7);
    const auto f = oracle::random_step_function(spec, rng);
    const auto phi = oracle::random_step_function(spec, rng);
    const auto pair = build_pair(f, phi);
    for (int n = 1; n <= spec.depth; ++n) {
      const auto trace = verify_key_lemma(default_candidate(pair), pair, n);
      CHECK(trace.passed());
      CHECK(trace.lhs == Approx(4.0 * duality_sum(f, phi, n)).epsilon(1e-10));
    }
  }
}

TEST_CASE("a larger mbar keeps the lemma true") {
  std::mt19937_64 rng(9);
  const auto spec = LatticeSpec::make(1, 6);
  const auto base = build_pair(oracle::random_step_function(spec, rng), oracle::random_step_function(spec, rng));
  const auto loose = external_pair(base.s, base.m, 3.0 * base.mbar);
  const auto tight = verify_key_lemma(sample_candidate(base.mbar), base, 6);
  const auto weak = verify_key_lemma(sample_candidate(loose.mbar), loose, 6);
  CHECK(weak.passed());
  CHECK(weak.lhs == Approx(tight.lhs).epsilon(1e-14));
  CHECK(weak.rhs == Approx(std::sqrt(3.0) * tight.rhs).epsilon(1e-12));
}

TEST_CASE("scaling f") {
  std::mt19937_64 rng(10);
  const auto spec = LatticeSpec::make(1, 6);
  const auto f = oracle::random_step_function(spec, rng);
  const auto phi = oracle::random_step_function(spec, rng);
  const auto pair = build_pair(f, phi);
  for (double lambda : {-3.0, 0.01, 7.5}) {
    const auto g = StepFunction::make(spec, lambda * f.values);
    const auto scaled = build_pair(g, phi);
    CHECK(check_admissibility(scaled, 1e-12).pass());
    for (int k = 0; k <= spec.depth; ++k) {
      CHECK((scaled.s.levels[k] - lambda * lambda * pair.s.levels[k]).cwiseAbs().maxCoeff() <=
            1e-12 * std::max(1.0, lambda * lambda * pair.s.levels[k].cwiseAbs().maxCoeff()));
    }
    CHECK(duality_sum(g, phi) == Approx(std::abs(lambda) * duality_sum(f, phi)).epsilon(1e-12));
  }
}

TEST_CASE("duality sum") {
  const auto spec = LatticeSpec::make(1, 5);
  const auto h = haar_function(spec, NodeId{3, 6});
  CHECK(duality_sum(h, h) == Approx(1.0).epsilon(1e-14));
  CHECK(duality_sum(h, haar_function(spec, NodeId{3, 5})) == 0.0);
  CHECK(duality_sum(h, h, 3) == 0.0);
  CHECK(duality_sum(h, h, 4) == Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)duality_sum(h, haar_function(LatticeSpec::make(1, 4), kRoot)), MismatchError);

  std::mt19937_64 rng(11);
  const double c = std::sqrt(2.0) / 4.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int depth = 1 + trial % 5;
    const auto s = LatticeSpec::make(1, depth);
    const auto f = oracle::random_step_function(s, rng);
    const auto phi = oracle::random_step_function(s, rng);
    const double sum = duality_sum(f, phi);
    CHECK(sum == Approx(oracle::duality_sum(oracle::to_vector(f), oracle::to_vector(phi), depth)).epsilon(1e-10));
    CHECK(sum <= c * bmo_norm(phi) * tl_norm(f) * (1.0 + 1e-12));
  }
}

TEST_CASE("random admissible pairs in dims 1 to 3") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 600; ++trial) {
    const int dim = 1 + trial % 3;
    const int depth = 1 + trial % (dim == 1 ? 8 : 4);
    const auto pair = random_admissible_pair(LatticeSpec::make(dim, depth), rng);
    CHECK_FALSE(pair.exact_siblings);
    CHECK(check_admissibility(pair, 1e-12).pass());
    const auto trace = verify_key_lemma(default_candidate(pair), pair, depth);
    CHECK(trace.passed());
    CHECK(trace.worst_scaled_margin >= -1e-12);
  }
}

TEST_CASE("a custom node predicate feeds the trace") {
  std::mt19937_64 rng(13);
  const auto spec = LatticeSpec::make(1, 4);
  const auto pair = build_pair(oracle::random_step_function(spec, rng), oracle::random_step_function(spec, rng));
  const NodeInequality failing = [](const BellmanCandidate& b, const AdmissiblePair& p, NodeId node) {
    auto check = verify_node_inequality(b, p, node);
    if (node == NodeId{2, 3}) check.rhs = check.lhs + 1.0;
    return check;
  };
  const auto trace = verify_key_lemma(default_candidate(pair), pair, 4, 1e-12, failing);
  CHECK_FALSE(trace.nodes_hold);
  CHECK(trace.worst_node == NodeId{2, 3});
  CHECK(trace.margins[2](3) == Approx(-1.0));
}

TEST_CASE("default candidate for a constant phi") {
  const auto spec = LatticeSpec::make(1, 3);
  std::mt19937_64 rng(14);
  const auto pair = build_pair(oracle::random_step_function(spec, rng), StepFunction::constant(spec, 4.0));
  CHECK(pair.mbar == 0.0);
  CHECK(default_candidate(pair).mbar() == 1.0);
  const auto trace = verify_key_lemma(default_candidate(pair), pair, 3);
  CHECK(trace.passed());
  CHECK(trace.lhs == 0.0);
}
