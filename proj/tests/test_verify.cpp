#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "phasewalk/algorithms.hpp"
#include "phasewalk/verify.hpp"

using namespace phasewalk;

namespace {

PhaseNetwork tree(int d, int L, std::uint64_t seed = 0) {
  TreeSpec s;
  s.d = d;
  s.L = L;
  s.seed = seed;
  return build_perfect_tree(s);
}

PhaseNetwork multilevel(std::size_t N, std::size_t D, std::size_t n, std::uint64_t seed) {
  MultilevelSpec m;
  m.layer_width = N;
  m.depth = D;
  m.bottom_valid = n;
  m.seed = seed;
  return build_multilevel(m);
}

std::vector<std::size_t> valid_leaves(const PhaseNetwork& net) {
  return enumerate_valid(net).per_layer.back();
}

// A lone root: nothing to spread, so U is the identity.
PhaseNetwork single_node() {
  PhaseNetwork net;
  net.node_count = 1;
  net.coin_dim = 2;
  net.memory_dim = 2;
  net.ports = {{0, 0}};
  net.return_ports = {{0, 1}};
  net.phase_class = {{0, 0}};
  net.layer_of = {0};
  net.layers = {{0}};
  net.groups = {{}};
  net.down_ports = {{}};
  net.reset_ports = {{}};
  net.meta.family = "single";
  return net;
}

}  // namespace

TEST_CASE("unitarity check on matrices") {
  const auto I = Matrix::Identity(8, 8).eval();
  auto r = check_unitary(I, "I");
  CHECK(r.passed);
  CHECK(r.max_deviation == 0.0);
  CHECK(r.check == "unitary:I");

  r = check_unitary((1.01 * I).eval(), "scaled");
  CHECK_FALSE(r.passed);
  CHECK(r.max_deviation == doctest::Approx(0.0201).epsilon(1e-9));

  Matrix N = Matrix::Zero(2, 2);
  N(0, 0) = 1.0;
  N(1, 0) = 1.0;
  CHECK_FALSE(check_unitary(N, "collapsing").passed);
}

TEST_CASE("unitarity check on operators") {
  const auto net = tree(2, 2, 1);
  auto r = check_unitary(shift(net));
  CHECK(r.passed);
  CHECK(r.max_deviation <= 1e-10);
  CHECK(check_unitary(spreading(net)).passed);
  CHECK(check_unitary(coin_select_general(net)).passed);
  CHECK_THROWS_AS(check_unitary(shift(net), 1e-10, 16), DenseCapError);
}

TEST_CASE("oracle agrees with the streaming search") {
  auto net = tree(2, 2, 7);
  const auto m = valid_leaves(net).front();
  CHECK(std::abs(classical_success_oracle(net, m, 1) - 1.0) < 1e-9);
  CHECK(std::abs(classical_success_oracle(net, m, 0) - 0.25) < 1e-12);

  net = tree(2, 3, 2);
  const auto leaves = valid_leaves(net);
  for (std::size_t t = 0; t <= 4; ++t) {
    const auto r = search({&net, leaves[3], t});
    CHECK(std::abs(classical_success_oracle(net, leaves[3], t) - r.final_p_marked) < 1e-9);
  }

  GeneralizedTreeSpec g;
  g.R = 3;
  g.L = 1;
  g.seed = 4;
  const auto gen = build_generalized_tree(g);
  const auto gm = valid_leaves(gen).back();
  for (std::size_t t = 0; t <= 3; ++t)
    CHECK(std::abs(classical_success_oracle(gen, gm, t) - search({&gen, gm, t}).final_p_marked) <
          1e-9);

  const auto ml = multilevel(8, 2, 4, 5);
  const auto mm = valid_leaves(ml).front();
  for (std::size_t t = 0; t <= 3; ++t)
    CHECK(std::abs(classical_success_oracle(ml, mm, t) - search({&ml, mm, t}).final_p_marked) <
          1e-9);

  CHECK_THROWS_AS(classical_success_oracle(net, leaves[0], 1, 64), DenseCapError);
}

TEST_CASE("uniformity on builder outputs") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    CHECK(uniformity_check(tree(2, 3, seed)).passed);
    CHECK(uniformity_check(tree(1, 2, seed)).passed);
    CHECK(uniformity_check(multilevel(16, 3, 4, seed)).passed);
  }
  const auto r = uniformity_check(single_node());
  CHECK(r.passed);
  CHECK(r.max_deviation == 0.0);
}

TEST_CASE("uniformity failure names the layer") {
  auto net = tree(2, 3, 5);
  const auto x = enumerate_valid(net).per_layer[1].front();
  const auto& pair = net.groups[x][0];
  const auto bad = net.phase_class[x][pair[0]] == 0 ? pair[1] : pair[0];
  const auto y = net.ports[x][bad];
  net.phase_class[x][bad] = 0;
  net.phase_class[y][net.return_ports[x][bad]] = 0;
  const auto r = uniformity_check(net);
  CHECK_FALSE(r.passed);
  CHECK(r.detail.find("layer 2") != std::string::npos);
  CHECK(r.max_deviation > 1e-3);
}

TEST_CASE("phase labels and loop equivalence") {
  for (const auto& net : {tree(1, 3), tree(2, 2, 3), multilevel(8, 2, 4, 1)}) {
    const auto labels = check_phase_labels(net);
    CHECK(labels.passed);
    CHECK(labels.max_deviation <= 1e-10);
    CHECK(check_loop_equivalence(net).passed);
  }
  TreeSpec s;
  s.d = 2;
  s.L = 2;
  s.memory_dim = 4;
  s.invalid_class = 2;
  const auto p4 = build_perfect_tree(s);
  CHECK(check_phase_labels(p4).passed);
  CHECK(check_loop_equivalence(p4).passed);
}

TEST_CASE("checks are deterministic and serialisable") {
  const auto net = tree(2, 2, 9);
  const auto a = to_json(uniformity_check(net));
  const auto b = to_json(uniformity_check(net));
  CHECK(a == b);
  CHECK(a["check"] == "uniformity");
  CHECK(a["passed"] == true);
  CHECK(a.contains("max_deviation"));
  CHECK(a.contains("tolerance"));
  CHECK(a["instance"]["family"] == net.meta.family);
  CHECK(classical_success_oracle(net, valid_leaves(net)[1], 2) ==
        classical_success_oracle(net, valid_leaves(net)[1], 2));
}
