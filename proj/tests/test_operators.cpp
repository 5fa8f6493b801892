#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <random>

#include "phasewalk/algorithms.hpp"
#include "phasewalk/operators.hpp"

using namespace phasewalk;

namespace {

using Index = Eigen::Index;
const Complex I(0.0, 1.0);

PhaseNetwork tree(int d, int L, std::uint64_t seed = 0, int memory = 2, int invalid = 1) {
  TreeSpec s;
  s.d = d;
  s.L = L;
  s.seed = seed;
  s.memory_dim = memory;
  s.invalid_class = invalid;
  return build_perfect_tree(s);
}

PhaseNetwork generalized(int R, int L, int groups = 1, std::uint64_t seed = 0) {
  GeneralizedTreeSpec g;
  g.R = R;
  g.L = L;
  g.groups_per_node = groups;
  g.seed = seed;
  return build_generalized_tree(g);
}

PhaseNetwork multilevel(std::size_t N, std::size_t D, std::size_t n, std::uint64_t seed) {
  MultilevelSpec m;
  m.layer_width = N;
  m.depth = D;
  m.bottom_valid = n;
  m.seed = seed;
  return build_multilevel(m);
}

WalkState random_state(const Dims& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::vector<Complex> v(d.total());
  double n = 0.0;
  for (auto& a : v) {
    a = Complex(g(rng), g(rng));
    n += std::norm(a);
  }
  for (auto& a : v) a /= std::sqrt(n);
  return WalkState(d, std::move(v));
}

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double unitarity(const Matrix& m) {
  return max_abs(m.adjoint() * m - Matrix::Identity(m.rows(), m.cols()));
}

Vector vec(const WalkState& s) {
  const auto a = s.amplitudes();
  return Eigen::Map<const Vector>(a.data(), static_cast<Eigen::Index>(a.size()));
}

std::size_t first_port_with_class(const PhaseNetwork& net, std::size_t x, int k) {
  for (std::size_t c = 0; c < net.active_ports(); ++c)
    if (!net.is_loop(x, c) && net.phase_class[x][c] == k) return c;
  FAIL("no such port");
  return 0;
}

}  // namespace

TEST_CASE("fourier matrix") {
  const auto F2 = fourier_matrix(2);
  const double h = std::sqrt(0.5);
  CHECK(std::abs(F2(0, 0) - h) < 1e-15);
  CHECK(std::abs(F2(1, 0) - h) < 1e-15);
  CHECK(std::abs(F2(0, 1) - h) < 1e-15);
  CHECK(std::abs(F2(1, 1) + h) < 1e-15);

  const auto F4 = fourier_matrix(4);
  const Complex expect[4] = {0.5, 0.5 * I, -0.5, -0.5 * I};
  for (int j = 0; j < 4; ++j) CHECK(std::abs(F4(j, 1) - expect[j]) < 1e-15);

  for (std::size_t p : {1u, 2u, 3u, 4u, 8u}) CHECK(unitarity(fourier_matrix(p)) < 1e-12);
  CHECK_THROWS(fourier_matrix(0));
}

TEST_CASE("shift moves along edges with the edge phase") {
  const auto net = tree(2, 2, 3);
  const auto S = shift(net);
  const auto dims = net.dims();
  for (int k : {0, 1}) {
    const auto c = first_port_with_class(net, net.root, k);
    const auto y = net.ports[net.root][c];
    const auto back = net.return_ports[net.root][c];
    for (std::size_t m = 0; m < 2; ++m) {
      const auto out = S.apply(basis_state(dims, net.root, c, m));
      const Complex want = k == 0 ? Complex(1.0) : I;
      CHECK(std::abs(out.amplitude(y, back, m) - want) < 1e-15);
      CHECK(std::abs(out.norm() - 1.0) < 1e-15);
    }
  }
  // Loops and inactive twins stay put with no phase.
  const auto leaf = net.bottom().front();
  for (std::size_t c = 0; c < net.coin_dim; ++c) {
    if (!net.is_loop(leaf, c)) continue;
    const auto out = S.apply(basis_state(dims, leaf, c, 1));
    CHECK(out.amplitude(leaf, c, 1) == Complex(1.0));
  }
}

TEST_CASE("S squared is diagonal with doubled phases") {
  for (const auto& net : {tree(2, 2, 1), tree(1, 2, 0, 4, 2), generalized(3, 1)}) {
    const auto S = to_dense(shift(net));
    const Matrix S2 = S * S;
    const auto dims = net.dims();
    Matrix expected = Matrix::Zero(S2.rows(), S2.cols());
    for (std::size_t x = 0; x < net.node_count; ++x)
      for (std::size_t c = 0; c < net.coin_dim; ++c)
        for (std::size_t m = 0; m < net.memory_dim; ++m) {
          const auto i = static_cast<Eigen::Index>(dims.index(x, c, m));
          const double angle = 2.0 * kPi * net.phase_class[x][c] / static_cast<double>(net.memory_dim);
          expected(i, i) = std::polar(1.0, angle);
        }
    CHECK(max_abs(S2 - expected) < 1e-12);
    CHECK(unitarity(S) < 1e-12);
  }
}

TEST_CASE("phase estimation writes the phase class into memory") {
  for (const auto& net : {tree(1, 1), tree(2, 2, 5), tree(1, 2, 0, 4, 2), generalized(2, 2, 1, 4),
                          generalized(3, 1, 1, 2), multilevel(8, 2, 4, 1)}) {
    const auto E = phase_estimate_direct(net);
    const auto dims = net.dims();
    const double amp = 1.0 / std::sqrt(static_cast<double>(net.memory_dim));
    double worst = 0.0;
    for (std::size_t x = 0; x < net.node_count; ++x)
      for (std::size_t c = 0; c < net.coin_dim; ++c) {
        std::vector<Complex> in(dims.total());
        for (std::size_t m = 0; m < net.memory_dim; ++m) in[dims.index(x, c, m)] = amp;
        const auto out = E.apply(WalkState(dims, in));
        const auto k = static_cast<std::size_t>(net.phase_class[x][c]);
        worst = std::max(worst, 1.0 - std::norm(out.amplitude(x, c, k)));
      }
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("loop decomposition matches the direct form on active ports") {
  for (const auto& net : {tree(1, 1), tree(2, 2, 9), tree(1, 2, 0, 4, 2), generalized(3, 1)}) {
    const auto loop = to_dense(phase_estimate_loop(net));
    const auto direct = to_dense(phase_estimate_direct(net));
    const auto dims = net.dims();
    double dev = 0.0;
    bool inactive_differs = false;
    for (std::size_t x = 0; x < net.node_count; ++x)
      for (std::size_t c = 0; c < net.coin_dim; ++c)
        for (std::size_t m = 0; m < net.memory_dim; ++m) {
          const auto k = static_cast<Eigen::Index>(dims.index(x, c, m));
          const double d = max_abs(loop.col(k) - direct.col(k));
          if (c < net.active_ports())
            dev = std::max(dev, d);
          else
            inactive_differs = inactive_differs || d > 1e-6;
        }
    CHECK(dev < 1e-10);
    CHECK(inactive_differs);  // only the active subspace is claimed
    CHECK(unitarity(loop) < 1e-10);
  }
}

TEST_CASE("p=2 trace: memory 1 sees exactly one double shift") {
  const auto net = tree(1, 1);
  const auto dims = net.dims();
  std::vector<WalkOperator> f;
  for (std::size_t l = 0; l < 2; ++l) {
    f.push_back(deactivation(net, l));
    f.push_back(shift(net));
    f.push_back(shift(net));
  }
  f.push_back(active_inactive_switch(net));
  const auto ctrl = compose(f, "ctrl");
  const auto c = first_port_with_class(net, net.root, 1);
  // memory 0: no phase; memory 1: e^{2i·π/2} = -1.
  CHECK(std::abs(ctrl.apply(basis_state(dims, net.root, c, 0)).amplitude(net.root, c, 0) - 1.0) < 1e-15);
  CHECK(std::abs(ctrl.apply(basis_state(dims, net.root, c, 1)).amplitude(net.root, c, 1) + 1.0) < 1e-15);
}

TEST_CASE("deactivation is an involution") {
  const auto net = tree(2, 1);
  for (std::size_t l = 0; l < net.memory_dim; ++l) {
    const auto D = to_dense(deactivation(net, l));
    CHECK(max_abs(D * D - Matrix::Identity(D.rows(), D.cols())) == 0.0);
  }
  const auto W = to_dense(active_inactive_switch(net));
  CHECK(max_abs(W * W - Matrix::Identity(W.rows(), W.cols())) == 0.0);
  CHECK_THROWS(deactivation(net, 2));
}

TEST_CASE("rotation between two vectors") {
  const Index n = 5;
  Vector a = Vector::Zero(n), b = Vector::Zero(n);
  a(0) = 1.0;
  b(1) = 1.0;
  Matrix U = rotation_matrix(a, b);
  CHECK(max_abs(U * a - b) < 1e-15);
  // a' = b and b' = a here, so the map swaps the two vectors.
  CHECK(max_abs(U * b - a) < 1e-15);
  CHECK(unitarity(U) < 1e-14);
  for (Index k = 2; k < n; ++k) {
    Vector e = Vector::Zero(n);
    e(k) = 1.0;
    CHECK(max_abs(U * e - e) == 0.0);
  }

  U = rotation_matrix(a, a);
  CHECK(max_abs(U - Matrix::Identity(n, n)) == 0.0);

  std::mt19937_64 rng(4);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 20; ++trial) {
    Vector x(n), y(n);
    for (Index i = 0; i < n; ++i) x(i) = Complex(g(rng), g(rng)), y(i) = Complex(g(rng), g(rng));
    x.normalize();
    y.normalize();
    U = rotation_matrix(x, y);
    CHECK(max_abs(U * x - y) < 1e-13);
    CHECK(unitarity(U) < 1e-13);
    // Any vector orthogonal to both is untouched.
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = Complex(g(rng), g(rng));
    Matrix Q = Matrix::Zero(n, 2);
    Q.col(0) = x;
    Q.col(1) = y;
    const Matrix Qo = Q.householderQr().householderQ() * Matrix::Identity(n, 2);
    z -= Qo * (Qo.adjoint() * z);
    CHECK(max_abs(U * z - z) < 1e-13);
  }

  CHECK_THROWS_AS(rotation_matrix(Vector::Zero(n), b), std::invalid_argument);

  const Dims d{4, 1, 1};
  const auto sa = basis_state(d, 0, 0, 0);
  const std::vector<std::size_t> all{0, 1, 2, 3};
  const auto sb = position_superposition(d, all);
  const auto R = rotation_between(sa, sb);
  CHECK(fidelity(R.apply(sa), sb) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(fidelity(R.adjoint().apply(sb), sa) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("preparation coin spreads over down ports and memory") {
  const auto net = tree(2, 1);
  const auto P = coin_prepare(net);
  const auto dims = net.dims();
  const auto out = P.apply(basis_state(dims, net.root, 0, 0));
  const double amp = 1.0 / std::sqrt(8.0);
  for (std::size_t c = 0; c < net.coin_dim; ++c)
    for (std::size_t m = 0; m < 2; ++m)
      CHECK(std::abs(out.amplitude(net.root, c, m) - (c < 4 ? Complex(amp) : Complex(0.0))) < 1e-15);
  // Parent-port component is outside the rotation plane.
  const auto up = basis_state(dims, net.root, 4, 0);
  CHECK(fidelity(P.apply(up), up) == doctest::Approx(1.0));
  const Matrix M = to_dense(P);
  CHECK(unitarity(M) < 1e-12);
  // a -> b together with a' -> b' is a reflection in span(a, b) for real
  // overlaps, so P is its own inverse.
  CHECK(max_abs(M * M - Matrix::Identity(M.rows(), M.cols())) < 1e-12);
  CHECK(max_abs(M - Matrix::Identity(M.rows(), M.cols())) > 0.1);
}

TEST_CASE("pair selection coin") {
  const auto net = tree(2, 1, 6);
  const auto C = coin_select_pairs(net);
  const auto dims = net.dims();
  const double h = std::sqrt(0.5);
  const auto x = net.root;
  std::vector<Complex> in(dims.total());
  for (const auto& pair : net.groups[x]) {
    const auto v = net.phase_class[x][pair[0]] == 0 ? pair[0] : pair[1];
    const auto w = v == pair[0] ? pair[1] : pair[0];
    std::vector<Complex> one(dims.total());
    one[dims.index(x, v, 0)] = h;
    one[dims.index(x, w, 1)] = h;
    const auto out = C.apply(WalkState(dims, one));
    CHECK(std::abs(out.amplitude(x, v, 0) - 1.0) < 1e-15);
    in[dims.index(x, v, 0)] = 0.5;
    in[dims.index(x, w, 1)] = 0.5;
  }
  const auto out = C.apply(WalkState(dims, in));
  for (const auto& pair : net.groups[x]) {
    const auto v = net.phase_class[x][pair[0]] == 0 ? pair[0] : pair[1];
    CHECK(std::abs(out.amplitude(x, v, 0) - h) < 1e-15);
  }
  const Matrix M = to_dense(C);
  CHECK(max_abs(M * M.adjoint() - Matrix::Identity(M.rows(), M.cols())) < 1e-12);
  CHECK_THROWS_AS(coin_select_pairs(tree(1, 1, 0, 4, 2)), SpecError);
}

TEST_CASE("general selection coin reduces to the pair coin") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const auto net = generalized(1, 2, 2, seed);
    CHECK(max_abs(to_dense(coin_select_general(net)) - to_dense(coin_select_pairs(net))) < 1e-12);
  }
  const auto t = tree(2, 2, 3);
  CHECK(max_abs(to_dense(coin_select_general(t)) - to_dense(coin_select_pairs(t))) < 1e-12);
}

TEST_CASE("general selection coin on groups of four and eight") {
  for (int R : {2, 3}) {
    const auto net = generalized(R, 1, 2, 5);
    const auto C = coin_select_general(net);
    const auto dims = net.dims();
    const auto x = net.root;
    for (const auto& group : net.groups[x]) {
      std::vector<Complex> in(dims.total());
      const double a = 1.0 / std::sqrt(static_cast<double>(group.size()));
      for (auto c : group) in[dims.index(x, c, net.phase_class[x][c])] = a;
      const auto out = C.apply(WalkState(dims, in));
      for (auto c : group) {
        const Complex want = net.phase_class[x][c] == 0 ? Complex(std::sqrt(0.5)) : Complex(0.0);
        CHECK(std::abs(out.amplitude(x, c, 0) - want) < 1e-12);
      }
    }
    CHECK(unitarity(to_dense(C)) < 1e-10);
  }
}

TEST_CASE("selection inputs for distinct prefixes are orthogonal") {
  const int R = 3, q = selection_prefix_bits(R);
  const std::size_t size = 8, p = std::size_t{1} << q;
  auto input = [&](std::size_t pattern) {
    Vector v = Vector::Zero(static_cast<Index>(size * p));
    for (std::size_t a = 0; a < size; ++a)
      v(static_cast<Index>(a * p + (pattern ^ (a >> (R - q))))) = 1.0 / std::sqrt(8.0);
    return v;
  };
  for (std::size_t s = 0; s < p; ++s)
    for (std::size_t t = 0; t < p; ++t)
      CHECK(std::abs(input(s).dot(input(t)) - (s == t ? 1.0 : 0.0)) < 1e-15);
}

TEST_CASE("partial isometry completion") {
  auto e = [](Index n, Index k) {
    Vector v = Vector::Zero(n);
    v(k) = 1.0;
    return v;
  };
  CHECK(max_abs(complete_partial_isometry(3, {}) - Matrix::Identity(3, 3)) == 0.0);

  std::vector<IsometryPair> one{{e(2, 0), e(2, 1)}};
  const Matrix U = complete_partial_isometry(2, one);
  CHECK(max_abs(U * e(2, 0) - e(2, 1)) == 0.0);
  CHECK(unitarity(U) == 0.0);

  // The four pair mappings on (port, label) coordinates 2*port + label.
  const double h = std::sqrt(0.5);
  std::vector<IsometryPair> pairs{
      {h * (e(4, 0) + e(4, 3)), e(4, 0)},
      {h * (e(4, 1) + e(4, 2)), e(4, 2)},
      {h * (e(4, 0) - e(4, 3)), e(4, 1)},
      {h * (e(4, 1) - e(4, 2)), e(4, 3)},
  };
  const Matrix Cp = complete_partial_isometry(4, pairs);
  const auto net = tree(1, 1);
  const auto pair = net.groups[net.root][0];
  REQUIRE(pair == PortList{0, 1});
  const Matrix full = to_dense(coin_select_pairs(net));
  CHECK(max_abs(full.block(0, 0, 4, 4) - Cp) < 1e-15);

  std::vector<IsometryPair> bad{{e(3, 0), e(3, 1)}, {h * (e(3, 0) + e(3, 1)), e(3, 2)}};
  try {
    complete_partial_isometry(3, bad);
    FAIL("expected an isometry error");
  } catch (const IsometryError& err) {
    CHECK(err.side() == "input");
    CHECK(err.first() == 0);
    CHECK(err.second() == 1);
  }
}

TEST_CASE("reset coin folds the arrival state") {
  const auto net = tree(2, 2, 1);
  const auto A = coin_reset(net);
  const auto dims = net.dims();
  for (auto x : net.layers[1]) {
    const auto out = A.apply(basis_state(dims, x, net.reset_ports[x][0], 0));
    CHECK(std::abs(out.amplitude(x, 0, 0) - 1.0) < 1e-15);
  }

  const auto ml = multilevel(16, 3, 4, 2);
  const auto Am = coin_reset(ml);
  const auto valid = enumerate_valid(ml);
  const auto y = valid.per_layer[2].front();
  REQUIRE(ml.reset_ports[y].size() == 4);
  std::vector<Complex> in(ml.dims().total());
  for (auto c : ml.reset_ports[y]) in[ml.dims().index(y, c, 0)] = 0.5;
  const auto out = Am.apply(WalkState(ml.dims(), in));
  CHECK(std::abs(out.amplitude(y, 0, 0) - 1.0) < 1e-15);

  // Positions without reset ports are left alone.
  const auto root = basis_state(ml.dims(), ml.root, 3, 1);
  CHECK(fidelity(Am.apply(root), root) == 1.0);
}

TEST_CASE("oracle and initial reflection") {
  const auto net = tree(2, 2, 2);
  const auto dims = net.dims();
  const auto m = net.bottom()[5];
  const auto O = oracle(dims, m);
  const auto psi = random_state(dims, 1);
  const auto out = O.apply(psi);
  for (std::size_t x = 0; x < dims.positions; ++x)
    for (std::size_t c = 0; c < dims.coins; ++c)
      for (std::size_t j = 0; j < dims.memory; ++j)
        CHECK(out.amplitude(x, c, j) == (x == m ? -1.0 : 1.0) * psi.amplitude(x, c, j));
  CHECK(max_abs(vec(O.apply(out)) - vec(psi)) == 0.0);
  const Complex expval = vec(psi).dot(vec(out));
  CHECK(std::abs(expval - (1.0 - 2.0 * position_marginal(psi)[m])) < 1e-12);
  CHECK_THROWS_AS(oracle(dims, dims.positions), std::out_of_range);

  const auto zero = initial_state(net);
  const auto R0 = reflect_initial(zero);
  CHECK(std::abs(R0.apply(zero).amplitude(net.root, 0, 0) + 1.0) < 1e-15);
  const auto other = basis_state(dims, 3, 2, 1);
  CHECK(fidelity(R0.apply(other), other) == 1.0);
  CHECK(max_abs(vec(R0.apply(R0.apply(psi))) - vec(psi)) < 1e-15);
}

TEST_CASE("every operator preserves the norm and has a working adjoint") {
  std::vector<PhaseNetwork> nets{tree(1, 2), tree(2, 2, 4), generalized(2, 2, 1, 2),
                                 multilevel(8, 2, 4, 3)};
  for (const auto& net : nets) {
    const auto dims = net.dims();
    std::vector<WalkOperator> ops{shift(net),        fourier(dims),       phase_estimate_direct(net),
                                  phase_estimate_loop(net), coin_prepare(net), selection_coin(net),
                                  coin_reset(net),   oracle(dims, net.bottom().front()),
                                  reflect_initial(initial_state(net)), spreading(net)};
    const auto psi = random_state(dims, 17);
    for (const auto& op : ops) {
      const auto out = op.apply(psi);
      CHECK(std::abs(out.norm() - 1.0) < 1e-12);
      const auto back = op.adjoint().apply(out);
      CHECK(max_abs(vec(back) - vec(psi)) < 1e-12);
      CHECK(op.adjoint().adjoint().label() == op.label());
      CHECK(max_abs(vec(op.adjoint().adjoint().apply(psi)) - vec(out)) < 1e-15);
    }
  }
}

TEST_CASE("dense export") {
  const auto net = tree(1, 1);
  const auto dims = net.dims();
  CHECK(max_abs(to_dense(identity(dims)) - Matrix::Identity(dims.total(), dims.total())) == 0.0);
  const auto S = shift(net);
  CHECK(unitarity(to_dense(S)) < 1e-10);
  const auto E = phase_estimate_direct(net);
  CHECK(max_abs(to_dense(E.adjoint()) - to_dense(E).adjoint()) < 1e-12);
  CHECK_THROWS_AS(to_dense(S, dims.total() - 1), DenseCapError);

  const auto doc = dump_dense(to_dense(S), dims);
  CHECK(doc["rows"].size() == dims.total());
  CHECK(doc["rows"][0].size() == dims.total());

  const Matrix M = Matrix::Identity(dims.total(), dims.total());
  CHECK(max_abs(to_dense(from_dense(dims, M, "I")) - M) == 0.0);
  CHECK_THROWS(from_dense(Dims{2, 1, 1}, M, "bad"));
}

TEST_CASE("dense cap default comes from the environment") {
  ::unsetenv("PHASEWALK_DENSE_CAP");
  CHECK(default_dense_cap() == 4096);
  ::setenv("PHASEWALK_DENSE_CAP", "100", 1);
  CHECK(default_dense_cap() == 100);
  ::setenv("PHASEWALK_DENSE_CAP", "junk", 1);
  CHECK(default_dense_cap() == 4096);
  ::unsetenv("PHASEWALK_DENSE_CAP");
}

TEST_CASE("compose and power") {
  const auto net = tree(1, 1);
  const auto S = shift(net);
  const auto S4 = to_dense(power(S, 4));
  const auto Sd = to_dense(S);
  CHECK(max_abs(S4 - Sd * Sd * Sd * Sd) < 1e-14);
  CHECK(max_abs(to_dense(power(S, 0)) - Matrix::Identity(Sd.rows(), Sd.cols())) == 0.0);
  const auto P = coin_prepare(net);
  // compose applies first to last: (P then S) = S·P.
  CHECK(max_abs(to_dense(compose({P, S}, "SP")) - Sd * to_dense(P)) < 1e-14);
  CHECK_THROWS(compose({}, "empty"));
  CHECK_THROWS(compose({S, identity(Dims{1, 1, 1})}, "mismatch"));
}
