#include "phasewalk/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <Eigen/QR>
#include <Eigen/Sparse>

#include "phasewalk/algorithms.hpp"

namespace phasewalk {

nlohmann::json to_json(const VerificationReport& r) {
  nlohmann::json j = {{"check", r.check},
                      {"instance", r.instance},
                      {"max_deviation", r.max_deviation},
                      {"tolerance", r.tolerance},
                      {"passed", r.passed}};
  if (!r.detail.empty()) j["detail"] = r.detail;
  return j;
}

namespace {

using Sparse = Eigen::SparseMatrix<Complex>;
using Triplet = Eigen::Triplet<Complex>;
using Index = Eigen::Index;

nlohmann::json dims_json(const Dims& d) {
  return {{"positions", d.positions}, {"coins", d.coins}, {"memory", d.memory}};
}

double unitarity_deviation(const Sparse& m) {
  Sparse g = Sparse(m.adjoint()) * m;
  Sparse id(m.cols(), m.cols());
  id.setIdentity();
  g -= id;
  double dev = 0.0;
  for (Index k = 0; k < g.outerSize(); ++k)
    for (Sparse::InnerIterator it(g, k); it; ++it) dev = std::max(dev, std::abs(it.value()));
  return dev;
}

}  // namespace

VerificationReport check_unitary(const Matrix& m, const std::string& name, double tol) {
  VerificationReport r;
  r.check = "unitary:" + name;
  r.instance = {{"rows", m.rows()}, {"cols", m.cols()}};
  r.tolerance = tol;
  if (m.rows() != m.cols()) {
    r.max_deviation = std::numeric_limits<double>::infinity();
    r.detail = "matrix is not square";
    return r;
  }
  const Index n = m.rows();
  Index nnz = 0;
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (m(i, j) != Complex(0.0)) ++nnz;
  // Walk operators are mostly very sparse; a dense Gram product at n ~ 2000
  // costs seconds per operator on one core.
  if (n > 0 && nnz * 20 < n * n) {
    r.max_deviation = unitarity_deviation(m.sparseView(0.0, 0.0));
  } else {
    Matrix g = m.adjoint() * m;
    g -= Matrix::Identity(n, n);
    r.max_deviation = n == 0 ? 0.0 : g.cwiseAbs().maxCoeff();
  }
  r.passed = r.max_deviation <= tol;
  return r;
}

VerificationReport check_unitary(const WalkOperator& op, double tol, std::size_t cap) {
  auto r = check_unitary(to_dense(op, cap), op.label(), tol);
  r.instance = dims_json(op.dims());
  return r;
}

namespace {

// Matrix-first construction of every walk operator, written from the
// definitions. Nothing here calls into the streaming kernels.
struct DenseModel {
  const PhaseNetwork& net;
  Dims dims;
  Index total;
  Index local;
  Index M;

  explicit DenseModel(const PhaseNetwork& n)
      : net(n),
        dims{n.node_count, n.coin_dim, n.memory_dim},
        total(static_cast<Index>(dims.total())),
        local(static_cast<Index>(dims.local())),
        M(static_cast<Index>(n.memory_dim)) {}

  Index at(std::size_t x, std::size_t c, std::size_t m) const {
    return static_cast<Index>((x * net.coin_dim + c) * net.memory_dim + m);
  }

  Sparse from_triplets(const std::vector<Triplet>& t) const {
    Sparse s(total, total);
    s.setFromTriplets(t.begin(), t.end());
    s.prune(Complex(0.0), 0.0);
    return s;
  }

  Sparse eye() const {
    Sparse s(total, total);
    s.setIdentity();
    return s;
  }

  // Block diagonal over positions; nodes without a block act as identity.
  template <typename BlockFn>
  Sparse local_operator(BlockFn&& block_for) const {
    std::vector<Triplet> t;
    for (std::size_t x = 0; x < net.node_count; ++x) {
      const Index off = static_cast<Index>(x) * local;
      std::optional<Matrix> B = block_for(x);
      if (!B) {
        for (Index i = 0; i < local; ++i) t.emplace_back(off + i, off + i, 1.0);
        continue;
      }
      for (Index i = 0; i < local; ++i)
        for (Index j = 0; j < local; ++j)
          if ((*B)(i, j) != Complex(0.0)) t.emplace_back(off + i, off + j, (*B)(i, j));
    }
    return from_triplets(t);
  }

  // 1 - aa† - a'a'† + ba† + b'a'† on vectors of any length.
  static Matrix rotation(Vector a, Vector b) {
    a.normalize();
    b.normalize();
    const Index n = a.size();
    const Complex ab = a.dot(b);
    Matrix U = Matrix::Identity(n, n) - a * a.adjoint() + b * a.adjoint();
    if (std::abs(ab) < 1.0 - 1e-12) {
      const Vector ap = (b - a * ab).normalized();
      const Vector bp = (a - b * std::conj(ab)).normalized();
      U += -ap * ap.adjoint() + bp * ap.adjoint();
    }
    return U;
  }

  // S on position ⊗ coin (memory excluded).
  Sparse shift_pc() const {
    const auto K = net.coin_dim;
    std::vector<Triplet> t;
    for (std::size_t x = 0; x < net.node_count; ++x)
      for (std::size_t c = 0; c < K; ++c) {
        const double phi = kPi * net.phase_class[x][c] / static_cast<double>(net.memory_dim);
        const auto y = net.ports[x][c];
        const auto back = net.return_ports[x][c];
        t.emplace_back(static_cast<Index>(y * K + back), static_cast<Index>(x * K + c),
                       std::exp(Complex(0.0, phi)));
      }
    Sparse s(static_cast<Index>(net.node_count * K), static_cast<Index>(net.node_count * K));
    s.setFromTriplets(t.begin(), t.end());
    return s;
  }

  // A ⊗ |j><j| summed over the memory values j with their own A_j.
  Sparse memory_controlled(const std::vector<Sparse>& per_value) const {
    std::vector<Triplet> t;
    for (Index j = 0; j < M; ++j)
      for (Index k = 0; k < per_value[j].outerSize(); ++k)
        for (Sparse::InnerIterator it(per_value[j], k); it; ++it)
          t.emplace_back(it.row() * M + j, it.col() * M + j, it.value());
    return from_triplets(t);
  }

  Sparse S() const {
    const auto s = shift_pc();
    return memory_controlled(std::vector<Sparse>(static_cast<std::size_t>(M), s));
  }

  Sparse E() const {
    const auto s = shift_pc();
    const Sparse s2 = s * s;
    std::vector<Sparse> powers;
    Sparse acc(s.rows(), s.cols());
    acc.setIdentity();
    for (Index j = 0; j < M; ++j) {
      powers.push_back(acc);
      acc = Sparse(acc * s2);
    }
    const Sparse ctrl = memory_controlled(powers);
    // 1 ⊗ 1 ⊗ F†, F_jk = e^{2πi jk/p}/√p.
    Matrix Fdag(M, M);
    for (Index j = 0; j < M; ++j)
      for (Index k = 0; k < M; ++k)
        Fdag(j, k) = std::exp(Complex(0.0, -2.0 * kPi * static_cast<double>(j * k) /
                                               static_cast<double>(M))) /
                     std::sqrt(static_cast<double>(M));
    std::vector<Triplet> t;
    for (Index base = 0; base < total; base += M)
      for (Index j = 0; j < M; ++j)
        for (Index k = 0; k < M; ++k) t.emplace_back(base + j, base + k, Fdag(j, k));
    return from_triplets(t) * ctrl;
  }

  Sparse P() const {
    return local_operator([&](std::size_t x) -> std::optional<Matrix> {
      const auto& down = net.down_ports[x];
      if (down.empty()) return std::nullopt;
      Vector from = Vector::Zero(local), to = Vector::Zero(local);
      from(0) = 1.0;
      for (auto c : down)
        for (Index m = 0; m < M; ++m) to(static_cast<Index>(c) * M + m) = 1.0;
      return rotation(from, to);
    });
  }

  Sparse A() const {
    return local_operator([&](std::size_t x) -> std::optional<Matrix> {
      const auto& in = net.reset_ports[x];
      if (in.empty()) return std::nullopt;
      Vector from = Vector::Zero(local), to = Vector::Zero(local);
      for (auto c : in) from(static_cast<Index>(c) * M) = 1.0;
      to(0) = 1.0;
      return rotation(from, to);
    });
  }

  // Pairs (2l, 2l+1), g = 0, b = 1:
  //   |2l,g><g+_2l| + |2l+1,g><g+_2l+1| + |2l,b><g-_2l| + |2l+1,b><g-_2l+1|.
  Matrix pair_block(const std::vector<PortList>& groups) const {
    Matrix B = Matrix::Identity(local, local);
    const double h = std::sqrt(0.5);
    for (const auto& pr : groups) {
      auto e = [&](std::size_t port, Index m) {
        Vector v = Vector::Zero(local);
        v(static_cast<Index>(pr[port]) * M + m) = 1.0;
        return v;
      };
      const Vector gp0 = h * (e(0, 0) + e(1, 1));
      const Vector gp1 = h * (e(0, 1) + e(1, 0));
      const Vector gm0 = h * (e(0, 0) - e(1, 1));
      const Vector gm1 = h * (e(0, 1) - e(1, 0));
      Matrix sub = e(0, 0) * gp0.adjoint() + e(1, 0) * gp1.adjoint() +
                   e(0, 1) * gm0.adjoint() + e(1, 1) * gm1.adjoint();
      for (auto c : pr)
        for (Index m = 0; m < M; ++m) {
          const Index i = static_cast<Index>(c) * M + m;
          B.row(i).setZero();
          B.col(i).setZero();
        }
      for (auto c : pr)
        for (Index m = 0; m < M; ++m) {
          const Index i = static_cast<Index>(c) * M + m;
          B.col(i) += sub.col(i);
        }
    }
    return B;
  }

  // Groups of 2^R ports: pattern s sends (2^-R/2) sum_a |a, s ^ prefix(a)> to
  // the uniform superposition of the ports with prefix s and label g. The
  // complement is filled with Householder QR completions.
  Matrix general_block(const std::vector<PortList>& groups) const {
    Matrix B = Matrix::Identity(local, local);
    for (const auto& gr : groups) {
      const Index size = static_cast<Index>(gr.size());
      int R = 0;
      while ((Index{1} << R) < size) ++R;
      const int q = R > 1 ? R - 1 : 1;
      if ((Index{1} << q) != M) throw SpecError("memory size does not match group size");
      const Index dim = size * M;
      Matrix in = Matrix::Zero(dim, M), out = Matrix::Zero(dim, M);
      for (Index s = 0; s < M; ++s)
        for (Index a = 0; a < size; ++a) {
          const Index prefix = a >> (R - q);
          in(a * M + (s ^ prefix), s) = 1.0 / std::sqrt(static_cast<double>(size));
          if (prefix == s)
            out(a * M, s) = 1.0 / std::sqrt(static_cast<double>(size >> q));
        }
      const Matrix Qin = in.householderQr().householderQ();
      const Matrix Qout = out.householderQr().householderQ();
      const Matrix G = out * in.adjoint() +
                       Qout.rightCols(dim - M) * Qin.rightCols(dim - M).adjoint();
      std::vector<Index> idx;
      for (auto c : gr)
        for (Index m = 0; m < M; ++m) idx.push_back(static_cast<Index>(c) * M + m);
      for (auto i : idx) {
        B.row(i).setZero();
        B.col(i).setZero();
      }
      for (Index r = 0; r < dim; ++r)
        for (Index s = 0; s < dim; ++s) B(idx[r], idx[s]) = G(r, s);
    }
    return B;
  }

  Sparse C() const {
    bool pairs = M == 2;
    for (const auto& gs : net.groups)
      for (const auto& g : gs) pairs = pairs && g.size() == 2;
    return local_operator([&](std::size_t x) -> std::optional<Matrix> {
      if (net.groups[x].empty()) return std::nullopt;
      return pairs ? pair_block(net.groups[x]) : general_block(net.groups[x]);
    });
  }

  // Rotation on the full space between |root,0,0> and the uniform top layer,
  // assembled on the support of the two vectors only.
  Sparse top_preparation() const {
    std::vector<Index> support{at(net.root, 0, 0)};
    for (auto x : net.layers[1]) support.push_back(at(x, 0, 0));
    const Index k = static_cast<Index>(support.size());
    Vector a = Vector::Zero(k), b = Vector::Zero(k);
    a(0) = 1.0;
    for (Index i = 1; i < k; ++i) b(i) = 1.0;
    const Matrix U = rotation(a, b);
    std::vector<Triplet> t;
    std::vector<bool> in_support(static_cast<std::size_t>(total), false);
    for (auto s : support) in_support[static_cast<std::size_t>(s)] = true;
    for (Index i = 0; i < total; ++i)
      if (!in_support[static_cast<std::size_t>(i)]) t.emplace_back(i, i, 1.0);
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j)
        if (U(i, j) != Complex(0.0)) t.emplace_back(support[i], support[j], U(i, j));
    return from_triplets(t);
  }

  Sparse U() const {
    const auto steps = net.layers.size() - 1;
    Sparse u = eye();
    if (steps == 0) return u;
    const Sparse W = A() * S() * C() * E() * P();
    std::size_t walk_steps = steps;
    if (net.prepare_top_layer) {
      u = top_preparation();
      --walk_steps;
    }
    for (std::size_t i = 0; i < walk_steps; ++i) u = Sparse(W * u);
    u.prune(Complex(0.0), 0.0);
    return u;
  }
};

}  // namespace

double classical_success_oracle(const PhaseNetwork& net, std::size_t marked,
                                std::size_t t, std::size_t cap) {
  const DenseModel model(net);
  if (static_cast<std::size_t>(model.total) > cap)
    throw DenseCapError("oracle needs dimension " + std::to_string(model.total) +
                        " > cap " + std::to_string(cap));
  if (marked >= net.node_count) throw std::out_of_range("marked node out of range");

  const Sparse U = model.U();
  const Sparse Udag = U.adjoint();
  const Index root = model.at(net.root, 0, 0);

  std::vector<Triplet> ot, rt;
  for (Index i = 0; i < model.total; ++i) {
    const bool at_marked = static_cast<std::size_t>(i / model.local) == marked;
    ot.emplace_back(i, i, at_marked ? -1.0 : 1.0);
    rt.emplace_back(i, i, i == root ? -1.0 : 1.0);
  }
  const Sparse O = model.from_triplets(ot);
  const Sparse R0 = model.from_triplets(rt);
  const Sparse G = U * R0 * Udag * O;

  Vector psi = Vector::Zero(model.total);
  psi(root) = 1.0;
  psi = U * psi;
  for (std::size_t i = 0; i < t; ++i) psi = G * psi;
  double p = 0.0;
  for (Index k = 0; k < model.local; ++k)
    p += std::norm(psi(static_cast<Index>(marked) * model.local + k));
  return p;
}

VerificationReport uniformity_check(const PhaseNetwork& net, double tol) {
  VerificationReport r;
  r.check = "uniformity";
  r.instance = {{"family", net.meta.family}, {"spec", net.meta.spec}, {"seed", net.meta.seed}};
  r.tolerance = tol;
  const auto s = spread(net, tol);
  r.max_deviation = s.layers.back().max_deviation;
  r.passed = r.max_deviation <= tol;
  if (s.first_bad_layer) {
    const auto& ls = s.layers[*s.first_bad_layer];
    r.detail = "first non-uniform layer " + std::to_string(ls.layer) + ": node " +
               std::to_string(ls.worst_node) + " deviates by " +
               std::to_string(ls.max_deviation) + " (" + std::to_string(ls.valid) +
               " valid nodes)";
    if (r.passed) r.passed = false;
  }
  return r;
}

VerificationReport check_phase_labels(const PhaseNetwork& net, double tol) {
  VerificationReport r;
  r.check = "phase_labels";
  r.instance = {{"family", net.meta.family}, {"spec", net.meta.spec}, {"seed", net.meta.seed}};
  r.tolerance = tol;
  const auto dims = net.dims();
  const auto E = phase_estimate_direct(net);
  const double amp = 1.0 / std::sqrt(static_cast<double>(net.memory_dim));
  std::vector<Complex> in(dims.total()), out(dims.total());
  for (std::size_t x = 0; x < net.node_count; ++x)
    for (std::size_t c = 0; c < net.coin_dim; ++c) {
      std::fill(in.begin(), in.end(), Complex(0.0));
      for (std::size_t m = 0; m < net.memory_dim; ++m) in[dims.index(x, c, m)] = amp;
      E.apply(in, out);
      const auto label = static_cast<std::size_t>(net.phase_class[x][c]);
      double p = 0.0;
      for (std::size_t y = 0; y < net.node_count; ++y)
        for (std::size_t d = 0; d < net.coin_dim; ++d)
          p += std::norm(out[dims.index(y, d, label)]);
      const double shortfall = std::max(0.0, 1.0 - p);
      if (shortfall > r.max_deviation) {
        r.max_deviation = shortfall;
        r.detail = "worst port (" + std::to_string(x) + "," + std::to_string(c) + ")";
      }
    }
  r.passed = r.max_deviation <= tol;
  return r;
}

VerificationReport check_loop_equivalence(const PhaseNetwork& net, double tol,
                                          std::size_t cap) {
  VerificationReport r;
  r.check = "loop_equivalence";
  r.instance = {{"family", net.meta.family}, {"spec", net.meta.spec}, {"seed", net.meta.seed}};
  r.tolerance = tol;
  const Matrix loop = to_dense(phase_estimate_loop(net), cap);
  const Matrix direct = to_dense(phase_estimate_direct(net), cap);
  const auto dims = net.dims();
  for (std::size_t x = 0; x < net.node_count; ++x)
    for (std::size_t c = 0; c < net.active_ports(); ++c)
      for (std::size_t m = 0; m < net.memory_dim; ++m) {
        const auto k = static_cast<Index>(dims.index(x, c, m));
        r.max_deviation =
            std::max(r.max_deviation, (loop.col(k) - direct.col(k)).cwiseAbs().maxCoeff());
      }
  r.passed = r.max_deviation <= tol;
  return r;
}

}  // namespace phasewalk
