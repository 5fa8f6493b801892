#include "phasewalk/operators.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <map>

namespace phasewalk {

WalkOperator::WalkOperator(Dims dims, std::shared_ptr<const Kernel> kernel,
                           std::string label)
    : dims_(dims), kernel_(std::move(kernel)), label_(std::move(label)) {}

void WalkOperator::apply(std::span<const Complex> in,
                         std::span<Complex> out) const {
  if (in.size() != dims_.total() || out.size() != dims_.total())
    throw std::invalid_argument("operator '" + label_ + "' applied to wrong size");
  kernel_->apply(in, out, adjoint_);
}

WalkState WalkOperator::apply(const WalkState& s) const {
  if (!(s.dims() == dims_))
    throw std::invalid_argument("operator '" + label_ + "' dims " +
                                to_string(dims_) + " applied to state " +
                                to_string(s.dims()));
  std::vector<Complex> out(dims_.total());
  kernel_->apply(s.amplitudes(), out, adjoint_);
  return WalkState::adopt(dims_, std::move(out));
}

WalkOperator WalkOperator::adjoint() const {
  WalkOperator op = *this;
  op.adjoint_ = !adjoint_;
  if (label_.ends_with("†"))
    op.label_ = label_.substr(0, label_.size() - std::string("†").size());
  else
    op.label_ = label_ + "†";
  return op;
}

namespace {

using Kernel = WalkOperator::Kernel;

template <typename K, typename... Args>
WalkOperator make(const Dims& dims, std::string label, Args&&... args) {
  return WalkOperator(dims, std::make_shared<const K>(std::forward<Args>(args)...),
                      std::move(label));
}

struct IdentityKernel final : Kernel {
  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool) const override {
    std::copy(in.begin(), in.end(), out.begin());
  }
};

struct ProductKernel final : Kernel {
  explicit ProductKernel(std::vector<WalkOperator> f) : factors(std::move(f)) {}
  std::vector<WalkOperator> factors;

  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    if (factors.empty()) {
      std::copy(in.begin(), in.end(), out.begin());
      return;
    }
    std::vector<Complex> a(in.begin(), in.end());
    std::vector<Complex> b(in.size());
    const auto n = factors.size();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& f = adjoint ? factors[n - 1 - i] : factors[i];
      (adjoint ? f.adjoint() : f).apply(a, b);
      a.swap(b);
    }
    std::copy(a.begin(), a.end(), out.begin());
  }
  std::size_t applications() const override {
    std::size_t n = 0;
    for (const auto& f : factors) n += f.applications();
    return n;
  }
};

struct DenseKernel final : Kernel {
  explicit DenseKernel(Matrix m) : mat(std::move(m)) {}
  Matrix mat;
  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    Eigen::Map<const Vector> vin(in.data(), static_cast<Eigen::Index>(in.size()));
    Eigen::Map<Vector> vout(out.data(), static_cast<Eigen::Index>(out.size()));
    if (adjoint)
      vout.noalias() = mat.adjoint() * vin;
    else
      vout.noalias() = mat * vin;
  }
};

// Phase permutation on (position, coin) pairs, identity on memory.
struct ShiftKernel final : Kernel {
  std::size_t memory = 1;
  std::vector<std::size_t> target;
  std::vector<Complex> phase;

  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    for (std::size_t i = 0; i < target.size(); ++i) {
      const auto t = target[i];
      for (std::size_t m = 0; m < memory; ++m) {
        if (adjoint)
          out[i * memory + m] = std::conj(phase[i]) * in[t * memory + m];
        else
          out[t * memory + m] = phase[i] * in[i * memory + m];
      }
    }
  }
};

std::shared_ptr<const ShiftKernel> shift_kernel(const PhaseNetwork& net) {
  auto k = std::make_shared<ShiftKernel>();
  const auto C = net.coin_dim;
  k->memory = net.memory_dim;
  k->target.resize(net.node_count * C);
  k->phase.resize(net.node_count * C);
  std::vector<bool> hit(k->target.size(), false);
  for (std::size_t x = 0; x < net.node_count; ++x)
    for (std::size_t c = 0; c < C; ++c) {
      const auto t = net.ports[x][c] * C + net.return_ports[x][c];
      if (t >= hit.size() || hit[t])
        throw SpecError("shift is not a permutation at port (" +
                        std::to_string(x) + "," + std::to_string(c) + ")");
      hit[t] = true;
      k->target[x * C + c] = t;
      k->phase[x * C + c] = std::polar(1.0, net.phase(x, c));
    }
  return k;
}

// sum_j (S^2)^j ⊗ |j><j|: memory value j follows the shift 2j times.
struct ControlledShiftKernel final : Kernel {
  std::shared_ptr<const ShiftKernel> shift;

  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    const auto M = shift->memory;
    for (std::size_t i = 0; i < shift->target.size(); ++i) {
      for (std::size_t m = 0; m < M; ++m) {
        std::size_t at = i;
        Complex ph = 1.0;
        for (std::size_t r = 0; r < 2 * m; ++r) {
          ph *= shift->phase[at];
          at = shift->target[at];
        }
        if (adjoint)
          out[i * M + m] = std::conj(ph) * in[at * M + m];
        else
          out[at * M + m] = ph * in[i * M + m];
      }
    }
  }
  std::size_t applications() const override { return 1; }
};

// The same matrix on the memory register of every (position, coin).
struct MemoryKernel final : Kernel {
  explicit MemoryKernel(Matrix m) : mat(std::move(m)) {}
  Matrix mat;
  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    const auto M = static_cast<std::size_t>(mat.rows());
    const Matrix op = adjoint ? Matrix(mat.adjoint()) : mat;
    for (std::size_t i = 0; i < in.size(); i += M) {
      Eigen::Map<const Vector> vin(in.data() + i, static_cast<Eigen::Index>(M));
      Eigen::Map<Vector> vout(out.data() + i, static_cast<Eigen::Index>(M));
      vout.noalias() = op * vin;
    }
  }
};

// Block-diagonal in position: node x gets blocks[block_of[x]] on its
// coin ⊗ memory space, or the identity when block_of[x] < 0.
struct LocalKernel final : Kernel {
  std::size_t local = 1;
  std::vector<Matrix> blocks;
  std::vector<int> block_of;

  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    const auto n = static_cast<Eigen::Index>(local);
    for (std::size_t x = 0; x < block_of.size(); ++x) {
      const auto off = x * local;
      if (block_of[x] < 0) {
        std::copy(in.begin() + off, in.begin() + off + local, out.begin() + off);
        continue;
      }
      const auto& B = blocks[block_of[x]];
      Eigen::Map<const Vector> vin(in.data() + off, n);
      Eigen::Map<Vector> vout(out.data() + off, n);
      if (adjoint)
        vout.noalias() = B.adjoint() * vin;
      else
        vout.noalias() = B * vin;
    }
  }
};

// Builds a LocalKernel from a per-node block factory, sharing equal blocks.
template <typename Key, typename Factory>
WalkOperator local_operator(const PhaseNetwork& net, std::string label,
                            const std::vector<Key>& keys, const Key& none,
                            Factory&& factory) {
  auto k = std::make_shared<LocalKernel>();
  k->local = net.coin_dim * net.memory_dim;
  k->block_of.assign(net.node_count, -1);
  std::map<Key, int> seen;
  for (std::size_t x = 0; x < net.node_count; ++x) {
    if (keys[x] == none) continue;
    auto [it, inserted] = seen.try_emplace(keys[x], static_cast<int>(k->blocks.size()));
    if (inserted) k->blocks.push_back(factory(keys[x]));
    k->block_of[x] = it->second;
  }
  return WalkOperator(net.dims(), std::move(k), std::move(label));
}

struct DiagonalKernel final : Kernel {
  std::vector<Complex> diag;
  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    for (std::size_t i = 0; i < in.size(); ++i)
      out[i] = (adjoint ? std::conj(diag[i]) : diag[i]) * in[i];
  }
};

struct ReflectionKernel final : Kernel {
  std::vector<Complex> psi;
  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool) const override {
    Complex ip = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) ip += std::conj(psi[i]) * in[i];
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] - 2.0 * ip * psi[i];
  }
};

// Full-space U_{a->b} = 1 - aa† - a'a'† + ba† + b'a'†.
struct RotationKernel final : Kernel {
  Vector a, a2, b, b2;  // a2/b2 empty in the degenerate (collinear) case

  void apply(std::span<const Complex> in, std::span<Complex> out,
             bool adjoint) const override {
    Eigen::Map<const Vector> vin(in.data(), static_cast<Eigen::Index>(in.size()));
    Eigen::Map<Vector> vout(out.data(), static_cast<Eigen::Index>(out.size()));
    const Vector& from = adjoint ? b : a;
    const Vector& to = adjoint ? a : b;
    const Vector& from2 = adjoint ? b2 : a2;
    const Vector& to2 = adjoint ? a2 : b2;
    vout = vin;
    const Complex c1 = from.dot(vin);
    vout += (to - from) * c1;
    if (from2.size() > 0) {
      const Complex c2 = from2.dot(vin);
      vout += (to2 - from2) * c2;
    }
  }
};

constexpr double kCollinear = 1e-12;

struct RotationFrame {
  Vector a, a2, b, b2;
};

RotationFrame rotation_frame(Vector a, Vector b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na < 1e-14 || nb < 1e-14)
    throw std::invalid_argument("rotation between zero vectors");
  if (a.size() != b.size())
    throw std::invalid_argument("rotation between vectors of different size");
  a /= na;
  b /= nb;
  RotationFrame f{a, Vector(), b, Vector()};
  const Complex ab = a.dot(b);  // <a|b>
  if (std::abs(ab) >= 1.0 - kCollinear) return f;
  f.a2 = (b - a * ab).normalized();
  f.b2 = (a - b * std::conj(ab)).normalized();
  return f;
}

Vector unit(std::size_t dim, std::size_t i) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
  v(static_cast<Eigen::Index>(i)) = 1.0;
  return v;
}

Vector to_vector(const WalkState& s) {
  const auto amps = s.amplitudes();
  return Eigen::Map<const Vector>(amps.data(), static_cast<Eigen::Index>(amps.size()));
}

// The pattern normalization is exact for powers of two; sqrt keeps it simple.
double inv_sqrt(std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); }

}  // namespace

WalkOperator compose(std::vector<WalkOperator> factors, std::string label) {
  if (factors.empty()) throw std::invalid_argument("compose of no factors");
  const Dims dims = factors.front().dims();
  for (const auto& f : factors)
    if (!(f.dims() == dims))
      throw std::invalid_argument("compose: factor '" + f.label() +
                                  "' has mismatched dims");
  return make<ProductKernel>(dims, std::move(label), std::move(factors));
}

WalkOperator power(const WalkOperator& op, std::size_t k) {
  if (k == 0) return identity(op.dims());
  return compose(std::vector<WalkOperator>(k, op),
                 "(" + op.label() + ")^" + std::to_string(k));
}

WalkOperator identity(const Dims& dims) {
  return make<IdentityKernel>(dims, "1");
}

WalkOperator from_dense(const Dims& dims, Matrix m, std::string label) {
  const auto n = static_cast<Eigen::Index>(dims.total());
  if (m.rows() != n || m.cols() != n)
    throw std::invalid_argument("from_dense: matrix size does not match dims");
  return make<DenseKernel>(dims, std::move(label), std::move(m));
}

WalkOperator shift(const PhaseNetwork& net) {
  return WalkOperator(net.dims(), shift_kernel(net), "S");
}

Matrix fourier_matrix(std::size_t p) {
  if (p < 1) throw std::invalid_argument("fourier dimension must be >= 1");
  Matrix F(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  const double norm = inv_sqrt(p);
  for (std::size_t j = 0; j < p; ++j)
    for (std::size_t k = 0; k < p; ++k) {
      // Reduce k*j mod p first so large products keep full angle precision.
      const double angle = 2.0 * kPi * static_cast<double>((k * j) % p) /
                           static_cast<double>(p);
      F(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
          std::polar(norm, angle);
    }
  return F;
}

WalkOperator fourier(const Dims& dims) {
  return make<MemoryKernel>(dims, "F", fourier_matrix(dims.memory));
}

WalkOperator controlled_double_shift(const PhaseNetwork& net) {
  auto k = std::make_shared<ControlledShiftKernel>();
  k->shift = shift_kernel(net);
  return WalkOperator(net.dims(), std::move(k), "ctrl-S2");
}

WalkOperator phase_estimate_direct(const PhaseNetwork& net) {
  return compose({controlled_double_shift(net), fourier(net.dims()).adjoint()},
                 "E_direct");
}

namespace {

Matrix twin_swap_block(const PhaseNetwork& net, std::optional<std::size_t> only) {
  const auto C = net.coin_dim;
  const auto M = net.memory_dim;
  Matrix B = Matrix::Zero(static_cast<Eigen::Index>(C * M),
                          static_cast<Eigen::Index>(C * M));
  for (std::size_t c = 0; c < C; ++c)
    for (std::size_t m = 0; m < M; ++m) {
      const bool toggle = !only || *only == m;
      const auto to = (toggle ? net.twin(c) : c) * M + m;
      B(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(c * M + m)) = 1.0;
    }
  return B;
}

WalkOperator uniform_local(const PhaseNetwork& net, Matrix block,
                           std::string label) {
  std::vector<int> keys(net.node_count, 0);
  return local_operator(net, std::move(label), keys, -1,
                        [&](int) { return block; });
}

}  // namespace

WalkOperator deactivation(const PhaseNetwork& net, std::size_t l) {
  if (l >= net.memory_dim) throw std::out_of_range("deactivation memory value");
  return uniform_local(net, twin_swap_block(net, l), "D_" + std::to_string(l));
}

WalkOperator active_inactive_switch(const PhaseNetwork& net) {
  return uniform_local(net, twin_swap_block(net, std::nullopt), "SWAP_all");
}

WalkOperator phase_estimate_loop(const PhaseNetwork& net) {
  const auto S = shift(net);
  std::vector<WalkOperator> f;
  for (std::size_t l = 0; l < net.memory_dim; ++l) {
    f.push_back(deactivation(net, l));
    f.push_back(S);
    f.push_back(S);
  }
  f.push_back(active_inactive_switch(net));
  f.push_back(fourier(net.dims()).adjoint());
  return compose(std::move(f), "E_loop");
}

Matrix rotation_matrix(const Vector& a, const Vector& b) {
  const auto f = rotation_frame(a, b);
  const auto n = a.size();
  Matrix U = Matrix::Identity(n, n);
  U += (f.b - f.a) * f.a.adjoint();
  if (f.a2.size() > 0) U += (f.b2 - f.a2) * f.a2.adjoint();
  return U;
}

WalkOperator rotation_between(const WalkState& a, const WalkState& b) {
  if (!(a.dims() == b.dims()))
    throw std::invalid_argument("rotation between states of different dims");
  auto f = rotation_frame(to_vector(a), to_vector(b));
  auto k = std::make_shared<RotationKernel>();
  k->a = std::move(f.a);
  k->a2 = std::move(f.a2);
  k->b = std::move(f.b);
  k->b2 = std::move(f.b2);
  return WalkOperator(a.dims(), std::move(k), "U_rot");
}

WalkOperator coin_prepare(const PhaseNetwork& net) {
  const auto M = net.memory_dim;
  const auto local = net.coin_dim * M;
  return local_operator(net, "P", net.down_ports, PortList{},
                        [&](const PortList& down) {
                          Vector s = Vector::Zero(static_cast<Eigen::Index>(local));
                          for (auto c : down)
                            for (std::size_t m = 0; m < M; ++m)
                              s(static_cast<Eigen::Index>(c * M + m)) = 1.0;
                          return rotation_matrix(unit(local, 0), s);
                        });
}

WalkOperator coin_select_pairs(const PhaseNetwork& net) {
  if (net.memory_dim != 2)
    throw SpecError("pair selection coin requires memory_dim = 2");
  const auto M = net.memory_dim;
  const auto local = net.coin_dim * M;
  constexpr std::size_t g = 0;
  constexpr std::size_t b = 1;
  const double h = 1.0 / std::sqrt(2.0);
  return local_operator(
      net, "C", net.groups, std::vector<PortList>{},
      [&](const std::vector<PortList>& groups) {
        Matrix B = Matrix::Identity(static_cast<Eigen::Index>(local),
                                    static_cast<Eigen::Index>(local));
        for (const auto& pair : groups) {
          if (pair.size() != 2)
            throw SpecError("pair selection coin needs groups of two ports");
          const auto idx = [&](std::size_t port, std::size_t m) {
            return static_cast<Eigen::Index>(pair[port] * M + m);
          };
          const Eigen::Index e0g = idx(0, g), e0b = idx(0, b), e1g = idx(1, g),
                             e1b = idx(1, b);
          for (auto i : {e0g, e0b, e1g, e1b}) B(i, i) = 0.0;
          // |2l,g><g+_{2l}|, g+_{2l} = (|2l,g> + |2l+1,b>)/√2
          B(e0g, e0g) += h;
          B(e0g, e1b) += h;
          // |2l+1,g><g+_{2l+1}|, g+_{2l+1} = (|2l,b> + |2l+1,g>)/√2
          B(e1g, e0b) += h;
          B(e1g, e1g) += h;
          // |2l+1,b><g-_{2l+1}|, g-_{2l+1} = (|2l,b> - |2l+1,g>)/√2
          B(e1b, e0b) += h;
          B(e1b, e1g) -= h;
          // |2l,b><g-_{2l}|, g-_{2l} = (|2l,g> - |2l+1,b>)/√2
          B(e0b, e0g) += h;
          B(e0b, e1b) -= h;
        }
        return B;
      });
}

namespace {

// Selection block on the (port a, memory m) -> a*p + m coordinates of one
// group of 2^R ports.
Matrix group_selection_block(int R, std::size_t p) {
  const int q = selection_prefix_bits(R);
  if (p != (std::size_t{1} << q))
    throw SpecError("selection over groups of 2^" + std::to_string(R) +
                    " ports needs memory_dim = " + std::to_string(1 << q));
  const std::size_t size = std::size_t{1} << R;
  const int shift_bits = R - q;
  const std::size_t dim = size * p;
  std::vector<IsometryPair> pairs;
  for (std::size_t pattern = 0; pattern < p; ++pattern) {
    Vector in = Vector::Zero(static_cast<Eigen::Index>(dim));
    Vector out = Vector::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t a = 0; a < size; ++a) {
      const auto prefix = a >> shift_bits;
      in(static_cast<Eigen::Index>(a * p + (pattern ^ prefix))) = inv_sqrt(size);
      if (prefix == pattern)
        out(static_cast<Eigen::Index>(a * p)) = inv_sqrt(size >> q);
    }
    pairs.push_back({std::move(in), std::move(out)});
  }
  try {
    return complete_partial_isometry(dim, pairs);
  } catch (const IsometryError& e) {
    throw SpecError("selection patterns " + std::to_string(e.first()) + " and " +
                    std::to_string(e.second()) + " are not orthogonal (" +
                    e.side() + ")");
  }
}

}  // namespace

WalkOperator coin_select_general(const PhaseNetwork& net) {
  const auto M = net.memory_dim;
  const auto local = net.coin_dim * M;
  std::map<int, Matrix> by_exponent;
  return local_operator(
      net, "C_general", net.groups, std::vector<PortList>{},
      [&](const std::vector<PortList>& groups) {
        Matrix B = Matrix::Identity(static_cast<Eigen::Index>(local),
                                    static_cast<Eigen::Index>(local));
        for (const auto& group : groups) {
          const auto size = group.size();
          if (size < 2 || (size & (size - 1)) != 0)
            throw SpecError("selection group size must be a power of two >= 2");
          const int R = std::countr_zero(size);
          auto it = by_exponent.find(R);
          if (it == by_exponent.end())
            it = by_exponent.emplace(R, group_selection_block(R, M)).first;
          const Matrix& G = it->second;
          std::vector<Eigen::Index> idx;
          for (auto c : group)
            for (std::size_t m = 0; m < M; ++m)
              idx.push_back(static_cast<Eigen::Index>(c * M + m));
          for (auto i : idx)
            for (auto j : idx) B(i, j) = 0.0;
          for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t s = 0; s < idx.size(); ++s)
              B(idx[r], idx[s]) = G(static_cast<Eigen::Index>(r),
                                    static_cast<Eigen::Index>(s));
        }
        return B;
      });
}

WalkOperator coin_reset(const PhaseNetwork& net) {
  const auto M = net.memory_dim;
  const auto local = net.coin_dim * M;
  constexpr std::size_t g = 0;
  return local_operator(net, "A", net.reset_ports, PortList{},
                        [&](const PortList& in_ports) {
                          Vector in = Vector::Zero(static_cast<Eigen::Index>(local));
                          for (auto c : in_ports)
                            in(static_cast<Eigen::Index>(c * M + g)) = 1.0;
                          return rotation_matrix(in, unit(local, 0));
                        });
}

WalkOperator oracle(const Dims& dims, std::size_t marked) {
  if (marked >= dims.positions) throw std::out_of_range("oracle: marked node out of range");
  auto k = std::make_shared<DiagonalKernel>();
  k->diag.assign(dims.total(), 1.0);
  for (std::size_t i = 0; i < dims.local(); ++i) k->diag[marked * dims.local() + i] = -1.0;
  return WalkOperator(dims, std::move(k), "O_" + std::to_string(marked));
}

WalkOperator reflect_initial(const WalkState& initial) {
  auto k = std::make_shared<ReflectionKernel>();
  const auto amps = initial.amplitudes();
  k->psi.assign(amps.begin(), amps.end());
  return WalkOperator(initial.dims(), std::move(k), "R_0");
}

WalkOperator top_layer_preparation(const PhaseNetwork& net) {
  if (net.layers.size() < 2) throw SpecError("network has no top layer");
  auto op = rotation_between(basis_state(net.dims(), net.root, 0, 0),
                             position_superposition(net.dims(), net.layers[1]));
  return compose({op}, "U_top");
}

IsometryError::IsometryError(std::string side, std::size_t i, std::size_t j,
                             double deviation)
    : SpecError(side + " vectors " + std::to_string(i) + " and " +
                std::to_string(j) + " are not orthonormal (Gram deviation " +
                std::to_string(deviation) + ")"),
      side_(std::move(side)),
      i_(i),
      j_(j) {}

namespace {

constexpr double kGramTolerance = 1e-10;

void check_orthonormal(const std::vector<Vector>& v, const char* side) {
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i; j < v.size(); ++j) {
      const Complex g = v[i].dot(v[j]);
      const double dev = std::abs(g - (i == j ? 1.0 : 0.0));
      if (dev > kGramTolerance) throw IsometryError(side, i, j, dev);
    }
}

// Extends an orthonormal family to a basis of C^dim with canonical vectors
// e_0, e_1, ... in order, two Gram-Schmidt passes each.
std::vector<Vector> complement(std::vector<Vector> basis, std::size_t dim) {
  const std::size_t given = basis.size();
  for (std::size_t k = 0; k < dim && basis.size() < dim; ++k) {
    Vector v = unit(dim, k);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& u : basis) v -= u * u.dot(v);
    const double n = v.norm();
    if (n > 1e-6) basis.push_back(v / n);
  }
  return {basis.begin() + static_cast<std::ptrdiff_t>(given), basis.end()};
}

}  // namespace

Matrix complete_partial_isometry(std::size_t dim,
                                 std::span<const IsometryPair> pairs) {
  std::vector<Vector> in;
  std::vector<Vector> out;
  for (const auto& p : pairs) {
    if (static_cast<std::size_t>(p.input.size()) != dim ||
        static_cast<std::size_t>(p.output.size()) != dim)
      throw std::invalid_argument("isometry pair has wrong dimension");
    in.push_back(p.input);
    out.push_back(p.output);
  }
  if (in.size() > dim) throw std::invalid_argument("more isometry pairs than dimensions");
  check_orthonormal(in, "input");
  check_orthonormal(out, "output");

  const auto in_rest = complement(in, dim);
  const auto out_rest = complement(out, dim);
  const auto n = static_cast<Eigen::Index>(dim);
  Matrix U = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < in.size(); ++i) U += out[i] * in[i].adjoint();
  for (std::size_t i = 0; i < in_rest.size(); ++i) U += out_rest[i] * in_rest[i].adjoint();
  return U;
}

std::size_t default_dense_cap() {
  if (const char* env = std::getenv("PHASEWALK_DENSE_CAP")) {
    char* end = nullptr;
    const auto v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  return 4096;
}

Matrix to_dense(const WalkOperator& op, std::size_t cap) {
  const auto n = op.dims().total();
  if (n > cap)
    throw DenseCapError("dense export of '" + op.label() + "' needs dimension " +
                        std::to_string(n) + " > cap " + std::to_string(cap));
  const auto N = static_cast<Eigen::Index>(n);
  Matrix m(N, N);
  std::vector<Complex> e(n, 0.0);
  std::vector<Complex> col(n);
  for (std::size_t k = 0; k < n; ++k) {
    e[k] = 1.0;
    op.apply(e, col);
    e[k] = 0.0;
    m.col(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Vector>(col.data(), N);
  }
  return m;
}

nlohmann::json dump_dense(const Matrix& m, const Dims& dims) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return {{"dims", {dims.positions, dims.coins, dims.memory}}, {"rows", rows}};
}

}  // namespace phasewalk
