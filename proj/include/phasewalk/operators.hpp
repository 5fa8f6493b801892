#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "phasewalk/network.hpp"
#include "phasewalk/state.hpp"

namespace phasewalk {

/// A unitary on the walk space with streaming apply and adjoint.
///
/// Operators are immutable handles; copies share the underlying kernel. The
/// adjoint of a product reverses the factor order.
class WalkOperator {
 public:
  struct Kernel {
    virtual ~Kernel() = default;
    // `in` and `out` never alias and both have dims.total() entries.
    virtual void apply(std::span<const Complex> in, std::span<Complex> out,
                       bool adjoint) const = 0;
    // Elementary operator applications performed by one apply.
    virtual std::size_t applications() const { return 1; }
  };

  WalkOperator(Dims dims, std::shared_ptr<const Kernel> kernel,
               std::string label);

  const Dims& dims() const { return dims_; }
  const std::string& label() const { return label_; }
  bool is_adjoint() const { return adjoint_; }
  std::size_t applications() const { return kernel_->applications(); }

  WalkState apply(const WalkState& s) const;
  void apply(std::span<const Complex> in, std::span<Complex> out) const;
  WalkOperator adjoint() const;

 private:
  Dims dims_;
  std::shared_ptr<const Kernel> kernel_;
  std::string label_;
  bool adjoint_ = false;
};

/// Product that applies `factors` first to last.
WalkOperator compose(std::vector<WalkOperator> factors, std::string label);
WalkOperator power(const WalkOperator& op, std::size_t k);
WalkOperator identity(const Dims& dims);
WalkOperator from_dense(const Dims& dims, Matrix m, std::string label);

// --- walk operators -------------------------------------------------------

/// S: |x, D(x,y), m> -> e^{i phi(x,y)} |y, D(y,x), m>; loops and inactive
/// twins are left in place.
WalkOperator shift(const PhaseNetwork& net);

/// F|k> = p^{-1/2} sum_j e^{2 pi i k j / p} |j>.
Matrix fourier_matrix(std::size_t p);
/// Fourier transform on the memory factor of `dims`.
WalkOperator fourier(const Dims& dims);

/// sum_j (S^2)^j ⊗ |j><j|, each power applied literally as repeated shifts.
WalkOperator controlled_double_shift(const PhaseNetwork& net);
/// E = (1 ⊗ 1 ⊗ F†) sum_j (S^2)^j ⊗ |j><j|.
WalkOperator phase_estimate_direct(const PhaseNetwork& net);

/// D_l: swaps every port with its inactive twin on memory value l only.
WalkOperator deactivation(const PhaseNetwork& net, std::size_t l);
/// Swaps every port with its inactive twin on all memory values.
WalkOperator active_inactive_switch(const PhaseNetwork& net);
/// E built from plain shifts: F† · SWAP_all · prod_l (S^2 · D_l), D_0 first.
/// Agrees with phase_estimate_direct on inputs supported on active ports.
WalkOperator phase_estimate_loop(const PhaseNetwork& net);

/// U_{a->b}: maps a to b and a' to b', identity on span(a, b)^⊥, where
/// a' ∝ b - a<a|b> and b' ∝ a - b<b|a>. Inputs are normalized first; zero
/// vectors throw std::invalid_argument.
Matrix rotation_matrix(const Vector& a, const Vector& b);
WalkOperator rotation_between(const WalkState& a, const WalkState& b);

/// P: at every node with down ports, U_{|0,0> -> |s>} with |s> the uniform
/// superposition over (down ports) x (all memory values).
WalkOperator coin_prepare(const PhaseNetwork& net);

/// C for pair groups (p = 2, label g = 0, b = 1):
///   (|2l,g> + |2l+1,b>)/√2 -> |2l,g>,   (|2l,b> + |2l+1,g>)/√2 -> |2l+1,g>,
///   (|2l,g> - |2l+1,b>)/√2 -> |2l,b>,   (|2l,b> - |2l+1,g>)/√2 -> |2l+1,b>.
WalkOperator coin_select_pairs(const PhaseNetwork& net);

/// C for groups of 2^R ports, built by completing the isometry that sends
/// each prefix pattern's labelled group state to the uniform superposition of
/// its valid ports (label g). All 2^q patterns are included, so the result
/// does not depend on which patterns the network happens to use.
WalkOperator coin_select_general(const PhaseNetwork& net);

/// A: at every node with reset ports, U_{|in_x> -> |0,0>} where |in_x> is the
/// uniform superposition of the reset ports with label g.
WalkOperator coin_reset(const PhaseNetwork& net);

WalkOperator oracle(const Dims& dims, std::size_t marked);
/// 1 - 2|psi><psi|.
WalkOperator reflect_initial(const WalkState& initial);

/// Multilevel layer 0: rotates |root,0,0> onto the uniform superposition of
/// the top layer with coin 0 and memory 0.
WalkOperator top_layer_preparation(const PhaseNetwork& net);

// --- isometry completion --------------------------------------------------

struct IsometryPair {
  Vector input;
  Vector output;
};

class IsometryError : public SpecError {
 public:
  IsometryError(std::string side, std::size_t i, std::size_t j, double deviation);
  const std::string& side() const { return side_; }
  std::size_t first() const { return i_; }
  std::size_t second() const { return j_; }

 private:
  std::string side_;
  std::size_t i_;
  std::size_t j_;
};

/// Unitary on C^dim agreeing with every pair. Both families must be
/// orthonormal (Gram deviation <= 1e-10). The complements are completed by
/// Gram-Schmidt over canonical basis vectors in index order, so the result is
/// deterministic.
Matrix complete_partial_isometry(std::size_t dim, std::span<const IsometryPair> pairs);

// --- dense export ---------------------------------------------------------

class DenseCapError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// PHASEWALK_DENSE_CAP if set, otherwise 4096.
std::size_t default_dense_cap();

/// Column k = apply(e_k). Throws DenseCapError above `cap`.
Matrix to_dense(const WalkOperator& op, std::size_t cap = default_dense_cap());

/// {dims, rows: [[[re, im], ...], ...]}
nlohmann::json dump_dense(const Matrix& m, const Dims& dims);

}  // namespace phasewalk
