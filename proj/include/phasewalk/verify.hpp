#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "phasewalk/network.hpp"
#include "phasewalk/operators.hpp"

namespace phasewalk {

struct VerificationReport {
  std::string check;
  nlohmann::json instance = nlohmann::json::object();
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  std::string detail;
};

nlohmann::json to_json(const VerificationReport& r);

/// max |(M†M - I)_ij| over the dense matrix of `op`.
VerificationReport check_unitary(const WalkOperator& op, double tol = 1e-10,
                                 std::size_t cap = default_dense_cap());
VerificationReport check_unitary(const Matrix& m, const std::string& name,
                                 double tol = 1e-10);

/// P(m) after t iterations, computed from matrices assembled directly from
/// the operator definitions; shares no code with the streaming kernels.
/// Throws DenseCapError when the walk space exceeds `cap`.
double classical_success_oracle(const PhaseNetwork& net, std::size_t marked,
                                std::size_t t, std::size_t cap = default_dense_cap());

/// For every port, E on |x, c> ⊗ uniform memory returns the port's phase
/// class with probability >= 1 - tol. Deviation is the worst shortfall.
VerificationReport check_phase_labels(const PhaseNetwork& net, double tol = 1e-10);

/// E_loop against E_direct on every input supported on active ports.
VerificationReport check_loop_equivalence(const PhaseNetwork& net, double tol = 1e-10,
                                          std::size_t cap = default_dense_cap());

/// Marginal after U versus 1/n on the valid bottom nodes. On failure the
/// detail names the first layer whose partial spread is not uniform.
VerificationReport uniformity_check(const PhaseNetwork& net, double tol = 1e-9);

}  // namespace phasewalk
