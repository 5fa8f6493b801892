#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "phasewalk/types.hpp"

namespace phasewalk {

inline constexpr double kNormTolerance = 1e-9;

/// Normalized amplitude vector over position ⊗ coin ⊗ memory.
class WalkState {
 public:
  /// Throws std::invalid_argument if the length does not match `dims` or the
  /// norm deviates from 1 by more than kNormTolerance.
  WalkState(Dims dims, std::vector<Complex> amplitudes);

  const Dims& dims() const { return dims_; }
  std::span<const Complex> amplitudes() const { return amps_; }
  Complex amplitude(std::size_t x, std::size_t c, std::size_t m) const {
    return amps_[dims_.index(x, c, m)];
  }
  double norm() const;

  // Operators produce their output through this; unitarity keeps it normalized.
  static WalkState adopt(Dims dims, std::vector<Complex> amplitudes);

 private:
  WalkState() = default;
  Dims dims_;
  std::vector<Complex> amps_;
};

WalkState basis_state(const Dims& dims, std::size_t x, std::size_t c,
                      std::size_t m);

/// Equal superposition of |x, c, m> over the listed positions.
WalkState position_superposition(const Dims& dims,
                                 std::span<const std::size_t> positions,
                                 std::size_t c = 0, std::size_t m = 0);

std::vector<double> position_marginal(const WalkState& s);

/// |<a|b>|^2. Throws std::invalid_argument on dimension mismatch.
double fidelity(const WalkState& a, const WalkState& b);

/// {dims, amplitudes: [[x, c, m, re, im], ...]} for |amp| > threshold.
nlohmann::json dump_state(const WalkState& s, double threshold = 1e-12);

}  // namespace phasewalk
