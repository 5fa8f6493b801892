#include "phasewalk/state.hpp"

#include <cmath>

namespace phasewalk {

namespace {
double l2(std::span<const Complex> v) {
  double s = 0.0;
  for (const auto& a : v) s += std::norm(a);
  return std::sqrt(s);
}
}  // namespace

WalkState::WalkState(Dims dims, std::vector<Complex> amplitudes)
    : dims_(dims), amps_(std::move(amplitudes)) {
  if (amps_.size() != dims_.total())
    throw std::invalid_argument("amplitude count " + std::to_string(amps_.size()) +
                                " does not match dims " + to_string(dims_));
  if (std::abs(l2(amps_) - 1.0) > kNormTolerance)
    throw std::invalid_argument("walk state is not normalized");
}

WalkState WalkState::adopt(Dims dims, std::vector<Complex> amplitudes) {
  WalkState s;
  s.dims_ = dims;
  s.amps_ = std::move(amplitudes);
  return s;
}

double WalkState::norm() const { return l2(amps_); }

WalkState basis_state(const Dims& dims, std::size_t x, std::size_t c,
                      std::size_t m) {
  if (x >= dims.positions || c >= dims.coins || m >= dims.memory)
    throw std::out_of_range("basis state index out of range");
  std::vector<Complex> v(dims.total());
  v[dims.index(x, c, m)] = 1.0;
  return WalkState::adopt(dims, std::move(v));
}

WalkState position_superposition(const Dims& dims,
                                 std::span<const std::size_t> positions,
                                 std::size_t c, std::size_t m) {
  if (positions.empty())
    throw std::invalid_argument("superposition over no positions");
  std::vector<Complex> v(dims.total());
  const double amp = 1.0 / std::sqrt(static_cast<double>(positions.size()));
  for (auto x : positions) {
    if (x >= dims.positions || c >= dims.coins || m >= dims.memory)
      throw std::out_of_range("superposition index out of range");
    v[dims.index(x, c, m)] += amp;
  }
  return WalkState(dims, std::move(v));
}

std::vector<double> position_marginal(const WalkState& s) {
  const auto& d = s.dims();
  std::vector<double> p(d.positions, 0.0);
  const auto amps = s.amplitudes();
  const auto block = d.local();
  for (std::size_t x = 0; x < d.positions; ++x)
    for (std::size_t k = 0; k < block; ++k) p[x] += std::norm(amps[x * block + k]);
  return p;
}

double fidelity(const WalkState& a, const WalkState& b) {
  if (!(a.dims() == b.dims()))
    throw std::invalid_argument("fidelity of states with different dims");
  Complex ip = 0.0;
  const auto va = a.amplitudes();
  const auto vb = b.amplitudes();
  for (std::size_t i = 0; i < va.size(); ++i) ip += std::conj(va[i]) * vb[i];
  return std::norm(ip);
}

nlohmann::json dump_state(const WalkState& s, double threshold) {
  const auto& d = s.dims();
  nlohmann::json rows = nlohmann::json::array();
  const auto amps = s.amplitudes();
  for (std::size_t x = 0; x < d.positions; ++x)
    for (std::size_t c = 0; c < d.coins; ++c)
      for (std::size_t m = 0; m < d.memory; ++m) {
        const auto a = amps[d.index(x, c, m)];
        if (std::abs(a) > threshold)
          rows.push_back({x, c, m, a.real(), a.imag()});
      }
  return {{"dims", {d.positions, d.coins, d.memory}}, {"amplitudes", rows}};
}

}  // namespace phasewalk
