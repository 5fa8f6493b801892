#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace phasewalk {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = 3.14159265358979323846;

/// Register dimensions of the walk space: position (x) ⊗ coin (c) ⊗ memory (m).
/// Flat index layout is position-major, then coin, then memory.
struct Dims {
  std::size_t positions = 0;
  std::size_t coins = 0;
  std::size_t memory = 0;

  std::size_t total() const { return positions * coins * memory; }
  std::size_t local() const { return coins * memory; }
  std::size_t index(std::size_t x, std::size_t c, std::size_t m) const {
    return (x * coins + c) * memory + m;
  }

  friend bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(const Dims& d) {
  return std::to_string(d.positions) + "x" + std::to_string(d.coins) + "x" +
         std::to_string(d.memory);
}

/// Invalid builder parameters or an inconsistent network.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed network/config document. `field()` names the offending key.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string field, const std::string& what)
      : std::runtime_error(what), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

}  // namespace phasewalk
