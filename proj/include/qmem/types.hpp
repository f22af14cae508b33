#pragma once

#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qmem {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;
inline constexpr Complex kI{0.0, 1.0};

/// Default hard cap on the number of basis states of any engine.
inline constexpr std::size_t kDefaultDimensionCap = 2'000'000;

/// Largest dimension for which dense density matrices are formed.
inline constexpr std::size_t kDenseDensityCap = 8192;

enum class ErrorKind {
  dimension_overflow,
  dimension_mismatch,
  sector_mismatch,
  excitation_overflow,
  cutoff_exceeded,
  cutoff_loss,
  zero_probability,
  step_too_large,
  singular_schedule,
  unknown_scenario,
  seed_missing,
  config_invalid,
  invalid_argument,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` says which contract broke.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Exact mixing-angle trigonometry: the storage (pi/2) and photonic (0)
/// endpoints return exact zeros and ones instead of 6e-17 residues.
inline double mixing_cos(double theta) {
  if (theta == kHalfPi) return 0.0;
  if (theta == 0.0) return 1.0;
  return std::cos(theta);
}

inline double mixing_sin(double theta) {
  if (theta == kHalfPi) return 1.0;
  if (theta == 0.0) return 0.0;
  return std::sin(theta);
}

/// Phase factor exp(2 pi i l j / N) for 1-based atom label j.
inline Complex fourier_phase(int l, int j1, int atoms) {
  const long long r = (static_cast<long long>(l) * j1) % atoms;
  if (r == 0) return {1.0, 0.0};
  if (2 * r == atoms) return {-1.0, 0.0};
  if (4 * r == atoms) return {0.0, 1.0};
  if (4 * r == 3LL * atoms) return {0.0, -1.0};
  const double angle = 2.0 * kPi * static_cast<double>(r) / atoms;
  return {std::cos(angle), std::sin(angle)};
}

}  // namespace qmem
