#pragma once

// Time evolution in the rotating frame at exact resonance.

#include <functional>
#include <vector>

#include "qmem/bosonic.hpp"
#include "qmem/polariton.hpp"
#include "qmem/statespace.hpp"

namespace qmem {

struct HamiltonianParams {
  double g = 1.0;
  double gamma = 0.0;  // excited-state amplitude decay
  // Bare frequencies; only the resonance conditions are used.
  double omega = 0.0;    // cavity
  double omega_a = 0.0;  // level a
  double omega_c = 0.0;  // level c
  double nu = 0.0;       // control field

  /// Requires omega = omega_a (one-photon) and omega = omega_c + nu (two-photon).
  void validate() const;
};

enum class SweepProfile { linear, cosine, tanh, hold };
enum class SweepDirection { store, retrieve };

const char* to_string(SweepProfile profile);

/// theta(t) between theta_min and pi/2.  theta = 0 would need an infinite control
/// field, so store sweeps start and retrieve sweeps end at theta_min.
struct SweepSchedule {
  SweepProfile profile = SweepProfile::cosine;
  SweepDirection direction = SweepDirection::store;
  double duration = 1.0;
  double theta_min = 0.05;
  double theta_hold = kHalfPi;  // used by `hold`

  static SweepSchedule hold(double theta, double duration);

  void validate() const;
  double theta(double t) const;
  double theta_dot(double t) const;
  /// Omega(t) = g sqrt(N) cot(theta(t)).
  double control(double t, double g, int atoms) const;
  double adiabaticity(double g, int atoms) const;  // g sqrt(N) T
};

struct EvolveOptions {
  double dt = 0.0;              // 0: chosen from steps_per_period
  int steps_per_period = 50;    // of the fastest frequency, when dt = 0
  int max_halvings = 3;         // dt -> dt/2 refinements for the convergence check
  double halving_tolerance = 1e-8;
  int record_every = 0;
};

struct Trajectory {
  PureState final_state;
  double norm = 1.0;
  double dt = 0.0;
  double adiabaticity = 0.0;
  double halving_error = 0.0;   // |psi(dt) - psi(dt/2)| at the last refinement
  bool converged = false;
  std::vector<double> times;
  std::vector<double> excited_population;
};

/// Non-hermitian Schroedinger evolution under g sum_j (a sigma_ab^j + h.c.)
/// + Omega(t) sum_j (sigma_ac^j + h.c.) - i gamma sum_j sigma_aa^j.
Trajectory evolve_full(const PureState& initial, const HamiltonianParams& params, const SweepSchedule& schedule,
                       const EvolveOptions& options = {});

/// Sequential segments (e.g. store then retrieve) sharing one set of options.
Trajectory evolve_sequence(const PureState& initial, const HamiltonianParams& params,
                           const std::vector<SweepSchedule>& segments, const EvolveOptions& options = {});

struct Readout {
  CMatrix field;           // cavity reduced operator after the sweeps, unnormalized
  double retained = 1.0;   // trace of `field`
  Trajectory trajectory;   // last pure-state run
};

/// Evolve, then trace out every atomic degree of freedom.
Readout readout_reduce(const PureState& stored, const HamiltonianParams& params,
                       const std::vector<SweepSchedule>& segments, const EvolveOptions& options = {});
Readout readout_reduce(const DensityOperator& stored, const HamiltonianParams& params,
                       const std::vector<SweepSchedule>& segments, const EvolveOptions& options = {});

/// Real and imaginary parts of <D,n| H_int |D,n> at the frame's mixing angle.
Complex dark_energy(const PureState& dark, const HamiltonianParams& params, const PolaritonFrame& frame);
/// |H_int |D,n>|, zero for an exact dark state.
double dark_residual(const PureState& dark, const HamiltonianParams& params, const PolaritonFrame& frame);

inline constexpr double kPumpingThetaFloor = 1e-3;

/// Bright-mode optical pumping in the polariton frame: every Phi_{l>=1} amplitude
/// decays at (g^2 N / gamma) cot^2 theta(t); Psi and Phi_0 are untouched.
/// The state lives in the polariton frame, mode 0 = Psi, 1 = Phi_0, 1 + l = Phi_l.
struct FrameRun {
  ModeState final_state;
  std::vector<double> times;
  std::vector<double> bright_occupation;  // sum_{l>=1} <Phi_l^dag Phi_l>, unnormalized
};

FrameRun evolve_polariton_frame(const ModeState& polariton_state, const SweepSchedule& schedule, double gamma,
                                double g, int atoms, double dt, int record_every = 0);

/// Single-excitation linear model.  Layout: [Psi, Phi_0, b_1..b_K, Phi_1..Phi_{N-1}].
struct NonAdiabaticModel {
  double kappa = 0.0;
  int bath_modes = 32;
  int atoms = 4;
  double g = 1.0;
  double gamma = 1.0;
  bool pumping = true;
  CVector initial;

  Eigen::Index size() const { return 2 + bath_modes + (atoms - 1); }
  Eigen::Index bath(int k) const { return 2 + k; }
  Eigen::Index bright(int l) const { return 2 + bath_modes + (l - 1); }
  void validate() const;
};

struct NonAdiabaticResult {
  CVector final_amplitudes;
  CVector retrieved_field;   // [a, b_1..b_K] with a = cos(theta) Psi + sin(theta) Phi_0
  double core_norm = 0.0;    // |(Psi, Phi_0, b)|^2
  double initial_core_norm = 0.0;
};

/// Coefficient matrix M(t) of dx/dt = M x.
CMatrix nonadiabatic_jacobian(const NonAdiabaticModel& model, const SweepSchedule& schedule, double t);

NonAdiabaticResult nonadiabatic_linear(const NonAdiabaticModel& model, const SweepSchedule& schedule, double dt);

}  // namespace qmem
