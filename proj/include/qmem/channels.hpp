#pragma once

// Single-atom decoherence events and processes acting on stored polaritons:
// spin flips, phase flips, the auxiliary-level flip, one-atom loss, the
// spin-flip Liouvillian with its single-mode reduction, Wiener phase
// diffusion of the atoms, and thermal imperfect preparation.

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "qmem/bosonic.hpp"
#include "qmem/polariton.hpp"
#include "qmem/statespace.hpp"

namespace qmem {

enum class ChannelFlavor {
  flip_cb,         // sigma_cb^j = |c><b|_j
  flip_bc,         // sigma_bc^j = |b><c|_j
  symmetric_flip,  // X_j
  phase_flip,      // Z_j
  aux_flip_bd,     // |d><b|_j
  atom_loss,
  spin_flip_liouvillian,
  motion_diffusion,
  thermal_prep,
};

const char* to_string(ChannelFlavor flavor);

struct ChannelSpec {
  ChannelFlavor flavor = ChannelFlavor::flip_cb;
  std::optional<int> target;  // empty: drawn uniformly at random
  double rate = 0.0;          // Gamma
  double diffusion = 0.0;     // D
  double beta = 0.0;          // inverse temperature (hbar = 1)
  double omega_c = 0.0;       // storage-level frequency
  double delta_k = 1.0;       // wavevector mismatch; enters only through the phases

  void validate(int atoms) const;
  bool is_discrete_event() const;
};

template <typename State>
struct EventOutcome {
  State state;    // normalized
  double weight;  // Tr{K W K^dagger} (event probability weight)
};

int draw_target(int atoms, std::mt19937_64& rng);

/// K W K^dagger / Tr{...} for the discrete events in the exact spin engine.
EventOutcome<DensityOperator> apply_event(const DensityOperator& W, const ChannelSpec& spec);
EventOutcome<PureState> apply_event(const PureState& psi, const ChannelSpec& spec);
EventOutcome<DensityOperator> apply_event(const DensityOperator& W, ChannelSpec spec, std::mt19937_64& rng);

/// Bosonic-engine image of the event on a site-frame state: sigma_cb -> s_j^dagger,
/// sigma_bc -> s_j, X_j -> s_j + s_j^dagger, Z_j -> (-1)^{s_j^dagger s_j}.
EventOutcome<ModeState> apply_event(const ModeState& site_state, const ChannelSpec& spec);

/// The operator K of a discrete event applied to a pure state (unnormalized).
PureState apply_event_operator(const PureState& psi, ChannelFlavor flavor, int atom);

DensityOperator atom_loss(const DensityOperator& W, int atom);
DensityOperator atom_loss(const PureState& psi, int atom);

struct LiouvillianRun {
  DensityOperator final_state;
  std::vector<double> times;
  std::vector<DensityOperator> snapshots;  // includes t = 0 when recording
  double max_trace_drift = 0.0;            // per step
};

/// RK4 integration of dW/dt = sum_j L_j W with jump operator sigma_cb^j at rate Gamma.
LiouvillianRun spin_flip_liouvillian(const DensityOperator& W, double rate, double dt, int steps,
                                     int record_every = 0);

/// Exact integration of L rho = Gamma (Psi^dag rho Psi - 1/2 {Psi Psi^dag, rho}) on a
/// truncated single mode; throws CutoffExceeded if more than 1e-6 leaks past the top level.
CMatrix reduced_spin_flip_liouvillian(const CMatrix& rho, double rate, double t);

struct MotionConfig {
  int n = 1;
  int atoms = 16;
  double diffusion = 1.0;
  std::vector<double> times;
  int trajectories = 10000;
  std::optional<std::uint64_t> seed;
  bool reproducible = true;
  double dt = 0.0;   // 0: 0.01 / D
  int workers = 0;   // 0: hardware concurrency
};

struct MotionCurve {
  std::vector<double> times;
  std::vector<double> fidelity;
  std::vector<double> std_error;
  std::uint64_t seed = 0;
  int trajectories = 0;
  double dt = 0.0;
};

/// Trajectory-averaged storage fidelity under Wiener phase diffusion of every atom.
MotionCurve motion_sample_fidelity(const MotionConfig& config);

/// Fidelity of one phase configuration: the stored state is built with the
/// dephased creation operator, bright modes are traced out, and the result is
/// projected on the dark Fock state |n>.  `via_site_frame` routes through a full
/// many-body change of basis instead of transforming the mode vector.
double motion_fidelity_for_phases(int n, std::span<const double> phases, bool via_site_frame = false);

struct ThermalState {
  ModeBasisPtr basis;           // polariton frame
  RVector weights;              // diagonal of the density operator
  double dark_occupation = 0.0; // <Psi^dag Psi>
  double c_population = 0.0;    // (1/N) sum_j <sigma_cc^j>, from the site-frame one-body matrix
  double bose_einstein = 0.0;   // x / (1 - x), x = exp(-beta omega_c)
  double tail = 0.0;            // untruncated weight beyond the cutoff
  bool cutoff_warning = false;  // tail > 1e-4
};

ThermalState thermal_prepare(double beta, double omega_c, int atoms, int max_excitation);

}  // namespace qmem
