#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qmem/bosonic.hpp"
#include "qmem/statespace.hpp"

namespace qmem {

enum class Engine { exact, bosonic };
const char* to_string(Engine engine);

/// Stored dark-mode state: Fock |n>, coherent |alpha>, or an explicit superposition of |n>.
struct StateSpec {
  enum class Kind { fock, coherent, superposition };
  Kind kind = Kind::fock;
  int n = 1;
  Complex alpha{0.0, 0.0};
  std::vector<Complex> amplitudes;  // superposition: amplitude of |n> at index n
  int cutoff = -1;                  // coherent truncation; -1 picks one from |alpha|

  static StateSpec fock(int n) { return {Kind::fock, n, {}, {}, -1}; }
  static StateSpec coherent(Complex alpha, int cutoff = -1) { return {Kind::coherent, 0, alpha, {}, cutoff}; }
  static StateSpec superposition(std::vector<Complex> amplitudes) {
    return {Kind::superposition, 0, {}, std::move(amplitudes), -1};
  }

  /// Normalized dark-mode amplitudes c_n, n = 0..max_n().
  CVector dark_amplitudes() const;
  int max_n() const;
  double mean_number() const;
  std::string label() const;
};

double fidelity(const DensityOperator& rho, const PureState& psi0);
double fidelity(const CMatrix& rho, const CVector& psi0);

/// Photon-number density matrix obtained by adiabatically retrieving an atoms-only
/// {b,c} state: the spin-(N/2 - q) component with k + q excitations yields k photons,
/// leaving a lowest-weight spin state that is traced out.
CMatrix exact_photon_density(const PureState& atoms_state);
/// Mixed-state version, (N+1) x (N+1).
CMatrix exact_photon_density(const DensityOperator& W);

struct FidelityRecord {
  std::string scenario;
  int atoms = 0;
  std::string state;
  double computed = 0.0;
  double reference = 0.0;
  std::string engine;
  std::string tolerance_class;
};

struct ReferenceValue {
  double paper = 0.0;     // closed form as printed
  double derived = 0.0;   // derivation-consistent value (equal to `paper` unless contested)
  bool contested = false;
  std::string paper_expression;
  std::string derived_expression;
  std::string order;      // stated remainder
};

/// Registered scenarios: flip_cb, symmetric_flip, phase_flip, loss, motion.
/// `diffusion_time` is D t (motion only).
ReferenceValue reference_formula(const std::string& scenario, int atoms, const StateSpec& state,
                                 double diffusion_time = 0.0);
std::vector<std::string> registered_scenarios();

struct EventOptions {
  double diffusion_time = 0.5;   // motion: D t
  int trajectories = 10000;      // motion
  std::optional<std::uint64_t> seed;
  int workers = 0;
};

struct EventFidelity {
  double fidelity = 0.0;
  double std_error = 0.0;   // Monte Carlo only
  Engine engine = Engine::exact;
};

/// Fidelity after one event of the scenario on the stored state.
EventFidelity single_event_fidelity(const std::string& scenario, int atoms, const StateSpec& state, Engine engine,
                                    const EventOptions& options = {});

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_error = 0.0;
  double intercept_error = 0.0;
  double residual_norm = 0.0;
  int points = 0;
  bool weighted = false;
  std::vector<std::string> notes;
};

/// Least squares of log y = s log x + c.  With errors, weights are (y / sigma)^2;
/// without, the slope error comes from the residual variance.  y <= 0 is excluded.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y,
                     const std::vector<double>& sigma = {});

struct SweepResult {
  std::string scenario;
  std::string state;
  Engine engine = Engine::exact;
  std::vector<int> atoms;
  std::vector<double> fidelity;
  std::vector<double> infidelity;
  std::vector<double> std_error;
  std::vector<double> reference;
  LogLogFit fit;
};

SweepResult scaling_sweep(const std::string& scenario, const StateSpec& state, std::vector<int> atoms, Engine engine,
                          const EventOptions& options = {});

enum class Classification { match, typo_candidate, open };
const char* to_string(Classification c);

struct LedgerEntry {
  std::string scenario;
  std::string paper_formula;
  std::string oracle_formula;
  double paper_value = 0.0;
  double oracle_value = 0.0;
  double gap = 0.0;
  Classification classification = Classification::match;
  std::string note;
};

std::vector<LedgerEntry> discrepancy_ledger(std::uint64_t seed = 7);

}  // namespace qmem
