#pragma once

// Dark- and bright-polariton constructors and meters for both engines.

#include <optional>

#include "qmem/bosonic.hpp"
#include "qmem/statespace.hpp"

namespace qmem {

/// Mixing angle with optional couplings; tan(theta) = g sqrt(N) / Omega.
struct PolaritonFrame {
  double theta = kHalfPi;
  int atoms = 1;
  std::optional<double> g;
  std::optional<double> omega;

  static PolaritonFrame storage(int atoms) { return {kHalfPi, atoms, {}, {}}; }
  static PolaritonFrame at(double theta, int atoms);
  static PolaritonFrame from_couplings(double g, double omega, int atoms);

  double cos() const { return mixing_cos(theta); }
  double sin() const { return mixing_sin(theta); }
  /// |tan(theta) - g sqrt(N)/Omega| when both couplings are set, else 0.
  double coupling_defect() const;
};

struct DarkStateSpec {
  int n = 0;
  int atoms = 1;

  /// sqrt(n! / (k! (n-k)!))
  double xi(int k) const;
  /// sum_k xi^2 sin^2k cos^2(n-k); identically 1.
  double normalization(double theta) const;
};

/// |D,n>_N in the exact spin engine (either sector; levels must contain b and c):
/// normalized (Psi^dag)^n |vac>, i.e. xi_k with Dicke factors.
PureState dark_state(const BasisPtr& basis, const DarkStateSpec& spec, const PolaritonFrame& frame);

/// (Psi^dagger)^n / sqrt(n!) |vac> in the site frame of the bosonic engine.
ModeState dark_state(const ModeBasisPtr& basis, const DarkStateSpec& spec, const PolaritonFrame& frame);

PureState apply_dark(const PureState& state, Ladder which, const PolaritonFrame& frame);
ModeState apply_dark(const ModeState& site_state, Ladder which, const PolaritonFrame& frame);

/// Bright polariton Phi_l, l = 0..N-1.  l >= 1 requires the full-product sector.
PureState apply_bright(const PureState& state, int l, Ladder which, const PolaritonFrame& frame);
ModeState apply_bright(const ModeState& site_state, int l, Ladder which, const PolaritonFrame& frame);

enum class CommutatorPair { dark_dark, bright0_bright0, bright_bright, bright_dark };

/// <[A, B]> - ideal value, normalized by <psi|psi>.  For bright_bright the pair
/// is (Phi_l, Phi_m^dagger); for bright_dark it is (Phi_l, Psi^dagger).
Complex commutator_defect(const PureState& state, CommutatorPair pair, const PolaritonFrame& frame,
                          int l = 1, int m = 1);

/// Max amplitude deviation between sigma_cb^j|psi> and
/// N^{-1/2} (sum_l eta_jl Phi_l^dagger - Psi^dagger)|psi> at theta = pi/2.
double verify_sigma_identity(const PureState& state, int atom);

struct FactorizationReport {
  PureState product_form;      // prod_j (1 - alpha sigma_cb^j / sqrt N) |b>
  PureState exponential_form;  // exp(-alpha/sqrt N sum_j sigma_cb^j) |b>
  double deviation = 0.0;      // max |product - exponential|
  double overlap = 0.0;        // |<dark coherent|product>|^2, both normalized
};

FactorizationReport coherent_storage_factorization(Complex alpha, int atoms);

}  // namespace qmem
