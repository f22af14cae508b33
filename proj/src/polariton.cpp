#include "qmem/polariton.hpp"

#include <cmath>

namespace qmem {

PolaritonFrame PolaritonFrame::at(double theta, int atoms) {
  if (theta < 0.0 || theta > kHalfPi)
    throw Error(ErrorKind::invalid_argument, "mixing angle must lie in [0, pi/2]");
  return {theta, atoms, {}, {}};
}

PolaritonFrame PolaritonFrame::from_couplings(double g, double omega, int atoms) {
  if (g < 0.0 || omega < 0.0) throw Error(ErrorKind::invalid_argument, "couplings must be >= 0");
  const double collective = g * std::sqrt(static_cast<double>(atoms));
  const double theta = omega == 0.0 ? kHalfPi : std::atan2(collective, omega);
  return {theta, atoms, g, omega};
}

double PolaritonFrame::coupling_defect() const {
  if (!g || !omega) return 0.0;
  const double collective = *g * std::sqrt(static_cast<double>(atoms));
  if (*omega == 0.0) return theta == kHalfPi ? 0.0 : INFINITY;
  return std::abs(std::tan(theta) - collective / *omega);
}

double DarkStateSpec::xi(int k) const { return std::sqrt(binomial(n, k)); }

double DarkStateSpec::normalization(double theta) const {
  const double s = mixing_sin(theta);
  const double c = mixing_cos(theta);
  double total = 0.0;
  for (int k = 0; k <= n; ++k) total += binomial(n, k) * std::pow(s, 2 * k) * std::pow(c, 2 * (n - k));
  return total;
}

namespace {

void check_frame(int atoms, const PolaritonFrame& frame) {
  if (frame.atoms != atoms)
    throw Error(ErrorKind::dimension_mismatch, "frame atom count does not match the state");
}

double inv_sqrt(int atoms) { return 1.0 / std::sqrt(static_cast<double>(atoms)); }

}  // namespace

PureState dark_state(const BasisPtr& basis, const DarkStateSpec& spec, const PolaritonFrame& frame) {
  check_frame(basis->atoms(), frame);
  if (spec.atoms != basis->atoms())
    throw Error(ErrorKind::dimension_mismatch, "dark-state spec atom count does not match basis");
  if (spec.n < 0) throw Error(ErrorKind::invalid_argument, "negative excitation number");
  if (!basis->has(Level::c)) throw Error(ErrorKind::invalid_argument, "basis lacks level c");
  const int slot_c = basis->slot(Level::c);
  const double s = frame.sin();
  const double c = frame.cos();

  BasisSpec sym_spec = basis->spec();
  sym_spec.sector = Sector::symmetric;
  const BasisPtr sym = basis->sector() == Sector::symmetric ? basis : build_basis(sym_spec);
  PureState out = zero_state(sym);
  const int N = basis->atoms();
  // xi_k times sqrt(N! / ((N-k)! N^k)): the Dicke factor of (Psi^dag)^n |vac>, which
  // makes the state exactly dark at finite N.  It tends to 1 for N -> infinity.
  double dicke = 1.0;
  for (int k = 0; k <= spec.n; ++k) {
    if (k > 0) dicke *= std::sqrt(std::max(0.0, double(N - k + 1)) / N);
    const double coeff = spec.xi(k) * std::pow(-s, k) * std::pow(c, spec.n - k) * dicke;
    if (coeff == 0.0) continue;
    if (spec.n - k > basis->n_max())
      throw Error(ErrorKind::excitation_overflow, "dark state needs photons beyond the cavity cutoff");
    Configuration config;
    config.atoms.assign(basis->level_count(), 0);
    config.atoms[0] = basis->atoms() - k;
    config.atoms[slot_c] = k;
    config.photons = spec.n - k;
    out.amplitudes[static_cast<Eigen::Index>(sym->index(config))] = coeff;
  }
  const double norm = out.amplitudes.norm();
  if (norm == 0.0) throw Error(ErrorKind::excitation_overflow, "more spin excitations than atoms");
  out.amplitudes /= norm;
  if (basis->sector() == Sector::symmetric) return out;
  PureState full = embed_symmetric(out);
  full.basis = basis;
  return full;
}

ModeState dark_state(const ModeBasisPtr& basis, const DarkStateSpec& spec, const PolaritonFrame& frame) {
  if (basis->mode_count() != frame.atoms + 1)
    throw Error(ErrorKind::dimension_mismatch, "mode basis must have N + 1 modes");
  if (spec.n > basis->max_excitation())
    throw Error(ErrorKind::excitation_overflow, "dark excitation exceeds the mode cutoff");
  const ModeTransform T = polariton_transform(frame.theta, frame.atoms);
  return fock_in_mode(basis, T.creation_in_site(0), spec.n);
}

namespace {

PureState cavity_or_throw(const PureState& state, Ladder which) {
  auto result = apply_cavity(state, which);
  if (result.truncated)
    throw Error(ErrorKind::cutoff_exceeded, "cavity creation pushed amplitude past n_max");
  return std::move(result.state);
}

// c_cav * a^(dag) + c_spin / sqrt(N) * sum_j sigma_{bc or cb}^j
PureState symmetric_mode(const PureState& state, Ladder which, double c_cav, double c_spin) {
  PureState out = zero_state(state.basis);
  if (c_cav != 0.0) out.amplitudes += c_cav * cavity_or_throw(state, which).amplitudes;
  if (c_spin != 0.0) {
    const PureState spin = which == Ladder::annihilate
                               ? apply_collective_flip(state, Level::c, Level::b)
                               : apply_collective_flip(state, Level::b, Level::c);
    out.amplitudes += c_spin * inv_sqrt(state.basis->atoms()) * spin.amplitudes;
  }
  return out;
}

ModeState polariton_ladder(const ModeState& site_state, int polariton, Ladder which,
                           const PolaritonFrame& frame) {
  if (site_state.basis->mode_count() != frame.atoms + 1)
    throw Error(ErrorKind::dimension_mismatch, "mode basis must have N + 1 modes");
  const ModeTransform T = polariton_transform(frame.theta, frame.atoms);
  const auto coeffs =
      which == Ladder::create ? T.creation_in_site(polariton) : T.annihilation_in_site(polariton);
  return apply_linear(site_state, coeffs, which);
}

}  // namespace

PureState apply_dark(const PureState& state, Ladder which, const PolaritonFrame& frame) {
  check_frame(state.basis->atoms(), frame);
  return symmetric_mode(state, which, frame.cos(), -frame.sin());
}

ModeState apply_dark(const ModeState& site_state, Ladder which, const PolaritonFrame& frame) {
  return polariton_ladder(site_state, 0, which, frame);
}

PureState apply_bright(const PureState& state, int l, Ladder which, const PolaritonFrame& frame) {
  const int atoms = state.basis->atoms();
  check_frame(atoms, frame);
  if (l < 0 || l >= atoms) throw Error(ErrorKind::invalid_argument, "bright mode index out of range");
  if (l == 0) return symmetric_mode(state, which, frame.sin(), frame.cos());
  if (state.basis->sector() != Sector::full_product)
    throw Error(ErrorKind::sector_mismatch, "Phi_l with l >= 1 breaks permutation symmetry");
  PureState out = zero_state(state.basis);
  for (int j = 0; j < atoms; ++j) {
    const Complex phase = fourier_phase(l, j + 1, atoms);
    if (which == Ladder::annihilate)
      out.amplitudes += phase * apply_atomic_flip(state, j, Level::c, Level::b).amplitudes;
    else
      out.amplitudes += std::conj(phase) * apply_atomic_flip(state, j, Level::b, Level::c).amplitudes;
  }
  out.amplitudes *= inv_sqrt(atoms);
  return out;
}

ModeState apply_bright(const ModeState& site_state, int l, Ladder which, const PolaritonFrame& frame) {
  if (l < 0 || l >= frame.atoms) throw Error(ErrorKind::invalid_argument, "bright mode index out of range");
  return polariton_ladder(site_state, 1 + l, which, frame);
}

Complex commutator_defect(const PureState& state, CommutatorPair pair, const PolaritonFrame& frame,
                          int l, int m) {
  const auto A = [&](const PureState& s) {
    switch (pair) {
      case CommutatorPair::dark_dark: return apply_dark(s, Ladder::annihilate, frame);
      case CommutatorPair::bright0_bright0: return apply_bright(s, 0, Ladder::annihilate, frame);
      default: return apply_bright(s, l, Ladder::annihilate, frame);
    }
  };
  const auto B = [&](const PureState& s) {
    switch (pair) {
      case CommutatorPair::dark_dark: return apply_dark(s, Ladder::create, frame);
      case CommutatorPair::bright0_bright0: return apply_bright(s, 0, Ladder::create, frame);
      case CommutatorPair::bright_bright: return apply_bright(s, m, Ladder::create, frame);
      case CommutatorPair::bright_dark: return apply_dark(s, Ladder::create, frame);
    }
    return s;
  };
  double ideal = 0.0;
  if (pair == CommutatorPair::dark_dark || pair == CommutatorPair::bright0_bright0) ideal = 1.0;
  if (pair == CommutatorPair::bright_bright && l == m) ideal = 1.0;

  const double norm2 = state.amplitudes.squaredNorm();
  if (norm2 == 0.0) throw Error(ErrorKind::zero_probability, "zero state");
  const Complex ab = state.amplitudes.dot(A(B(state)).amplitudes);
  const Complex ba = state.amplitudes.dot(B(A(state)).amplitudes);
  return (ab - ba) / norm2 - ideal;
}

double verify_sigma_identity(const PureState& state, int atom) {
  const int atoms = state.basis->atoms();
  const auto frame = PolaritonFrame::storage(atoms);
  const PureState lhs = apply_atomic_flip(state, atom, Level::b, Level::c);
  CVector rhs = -apply_dark(state, Ladder::create, frame).amplitudes;
  for (int l = 1; l < atoms; ++l)
    rhs += fourier_phase(l, atom + 1, atoms) * apply_bright(state, l, Ladder::create, frame).amplitudes;
  rhs *= inv_sqrt(atoms);
  return (lhs.amplitudes - rhs).cwiseAbs().maxCoeff();
}

FactorizationReport coherent_storage_factorization(Complex alpha, int atoms) {
  const BasisPtr basis = build_basis({atoms, {Level::b, Level::c}, 0, Sector::full_product});
  const Complex scale = alpha * inv_sqrt(atoms);
  const PureState vac = ground_state(basis);

  PureState product = vac;
  for (int j = 0; j < atoms; ++j)
    product.amplitudes -= scale * apply_atomic_flip(product, j, Level::b, Level::c).amplitudes;

  // exp(X)|b> with X = -scale * sum_j sigma_cb^j; the series stops after N + 1 terms.
  PureState term = vac;
  PureState expo = vac;
  for (int k = 1; k <= atoms; ++k) {
    term.amplitudes = (-scale / static_cast<double>(k)) *
                      apply_collective_flip(term, Level::b, Level::c).amplitudes;
    expo.amplitudes += term.amplitudes;
  }

  // Dark coherent state at theta = pi/2, truncated at n = N.
  const BasisPtr sym = build_basis({atoms, {Level::b, Level::c}, 0, Sector::symmetric});
  const auto frame = PolaritonFrame::storage(atoms);
  PureState coherent = zero_state(sym);
  Complex power{1.0, 0.0};
  for (int n = 0; n <= atoms; ++n) {
    if (n > 0) power *= alpha / std::sqrt(static_cast<double>(n));
    coherent.amplitudes += power * dark_state(sym, {n, atoms}, frame).amplitudes;
  }
  const PureState coherent_full = embed_symmetric(coherent.normalized());

  FactorizationReport report{product, expo, 0.0, 0.0};
  report.deviation = (product.amplitudes - expo.amplitudes).cwiseAbs().maxCoeff();
  report.overlap = std::norm(coherent_full.amplitudes.dot(product.normalized().amplitudes));
  return report;
}

}  // namespace qmem
