#include "qmem/channels.hpp"

#include <cmath>

#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

namespace qmem {

const char* to_string(ChannelFlavor flavor) {
  switch (flavor) {
    case ChannelFlavor::flip_cb: return "flip_cb";
    case ChannelFlavor::flip_bc: return "flip_bc";
    case ChannelFlavor::symmetric_flip: return "symmetric_flip";
    case ChannelFlavor::phase_flip: return "phase_flip";
    case ChannelFlavor::aux_flip_bd: return "aux_flip_bd";
    case ChannelFlavor::atom_loss: return "atom_loss";
    case ChannelFlavor::spin_flip_liouvillian: return "spin_flip_liouvillian";
    case ChannelFlavor::motion_diffusion: return "motion_diffusion";
    case ChannelFlavor::thermal_prep: return "thermal_prep";
  }
  return "?";
}

void ChannelSpec::validate(int atoms) const {
  if (rate < 0.0 || diffusion < 0.0) throw Error(ErrorKind::invalid_argument, "rates must be >= 0");
  if (target && (*target < 0 || *target >= atoms))
    throw Error(ErrorKind::invalid_argument, "target atom out of range");
}

bool ChannelSpec::is_discrete_event() const {
  switch (flavor) {
    case ChannelFlavor::flip_cb:
    case ChannelFlavor::flip_bc:
    case ChannelFlavor::symmetric_flip:
    case ChannelFlavor::phase_flip:
    case ChannelFlavor::aux_flip_bd: return true;
    default: return false;
  }
}

int draw_target(int atoms, std::mt19937_64& rng) {
  return std::uniform_int_distribution<int>(0, atoms - 1)(rng);
}

PureState apply_event_operator(const PureState& psi, ChannelFlavor flavor, int atom) {
  switch (flavor) {
    case ChannelFlavor::flip_cb: return apply_atomic_flip(psi, atom, Level::b, Level::c);
    case ChannelFlavor::flip_bc: return apply_atomic_flip(psi, atom, Level::c, Level::b);
    case ChannelFlavor::symmetric_flip: {
      PureState out = apply_atomic_flip(psi, atom, Level::b, Level::c);
      out.amplitudes += apply_atomic_flip(psi, atom, Level::c, Level::b).amplitudes;
      return out;
    }
    case ChannelFlavor::phase_flip: {
      // Exact diagonal unitary: +1 on b, -1 on c, identity on any other level.
      const int L = psi.basis->level_count();
      CMatrix z = CMatrix::Identity(L, L);
      z(psi.basis->slot(Level::c), psi.basis->slot(Level::c)) = -1.0;
      return apply_atomic_operator(psi, atom, z);
    }
    case ChannelFlavor::aux_flip_bd: return apply_atomic_flip(psi, atom, Level::b, Level::d);
    default: break;
  }
  throw Error(ErrorKind::invalid_argument, std::string("not a discrete event: ") + to_string(flavor));
}

namespace {

int resolve_target(const ChannelSpec& spec, int atoms) {
  if (!spec.is_discrete_event())
    throw Error(ErrorKind::invalid_argument, std::string("not a discrete event: ") + to_string(spec.flavor));
  spec.validate(atoms);
  if (!spec.target) throw Error(ErrorKind::invalid_argument, "event target not specified");
  return *spec.target;
}

}  // namespace

EventOutcome<PureState> apply_event(const PureState& psi, const ChannelSpec& spec) {
  const int atom = resolve_target(spec, psi.basis->atoms());
  PureState image = apply_event_operator(psi, spec.flavor, atom);
  const double weight = image.amplitudes.squaredNorm() / psi.amplitudes.squaredNorm();
  if (weight == 0.0) throw Error(ErrorKind::zero_probability, "event has zero probability on this state");
  return {image.normalized(), weight};
}

EventOutcome<DensityOperator> apply_event(const DensityOperator& W, const ChannelSpec& spec) {
  const int atom = resolve_target(spec, W.basis->atoms());
  const auto dim = W.matrix.rows();
  // K W K^dagger = K (K W^dagger)^dagger; W is hermitian but not assumed so.
  CMatrix KW(dim, dim);
  PureState column{W.basis, CVector(dim)};
  for (Eigen::Index c = 0; c < dim; ++c) {
    column.amplitudes = W.matrix.col(c);
    KW.col(c) = apply_event_operator(column, spec.flavor, atom).amplitudes;
  }
  const CMatrix KW_adj = KW.adjoint();
  CMatrix out(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    column.amplitudes = KW_adj.col(c);
    out.col(c) = apply_event_operator(column, spec.flavor, atom).amplitudes;
  }
  out = out.adjoint().eval();
  const double weight = out.trace().real() / W.matrix.trace().real();
  if (weight <= 0.0) throw Error(ErrorKind::zero_probability, "event has zero probability on this state");
  out /= out.trace().real();
  return {DensityOperator{W.basis, std::move(out)}, weight};
}

EventOutcome<DensityOperator> apply_event(const DensityOperator& W, ChannelSpec spec, std::mt19937_64& rng) {
  if (!spec.target) spec.target = draw_target(W.basis->atoms(), rng);
  return apply_event(W, spec);
}

EventOutcome<ModeState> apply_event(const ModeState& site_state, const ChannelSpec& spec) {
  const int atoms = site_state.basis->mode_count() - 1;
  const int atom = resolve_target(spec, atoms);
  const int mode = 1 + atom;
  ModeState image{site_state.basis, CVector()};
  switch (spec.flavor) {
    case ChannelFlavor::flip_cb: image = apply_ladder(site_state, mode, Ladder::create); break;
    case ChannelFlavor::flip_bc: image = apply_ladder(site_state, mode, Ladder::annihilate); break;
    case ChannelFlavor::symmetric_flip:
      image = apply_ladder(site_state, mode, Ladder::create);
      image.amplitudes += apply_ladder(site_state, mode, Ladder::annihilate).amplitudes;
      break;
    case ChannelFlavor::phase_flip: {
      image = site_state;
      for (std::size_t i = 0; i < site_state.basis->dimension(); ++i)
        if (site_state.basis->occupation(i, mode) % 2 == 1) image.amplitudes[static_cast<Eigen::Index>(i)] *= -1.0;
      break;
    }
    default:
      throw Error(ErrorKind::sector_mismatch, "auxiliary level exists only in the exact spin engine");
  }
  const double weight = image.amplitudes.squaredNorm() / site_state.amplitudes.squaredNorm();
  if (weight == 0.0) throw Error(ErrorKind::zero_probability, "event has zero probability on this state");
  return {image.normalized(), weight};
}

DensityOperator atom_loss(const DensityOperator& W, int atom) { return partial_trace_atom(W, atom); }
DensityOperator atom_loss(const PureState& psi, int atom) { return partial_trace_atom(psi, atom); }

LiouvillianRun spin_flip_liouvillian(const DensityOperator& W, double rate, double dt, int steps,
                                     int record_every) {
  if (W.basis->sector() != Sector::full_product)
    throw Error(ErrorKind::sector_mismatch, "spin-flip Liouvillian needs the full-product sector");
  if (rate < 0.0 || dt <= 0.0 || steps < 0) throw Error(ErrorKind::invalid_argument, "bad integration parameters");
  const int atoms = W.basis->atoms();
  // Fastest decay rate is N Gamma; keep RK4 well inside its stability region.
  if (rate * dt * atoms > 0.5) throw Error(ErrorKind::step_too_large, "N Gamma dt must not exceed 0.5");
  using Sparse = Eigen::SparseMatrix<Complex>;
  std::vector<Sparse> jumps;
  std::vector<Sparse> projectors;
  for (int j = 0; j < atoms; ++j) {
    Sparse K = build_operator(W.basis, [&](const PureState& s) {
      return apply_atomic_flip(s, j, Level::b, Level::c);
    });
    projectors.push_back(Sparse(K.adjoint() * K));
    jumps.push_back(std::move(K));
  }
  const auto generator = [&](const CMatrix& rho) {
    CMatrix out = CMatrix::Zero(rho.rows(), rho.cols());
    for (int j = 0; j < atoms; ++j) {
      out.noalias() -= 0.5 * rate * (projectors[j] * rho);
      out.noalias() -= 0.5 * rate * (rho * projectors[j]);
      const CMatrix kr = jumps[j] * rho;
      out.noalias() += rate * (kr * jumps[j].adjoint());
    }
    return out;
  };

  LiouvillianRun run{W, {}, {}, 0.0};
  CMatrix rho = W.matrix;
  if (record_every > 0) {
    run.times.push_back(0.0);
    run.snapshots.push_back(W);
  }
  for (int step = 1; step <= steps; ++step) {
    const Complex before = rho.trace();
    const CMatrix k1 = generator(rho);
    const CMatrix k2 = generator(rho + 0.5 * dt * k1);
    const CMatrix k3 = generator(rho + 0.5 * dt * k2);
    const CMatrix k4 = generator(rho + dt * k3);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double drift = std::abs(rho.trace() - before);
    run.max_trace_drift = std::max(run.max_trace_drift, drift);
    if (drift > 1e-9) throw Error(ErrorKind::step_too_large, "trace drift exceeds 1e-9 in one step");
    if (record_every > 0 && step % record_every == 0) {
      run.times.push_back(step * dt);
      run.snapshots.push_back({W.basis, rho});
    }
  }
  run.final_state = {W.basis, std::move(rho)};
  return run;
}

CMatrix reduced_spin_flip_liouvillian(const CMatrix& rho, double rate, double t) {
  const auto d = rho.rows();
  if (rho.cols() != d) throw Error(ErrorKind::dimension_mismatch, "rho must be square");
  if (rate < 0.0 || t < 0.0) throw Error(ErrorKind::invalid_argument, "rate and time must be >= 0");
  // The generator maps rho(r, c) only into rho(r + 1, c + 1), so every diagonal
  // offset evolves independently under a bidiagonal matrix.
  // Psi^dag |n> = sqrt(n+1) |n+1>, Psi Psi^dag |n> = (n+1)|n>.
  CMatrix out = CMatrix::Zero(d, d);
  for (Eigen::Index k = -(d - 1); k < d; ++k) {
    const Eigen::Index r0 = k < 0 ? -k : 0;
    const Eigen::Index c0 = k < 0 ? 0 : k;
    const Eigen::Index len = d - std::abs(k);
    CMatrix gen = CMatrix::Zero(len, len);
    CVector x(len);
    for (Eigen::Index i = 0; i < len; ++i) {
      const double r = static_cast<double>(r0 + i);
      const double c = static_cast<double>(c0 + i);
      gen(i, i) = -0.5 * rate * ((r + 1) + (c + 1));
      if (i + 1 < len) gen(i + 1, i) = rate * std::sqrt((r + 1) * (c + 1));
      x[i] = rho(r0 + i, c0 + i);
    }
    const CVector y = (gen * t).exp() * x;
    for (Eigen::Index i = 0; i < len; ++i) out(r0 + i, c0 + i) = y[i];
  }
  const double leak = rho.trace().real() - out.trace().real();
  if (leak > 1e-6) throw Error(ErrorKind::cutoff_exceeded, "population leaked past the excitation cutoff");
  return out;
}

ThermalState thermal_prepare(double beta, double omega_c, int atoms, int max_excitation) {
  const double exponent = beta * omega_c;
  if (!(exponent > 0.0)) throw Error(ErrorKind::invalid_argument, "beta * omega_c must be > 0");
  const double x = std::isinf(exponent) ? 0.0 : std::exp(-exponent);
  ThermalState state;
  state.basis = build_mode_basis(atoms + 1, max_excitation);
  const ModeBasis& basis = *state.basis;
  state.weights = RVector::Zero(static_cast<Eigen::Index>(basis.dimension()));
  // Boltzmann weight x^(number of Psi and Phi_{l>=1} quanta); Phi_0 (the cavity at pi/2) stays empty.
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    if (basis.occupation(i, 1) != 0) continue;
    const int e = basis.total(i);
    state.weights[static_cast<Eigen::Index>(i)] = e == 0 ? 1.0 : std::pow(x, e);
  }
  state.weights /= state.weights.sum();

  CMatrix G = CMatrix::Zero(atoms + 1, atoms + 1);
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double w = state.weights[static_cast<Eigen::Index>(i)];
    if (w == 0.0) continue;
    for (auto m : basis.quanta(i)) G(m, m) += w;
  }
  state.dark_occupation = G(0, 0).real();
  const ModeTransform T = polariton_transform(kHalfPi, atoms);
  // <a_q^dag a_q'> = (T^T G conj(T))_{qq'}
  const CMatrix site = T.matrix.transpose() * G * T.matrix.conjugate();
  double c_sum = 0.0;
  for (int j = 0; j < atoms; ++j) c_sum += site(1 + j, 1 + j).real();
  state.c_population = c_sum / atoms;

  state.bose_einstein = x / (1.0 - x);
  double kept = 0.0;
  for (int e = 0; e <= max_excitation; ++e)
    kept += binomial(e + atoms - 1, atoms - 1) * std::pow(x, e) * std::pow(1.0 - x, atoms);
  state.tail = std::max(0.0, 1.0 - kept);
  state.cutoff_warning = state.tail > 1e-4;
  return state;
}

}  // namespace qmem
