#include "qmem/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

namespace qmem {

using SparseC = Eigen::SparseMatrix<Complex>;

void HamiltonianParams::validate() const {
  if (g <= 0.0) throw Error(ErrorKind::config_invalid, "g must be > 0");
  if (gamma < 0.0) throw Error(ErrorKind::config_invalid, "gamma must be >= 0");
  const double scale = 1e-12 * std::max({1.0, std::abs(omega), std::abs(omega_a), std::abs(omega_c), std::abs(nu)});
  if (std::abs(omega - omega_a) > scale) throw Error(ErrorKind::config_invalid, "one-photon resonance required");
  if (std::abs(omega - omega_c - nu) > scale) throw Error(ErrorKind::config_invalid, "two-photon resonance required");
}

const char* to_string(SweepProfile profile) {
  switch (profile) {
    case SweepProfile::linear: return "linear";
    case SweepProfile::cosine: return "cosine";
    case SweepProfile::tanh: return "tanh";
    case SweepProfile::hold: return "hold";
  }
  return "?";
}

SweepSchedule SweepSchedule::hold(double theta, double duration) {
  SweepSchedule s;
  s.profile = SweepProfile::hold;
  s.theta_hold = theta;
  s.duration = duration;
  return s;
}

void SweepSchedule::validate() const {
  if (!(duration > 0.0)) throw Error(ErrorKind::config_invalid, "sweep duration must be > 0");
  if (profile == SweepProfile::hold) {
    if (theta_hold < 0.0 || theta_hold > kHalfPi) throw Error(ErrorKind::config_invalid, "hold angle outside [0, pi/2]");
  } else if (!(theta_min > 0.0) || theta_min >= kHalfPi) {
    throw Error(ErrorKind::config_invalid, "theta_min must lie in (0, pi/2)");
  }
}

namespace {

constexpr double kTanhSteepness = 8.0;

// Progress p(s) in [0, 1] and dp/ds.
std::pair<double, double> progress(SweepProfile profile, double s) {
  switch (profile) {
    case SweepProfile::linear: return {s, 1.0};
    case SweepProfile::cosine: return {0.5 * (1.0 - std::cos(kPi * s)), 0.5 * kPi * std::sin(kPi * s)};
    case SweepProfile::tanh: {
      const double norm = std::tanh(0.5 * kTanhSteepness);
      const double x = std::tanh(kTanhSteepness * (s - 0.5));
      return {0.5 * (x / norm + 1.0), 0.5 * kTanhSteepness * (1.0 - x * x) / norm};
    }
    case SweepProfile::hold: break;
  }
  return {0.0, 0.0};
}

}  // namespace

double SweepSchedule::theta(double t) const {
  if (profile == SweepProfile::hold) return theta_hold;
  const double s = std::clamp(t / duration, 0.0, 1.0);
  double p = progress(profile, s).first;
  if (direction == SweepDirection::retrieve) p = 1.0 - p;
  if (p >= 1.0) return kHalfPi;
  if (p <= 0.0) return theta_min;
  return theta_min + (kHalfPi - theta_min) * p;
}

double SweepSchedule::theta_dot(double t) const {
  if (profile == SweepProfile::hold || t < 0.0 || t > duration) return 0.0;
  const double dp = progress(profile, t / duration).second / duration;
  const double rate = (kHalfPi - theta_min) * dp;
  return direction == SweepDirection::store ? rate : -rate;
}

double SweepSchedule::control(double t, double g, int atoms) const {
  const double th = theta(t);
  return g * std::sqrt(static_cast<double>(atoms)) * mixing_cos(th) / mixing_sin(th);
}

double SweepSchedule::adiabaticity(double g, int atoms) const {
  return g * std::sqrt(static_cast<double>(atoms)) * duration;
}

namespace {

struct Operators {
  SparseC coupling;  // g sum_j (a sigma_ab + h.c.) - i gamma sum_j sigma_aa
  SparseC control;   // sum_j (sigma_ac + sigma_ca)
  SparseC excited;   // sum_j sigma_aa
};

Operators build_operators(const BasisPtr& basis, const HamiltonianParams& params) {
  if (!basis->has(Level::a) || !basis->has(Level::b) || !basis->has(Level::c))
    throw Error(ErrorKind::invalid_argument, "evolution needs levels b, c and a");
  const auto drop = [](const PureState& s, Ladder which) { return apply_cavity(s, which).state; };
  Operators ops;
  ops.coupling = build_operator(basis, [&](const PureState& s) {
    PureState absorb = apply_collective_flip(drop(s, Ladder::annihilate), Level::b, Level::a);
    PureState emit = drop(apply_collective_flip(s, Level::a, Level::b), Ladder::create);
    absorb.amplitudes = params.g * (absorb.amplitudes + emit.amplitudes);
    return absorb;
  });
  ops.control = build_operator(basis, [&](const PureState& s) {
    PureState out = apply_collective_flip(s, Level::c, Level::a);
    out.amplitudes += apply_collective_flip(s, Level::a, Level::c).amplitudes;
    return out;
  });
  ops.excited = build_operator(basis, [&](const PureState& s) {
    const int a = basis->slot(Level::a);
    PureState out = s;
    for (std::size_t i = 0; i < basis->dimension(); ++i) {
      int count = 0;
      if (basis->sector() == Sector::symmetric) {
        count = basis->symmetric_count(i, a);
      } else {
        for (int j = 0; j < basis->atoms(); ++j) count += basis->atom_slot(i, j) == a ? 1 : 0;
      }
      out.amplitudes[static_cast<Eigen::Index>(i)] *= static_cast<double>(count);
    }
    return out;
  });
  if (params.gamma > 0.0) ops.coupling -= Complex(0.0, params.gamma) * ops.excited;
  return ops;
}

double fastest_rate(const BasisPtr& basis, const HamiltonianParams& params, const std::vector<SweepSchedule>& segments) {
  const int atoms = basis->atoms();
  double rate = params.g * std::sqrt(static_cast<double>(atoms) * (basis->n_max() + 1));
  rate = std::max(rate, params.gamma);
  for (const auto& seg : segments) {
    rate = std::max(rate, seg.control(0.0, params.g, atoms));
    rate = std::max(rate, seg.control(seg.duration, params.g, atoms));
    if (seg.profile != SweepProfile::hold) {
      SweepSchedule floor = seg;
      floor.profile = SweepProfile::hold;
      floor.theta_hold = seg.theta_min;
      rate = std::max(rate, floor.control(0.0, params.g, atoms));
    }
  }
  return rate;
}

struct Run {
  CVector psi;
  std::vector<double> times;
  std::vector<double> excited;
};

Run integrate(const CVector& initial, const Operators& ops, const HamiltonianParams& params,
              const std::vector<SweepSchedule>& segments, int atoms, double dt_target, int record_every) {
  Run run{initial, {}, {}};
  const auto excited_pop = [&](const CVector& v) { return std::real(v.dot(ops.excited * v)); };
  const Complex minus_i{0.0, -1.0};
  double elapsed = 0.0;
  long step_count = 0;
  if (record_every > 0) {
    run.times.push_back(0.0);
    run.excited.push_back(excited_pop(run.psi));
  }
  for (const auto& seg : segments) {
    const auto steps = static_cast<long>(std::ceil(seg.duration / dt_target - 1e-9));
    const double dt = seg.duration / static_cast<double>(steps);
    const auto deriv = [&](double t, const CVector& v) -> CVector {
      const double omega = seg.control(t, params.g, atoms);
      CVector out = ops.coupling * v;
      if (omega != 0.0) out += omega * (ops.control * v);
      return minus_i * out;
    };
    for (long k = 0; k < steps; ++k) {
      const double t = k * dt;
      const double before = run.psi.squaredNorm();
      const CVector k1 = deriv(t, run.psi);
      const CVector k2 = deriv(t + 0.5 * dt, run.psi + 0.5 * dt * k1);
      const CVector k3 = deriv(t + 0.5 * dt, run.psi + 0.5 * dt * k2);
      const CVector k4 = deriv(t + dt, run.psi + dt * k3);
      run.psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      // Spontaneous loss can remove at most 2 gamma dt of the norm per step; anything
      // beyond that, or any growth, is integrator error.
      const double change = run.psi.squaredNorm() - before;
      if (change > 1e-3 || -change > 2.0 * params.gamma * dt * before + 1e-3)
        throw Error(ErrorKind::step_too_large, "norm jump beyond 1e-3 in one step");
      ++step_count;
      if (record_every > 0 && step_count % record_every == 0) {
        run.times.push_back(elapsed + t + dt);
        run.excited.push_back(excited_pop(run.psi));
      }
    }
    elapsed += seg.duration;
  }
  return run;
}

}  // namespace

Trajectory evolve_sequence(const PureState& initial, const HamiltonianParams& params,
                           const std::vector<SweepSchedule>& segments, const EvolveOptions& options) {
  params.validate();
  if (segments.empty()) throw Error(ErrorKind::config_invalid, "no sweep segments");
  for (const auto& seg : segments) seg.validate();
  const BasisPtr& basis = initial.basis;
  const int atoms = basis->atoms();
  const Operators ops = build_operators(basis, params);

  const double period = 2.0 * kPi / fastest_rate(basis, params, segments);
  double dt = options.dt;
  if (dt <= 0.0) {
    dt = period / std::max(20, options.steps_per_period);
  } else if (dt > period / 20.0) {
    throw Error(ErrorKind::step_too_large, "dt must resolve the fastest frequency by at least 20 steps");
  }

  Trajectory out;
  Run coarse = integrate(initial.amplitudes, ops, params, segments, atoms, dt, options.record_every);
  out.halving_error = INFINITY;
  for (int h = 0; h < options.max_halvings; ++h) {
    Run fine = integrate(initial.amplitudes, ops, params, segments, atoms, 0.5 * dt,
                         options.record_every > 0 ? 2 * options.record_every : 0);
    out.halving_error = (fine.psi - coarse.psi).norm();
    coarse = std::move(fine);
    dt *= 0.5;
    if (out.halving_error <= options.halving_tolerance) break;
  }
  out.converged = out.halving_error <= options.halving_tolerance;
  out.final_state = {basis, std::move(coarse.psi)};
  out.norm = out.final_state.amplitudes.squaredNorm();
  out.dt = dt;
  double total = 0.0;
  for (const auto& seg : segments) total += seg.duration;
  out.adiabaticity = params.g * std::sqrt(static_cast<double>(atoms)) * total;
  out.times = std::move(coarse.times);
  out.excited_population = std::move(coarse.excited);
  return out;
}

Trajectory evolve_full(const PureState& initial, const HamiltonianParams& params, const SweepSchedule& schedule,
                       const EvolveOptions& options) {
  return evolve_sequence(initial, params, {schedule}, options);
}

Readout readout_reduce(const PureState& stored, const HamiltonianParams& params,
                       const std::vector<SweepSchedule>& segments, const EvolveOptions& options) {
  Readout out;
  out.trajectory = evolve_sequence(stored, params, segments, options);
  out.field = cavity_reduced(out.trajectory.final_state);
  out.retained = out.field.trace().real();
  return out;
}

Readout readout_reduce(const DensityOperator& stored, const HamiltonianParams& params,
                       const std::vector<SweepSchedule>& segments, const EvolveOptions& options) {
  Eigen::SelfAdjointEigenSolver<CMatrix> eig(0.5 * (stored.matrix + stored.matrix.adjoint()));
  const auto photon_states = static_cast<Eigen::Index>(stored.basis->n_max() + 1);
  Readout out;
  out.field = CMatrix::Zero(photon_states, photon_states);
  for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k) {
    const double w = eig.eigenvalues()[k];
    if (w <= 1e-14) continue;
    Readout part = readout_reduce(PureState{stored.basis, eig.eigenvectors().col(k)}, params, segments, options);
    out.field += w * part.field;
    out.trajectory = std::move(part.trajectory);
  }
  out.retained = out.field.trace().real();
  return out;
}

namespace {

CVector interaction_image(const PureState& state, const HamiltonianParams& params, const PolaritonFrame& frame) {
  const Operators ops = build_operators(state.basis, params);
  const double omega = params.g * std::sqrt(static_cast<double>(frame.atoms)) * frame.cos() / frame.sin();
  return ops.coupling * state.amplitudes + omega * (ops.control * state.amplitudes);
}

}  // namespace

Complex dark_energy(const PureState& dark, const HamiltonianParams& params, const PolaritonFrame& frame) {
  return dark.amplitudes.dot(interaction_image(dark, params, frame));
}

double dark_residual(const PureState& dark, const HamiltonianParams& params, const PolaritonFrame& frame) {
  return interaction_image(dark, params, frame).norm();
}

FrameRun evolve_polariton_frame(const ModeState& polariton_state, const SweepSchedule& schedule, double gamma,
                                double g, int atoms, double dt, int record_every) {
  schedule.validate();
  if (!(gamma > 0.0)) throw Error(ErrorKind::invalid_argument, "optical pumping needs gamma > 0");
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dt must be > 0");
  const ModeBasis& basis = *polariton_state.basis;
  if (basis.mode_count() != atoms + 1) throw Error(ErrorKind::dimension_mismatch, "mode basis must have N + 1 modes");

  RVector bright(static_cast<Eigen::Index>(basis.dimension()));
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const auto q = basis.quanta(i);
    bright[static_cast<Eigen::Index>(i)] =
        static_cast<double>(std::count_if(q.begin(), q.end(), [](std::uint16_t m) { return m >= 2; }));
  }
  const double scale = g * g * atoms / gamma;
  const auto rate = [&](double t) {
    const double th = schedule.theta(t);
    if (th < kPumpingThetaFloor)
      throw Error(ErrorKind::singular_schedule, "pumping rate diverges below the theta floor");
    const double cot = mixing_cos(th) / mixing_sin(th);
    return scale * cot * cot;
  };

  FrameRun run{polariton_state, {}, {}};
  CVector& psi = run.final_state.amplitudes;
  const auto record = [&](double t) {
    run.times.push_back(t);
    run.bright_occupation.push_back((psi.cwiseAbs2().array() * bright.array()).sum());
  };
  const auto steps = static_cast<long>(std::ceil(schedule.duration / dt - 1e-9));
  const double h = schedule.duration / static_cast<double>(steps);
  if (record_every > 0) record(0.0);
  for (long k = 0; k < steps; ++k) {
    const double t = k * h;
    const double r1 = rate(t);
    const double r2 = rate(t + 0.5 * h);
    const double r4 = rate(t + h);
    // RK4 on the diagonal system psi_i' = -r(t) m_i psi_i, evaluated per component.
    const RVector k1 = -r1 * bright;
    const RVector k2 = -r2 * (bright.array() * (1.0 + 0.5 * h * k1.array())).matrix();
    const RVector k3 = -r2 * (bright.array() * (1.0 + 0.5 * h * k2.array())).matrix();
    const RVector k4 = -r4 * (bright.array() * (1.0 + h * k3.array())).matrix();
    const RVector factor = (1.0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4).array()).matrix();
    psi = (psi.array() * factor.array().cast<Complex>()).matrix();
    if (record_every > 0 && (k + 1) % record_every == 0) record(t + h);
  }
  return run;
}

void NonAdiabaticModel::validate() const {
  if (bath_modes < 1) throw Error(ErrorKind::config_invalid, "need at least one bath mode");
  if (atoms < 1) throw Error(ErrorKind::config_invalid, "need at least one atom");
  if (kappa < 0.0) throw Error(ErrorKind::config_invalid, "kappa must be >= 0");
  if (pumping && !(gamma > 0.0)) throw Error(ErrorKind::config_invalid, "pumping needs gamma > 0");
  if (initial.size() != size()) throw Error(ErrorKind::dimension_mismatch, "initial amplitudes have wrong length");
}

namespace {

double pumping_rate(const NonAdiabaticModel& model, const SweepSchedule& schedule, double t) {
  if (!model.pumping) return 0.0;
  const double th = schedule.theta(t);
  if (th < kPumpingThetaFloor)
    throw Error(ErrorKind::singular_schedule, "pumping rate diverges below the theta floor");
  const double cot = mixing_cos(th) / mixing_sin(th);
  return model.g * model.g * model.atoms / model.gamma * cot * cot;
}

// Coupled block {Psi, Phi_0, b_k}.
CMatrix core_block(const NonAdiabaticModel& model, const SweepSchedule& schedule, double t) {
  const Eigen::Index n = 2 + model.bath_modes;
  CMatrix M = CMatrix::Zero(n, n);
  const double th = schedule.theta(t);
  const double td = schedule.theta_dot(t);
  const Complex ikc{0.0, model.kappa * mixing_cos(th)};
  const Complex iks{0.0, model.kappa * mixing_sin(th)};
  M(0, 1) = -td;
  M(1, 0) = td;
  for (int k = 0; k < model.bath_modes; ++k) {
    M(0, 2 + k) = ikc;
    M(2 + k, 0) = ikc;
    M(1, 2 + k) = iks;
    M(2 + k, 1) = iks;
  }
  return M;
}

}  // namespace

CMatrix nonadiabatic_jacobian(const NonAdiabaticModel& model, const SweepSchedule& schedule, double t) {
  const Eigen::Index n = model.size();
  CMatrix M = CMatrix::Zero(n, n);
  const Eigen::Index core = 2 + model.bath_modes;
  M.topLeftCorner(core, core) = core_block(model, schedule, t);
  const double r = pumping_rate(model, schedule, t);
  for (int l = 1; l < model.atoms; ++l) M(model.bright(l), model.bright(l)) = -r;
  return M;
}

NonAdiabaticResult nonadiabatic_linear(const NonAdiabaticModel& model, const SweepSchedule& schedule, double dt) {
  model.validate();
  schedule.validate();
  if (!(dt > 0.0)) throw Error(ErrorKind::invalid_argument, "dt must be > 0");
  const Eigen::Index core = 2 + model.bath_modes;
  CVector x = model.initial.head(core);
  CVector y = model.initial.tail(model.atoms - 1);

  const auto steps = static_cast<long>(std::ceil(schedule.duration / dt - 1e-9));
  const double h = schedule.duration / static_cast<double>(steps);
  // The two blocks are integrated separately: no term ever couples them.
  for (long k = 0; k < steps; ++k) {
    const double t = k * h;
    const CMatrix M1 = core_block(model, schedule, t);
    const CMatrix M2 = core_block(model, schedule, t + 0.5 * h);
    const CMatrix M4 = core_block(model, schedule, t + h);
    const CVector k1 = M1 * x;
    const CVector k2 = M2 * (x + 0.5 * h * k1);
    const CVector k3 = M2 * (x + 0.5 * h * k2);
    const CVector k4 = M4 * (x + h * k3);
    x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (model.pumping && y.size() > 0) {
      const double r1 = pumping_rate(model, schedule, t);
      const double r2 = pumping_rate(model, schedule, t + 0.5 * h);
      const double r4 = pumping_rate(model, schedule, t + h);
      const CVector j1 = -r1 * y;
      const CVector j2 = -r2 * (y + 0.5 * h * j1);
      const CVector j3 = -r2 * (y + 0.5 * h * j2);
      const CVector j4 = -r4 * (y + h * j3);
      y += (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
    }
  }

  NonAdiabaticResult out;
  out.final_amplitudes.resize(model.size());
  out.final_amplitudes << x, y;
  const double th = schedule.theta(schedule.duration);
  out.retrieved_field.resize(1 + model.bath_modes);
  out.retrieved_field[0] = mixing_cos(th) * x[0] + mixing_sin(th) * x[1];
  out.retrieved_field.tail(model.bath_modes) = x.tail(model.bath_modes);
  out.core_norm = x.squaredNorm();
  out.initial_core_norm = model.initial.head(core).squaredNorm();
  return out;
}

}  // namespace qmem
