#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmem/dynamics.hpp"

using namespace qmem;

namespace {

BasisPtr three_level(int atoms, int n_max, Sector sector = Sector::symmetric) {
  return build_basis({atoms, {Level::b, Level::c, Level::a}, n_max, sector});
}

HamiltonianParams params(double g, double gamma) {
  HamiltonianParams p;
  p.g = g;
  p.gamma = gamma;
  return p;
}

SweepSchedule sweep(SweepDirection direction, double duration, SweepProfile profile = SweepProfile::linear) {
  SweepSchedule s;
  s.direction = direction;
  s.duration = duration;
  s.profile = profile;
  return s;
}

}  // namespace

TEST_CASE("resonance is enforced") {
  HamiltonianParams p = params(1.0, 0.0);
  p.omega = 10.0;
  p.omega_a = 10.0;
  p.omega_c = 3.0;
  p.nu = 7.0;
  CHECK_NOTHROW(p.validate());
  p.nu = 6.5;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("sweep schedules are monotone with exact endpoints") {
  for (auto profile : {SweepProfile::linear, SweepProfile::cosine, SweepProfile::tanh}) {
    auto store = sweep(SweepDirection::store, 2.0, profile);
    CHECK(store.theta(0.0) == store.theta_min);
    CHECK(store.theta(2.0) == kHalfPi);
    auto retrieve = sweep(SweepDirection::retrieve, 2.0, profile);
    CHECK(retrieve.theta(0.0) == kHalfPi);
    CHECK(retrieve.theta(2.0) == retrieve.theta_min);
    double previous = store.theta(0.0);
    for (int k = 1; k <= 200; ++k) {
      const double t = 0.01 * k;
      CHECK(store.theta(t) >= previous);
      previous = store.theta(t);
      // finite-difference derivative
      const double h = 1e-6;
      if (t + h < 2.0 && t - h > 0.0)
        CHECK(store.theta_dot(t) == doctest::Approx((store.theta(t + h) - store.theta(t - h)) / (2 * h)).epsilon(1e-5));
    }
  }
  CHECK(sweep(SweepDirection::store, 5.0).adiabaticity(1.0, 4) == doctest::Approx(10.0));
  CHECK(sweep(SweepDirection::store, 5.0).control(5.0, 1.0, 4) == 0.0);
}

TEST_CASE("dark states are stationary") {
  const double g = 1.3;
  const double theta = 0.7;
  for (int atoms = 1; atoms <= 6; ++atoms) {
    for (int n = 0; n <= std::min(3, atoms); ++n) {
      auto basis = three_level(atoms, 3, Sector::symmetric);
      const auto frame = PolaritonFrame::at(theta, atoms);
      PureState d = dark_state(basis, {n, atoms}, frame);
      const Complex e = dark_energy(d, params(g, 2.0), frame);
      CHECK(std::abs(e.real()) < 1e-12);
      CHECK(std::abs(e.imag()) < 1e-12);
      CHECK(dark_residual(d, params(g, 2.0), frame) < 1e-12);
    }
  }
  auto basis = three_level(3, 2, Sector::full_product);
  const auto frame = PolaritonFrame::at(0.9, 3);
  PureState d = dark_state(basis, {1, 3}, frame);
  auto run = evolve_full(d, params(1.0, 3.0), SweepSchedule::hold(0.9, 5.0));
  CHECK(1.0 - run.norm < 1e-10);
  CHECK(std::norm(d.amplitudes.dot(run.final_state.amplitudes)) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("adiabatic storage of a single photon") {
  const int atoms = 4;
  auto basis = three_level(atoms, 1);
  auto p = params(1.0, 1.0);
  const double per_unit = 1.0 / (p.g * std::sqrt(static_cast<double>(atoms)));
  Configuration target;
  target.atoms = {atoms - 1, 1, 0};
  target.photons = 0;
  const auto idx = static_cast<Eigen::Index>(basis->index(target));

  auto slow = evolve_full(ground_state(basis, 1), p, sweep(SweepDirection::store, 100.0 * per_unit));
  CHECK(std::norm(-slow.final_state.amplitudes[idx]) >= 0.99 * 0.99);
  CHECK(slow.converged);

  auto fast = evolve_full(ground_state(basis, 1), p, sweep(SweepDirection::store, 1.0 * per_unit));
  CHECK(std::norm(fast.final_state.amplitudes[idx]) < 0.9);
  CHECK(1.0 - fast.norm > 1e-3);
}

TEST_CASE("read-out of a stored excitation") {
  const int atoms = 4;
  auto basis = three_level(atoms, 1);
  auto p = params(1.0, 0.5);
  const double T = 100.0 / (p.g * std::sqrt(static_cast<double>(atoms)));
  auto stored = dark_state(basis, {1, atoms}, PolaritonFrame::storage(atoms));
  auto out = readout_reduce(stored, p, {sweep(SweepDirection::retrieve, T)});
  CHECK(out.field(1, 1).real() >= 0.99);

  auto vac = readout_reduce(ground_state(basis), p, {sweep(SweepDirection::retrieve, T)});
  CHECK(vac.field(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(vac.field(1, 1)) < 1e-14);

  auto mixed = readout_reduce(DensityOperator::from_pure(stored), p, {sweep(SweepDirection::retrieve, T)});
  CHECK((mixed.field - out.field).norm() < 1e-8);
}

TEST_CASE("equivalence-class partner retrieves the same photon") {
  const int atoms = 3;
  auto basis = three_level(atoms, 2, Sector::full_product);
  auto p = params(1.0, 0.5);
  const auto frame = PolaritonFrame::storage(atoms);
  const double T = 100.0 / (p.g * std::sqrt(static_cast<double>(atoms)));
  auto stored = dark_state(basis, {1, atoms}, frame);
  auto partner = apply_bright(stored, 1, Ladder::create, frame).normalized();
  auto ref = readout_reduce(stored, p, {sweep(SweepDirection::retrieve, T)});
  auto alt = readout_reduce(partner, p, {sweep(SweepDirection::retrieve, T)});
  const CMatrix a = ref.field / ref.retained;
  const CMatrix b = alt.field / alt.retained;
  CHECK((a.diagonal() - b.diagonal()).cwiseAbs().maxCoeff() < 1e-3);
}

TEST_CASE("optical pumping in the polariton frame") {
  const int atoms = 3;
  const double g = 1.0, gamma = 2.0, t = 0.7;
  auto basis = build_mode_basis(atoms + 1, 2);
  std::vector<int> occ(atoms + 1, 0);
  occ[2] = 1;  // Phi_1
  ModeState phi1 = mode_fock(basis, occ);
  auto run = evolve_polariton_frame(phi1, SweepSchedule::hold(kPi / 4, t), gamma, g, atoms, 1e-3, 1);
  const double r = g * g * atoms / gamma;
  CHECK(std::abs(run.final_state.amplitudes[basis->index_of_occupations(occ)] - std::exp(-r * t)) < 1e-8);
  // occupation decays at twice the amplitude rate
  const double fitted = -std::log(run.bright_occupation.back() / run.bright_occupation.front()) / t;
  CHECK(fitted == doctest::Approx(2.0 * r).epsilon(0.01));

  std::fill(occ.begin(), occ.end(), 0);
  occ[0] = 2;
  ModeState dark = mode_fock(basis, occ);
  auto still = evolve_polariton_frame(dark, sweep(SweepDirection::retrieve, 1.0), gamma, g, atoms, 1e-3);
  CHECK((still.final_state.amplitudes - dark.amplitudes).norm() == 0.0);

  auto frozen = evolve_polariton_frame(phi1, SweepSchedule::hold(kHalfPi, 3.0), gamma, g, atoms, 1e-2);
  CHECK((frozen.final_state.amplitudes - phi1.amplitudes).norm() == 0.0);

  auto bad = SweepSchedule::hold(5e-4, 1.0);
  CHECK_THROWS_AS(evolve_polariton_frame(phi1, bad, gamma, g, atoms, 1e-2), Error);
}

TEST_CASE("adiabatic elimination matches the full model") {
  // Phi_1 spin wave at fixed theta; gamma >> g sqrt(N), Omega.
  const int atoms = 2;
  auto basis = three_level(atoms, 1, Sector::full_product);
  const double g = 1.0, gamma = 40.0, theta = 0.9;
  const auto frame = PolaritonFrame::at(theta, atoms);
  PureState wave = apply_bright(ground_state(basis), 1, Ladder::create, frame);
  auto run = evolve_full(wave, params(g, gamma), SweepSchedule::hold(theta, 2.0));
  const double omega = g * std::sqrt(2.0) / std::tan(theta);
  const double predicted = 2.0 * omega * omega / gamma;  // occupation rate
  const double fitted = -std::log(run.norm) / 2.0;
  CHECK(fitted == doctest::Approx(predicted).epsilon(0.1));
}

TEST_CASE("non-adiabatic linear model") {
  NonAdiabaticModel model;
  model.atoms = 4;
  model.bath_modes = 8;
  model.kappa = 0.3;
  model.g = 1.0;
  model.gamma = 2.0;
  auto retrieve = sweep(SweepDirection::retrieve, 5.0, SweepProfile::cosine);

  SUBCASE("bright modes never reach the field") {
    for (int l = 1; l < model.atoms; ++l) {
      model.initial = CVector::Zero(model.size());
      model.initial[model.bright(l)] = 1.0;
      auto out = nonadiabatic_linear(model, retrieve, 1e-3);
      CHECK(out.retrieved_field.norm() == 0.0);
    }
    const CMatrix J = nonadiabatic_jacobian(model, retrieve, 2.0);
    const Eigen::Index core = 2 + model.bath_modes;
    CHECK(J.topRightCorner(core, model.atoms - 1).norm() == 0.0);
    CHECK(J.bottomLeftCorner(model.atoms - 1, core).norm() == 0.0);
  }
  SUBCASE("core norm is conserved") {
    model.initial = CVector::Zero(model.size());
    model.initial[0] = 0.6;
    model.initial[1] = Complex(0.0, 0.8);
    auto out = nonadiabatic_linear(model, retrieve, 1e-3);
    CHECK(std::abs(out.core_norm - out.initial_core_norm) < 1e-9);
  }
  SUBCASE("frozen without sweep or leakage") {
    model.kappa = 0.0;
    model.initial = CVector::Zero(model.size());
    model.initial[0] = 1.0;
    model.initial[1] = 0.5;
    auto out = nonadiabatic_linear(model, SweepSchedule::hold(0.4, 3.0), 1e-2);
    CHECK((out.final_amplitudes.head(2) - model.initial.head(2)).norm() < 1e-14);
  }
  SUBCASE("first-order transfer from Phi_0") {
    model.kappa = 0.0;
    model.initial = CVector::Zero(model.size());
    model.initial[1] = 1.0;
    double previous_gap = 1.0;
    for (double window : {0.2, 0.05, 0.0125}) {
      // Short piece of a linear sweep: Psi ~ -delta theta.
      auto s = sweep(SweepDirection::store, 10.0);
      s.duration = 10.0;
      SweepSchedule piece = s;
      piece.theta_min = kHalfPi - window;
      piece.duration = 10.0 * window;
      auto out = nonadiabatic_linear(model, piece, 1e-3);
      const double ratio = out.final_amplitudes[0].real() / (-window);
      const double gap = std::abs(ratio - 1.0);
      CHECK(gap < previous_gap);
      previous_gap = gap;
    }
    CHECK(previous_gap < 1e-4);
  }
}
