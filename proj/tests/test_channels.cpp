#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmem/channels.hpp"

using namespace qmem;

namespace {

BasisPtr full(int atoms, std::vector<Level> levels = {Level::b, Level::c}) {
  return build_basis({atoms, std::move(levels), 0, Sector::full_product});
}

PureState stored(int atoms, int n, std::vector<Level> levels = {Level::b, Level::c}) {
  return dark_state(full(atoms, std::move(levels)), {n, atoms}, PolaritonFrame::storage(atoms));
}

ChannelSpec event(ChannelFlavor flavor, int target) {
  ChannelSpec spec;
  spec.flavor = flavor;
  spec.target = target;
  return spec;
}

ModeState bosonic_stored(int atoms, int n, int cutoff) {
  return dark_state(build_mode_basis(atoms + 1, cutoff), {n, atoms}, PolaritonFrame::storage(atoms));
}

}  // namespace

TEST_CASE("bosonic spin flip reproduces the reduced single-mode map") {
  for (int atoms : {4, 8}) {
    for (int n : {1, 2}) {
      auto out = apply_event(bosonic_stored(atoms, n, n + 1), event(ChannelFlavor::flip_cb, 0));
      const CMatrix rho = trace_out_bright(out.state, polariton_transform(kHalfPi, atoms));
      const double N = atoms;
      const double denom = 1.0 + n / N;
      CHECK(rho(n, n).real() == doctest::Approx((1.0 - 1.0 / N) / denom).epsilon(1e-12));
      CHECK(rho(n + 1, n + 1).real() == doctest::Approx((n + 1) / N / denom).epsilon(1e-12));
      CHECK(out.weight == doctest::Approx(denom).epsilon(1e-12));  // 1 + <s_j^dag s_j>
    }
  }
}

TEST_CASE("flip_bc on vacuum storage has zero probability") {
  auto vac = stored(3, 0);
  CHECK_THROWS_AS(apply_event(DensityOperator::from_pure(vac), event(ChannelFlavor::flip_bc, 1)), Error);
}

TEST_CASE("phase flip is unitary and exact") {
  for (int atoms : {4, 8, 12}) {
    for (int n : {1, 2}) {
      auto psi = stored(atoms, n);
      auto out = apply_event(psi, event(ChannelFlavor::phase_flip, 2));
      CHECK(out.weight == doctest::Approx(1.0).epsilon(1e-14));
      const double f = std::norm(psi.amplitudes.dot(out.state.amplitudes));
      const double expected = std::pow(1.0 - 2.0 * n / atoms, 2);
      CHECK(std::abs(f - expected) < 1e-12);
    }
  }
  auto vac = stored(3, 0);
  auto out = apply_event(vac, event(ChannelFlavor::phase_flip, 0));
  CHECK(std::norm(vac.amplitudes.dot(out.state.amplitudes)) == doctest::Approx(1.0));
}

TEST_CASE("event on a density operator matches the pure-state map") {
  auto psi = stored(4, 2);
  auto pure = apply_event(psi, event(ChannelFlavor::symmetric_flip, 3));
  auto mixed = apply_event(DensityOperator::from_pure(psi), event(ChannelFlavor::symmetric_flip, 3));
  CHECK(pure.weight == doctest::Approx(mixed.weight));
  CHECK((DensityOperator::from_pure(pure.state).matrix - mixed.state.matrix).norm() < 1e-12);
  CHECK(mixed.state.min_eigenvalue() > -1e-10);
  CHECK(mixed.state.trace().real() == doctest::Approx(1.0));
}

TEST_CASE("auxiliary-level flip leaves the stored manifold") {
  const int atoms = 5;
  auto psi = stored(atoms, 1, {Level::b, Level::c, Level::d});
  auto out = apply_event(psi, event(ChannelFlavor::aux_flip_bd, 0));
  CHECK(std::abs(psi.amplitudes.dot(out.state.amplitudes)) < 1e-14);
  CHECK(out.weight == doctest::Approx((atoms - 1.0) / atoms));
  CHECK_THROWS_AS(apply_event(stored(atoms, 1), event(ChannelFlavor::aux_flip_bd, 0)), Error);
}

TEST_CASE("random targets stay in range") {
  std::mt19937_64 rng(3);
  auto W = DensityOperator::from_pure(stored(4, 1));
  ChannelSpec spec;
  spec.flavor = ChannelFlavor::symmetric_flip;
  for (int i = 0; i < 10; ++i) CHECK(apply_event(W, spec, rng).weight > 0.0);
}

TEST_CASE("atom loss weights") {
  const int atoms = 4;
  auto W = atom_loss(stored(atoms, 2), 0);
  auto d2 = stored(3, 2);
  auto d1 = stored(3, 1);
  CHECK(std::real(d2.amplitudes.dot(W.matrix * d2.amplitudes)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::real(d1.amplitudes.dot(W.matrix * d1.amplitudes)) == doctest::Approx(0.5).epsilon(1e-12));

  // |D,1><D,2| off-diagonal rule
  PureState a = stored(atoms, 1);
  PureState b = stored(atoms, 2);
  DensityOperator cross{a.basis, a.amplitudes * b.amplitudes.adjoint()};
  auto reduced = atom_loss(cross, 2);
  auto d0 = stored(3, 0);
  const Complex c12 = d1.amplitudes.dot(reduced.matrix * d2.amplitudes);
  const Complex c01 = d0.amplitudes.dot(reduced.matrix * d1.amplitudes);
  CHECK(std::abs(c12 - std::sqrt(6.0) / 4.0) < 1e-12);
  CHECK(std::abs(c01 - std::sqrt(2.0) / 4.0) < 1e-12);
}

TEST_CASE("spin-flip Liouvillian") {
  auto vac = DensityOperator::from_pure(stored(3, 0));
  auto idle = spin_flip_liouvillian(vac, 0.0, 0.01, 10);
  CHECK((idle.final_state.matrix - vac.matrix).norm() == 0.0);

  const double rate = 1.0;
  const double t = 0.3;
  auto run = spin_flip_liouvillian(vac, rate, 0.001, 300);
  // Zero-excitation population decays as exp(-N Gamma t).
  CHECK(run.final_state.matrix(0, 0).real() == doctest::Approx(std::exp(-3.0 * rate * t)).epsilon(1e-9));
  CHECK(run.max_trace_drift < 1e-9);

  // Short-time linearity: one RK4 step against Euler, difference O(dt^2).
  const double dt = 1e-4;
  auto one = spin_flip_liouvillian(vac, rate, dt, 1);
  const double euler_p0 = 1.0 - 3.0 * rate * dt;
  CHECK(std::abs(one.final_state.matrix(0, 0).real() - euler_p0) < 10.0 * dt * dt);
  CHECK_THROWS_AS(spin_flip_liouvillian(vac, 1.0, 2.0, 1), Error);
}

TEST_CASE("reduced Liouvillian rate chain") {
  CMatrix rho = CMatrix::Zero(30, 30);
  rho(0, 0) = 1.0;
  const double rate = 0.7;
  CMatrix out = reduced_spin_flip_liouvillian(rho, rate, 0.5);
  CHECK(out(0, 0).real() == doctest::Approx(std::exp(-rate * 0.5)).epsilon(1e-12));
  // p_1 solves dp1/dt = -2 Gamma p1 + Gamma p0
  const double p1 = std::exp(-rate * 0.5) - std::exp(-2.0 * rate * 0.5);
  CHECK(out(1, 1).real() == doctest::Approx(p1).epsilon(1e-12));
  CHECK((reduced_spin_flip_liouvillian(rho, rate, 0.0) - rho).norm() < 1e-14);
  double previous = 0.0;
  for (double t : {0.1, 0.2, 0.4}) {
    CMatrix r = reduced_spin_flip_liouvillian(rho, rate, t);
    double mean = 0.0;
    for (int k = 0; k < 30; ++k) mean += k * r(k, k).real();
    CHECK(mean > previous);
    previous = mean;
  }
  CMatrix small = CMatrix::Zero(3, 3);
  small(0, 0) = 1.0;
  CHECK_THROWS_AS(reduced_spin_flip_liouvillian(small, 1.0, 3.0), Error);
}

TEST_CASE("motion fidelity of a single phase configuration") {
  const std::vector<double> zero(6, 0.0);
  CHECK(motion_fidelity_for_phases(2, zero) == doctest::Approx(1.0).epsilon(1e-13));
  const std::vector<double> phases{0.1, -0.4, 1.3, 2.0, 0.0, -2.2};
  Complex sum{};
  for (double p : phases) sum += std::polar(1.0, p);
  const double overlap = std::norm(sum) / 36.0;
  for (int n : {1, 2}) {
    CHECK(motion_fidelity_for_phases(n, phases) == doctest::Approx(std::pow(overlap, n)).epsilon(1e-12));
    CHECK(motion_fidelity_for_phases(n, phases, true) ==
          doctest::Approx(motion_fidelity_for_phases(n, phases)).epsilon(1e-12));
  }
}

TEST_CASE("motion Monte Carlo is deterministic and seeded") {
  MotionConfig config;
  config.atoms = 8;
  config.times = {0.0, 0.5};
  config.trajectories = 200;
  config.seed = 7;
  config.workers = 3;
  auto a = motion_sample_fidelity(config);
  config.workers = 1;
  auto b = motion_sample_fidelity(config);
  CHECK(a.fidelity == b.fidelity);
  CHECK(a.fidelity[0] == 1.0);
  config.seed.reset();
  CHECK_THROWS_AS(motion_sample_fidelity(config), Error);
}

TEST_CASE("thermal preparation") {
  auto cold = thermal_prepare(INFINITY, 1.0, 4, 2);
  CHECK(cold.dark_occupation == 0.0);
  auto warm = thermal_prepare(5.0, 1.0, 4, 4);
  CHECK(std::abs(warm.dark_occupation - warm.c_population) < 1e-10);
  CHECK_FALSE(warm.cutoff_warning);
  auto hot = thermal_prepare(std::log(2.0), 1.0, 1, 60);
  CHECK(hot.dark_occupation == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(thermal_prepare(std::log(2.0), 1.0, 2, 4).cutoff_warning);
  CHECK_THROWS_AS(thermal_prepare(0.0, 1.0, 2, 2), Error);
}
