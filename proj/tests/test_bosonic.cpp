#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "qmem/bosonic.hpp"
#include "qmem/polariton.hpp"

using namespace qmem;

namespace {

double choose(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("mode basis dimension and lookup") {
  for (int modes : {1, 3, 7}) {
    for (int e : {0, 1, 2, 4}) {
      auto basis = build_mode_basis(modes, e);
      CHECK(basis->dimension() == static_cast<std::size_t>(choose(modes + e, e)));
      for (std::size_t i = 0; i < basis->dimension(); ++i) {
        CHECK(basis->index_of(basis->quanta(i)) == i);
        const auto occ = basis->occupations(i);
        CHECK(basis->index_of_occupations(occ) == i);
      }
    }
  }
}

TEST_CASE("ladder operators obey the boson algebra") {
  auto basis = build_mode_basis(3, 4);
  const std::vector<int> occ{1, 2, 0};
  ModeState s = mode_fock(basis, occ);
  ModeState up = apply_ladder(s, 1, Ladder::create);
  CHECK(up.norm() == doctest::Approx(std::sqrt(3.0)));
  ModeState down = apply_ladder(s, 1, Ladder::annihilate);
  CHECK(down.norm() == doctest::Approx(std::sqrt(2.0)));
  // [a, a^dag] = 1 on a generic state
  ModeState psi = mode_vacuum(basis);
  psi.amplitudes.setRandom();
  for (std::size_t i = 0; i < basis->dimension(); ++i)
    if (basis->total(i) > 3) psi.amplitudes[static_cast<Eigen::Index>(i)] = 0.0;
  const CVector comm = apply_ladder(apply_ladder(psi, 2, Ladder::create), 2, Ladder::annihilate).amplitudes -
                       apply_ladder(apply_ladder(psi, 2, Ladder::annihilate), 2, Ladder::create).amplitudes;
  CHECK((comm - psi.amplitudes).norm() < 1e-12);
}

TEST_CASE("creation past the cutoff throws") {
  auto basis = build_mode_basis(2, 1);
  const std::vector<int> occ{1, 0};
  CHECK_THROWS_AS(apply_ladder(mode_fock(basis, occ), 0, Ladder::create), Error);
}

TEST_CASE("polariton transform is unitary") {
  for (int atoms : {1, 2, 5, 16})
    for (double theta : {0.0, 0.3, 1.1, kHalfPi}) CHECK(polariton_transform(theta, atoms).unitarity_defect() < 1e-13);
}

TEST_CASE("site excitation in the polariton frame") {
  // s_j^dag |0> at theta = pi/2 expands as N^{-1/2}(sum_l eta_jl Phi_l^dag - Psi^dag)|0>.
  const int atoms = 4;
  auto basis = build_mode_basis(atoms + 1, 1);
  const ModeTransform T = polariton_transform(kHalfPi, atoms);
  const int j = 1;  // 0-based atom; phase uses j + 1
  std::vector<int> occ(atoms + 1, 0);
  occ[1 + j] = 1;
  ModeState pol = change_basis(mode_fock(basis, occ), T, FrameDirection::site_to_polariton);
  std::vector<int> probe(atoms + 1, 0);
  probe[0] = 1;
  CHECK(std::abs(pol.amplitudes[basis->index_of_occupations(probe)] - Complex(-0.5, 0.0)) < 1e-14);
  for (int l = 1; l < atoms; ++l) {
    std::fill(probe.begin(), probe.end(), 0);
    probe[1 + l] = 1;
    const Complex eta = std::exp(Complex(0.0, 2.0 * kPi * l * (j + 1) / atoms));
    CHECK(std::abs(pol.amplitudes[basis->index_of_occupations(probe)] - eta / 2.0) < 1e-14);
  }
  std::fill(probe.begin(), probe.end(), 0);
  probe[1] = 1;  // Phi_0 is the cavity at pi/2
  CHECK(std::abs(pol.amplitudes[basis->index_of_occupations(probe)]) < 1e-14);
}

TEST_CASE("change of basis round trip") {
  auto basis = build_mode_basis(4, 3);
  const ModeTransform T = polariton_transform(0.7, 3);
  ModeState psi = mode_vacuum(basis);
  psi.amplitudes.setRandom();
  psi = psi.normalized();
  ModeState back = change_basis(change_basis(psi, T, FrameDirection::site_to_polariton), T,
                                FrameDirection::polariton_to_site);
  CHECK((back.amplitudes - psi.amplitudes).norm() < 1e-12);
}

TEST_CASE("dark Fock state reduces to a number state") {
  for (double theta : {kHalfPi, 0.4}) {
    const int atoms = 3;
    auto basis = build_mode_basis(atoms + 1, 3);
    const auto frame = PolaritonFrame::at(theta, atoms);
    ModeState dark = dark_state(basis, {2, atoms}, frame);
    CMatrix rho = trace_out_bright(dark, polariton_transform(theta, atoms));
    CHECK(rho(2, 2).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rho.trace().real() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("one-body density of a single site quantum") {
  auto basis = build_mode_basis(3, 2);
  const std::vector<int> occ{0, 2, 0};
  CMatrix G = one_body_density(mode_fock(basis, occ));
  CHECK(G(1, 1).real() == doctest::Approx(2.0));
  CHECK(std::abs(G.trace() - Complex(2.0, 0.0)) < 1e-14);
}

TEST_CASE("hard-core embedding of a spin state") {
  auto spins = build_basis({2, {Level::b, Level::c}, 1, Sector::full_product});
  PureState psi = ground_state(spins);
  psi = apply_atomic_flip(psi, 1, Level::b, Level::c);
  ModeDensity W = embed_spin_density(DensityOperator::from_pure(psi), 2);
  std::vector<int> occ{0, 0, 1};
  const auto idx = static_cast<Eigen::Index>(W.basis->index_of_occupations(occ));
  CHECK(W.matrix(idx, idx).real() == doctest::Approx(1.0));
}
