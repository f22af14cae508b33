#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmem/polariton.hpp"

using namespace qmem;

namespace {

BasisPtr full(int atoms, int n_max) { return build_basis({atoms, {Level::b, Level::c}, n_max, Sector::full_product}); }
BasisPtr sym(int atoms, int n_max) { return build_basis({atoms, {Level::b, Level::c}, n_max, Sector::symmetric}); }

}  // namespace

TEST_CASE("mixing angle from couplings") {
  auto frame = PolaritonFrame::from_couplings(1.0, 2.0, 4);
  CHECK(std::tan(frame.theta) == doctest::Approx(1.0));
  CHECK(frame.coupling_defect() < 1e-14);
  CHECK(PolaritonFrame::from_couplings(1.0, 0.0, 4).theta == kHalfPi);
  CHECK(PolaritonFrame::storage(3).cos() == 0.0);
}

TEST_CASE("dark state normalization") {
  for (int n : {0, 1, 3})
    for (double theta : {0.0, 0.5, kHalfPi}) CHECK(DarkStateSpec{n, 4}.normalization(theta) == doctest::Approx(1.0));
  PureState d = dark_state(full(3, 2), {2, 3}, PolaritonFrame::at(0.6, 3));
  CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("single dark excitation is Psi^dag on the vacuum") {
  const double theta = 0.8;
  for (auto basis : {full(3, 2), sym(3, 2)}) {
    const auto frame = PolaritonFrame::at(theta, 3);
    PureState psi = apply_dark(ground_state(basis), Ladder::create, frame);
    PureState d = dark_state(basis, {1, 3}, frame);
    CHECK((psi.amplitudes - d.amplitudes).norm() < 1e-14);
    for (int l = 0; l < 3; ++l) {
      if (l > 0 && basis->sector() == Sector::symmetric) continue;
      CHECK(apply_bright(d, l, Ladder::annihilate, frame).norm() < 1e-14);
    }
  }
}

TEST_CASE("dark state is the normalized power of Psi^dag") {
  // (Psi^dag)^2 / sqrt 2 |vac> has norm^2 1 - s^4/N: the k = 2 Dicke factor is sqrt(1 - 1/N).
  for (int atoms : {2, 4, 16}) {
    const auto frame = PolaritonFrame::at(0.8, atoms);
    auto basis = sym(atoms, 2);
    PureState psi = apply_dark(apply_dark(ground_state(basis), Ladder::create, frame), Ladder::create, frame);
    psi.amplitudes /= std::sqrt(2.0);
    const double s4 = std::pow(std::sin(0.8), 4);
    CHECK(psi.norm() * psi.norm() == doctest::Approx(1.0 - s4 / atoms).epsilon(1e-12));
    const double gap = (psi.normalized().amplitudes - dark_state(basis, {2, atoms}, frame).amplitudes).norm();
    CHECK(gap < 1e-12);
  }
}

TEST_CASE("storage at pi/2 needs no photons") {
  PureState d = dark_state(sym(4, 0), {3, 4}, PolaritonFrame::storage(4));
  CHECK(d.norm() == doctest::Approx(1.0));
  CHECK_THROWS_AS(dark_state(sym(4, 0), {1, 4}, PolaritonFrame::at(1.0, 4)), Error);
  CHECK_THROWS_AS(dark_state(sym(2, 0), {3, 2}, PolaritonFrame::storage(2)), Error);
}

TEST_CASE("commutators in the low-excitation regime") {
  const auto frame = PolaritonFrame::at(0.7, 6);
  PureState vac = ground_state(full(6, 2));
  CHECK(std::abs(commutator_defect(vac, CommutatorPair::dark_dark, frame)) < 1e-13);
  CHECK(std::abs(commutator_defect(vac, CommutatorPair::bright0_bright0, frame)) < 1e-13);
  CHECK(std::abs(commutator_defect(vac, CommutatorPair::bright_bright, frame, 2, 2)) < 1e-13);
  CHECK(std::abs(commutator_defect(vac, CommutatorPair::bright_bright, frame, 1, 2)) < 1e-13);
  CHECK(std::abs(commutator_defect(vac, CommutatorPair::bright_dark, frame, 3)) < 1e-13);
  // With n spin excitations the dark-mode defect is O(n/N).
  PureState d = dark_state(full(6, 2), {2, 6}, PolaritonFrame::storage(6));
  const double defect = std::abs(commutator_defect(d, CommutatorPair::dark_dark, PolaritonFrame::storage(6)));
  CHECK(defect > 0.0);
  CHECK(defect <= 2.0 * 2.0 / 6.0 + 1e-12);
}

TEST_CASE("site flip expands in polaritons") {
  PureState vac = ground_state(full(4, 0));
  for (int j = 0; j < 4; ++j) CHECK(verify_sigma_identity(vac, j) < 1e-14);
}

TEST_CASE("coherent storage factorizes") {
  auto report = coherent_storage_factorization({0.8, 0.3}, 8);
  CHECK(report.deviation > 0.0);
  CHECK(report.product_form.norm() > 0.0);
  CHECK(report.overlap > 0.95);
}
