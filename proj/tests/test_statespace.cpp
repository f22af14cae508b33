#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qmem/statespace.hpp"

using namespace qmem;

namespace {

BasisPtr full(int atoms, int n_max, std::vector<Level> levels = {Level::b, Level::c}) {
  return build_basis({atoms, std::move(levels), n_max, Sector::full_product});
}

}  // namespace

TEST_CASE("dimensions of both sectors") {
  CHECK(full(3, 2)->dimension() == 8 * 3);
  CHECK(full(2, 1, {Level::b, Level::c, Level::d})->dimension() == 9 * 2);
  auto sym = build_basis({4, {Level::b, Level::c}, 3, Sector::symmetric});
  CHECK(sym->dimension() == 5 * 4);
  auto sym3 = build_basis({4, {Level::b, Level::c, Level::a}, 0, Sector::symmetric});
  CHECK(sym3->dimension() == 15);  // C(4 + 2, 2)
}

TEST_CASE("dimension cap") {
  CHECK_THROWS_AS(build_basis({30, {Level::b, Level::c}, 0, Sector::full_product}, 1000), Error);
  try {
    build_basis({30, {Level::b, Level::c}, 0, Sector::full_product}, 1000);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::dimension_overflow);
  }
}

TEST_CASE("configuration round trip") {
  for (auto basis : {full(3, 2), build_basis({5, {Level::b, Level::c, Level::d}, 2, Sector::symmetric})}) {
    for (std::size_t i = 0; i < basis->dimension(); ++i) CHECK(basis->index(basis->configuration(i)) == i);
  }
}

TEST_CASE("atomic flip and collective flip agree") {
  auto basis = full(3, 0);
  PureState g = ground_state(basis);
  PureState sum = zero_state(basis);
  for (int j = 0; j < 3; ++j) sum.amplitudes += apply_atomic_flip(g, j, Level::b, Level::c).amplitudes;
  PureState coll = apply_collective_flip(g, Level::b, Level::c);
  CHECK((sum.amplitudes - coll.amplitudes).norm() < 1e-14);

  auto sym = build_basis({3, {Level::b, Level::c}, 0, Sector::symmetric});
  PureState s = apply_collective_flip(ground_state(sym), Level::b, Level::c);
  CHECK(s.norm() == doctest::Approx(std::sqrt(3.0)));
  PureState embedded = embed_symmetric(s);
  CHECK((embedded.amplitudes - coll.amplitudes).norm() < 1e-12);
}

TEST_CASE("flip on a symmetric basis is rejected") {
  auto sym = build_basis({3, {Level::b, Level::c}, 0, Sector::symmetric});
  CHECK_THROWS_AS(apply_atomic_flip(ground_state(sym), 0, Level::b, Level::c), Error);
}

TEST_CASE("cavity ladder truncation") {
  auto basis = full(1, 1);
  PureState one = ground_state(basis, 1);
  auto up = apply_cavity(one, Ladder::create);
  CHECK(up.truncated);
  auto down = apply_cavity(one, Ladder::annihilate);
  CHECK_FALSE(down.truncated);
  CHECK(down.state.amplitudes[basis->index(Configuration{{0}, 0})] == Complex(1.0, 0.0));
}

TEST_CASE("partial trace of an atom") {
  auto basis = full(2, 0);
  PureState g = ground_state(basis);
  PureState bell = g;
  bell.amplitudes = (g.amplitudes + apply_atomic_flip(apply_atomic_flip(g, 0, Level::b, Level::c), 1, Level::b,
                                                      Level::c).amplitudes) / std::sqrt(2.0);
  DensityOperator reduced = partial_trace_atom(bell, 0);
  CHECK(reduced.basis->atoms() == 1);
  CHECK(reduced.trace().real() == doctest::Approx(1.0));
  CHECK(std::abs(reduced.matrix(0, 1)) < 1e-14);
  CHECK(reduced.matrix(0, 0).real() == doctest::Approx(0.5));
  DensityOperator via_dense = partial_trace_atom(DensityOperator::from_pure(bell), 0);
  CHECK((via_dense.matrix - reduced.matrix).norm() < 1e-14);
}

TEST_CASE("density diagnostics") {
  auto basis = full(2, 1);
  PureState psi = ground_state(basis);
  psi.amplitudes.setRandom();
  DensityOperator W = DensityOperator::from_pure(psi.normalized());
  CHECK(W.trace().real() == doctest::Approx(1.0));
  CHECK(W.hermiticity_defect() < 1e-14);
  CHECK(W.min_eigenvalue() > -1e-12);
}
