#pragma once

// Exact state engine: N three-or-four-level atoms tensored with one cavity
// mode truncated at n_max photons.
//
// Basis ordering (all golden values depend on it):
//  * full-product sector: lexicographic in (atom 1 level, ..., atom N level,
//    photon number) with levels ranked by their position in `levels` and the
//    photon number varying fastest.
//  * symmetric sector: lexicographic in (occupation counts of levels[1],
//    levels[2], ..., photon number); the count of levels[0] is implied.

#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "qmem/types.hpp"

namespace qmem {

enum class Level : std::uint8_t { b, c, a, d };
enum class Sector { full_product, symmetric };
enum class Ladder { annihilate, create };

const char* to_string(Level level);

struct BasisSpec {
  int atoms = 1;
  std::vector<Level> levels{Level::b, Level::c};
  int n_max = 0;
  Sector sector = Sector::full_product;
};

/// Occupation description of one basis vector.  In the full-product sector
/// `atoms` holds one level slot per atom; in the symmetric sector it holds the
/// occupation count of every level slot.
struct Configuration {
  std::vector<int> atoms;
  int photons = 0;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

class Basis {
 public:
  explicit Basis(BasisSpec spec, std::size_t cap = kDefaultDimensionCap);

  const BasisSpec& spec() const { return spec_; }
  int atoms() const { return spec_.atoms; }
  int n_max() const { return spec_.n_max; }
  Sector sector() const { return spec_.sector; }
  int level_count() const { return static_cast<int>(spec_.levels.size()); }
  std::size_t dimension() const { return dimension_; }

  /// Slot of `level` in the level list, or -1.
  int slot(Level level) const;
  bool has(Level level) const { return slot(level) >= 0; }

  Configuration configuration(std::size_t index) const;
  std::size_t index(const Configuration& config) const;

  // Full-product helpers (no bounds checks on the hot path).
  std::size_t atom_stride(int atom) const { return atom_strides_[atom]; }
  int atom_slot(std::size_t index, int atom) const {
    return static_cast<int>((index / atom_strides_[atom]) % spec_.levels.size());
  }
  int photons(std::size_t index) const {
    return static_cast<int>(index % static_cast<std::size_t>(spec_.n_max + 1));
  }

  // Symmetric-sector helper: count of level slot `s` in basis vector `index`.
  int symmetric_count(std::size_t index, int s) const;

  bool compatible(const Basis& other) const;

 private:
  BasisSpec spec_;
  std::size_t dimension_ = 0;
  std::vector<std::size_t> atom_strides_;
  // Symmetric sector: count tuples (slot 1..L-1) in enumeration order.
  std::vector<std::vector<int>> sym_counts_;
};

using BasisPtr = std::shared_ptr<const Basis>;

BasisPtr build_basis(const BasisSpec& spec, std::size_t cap = kDefaultDimensionCap);

struct PureState {
  BasisPtr basis;
  CVector amplitudes;

  double norm() const { return amplitudes.norm(); }
  PureState normalized() const;
};

PureState basis_state(BasisPtr basis, const Configuration& config);
PureState zero_state(BasisPtr basis);

/// |b...b> with `photons` cavity photons.
PureState ground_state(BasisPtr basis, int photons = 0);

struct DensityOperator {
  BasisPtr basis;
  CMatrix matrix;

  static DensityOperator from_pure(const PureState& state);
  Complex trace() const { return matrix.trace(); }
  double hermiticity_defect() const;
  double min_eigenvalue() const;
};

/// sigma^j_{to,from} |psi> = |to>_j<from| |psi>.  Full-product sector only.
PureState apply_atomic_flip(const PureState& state, int atom, Level from, Level to);

/// Arbitrary single-atom operator given in the basis's level-slot order.
PureState apply_atomic_operator(const PureState& state, int atom, const CMatrix& op);

/// sum_j sigma^j_{to,from}; valid in both sectors.
PureState apply_collective_flip(const PureState& state, Level from, Level to);

struct CavityResult {
  PureState state;
  bool truncated = false;  // a nonzero amplitude was pushed past n_max
};

CavityResult apply_cavity(const PureState& state, Ladder which);

DensityOperator partial_trace_atom(const DensityOperator& W, int atom);
DensityOperator partial_trace_atom(const PureState& psi, int atom);

/// Maps a symmetric-sector state to the full-product sector with the same
/// atoms, levels and photon cutoff.
PureState embed_symmetric(const PureState& symmetric, std::size_t cap = kDefaultDimensionCap);

/// Partial trace over all atoms: reduced cavity density matrix, not renormalized.
CMatrix cavity_reduced(const PureState& state);

/// Sparse matrix of a linear map given by its action on basis states.
template <typename Map>
Eigen::SparseMatrix<Complex> build_operator(const BasisPtr& basis, Map&& apply) {
  const auto dim = static_cast<Eigen::Index>(basis->dimension());
  std::vector<Eigen::Triplet<Complex>> triplets;
  PureState unit{basis, CVector::Zero(dim)};
  for (Eigen::Index col = 0; col < dim; ++col) {
    unit.amplitudes.setZero();
    unit.amplitudes[col] = 1.0;
    const PureState image = apply(unit);
    for (Eigen::Index row = 0; row < dim; ++row) {
      if (image.amplitudes[row] != Complex{}) triplets.emplace_back(row, col, image.amplitudes[row]);
    }
  }
  Eigen::SparseMatrix<Complex> op(dim, dim);
  op.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

double binomial(int n, int k);

}  // namespace qmem
