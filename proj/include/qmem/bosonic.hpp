#pragma once

// Bosonic-limit engine: the cavity mode and N atomic spin-wave modes treated
// as exact bosons, truncated by total excitation number.  Number-conserving
// mode transforms make the truncation exact, so the polariton change of basis
// and the partial trace over bright polaritons are carried out without
// approximation.
//
// Mode labels.  Site frame: 0 = cavity a, 1 + j = atom j (j = 0..N-1, the
// one-based label is j + 1).  Polariton frame: 0 = dark polariton Psi,
// 1 = Phi_0, 1 + l = Phi_l for l = 1..N-1.
//
// Basis ordering: by total excitation, then by colexicographic rank of the
// sorted multiset of occupied mode labels.

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "qmem/statespace.hpp"
#include "qmem/types.hpp"

namespace qmem {

class ModeBasis {
 public:
  ModeBasis(int mode_count, int max_excitation, std::size_t cap = kDefaultDimensionCap);

  int mode_count() const { return modes_; }
  int max_excitation() const { return max_excitation_; }
  std::size_t dimension() const { return dimension_; }

  /// Sorted mode labels of the quanta in basis vector `index` (one entry per quantum).
  std::span<const std::uint16_t> quanta(std::size_t index) const;
  int total(std::size_t index) const { return sizes_[index]; }
  int occupation(std::size_t index, int mode) const;
  std::vector<int> occupations(std::size_t index) const;

  /// Index of a sorted quanta list; throws if it exceeds the cutoff.
  std::size_t index_of(std::span<const std::uint16_t> sorted_quanta) const;
  std::size_t index_of_occupations(std::span<const int> occupations) const;

  bool compatible(const ModeBasis& other) const {
    return modes_ == other.modes_ && max_excitation_ == other.max_excitation_;
  }

 private:
  int modes_;
  int max_excitation_;
  std::size_t dimension_ = 0;
  std::vector<std::size_t> sector_offset_;
  std::vector<std::vector<double>> binom_;  // binom_[n][k]
  std::vector<std::uint16_t> quanta_;       // dimension_ x max_excitation_
  std::vector<std::uint8_t> sizes_;
};

using ModeBasisPtr = std::shared_ptr<const ModeBasis>;

ModeBasisPtr build_mode_basis(int mode_count, int max_excitation,
                              std::size_t cap = kDefaultDimensionCap);

struct ModeState {
  ModeBasisPtr basis;
  CVector amplitudes;

  double norm() const { return amplitudes.norm(); }
  ModeState normalized() const;
};

struct ModeDensity {
  ModeBasisPtr basis;
  CMatrix matrix;

  static ModeDensity from_pure(const ModeState& state);
};

ModeState mode_vacuum(ModeBasisPtr basis);
ModeState mode_fock(ModeBasisPtr basis, std::span<const int> occupations);

/// Single ladder operator on one mode.  Creation past the cutoff throws CutoffExceeded.
ModeState apply_ladder(const ModeState& state, int mode, Ladder which);

/// sum_p coeffs[p] a_p^dagger (create) or sum_p coeffs[p] a_p (annihilate).
ModeState apply_linear(const ModeState& state, std::span<const Complex> coeffs, Ladder which);

/// (sum_p coeffs[p] a_p^dagger)^n / sqrt(n!) |vac>.
ModeState fock_in_mode(ModeBasisPtr basis, std::span<const Complex> coeffs, int n);

struct LadderOp {
  int mode;
  Ladder which;
};

/// coeff * (product of ladder operators, applied right to left).
struct ModeMonomial {
  Complex coeff{1.0, 0.0};
  std::vector<LadderOp> ops;
};

using ModePolynomial = std::vector<ModeMonomial>;

ModeState apply_mode_ops(const ModeState& state, const ModePolynomial& poly);

/// Rows: polariton annihilators in terms of site annihilators,
/// Phi_p = sum_q matrix(p, q) a_q.
struct ModeTransform {
  CMatrix matrix;
  double theta = kHalfPi;
  int atoms = 1;

  double unitarity_defect() const;
  /// Creation coefficients of polariton p over site modes: Phi_p^dagger = sum_q c_q a_q^dagger.
  std::vector<Complex> creation_in_site(int polariton) const;
  /// Annihilation coefficients of polariton p over site modes.
  std::vector<Complex> annihilation_in_site(int polariton) const;
};

ModeTransform polariton_transform(double theta, int atoms);

enum class FrameDirection { site_to_polariton, polariton_to_site };

ModeState change_basis(const ModeState& state, const ModeTransform& T, FrameDirection direction);
ModeDensity change_basis(const ModeDensity& W, const ModeTransform& T, FrameDirection direction);

/// Maps a single-mode creation vector between frames without touching a state.
std::vector<Complex> transform_mode_vector(std::span<const Complex> coeffs, const ModeTransform& T,
                                           FrameDirection direction);

/// Reduced operator on mode 0 of a state already expressed in the polariton
/// frame: (E_max + 1) x (E_max + 1) in the dark-mode number basis.
CMatrix dark_mode_reduced(const ModeState& polariton_state);
CMatrix dark_mode_reduced(const ModeDensity& polariton_density);

/// Tr_Phi of a site-frame state: change to the polariton frame then trace out
/// every bright mode.
CMatrix trace_out_bright(const ModeState& site_state, const ModeTransform& T);
CMatrix trace_out_bright(const ModeDensity& site_density, const ModeTransform& T);

/// One-body density matrix G(p, q) = <a_p^dagger a_q>.
CMatrix one_body_density(const ModeState& state);

/// Lifts an exact spin state with at most one c-excitation per atom into the
/// site frame (hard-core embedding: |c>_j -> a_j^dagger, photons -> cavity mode).
/// Requires levels {b, c} only.
ModeDensity embed_spin_density(const DensityOperator& W, int max_excitation);

}  // namespace qmem
