#include "qmem/bosonic.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>

namespace qmem {

namespace {

constexpr std::uint16_t kEmpty = 0xFFFF;

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

ModeBasis::ModeBasis(int mode_count, int max_excitation, std::size_t cap)
    : modes_(mode_count), max_excitation_(max_excitation) {
  if (mode_count < 1 || mode_count >= kEmpty)
    throw Error(ErrorKind::invalid_argument, "mode count out of range");
  if (max_excitation < 0 || max_excitation > 64)
    throw Error(ErrorKind::invalid_argument, "excitation cutoff out of range");
  const int top = modes_ + max_excitation_;
  binom_.assign(top + 1, std::vector<double>(max_excitation_ + 2, 0.0));
  for (int n = 0; n <= top; ++n) {
    binom_[n][0] = 1.0;
    for (int k = 1; k <= std::min(n, max_excitation_ + 1); ++k)
      binom_[n][k] = binom_[n - 1][k - 1] + (k <= n - 1 ? binom_[n - 1][k] : 0.0);
  }
  double total = 0.0;
  sector_offset_.assign(max_excitation_ + 2, 0);
  for (int e = 0; e <= max_excitation_; ++e) {
    sector_offset_[e] = static_cast<std::size_t>(total);
    total += binom_[modes_ + e - 1][e];
  }
  sector_offset_[max_excitation_ + 1] = static_cast<std::size_t>(total);
  if (total > static_cast<double>(cap))
    throw Error(ErrorKind::dimension_overflow,
                "mode basis dimension " + std::to_string(total) + " exceeds cap");
  dimension_ = static_cast<std::size_t>(total);

  const auto width = static_cast<std::size_t>(std::max(max_excitation_, 1));
  quanta_.assign(dimension_ * width, kEmpty);
  sizes_.assign(dimension_, 0);
  std::vector<std::uint16_t> multiset;
  for (int e = 0; e <= max_excitation_; ++e) {
    // Walk all non-decreasing sequences of length e over [0, modes_).
    multiset.assign(e, 0);
    while (true) {
      const std::size_t idx = index_of(multiset);
      sizes_[idx] = static_cast<std::uint8_t>(e);
      std::copy(multiset.begin(), multiset.end(), quanta_.begin() + idx * width);
      int pos = e - 1;
      while (pos >= 0 && multiset[pos] == modes_ - 1) --pos;
      if (pos < 0) break;
      const std::uint16_t next = multiset[pos] + 1;
      for (int k = pos; k < e; ++k) multiset[k] = next;
    }
  }
}

std::span<const std::uint16_t> ModeBasis::quanta(std::size_t index) const {
  const auto width = static_cast<std::size_t>(std::max(max_excitation_, 1));
  return {quanta_.data() + index * width, sizes_[index]};
}

int ModeBasis::occupation(std::size_t index, int mode) const {
  const auto q = quanta(index);
  return static_cast<int>(std::count(q.begin(), q.end(), static_cast<std::uint16_t>(mode)));
}

std::vector<int> ModeBasis::occupations(std::size_t index) const {
  std::vector<int> occ(modes_, 0);
  for (auto m : quanta(index)) occ[m] += 1;
  return occ;
}

std::size_t ModeBasis::index_of(std::span<const std::uint16_t> sorted_quanta) const {
  const int e = static_cast<int>(sorted_quanta.size());
  if (e > max_excitation_)
    throw Error(ErrorKind::cutoff_exceeded, "occupation exceeds excitation cutoff");
  // Multisets map to strictly increasing combinations c_i = m_i + i; colex rank.
  double rank = 0.0;
  for (int i = 0; i < e; ++i) {
    const int c = sorted_quanta[i] + i;
    rank += binom_[c][i + 1];
  }
  return sector_offset_[e] + static_cast<std::size_t>(rank);
}

std::size_t ModeBasis::index_of_occupations(std::span<const int> occupations) const {
  if (static_cast<int>(occupations.size()) != modes_)
    throw Error(ErrorKind::dimension_mismatch, "occupation tuple has wrong length");
  std::vector<std::uint16_t> q;
  for (int m = 0; m < modes_; ++m) {
    if (occupations[m] < 0) throw Error(ErrorKind::invalid_argument, "negative occupation");
    q.insert(q.end(), occupations[m], static_cast<std::uint16_t>(m));
  }
  return index_of(q);
}

ModeBasisPtr build_mode_basis(int mode_count, int max_excitation, std::size_t cap) {
  return std::make_shared<const ModeBasis>(mode_count, max_excitation, cap);
}

ModeState ModeState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw Error(ErrorKind::zero_probability, "cannot normalize the zero vector");
  return {basis, amplitudes / n};
}

ModeDensity ModeDensity::from_pure(const ModeState& state) {
  if (state.basis->dimension() > kDenseDensityCap)
    throw Error(ErrorKind::dimension_overflow, "dense mode density too large");
  return {state.basis, state.amplitudes * state.amplitudes.adjoint()};
}

ModeState mode_vacuum(ModeBasisPtr basis) {
  const auto dim = static_cast<Eigen::Index>(basis->dimension());
  ModeState s{std::move(basis), CVector::Zero(dim)};
  s.amplitudes[0] = 1.0;
  return s;
}

ModeState mode_fock(ModeBasisPtr basis, std::span<const int> occupations) {
  const auto dim = static_cast<Eigen::Index>(basis->dimension());
  const auto idx = static_cast<Eigen::Index>(basis->index_of_occupations(occupations));
  ModeState s{std::move(basis), CVector::Zero(dim)};
  s.amplitudes[idx] = 1.0;
  return s;
}

namespace {

using SparseAmplitudes = std::unordered_map<std::size_t, Complex>;

// Adds coeff * a_mode^(dagger) |index> into `out`; returns false on cutoff overflow.
template <typename Sink>
bool ladder_into(const ModeBasis& basis, std::size_t index, int mode, Ladder which, Complex coeff,
                 Sink&& sink) {
  const auto q = basis.quanta(index);
  std::uint16_t buffer[72];
  const auto m = static_cast<std::uint16_t>(mode);
  const int n_mode = static_cast<int>(std::count(q.begin(), q.end(), m));
  if (which == Ladder::annihilate) {
    if (n_mode == 0) return true;
    int k = 0;
    bool removed = false;
    for (auto v : q) {
      if (v == m && !removed) {
        removed = true;
        continue;
      }
      buffer[k++] = v;
    }
    sink(basis.index_of({buffer, static_cast<std::size_t>(k)}), coeff * std::sqrt(double(n_mode)));
    return true;
  }
  if (static_cast<int>(q.size()) >= basis.max_excitation()) return false;
  int k = 0;
  bool inserted = false;
  for (auto v : q) {
    if (!inserted && v >= m) {
      buffer[k++] = m;
      inserted = true;
    }
    buffer[k++] = v;
  }
  if (!inserted) buffer[k++] = m;
  sink(basis.index_of({buffer, static_cast<std::size_t>(k)}), coeff * std::sqrt(n_mode + 1.0));
  return true;
}

void check_mode(const ModeBasis& basis, int mode) {
  if (mode < 0 || mode >= basis.mode_count())
    throw Error(ErrorKind::invalid_argument, "mode index out of range");
}

SparseAmplitudes linear_sparse(const ModeBasis& basis, const SparseAmplitudes& in,
                               std::span<const Complex> coeffs, Ladder which) {
  SparseAmplitudes out;
  out.reserve(in.size() * 4);
  for (const auto& [idx, amp] : in) {
    for (int p = 0; p < basis.mode_count(); ++p) {
      if (coeffs[p] == Complex{}) continue;
      const bool ok = ladder_into(basis, idx, p, which, coeffs[p] * amp,
                                  [&](std::size_t j, Complex v) { out[j] += v; });
      if (!ok)
        throw Error(ErrorKind::cutoff_exceeded, "creation operator leaves the excitation cutoff");
    }
  }
  return out;
}

}  // namespace

ModeState apply_ladder(const ModeState& state, int mode, Ladder which) {
  const ModeBasis& basis = *state.basis;
  check_mode(basis, mode);
  ModeState out{state.basis, CVector::Zero(state.amplitudes.size())};
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{}) continue;
    const bool ok = ladder_into(basis, i, mode, which, amp, [&](std::size_t j, Complex v) {
      out.amplitudes[static_cast<Eigen::Index>(j)] += v;
    });
    if (!ok) throw Error(ErrorKind::cutoff_exceeded, "creation operator leaves the excitation cutoff");
  }
  return out;
}

ModeState apply_linear(const ModeState& state, std::span<const Complex> coeffs, Ladder which) {
  const ModeBasis& basis = *state.basis;
  if (static_cast<int>(coeffs.size()) != basis.mode_count())
    throw Error(ErrorKind::dimension_mismatch, "coefficient vector has wrong length");
  ModeState out{state.basis, CVector::Zero(state.amplitudes.size())};
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{}) continue;
    for (int p = 0; p < basis.mode_count(); ++p) {
      if (coeffs[p] == Complex{}) continue;
      const bool ok = ladder_into(basis, i, p, which, coeffs[p] * amp, [&](std::size_t j, Complex v) {
        out.amplitudes[static_cast<Eigen::Index>(j)] += v;
      });
      if (!ok)
        throw Error(ErrorKind::cutoff_exceeded, "creation operator leaves the excitation cutoff");
    }
  }
  return out;
}

ModeState fock_in_mode(ModeBasisPtr basis, std::span<const Complex> coeffs, int n) {
  if (static_cast<int>(coeffs.size()) != basis->mode_count())
    throw Error(ErrorKind::dimension_mismatch, "coefficient vector has wrong length");
  if (n > basis->max_excitation())
    throw Error(ErrorKind::cutoff_exceeded, "Fock number exceeds excitation cutoff");
  SparseAmplitudes sparse{{0, Complex{1.0, 0.0}}};
  for (int k = 0; k < n; ++k) sparse = linear_sparse(*basis, sparse, coeffs, Ladder::create);
  const double scale = 1.0 / std::sqrt(factorial(n));
  ModeState out{basis, CVector::Zero(static_cast<Eigen::Index>(basis->dimension()))};
  for (const auto& [idx, amp] : sparse) out.amplitudes[static_cast<Eigen::Index>(idx)] = amp * scale;
  return out;
}

ModeState apply_mode_ops(const ModeState& state, const ModePolynomial& poly) {
  ModeState out{state.basis, CVector::Zero(state.amplitudes.size())};
  for (const auto& term : poly) {
    ModeState piece = state;
    for (auto it = term.ops.rbegin(); it != term.ops.rend(); ++it)
      piece = apply_ladder(piece, it->mode, it->which);
    out.amplitudes += term.coeff * piece.amplitudes;
  }
  return out;
}

double ModeTransform::unitarity_defect() const {
  const auto n = matrix.rows();
  return (matrix * matrix.adjoint() - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

std::vector<Complex> ModeTransform::creation_in_site(int polariton) const {
  std::vector<Complex> c(static_cast<std::size_t>(matrix.cols()));
  for (Eigen::Index q = 0; q < matrix.cols(); ++q) c[q] = std::conj(matrix(polariton, q));
  return c;
}

std::vector<Complex> ModeTransform::annihilation_in_site(int polariton) const {
  std::vector<Complex> c(static_cast<std::size_t>(matrix.cols()));
  for (Eigen::Index q = 0; q < matrix.cols(); ++q) c[q] = matrix(polariton, q);
  return c;
}

ModeTransform polariton_transform(double theta, int atoms) {
  if (atoms < 1) throw Error(ErrorKind::invalid_argument, "atom count must be >= 1");
  if (theta < 0.0 || theta > kHalfPi)
    throw Error(ErrorKind::invalid_argument, "mixing angle must lie in [0, pi/2]");
  const double c = mixing_cos(theta);
  const double s = mixing_sin(theta);
  const double inv = 1.0 / std::sqrt(static_cast<double>(atoms));
  const int modes = atoms + 1;
  ModeTransform T{CMatrix::Zero(modes, modes), theta, atoms};
  T.matrix(0, 0) = c;
  T.matrix(1, 0) = s;
  for (int j = 0; j < atoms; ++j) {
    T.matrix(0, 1 + j) = -s * inv;
    T.matrix(1, 1 + j) = c * inv;
    for (int l = 1; l < atoms; ++l) T.matrix(1 + l, 1 + j) = fourier_phase(l, j + 1, atoms) * inv;
  }
  return T;
}

namespace {

// old_q^dagger = sum_r S(r, q) new_r^dagger
CMatrix substitution(const ModeTransform& T, FrameDirection direction) {
  if (direction == FrameDirection::site_to_polariton) return T.matrix;  // a_q^dag = sum_p T_pq Phi_p^dag
  return T.matrix.adjoint();  // Phi_p^dag = sum_q conj(T_pq) a_q^dag
}

// Sparse image of every basis vector touched by `support`.
std::vector<SparseAmplitudes> expand_columns(const ModeBasis& basis, const CMatrix& S,
                                             const std::vector<std::size_t>& support) {
  std::vector<SparseAmplitudes> columns;
  columns.reserve(support.size());
  std::vector<Complex> column(static_cast<std::size_t>(basis.mode_count()));
  for (std::size_t idx : support) {
    SparseAmplitudes sparse{{0, Complex{1.0, 0.0}}};
    const auto q = basis.quanta(idx);
    double norm = 1.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
      for (int r = 0; r < basis.mode_count(); ++r) column[r] = S(r, q[k]);
      sparse = linear_sparse(basis, sparse, column, Ladder::create);
      const int n = basis.occupation(idx, q[k]);
      if (k + 1 == q.size() || q[k + 1] != q[k]) norm *= factorial(n);
    }
    const double scale = 1.0 / std::sqrt(norm);
    for (auto& [j, v] : sparse) v *= scale;
    columns.push_back(std::move(sparse));
  }
  return columns;
}

void check_transform(const ModeBasis& basis, const ModeTransform& T) {
  if (T.matrix.rows() != basis.mode_count())
    throw Error(ErrorKind::dimension_mismatch, "transform size does not match mode count");
}

}  // namespace

ModeState change_basis(const ModeState& state, const ModeTransform& T, FrameDirection direction) {
  const ModeBasis& basis = *state.basis;
  check_transform(basis, T);
  const CMatrix S = substitution(T, direction);
  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < basis.dimension(); ++i)
    if (state.amplitudes[static_cast<Eigen::Index>(i)] != Complex{}) support.push_back(i);
  const auto columns = expand_columns(basis, S, support);
  ModeState out{state.basis, CVector::Zero(state.amplitudes.size())};
  for (std::size_t k = 0; k < support.size(); ++k) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(support[k])];
    for (const auto& [j, v] : columns[k]) {
      if (basis.total(j) != basis.total(support[k]))
        throw Error(ErrorKind::cutoff_loss, "transform changed the excitation number");
      out.amplitudes[static_cast<Eigen::Index>(j)] += amp * v;
    }
  }
  return out;
}

ModeDensity change_basis(const ModeDensity& W, const ModeTransform& T, FrameDirection direction) {
  const ModeBasis& basis = *W.basis;
  check_transform(basis, T);
  const CMatrix S = substitution(T, direction);
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  std::vector<std::size_t> support;
  for (Eigen::Index i = 0; i < dim; ++i)
    if (W.matrix.row(i).cwiseAbs().maxCoeff() != 0.0 || W.matrix.col(i).cwiseAbs().maxCoeff() != 0.0)
      support.push_back(static_cast<std::size_t>(i));
  const auto columns = expand_columns(basis, S, support);
  // U restricted to the support: dim x |support|.
  CMatrix U = CMatrix::Zero(dim, static_cast<Eigen::Index>(support.size()));
  CMatrix Wsub(static_cast<Eigen::Index>(support.size()), static_cast<Eigen::Index>(support.size()));
  for (std::size_t k = 0; k < support.size(); ++k) {
    for (const auto& [j, v] : columns[k]) U(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) = v;
    for (std::size_t m = 0; m < support.size(); ++m)
      Wsub(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(m)) =
          W.matrix(static_cast<Eigen::Index>(support[k]), static_cast<Eigen::Index>(support[m]));
  }
  return {W.basis, U * Wsub * U.adjoint()};
}

std::vector<Complex> transform_mode_vector(std::span<const Complex> coeffs, const ModeTransform& T,
                                           FrameDirection direction) {
  const CMatrix S = substitution(T, direction);
  if (static_cast<Eigen::Index>(coeffs.size()) != S.cols())
    throw Error(ErrorKind::dimension_mismatch, "mode vector has wrong length");
  std::vector<Complex> out(coeffs.size(), Complex{});
  for (Eigen::Index r = 0; r < S.rows(); ++r)
    for (Eigen::Index q = 0; q < S.cols(); ++q) out[r] += S(r, q) * coeffs[q];
  return out;
}

namespace {

// Groups basis indices by their bright content (quanta with label > 0).
struct DarkSplit {
  std::vector<std::size_t> rest;  // index of the bright remainder in the same basis
  std::vector<int> dark;          // occupation of mode 0
};

DarkSplit split_dark(const ModeBasis& basis) {
  DarkSplit split;
  split.rest.resize(basis.dimension());
  split.dark.resize(basis.dimension());
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const auto q = basis.quanta(i);
    const auto zeros = static_cast<std::size_t>(std::count(q.begin(), q.end(), std::uint16_t{0}));
    split.dark[i] = static_cast<int>(zeros);
    split.rest[i] = basis.index_of(q.subspan(zeros));
  }
  return split;
}

}  // namespace

CMatrix dark_mode_reduced(const ModeState& polariton_state) {
  const ModeBasis& basis = *polariton_state.basis;
  const int E = basis.max_excitation();
  CMatrix rho = CMatrix::Zero(E + 1, E + 1);
  std::unordered_map<std::size_t, std::vector<std::pair<int, Complex>>> groups;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const Complex amp = polariton_state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{}) continue;
    const auto q = basis.quanta(i);
    const auto zeros = static_cast<std::size_t>(std::count(q.begin(), q.end(), std::uint16_t{0}));
    groups[basis.index_of(q.subspan(zeros))].emplace_back(static_cast<int>(zeros), amp);
  }
  for (const auto& [rest, members] : groups)
    for (const auto& [n, an] : members)
      for (const auto& [m, am] : members) rho(n, m) += an * std::conj(am);
  return rho;
}

CMatrix dark_mode_reduced(const ModeDensity& polariton_density) {
  const ModeBasis& basis = *polariton_density.basis;
  const int E = basis.max_excitation();
  const DarkSplit split = split_dark(basis);
  std::unordered_map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < basis.dimension(); ++i) groups[split.rest[i]].push_back(i);
  CMatrix rho = CMatrix::Zero(E + 1, E + 1);
  for (const auto& [rest, members] : groups)
    for (std::size_t i : members)
      for (std::size_t k : members)
        rho(split.dark[i], split.dark[k]) +=
            polariton_density.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
  return rho;
}

CMatrix trace_out_bright(const ModeState& site_state, const ModeTransform& T) {
  return dark_mode_reduced(change_basis(site_state, T, FrameDirection::site_to_polariton));
}

CMatrix trace_out_bright(const ModeDensity& site_density, const ModeTransform& T) {
  return dark_mode_reduced(change_basis(site_density, T, FrameDirection::site_to_polariton));
}

CMatrix one_body_density(const ModeState& state) {
  const int M = state.basis->mode_count();
  CMatrix G = CMatrix::Zero(M, M);
  std::vector<ModeState> lowered;
  lowered.reserve(static_cast<std::size_t>(M));
  for (int p = 0; p < M; ++p) lowered.push_back(apply_ladder(state, p, Ladder::annihilate));
  for (int p = 0; p < M; ++p)
    for (int q = 0; q < M; ++q) G(p, q) = lowered[p].amplitudes.dot(lowered[q].amplitudes);
  return G;
}

ModeDensity embed_spin_density(const DensityOperator& W, int max_excitation) {
  const Basis& basis = *W.basis;
  if (basis.sector() != Sector::full_product || basis.level_count() != 2)
    throw Error(ErrorKind::sector_mismatch, "hard-core embedding needs full-product {b,c} states");
  auto modes = build_mode_basis(basis.atoms() + 1, max_excitation);
  std::vector<Eigen::Index> target(basis.dimension());
  std::vector<int> occ(static_cast<std::size_t>(basis.atoms() + 1));
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    occ[0] = basis.photons(i);
    int total = occ[0];
    for (int j = 0; j < basis.atoms(); ++j) {
      occ[1 + j] = basis.atom_slot(i, j);
      total += occ[1 + j];
    }
    target[i] = total <= max_excitation ? static_cast<Eigen::Index>(modes->index_of_occupations(occ)) : -1;
  }
  const auto dim = static_cast<Eigen::Index>(modes->dimension());
  CMatrix out = CMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < basis.dimension(); ++i)
    for (std::size_t k = 0; k < basis.dimension(); ++k) {
      const Complex v = W.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      if (v == Complex{}) continue;
      if (target[i] < 0 || target[k] < 0)
        throw Error(ErrorKind::cutoff_exceeded, "spin state exceeds bosonic excitation cutoff");
      out(target[i], target[k]) += v;
    }
  return {modes, std::move(out)};
}

}  // namespace qmem
