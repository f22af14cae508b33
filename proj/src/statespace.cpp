#include "qmem/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace qmem {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_overflow: return "DimensionOverflow";
    case ErrorKind::dimension_mismatch: return "DimensionMismatch";
    case ErrorKind::sector_mismatch: return "SectorMismatch";
    case ErrorKind::excitation_overflow: return "ExcitationOverflow";
    case ErrorKind::cutoff_exceeded: return "CutoffExceeded";
    case ErrorKind::cutoff_loss: return "CutoffLoss";
    case ErrorKind::zero_probability: return "ZeroProbability";
    case ErrorKind::step_too_large: return "StepTooLarge";
    case ErrorKind::singular_schedule: return "SingularSchedule";
    case ErrorKind::unknown_scenario: return "UnknownScenario";
    case ErrorKind::seed_missing: return "SeedMissing";
    case ErrorKind::config_invalid: return "ConfigInvalid";
    case ErrorKind::invalid_argument: return "InvalidArgument";
  }
  return "Error";
}

const char* to_string(Level level) {
  switch (level) {
    case Level::b: return "b";
    case Level::c: return "c";
    case Level::a: return "a";
    case Level::d: return "d";
  }
  return "?";
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

namespace {

void enumerate_counts(int slots, int remaining, std::vector<int>& prefix,
                      std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == slots) {
    out.push_back(prefix);
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    prefix.push_back(k);
    enumerate_counts(slots, remaining - k, prefix, out);
    prefix.pop_back();
  }
}

double multinomial(int total, std::span<const int> counts) {
  double log_value = std::lgamma(total + 1.0);
  for (int k : counts) log_value -= std::lgamma(k + 1.0);
  return std::exp(log_value);
}

}  // namespace

Basis::Basis(BasisSpec spec, std::size_t cap) : spec_(std::move(spec)) {
  if (spec_.atoms < 1) throw Error(ErrorKind::invalid_argument, "atom count must be >= 1");
  if (spec_.n_max < 0) throw Error(ErrorKind::invalid_argument, "n_max must be >= 0");
  if (spec_.levels.empty() || spec_.levels.front() != Level::b)
    throw Error(ErrorKind::invalid_argument, "level list must start with b");
  for (std::size_t i = 0; i < spec_.levels.size(); ++i)
    for (std::size_t k = i + 1; k < spec_.levels.size(); ++k)
      if (spec_.levels[i] == spec_.levels[k])
        throw Error(ErrorKind::invalid_argument, "duplicate level");

  const auto levels = static_cast<double>(spec_.levels.size());
  const double photon_states = spec_.n_max + 1.0;
  if (spec_.sector == Sector::full_product) {
    const double dim = std::pow(levels, spec_.atoms) * photon_states;
    if (dim > static_cast<double>(cap))
      throw Error(ErrorKind::dimension_overflow,
                  "full-product dimension " + std::to_string(dim) + " exceeds cap " +
                      std::to_string(cap));
    dimension_ = static_cast<std::size_t>(dim);
    atom_strides_.assign(spec_.atoms, 0);
    std::size_t stride = static_cast<std::size_t>(spec_.n_max + 1);
    for (int j = spec_.atoms - 1; j >= 0; --j) {
      atom_strides_[j] = stride;
      stride *= spec_.levels.size();
    }
  } else {
    const double tuples = binomial(spec_.atoms + static_cast<int>(levels) - 1,
                                   static_cast<int>(levels) - 1);
    if (tuples * photon_states > static_cast<double>(cap))
      throw Error(ErrorKind::dimension_overflow, "symmetric dimension exceeds cap");
    std::vector<int> prefix;
    enumerate_counts(static_cast<int>(levels) - 1, spec_.atoms, prefix, sym_counts_);
    dimension_ = sym_counts_.size() * static_cast<std::size_t>(spec_.n_max + 1);
  }
}

int Basis::slot(Level level) const {
  const auto it = std::find(spec_.levels.begin(), spec_.levels.end(), level);
  return it == spec_.levels.end() ? -1 : static_cast<int>(it - spec_.levels.begin());
}

int Basis::symmetric_count(std::size_t index, int s) const {
  const auto& tuple = sym_counts_[index / static_cast<std::size_t>(spec_.n_max + 1)];
  if (s > 0) return tuple[s - 1];
  int rest = 0;
  for (int k : tuple) rest += k;
  return spec_.atoms - rest;
}

Configuration Basis::configuration(std::size_t index) const {
  if (index >= dimension_) throw Error(ErrorKind::invalid_argument, "basis index out of range");
  Configuration config;
  config.photons = photons(index);
  if (spec_.sector == Sector::full_product) {
    config.atoms.resize(spec_.atoms);
    for (int j = 0; j < spec_.atoms; ++j) config.atoms[j] = atom_slot(index, j);
  } else {
    config.atoms.resize(spec_.levels.size());
    for (int s = 0; s < level_count(); ++s) config.atoms[s] = symmetric_count(index, s);
  }
  return config;
}

std::size_t Basis::index(const Configuration& config) const {
  if (config.photons < 0 || config.photons > spec_.n_max)
    throw Error(ErrorKind::invalid_argument, "photon number outside cutoff");
  const auto photon_states = static_cast<std::size_t>(spec_.n_max + 1);
  if (spec_.sector == Sector::full_product) {
    if (static_cast<int>(config.atoms.size()) != spec_.atoms)
      throw Error(ErrorKind::invalid_argument, "configuration has wrong atom count");
    std::size_t idx = static_cast<std::size_t>(config.photons);
    for (int j = 0; j < spec_.atoms; ++j) {
      const int s = config.atoms[j];
      if (s < 0 || s >= level_count()) throw Error(ErrorKind::invalid_argument, "bad level slot");
      idx += static_cast<std::size_t>(s) * atom_strides_[j];
    }
    return idx;
  }
  if (static_cast<int>(config.atoms.size()) != level_count())
    throw Error(ErrorKind::invalid_argument, "configuration has wrong slot count");
  int total = 0;
  for (int k : config.atoms) {
    if (k < 0) throw Error(ErrorKind::invalid_argument, "negative occupation");
    total += k;
  }
  if (total != spec_.atoms) throw Error(ErrorKind::invalid_argument, "occupations must sum to N");
  const std::vector<int> key(config.atoms.begin() + 1, config.atoms.end());
  const auto it = std::lower_bound(sym_counts_.begin(), sym_counts_.end(), key);
  return static_cast<std::size_t>(it - sym_counts_.begin()) * photon_states +
         static_cast<std::size_t>(config.photons);
}

bool Basis::compatible(const Basis& other) const {
  return spec_.atoms == other.spec_.atoms && spec_.levels == other.spec_.levels &&
         spec_.n_max == other.spec_.n_max && spec_.sector == other.spec_.sector;
}

BasisPtr build_basis(const BasisSpec& spec, std::size_t cap) {
  return std::make_shared<const Basis>(spec, cap);
}

PureState PureState::normalized() const {
  const double n = norm();
  if (n == 0.0) throw Error(ErrorKind::zero_probability, "cannot normalize the zero vector");
  return {basis, amplitudes / n};
}

PureState zero_state(BasisPtr basis) {
  const auto dim = static_cast<Eigen::Index>(basis->dimension());
  return {std::move(basis), CVector::Zero(dim)};
}

PureState basis_state(BasisPtr basis, const Configuration& config) {
  PureState state = zero_state(basis);
  state.amplitudes[static_cast<Eigen::Index>(basis->index(config))] = 1.0;
  return state;
}

PureState ground_state(BasisPtr basis, int photons) {
  Configuration config;
  config.photons = photons;
  if (basis->sector() == Sector::full_product) {
    config.atoms.assign(basis->atoms(), 0);
  } else {
    config.atoms.assign(basis->level_count(), 0);
    config.atoms[0] = basis->atoms();
  }
  return basis_state(std::move(basis), config);
}

DensityOperator DensityOperator::from_pure(const PureState& state) {
  if (state.basis->dimension() > kDenseDensityCap)
    throw Error(ErrorKind::dimension_overflow, "dense density matrix too large");
  return {state.basis, state.amplitudes * state.amplitudes.adjoint()};
}

double DensityOperator::hermiticity_defect() const {
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

double DensityOperator::min_eigenvalue() const {
  const CMatrix herm = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

namespace {

void require_full_product(const Basis& basis, const char* what) {
  if (basis.sector() != Sector::full_product)
    throw Error(ErrorKind::sector_mismatch, std::string(what) + " needs the full-product sector");
}

int require_slot(const Basis& basis, Level level) {
  const int s = basis.slot(level);
  if (s < 0)
    throw Error(ErrorKind::invalid_argument, std::string("level ") + to_string(level) +
                                                 " not in basis");
  return s;
}

void require_atom(const Basis& basis, int atom) {
  if (atom < 0 || atom >= basis.atoms())
    throw Error(ErrorKind::invalid_argument, "atom index out of range");
}

}  // namespace

PureState apply_atomic_flip(const PureState& state, int atom, Level from, Level to) {
  const Basis& basis = *state.basis;
  require_full_product(basis, "single-atom flip");
  require_atom(basis, atom);
  const int s_from = require_slot(basis, from);
  const int s_to = require_slot(basis, to);
  const std::size_t stride = basis.atom_stride(atom);
  PureState out = zero_state(state.basis);
  const auto dim = basis.dimension();
  for (std::size_t i = 0; i < dim; ++i) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{} || basis.atom_slot(i, atom) != s_from) continue;
    const std::size_t target = i + static_cast<std::size_t>(s_to) * stride -
                               static_cast<std::size_t>(s_from) * stride;
    out.amplitudes[static_cast<Eigen::Index>(target)] += amp;
  }
  return out;
}

PureState apply_atomic_operator(const PureState& state, int atom, const CMatrix& op) {
  const Basis& basis = *state.basis;
  require_full_product(basis, "single-atom operator");
  require_atom(basis, atom);
  const int levels = basis.level_count();
  if (op.rows() != levels || op.cols() != levels)
    throw Error(ErrorKind::dimension_mismatch, "single-atom operator has wrong size");
  const std::size_t stride = basis.atom_stride(atom);
  PureState out = zero_state(state.basis);
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{}) continue;
    const int s = basis.atom_slot(i, atom);
    const std::size_t base = i - static_cast<std::size_t>(s) * stride;
    for (int r = 0; r < levels; ++r) {
      const Complex m = op(r, s);
      if (m == Complex{}) continue;
      out.amplitudes[static_cast<Eigen::Index>(base + static_cast<std::size_t>(r) * stride)] +=
          m * amp;
    }
  }
  return out;
}

PureState apply_collective_flip(const PureState& state, Level from, Level to) {
  const Basis& basis = *state.basis;
  if (basis.sector() == Sector::full_product) {
    PureState out = zero_state(state.basis);
    for (int j = 0; j < basis.atoms(); ++j)
      out.amplitudes += apply_atomic_flip(state, j, from, to).amplitudes;
    return out;
  }
  const int s_from = require_slot(basis, from);
  const int s_to = require_slot(basis, to);
  PureState out = zero_state(state.basis);
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{}) continue;
    Configuration config = basis.configuration(i);
    const int n_from = config.atoms[s_from];
    if (n_from == 0) continue;
    if (s_from == s_to) {
      out.amplitudes[static_cast<Eigen::Index>(i)] += static_cast<double>(n_from) * amp;
      continue;
    }
    const int n_to = config.atoms[s_to];
    config.atoms[s_from] -= 1;
    config.atoms[s_to] += 1;
    out.amplitudes[static_cast<Eigen::Index>(basis.index(config))] +=
        std::sqrt(static_cast<double>(n_from) * (n_to + 1)) * amp;
  }
  return out;
}

CavityResult apply_cavity(const PureState& state, Ladder which) {
  const Basis& basis = *state.basis;
  CavityResult result{zero_state(state.basis), false};
  const int n_max = basis.n_max();
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const Complex amp = state.amplitudes[static_cast<Eigen::Index>(i)];
    if (amp == Complex{}) continue;
    const int p = basis.photons(i);
    if (which == Ladder::annihilate) {
      if (p == 0) continue;
      result.state.amplitudes[static_cast<Eigen::Index>(i - 1)] += std::sqrt(double(p)) * amp;
    } else {
      if (p == n_max) {
        result.truncated = true;
        continue;
      }
      result.state.amplitudes[static_cast<Eigen::Index>(i + 1)] += std::sqrt(p + 1.0) * amp;
    }
  }
  return result;
}

namespace {

BasisPtr reduced_basis(const Basis& basis) {
  BasisSpec spec = basis.spec();
  spec.atoms -= 1;
  return build_basis(spec);
}

// Splits a full-product index around `atom` into (reduced index, slot).
struct AtomSplit {
  std::size_t stride;
  std::size_t levels;
  std::size_t compose(std::size_t reduced, std::size_t slot) const {
    const std::size_t high = reduced / stride;
    const std::size_t low = reduced % stride;
    return (high * levels + slot) * stride + low;
  }
};

}  // namespace

DensityOperator partial_trace_atom(const DensityOperator& W, int atom) {
  const Basis& basis = *W.basis;
  require_full_product(basis, "partial trace over one atom");
  require_atom(basis, atom);
  if (basis.atoms() < 2) throw Error(ErrorKind::invalid_argument, "need at least two atoms");
  BasisPtr reduced = reduced_basis(basis);
  const AtomSplit split{basis.atom_stride(atom), static_cast<std::size_t>(basis.level_count())};
  const auto dim = static_cast<Eigen::Index>(reduced->dimension());
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c)
    for (Eigen::Index r = 0; r < dim; ++r) {
      Complex sum{};
      for (std::size_t s = 0; s < split.levels; ++s)
        sum += W.matrix(static_cast<Eigen::Index>(split.compose(r, s)),
                        static_cast<Eigen::Index>(split.compose(c, s)));
      out(r, c) = sum;
    }
  return {reduced, std::move(out)};
}

DensityOperator partial_trace_atom(const PureState& psi, int atom) {
  const Basis& basis = *psi.basis;
  require_full_product(basis, "partial trace over one atom");
  require_atom(basis, atom);
  if (basis.atoms() < 2) throw Error(ErrorKind::invalid_argument, "need at least two atoms");
  BasisPtr reduced = reduced_basis(basis);
  if (reduced->dimension() > kDenseDensityCap)
    throw Error(ErrorKind::dimension_overflow, "reduced density matrix too large");
  const AtomSplit split{basis.atom_stride(atom), static_cast<std::size_t>(basis.level_count())};
  const auto dim = static_cast<Eigen::Index>(reduced->dimension());
  CMatrix out = CMatrix::Zero(dim, dim);
  CVector branch(dim);
  for (std::size_t s = 0; s < split.levels; ++s) {
    for (Eigen::Index r = 0; r < dim; ++r)
      branch[r] = psi.amplitudes[static_cast<Eigen::Index>(split.compose(r, s))];
    if (branch.squaredNorm() == 0.0) continue;
    out.noalias() += branch * branch.adjoint();
  }
  return {reduced, std::move(out)};
}

PureState embed_symmetric(const PureState& symmetric, std::size_t cap) {
  const Basis& sym = *symmetric.basis;
  if (sym.sector() != Sector::symmetric)
    throw Error(ErrorKind::sector_mismatch, "embed_symmetric expects a symmetric-sector state");
  BasisSpec spec = sym.spec();
  spec.sector = Sector::full_product;
  BasisPtr full = build_basis(spec, cap);
  PureState out = zero_state(full);
  const int levels = full->level_count();
  Configuration counts;
  counts.atoms.assign(levels, 0);
  for (std::size_t i = 0; i < full->dimension(); ++i) {
    std::fill(counts.atoms.begin(), counts.atoms.end(), 0);
    for (int j = 0; j < full->atoms(); ++j) counts.atoms[full->atom_slot(i, j)] += 1;
    counts.photons = full->photons(i);
    const Complex amp = symmetric.amplitudes[static_cast<Eigen::Index>(sym.index(counts))];
    if (amp == Complex{}) continue;
    out.amplitudes[static_cast<Eigen::Index>(i)] =
        amp / std::sqrt(multinomial(full->atoms(), counts.atoms));
  }
  return out;
}

CMatrix cavity_reduced(const PureState& state) {
  const auto photon_states = static_cast<Eigen::Index>(state.basis->n_max() + 1);
  const Eigen::Index blocks = static_cast<Eigen::Index>(state.basis->dimension()) / photon_states;
  // Column-major reshape: column k holds the photon amplitudes of atomic block k.
  const auto view = state.amplitudes.reshaped(photon_states, blocks);
  return view * view.adjoint();
}

}  // namespace qmem
