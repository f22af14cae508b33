#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "qmem/channels.hpp"

namespace qmem {

double motion_fidelity_for_phases(int n, std::span<const double> phases, bool via_site_frame) {
  const int atoms = static_cast<int>(phases.size());
  if (atoms < 1 || n < 0) throw Error(ErrorKind::invalid_argument, "need N >= 1 and n >= 0");
  const ModeTransform T = polariton_transform(kHalfPi, atoms);
  // Dephased creation operator -N^{-1/2} sum_j e^{i phi_j} s_j^dagger over the site modes.
  std::vector<Complex> u(static_cast<std::size_t>(atoms) + 1, Complex{});
  const double scale = 1.0 / std::sqrt(static_cast<double>(atoms));
  for (int j = 0; j < atoms; ++j) u[1 + j] = -scale * std::polar(1.0, phases[j]);
  const ModeBasisPtr basis = build_mode_basis(atoms + 1, n);
  CMatrix rho;
  if (via_site_frame) {
    rho = trace_out_bright(fock_in_mode(basis, u, n), T);
  } else {
    const auto v = transform_mode_vector(u, T, FrameDirection::site_to_polariton);
    rho = dark_mode_reduced(fock_in_mode(basis, v, n));
  }
  return rho(n, n).real();
}

MotionCurve motion_sample_fidelity(const MotionConfig& config) {
  if (config.n < 0 || config.atoms < 1 || config.diffusion < 0.0 || config.trajectories < 1)
    throw Error(ErrorKind::invalid_argument, "invalid motion configuration");
  if (config.reproducible && !config.seed)
    throw Error(ErrorKind::seed_missing, "reproducible Monte Carlo requires a seed");
  for (std::size_t i = 0; i < config.times.size(); ++i)
    if (config.times[i] < 0.0 || (i > 0 && config.times[i] < config.times[i - 1]))
      throw Error(ErrorKind::invalid_argument, "time grid must be non-negative and sorted");

  MotionCurve curve;
  curve.times = config.times;
  curve.trajectories = config.trajectories;
  curve.seed = config.seed ? *config.seed : std::random_device{}();
  curve.dt = config.dt > 0.0 ? config.dt : (config.diffusion > 0.0 ? 0.01 / config.diffusion : 1.0);
  if (config.diffusion * curve.dt > 0.01 + 1e-15)
    throw Error(ErrorKind::step_too_large, "D dt must not exceed 0.01");

  const auto n_times = config.times.size();
  const auto M = static_cast<std::size_t>(config.trajectories);
  std::vector<double> samples(M * n_times);

  const auto run_trajectory = [&](std::size_t traj) {
    std::seed_seq seq{static_cast<std::uint32_t>(curve.seed), static_cast<std::uint32_t>(curve.seed >> 32),
                      static_cast<std::uint32_t>(traj), static_cast<std::uint32_t>(traj >> 32)};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> normal;
    std::vector<double> phases(static_cast<std::size_t>(config.atoms), 0.0);
    double t = 0.0;
    for (std::size_t k = 0; k < n_times; ++k) {
      while (t < config.times[k]) {
        const double h = std::min(curve.dt, config.times[k] - t);
        const double sd = std::sqrt(config.diffusion * h);
        for (auto& phi : phases) phi += sd * normal(rng);
        t = (config.times[k] - t <= curve.dt) ? config.times[k] : t + h;
      }
      // Before any diffusion the stored state is |D,n> by construction.
      samples[traj * n_times + k] = config.times[k] == 0.0 ? 1.0 : motion_fidelity_for_phases(config.n, phases);
    }
  };

  unsigned workers = config.workers > 0 ? static_cast<unsigned>(config.workers) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(M)));
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (std::size_t traj = w; traj < M; traj += workers) run_trajectory(traj);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  // Reduction in trajectory order keeps results independent of the worker count.
  curve.fidelity.assign(n_times, 0.0);
  curve.std_error.assign(n_times, 0.0);
  for (std::size_t k = 0; k < n_times; ++k) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t traj = 0; traj < M; ++traj) {
      const double f = samples[traj * n_times + k];
      sum += f;
      sum2 += f * f;
    }
    const double mean = sum / static_cast<double>(M);
    const double var = M > 1 ? std::max(0.0, (sum2 - M * mean * mean) / static_cast<double>(M - 1)) : 0.0;
    curve.fidelity[k] = mean;
    curve.std_error[k] = std::sqrt(var / static_cast<double>(M));
  }
  return curve;
}

}  // namespace qmem
