#include "qmem/experiments.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <new>
#include <set>
#include <sstream>
#include <variant>

#include <json.hpp>

#include "qmem/channels.hpp"
#include "qmem/dynamics.hpp"

namespace qmem {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kVersion = "0.4.0";

// ---------------------------------------------------------------- config

class Config {
 public:
  Config(const std::string& text, Json& record) : record_(record) {
    root_ = text.empty() ? YAML::Node(YAML::NodeType::Map) : YAML::Load(text);
    if (root_.IsNull()) root_ = YAML::Node(YAML::NodeType::Map);
    if (!root_.IsMap()) throw Error(ErrorKind::config_invalid, "config must be a key/value mapping");
  }

  bool has(const std::string& key) const { return root_[key].IsDefined() && !root_[key].IsNull(); }

  template <typename T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    T value = has(key) ? convert<T>(key, root_[key]) : std::move(fallback);
    record_[key] = value;
    return value;
  }

  template <typename T>
  T require(const std::string& key) {
    used_.insert(key);
    if (!has(key)) throw Error(ErrorKind::config_invalid, "missing key '" + key + "'");
    T value = convert<T>(key, root_[key]);
    record_[key] = value;
    return value;
  }

  /// A scalar or [re, im] pair.
  Complex complex(const std::string& key, Complex fallback) {
    used_.insert(key);
    Complex value = fallback;
    if (has(key)) value = to_complex(key, root_[key]);
    record_[key] = Json::array({value.real(), value.imag()});
    return value;
  }

  std::vector<Complex> complex_list(const std::string& key, std::vector<Complex> fallback) {
    used_.insert(key);
    std::vector<Complex> values = std::move(fallback);
    if (has(key)) {
      if (!root_[key].IsSequence()) throw Error(ErrorKind::config_invalid, "'" + key + "' must be a list");
      values.clear();
      for (const auto& item : root_[key]) values.push_back(to_complex(key, item));
    }
    Json out = Json::array();
    for (const Complex& v : values) out.push_back(Json::array({v.real(), v.imag()}));
    record_[key] = out;
    return values;
  }

  /// Command-line overrides; silently unused by experiments that have no such key.
  void override_value(const std::string& key, const std::string& value) {
    root_[key] = value;
    overrides_.insert(key);
  }
  void override_value(const std::string& key, std::uint64_t value) {
    root_[key] = value;
    overrides_.insert(key);
  }

  std::vector<std::string> unused_overrides() const {
    std::vector<std::string> out;
    for (const auto& k : overrides_)
      if (!used_.count(k)) out.push_back(k);
    return out;
  }

  /// Call after every key of the experiment has been read.
  void finish() const {
    std::vector<std::string> unknown;
    for (const auto& item : root_) {
      const auto key = item.first.as<std::string>();
      if (!used_.count(key) && !overrides_.count(key)) unknown.push_back(key);
    }
    if (!unknown.empty()) {
      std::string list;
      for (const auto& k : unknown) list += (list.empty() ? "" : ", ") + k;
      throw Error(ErrorKind::config_invalid, "unknown keys for this experiment: " + list);
    }
  }

 private:
  template <typename T>
  static T convert(const std::string& key, const YAML::Node& node) {
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      throw Error(ErrorKind::config_invalid, "bad value for '" + key + "'");
    }
  }

  static Complex to_complex(const std::string& key, const YAML::Node& node) {
    if (node.IsSequence() && node.size() == 2) return {convert<double>(key, node[0]), convert<double>(key, node[1])};
    if (node.IsScalar()) return {convert<double>(key, node), 0.0};
    throw Error(ErrorKind::config_invalid, "'" + key + "' needs a number or [re, im]");
  }

  YAML::Node root_;
  Json& record_;
  std::set<std::string> used_;
  std::set<std::string> overrides_;
};

// ------------------------------------------------------------------- csv

using Cell = std::variant<double, long long, std::string, bool>;

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : columns_(header.size()) {
    std::vector<Cell> cells(header.begin(), header.end());
    write(cells);
  }

  void row(const std::vector<Cell>& cells) {
    if (cells.size() != columns_) throw std::logic_error("csv row width");
    write(cells);
  }

  std::string str() const { return out_.str(); }

 private:
  void write(const std::vector<Cell>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << format(cells[i]);
    }
    out_ << "\r\n";
  }

  static std::string format(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) {
      if (std::isnan(*d)) return "nan";
      if (std::isinf(*d)) return *d > 0 ? "inf" : "-inf";
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", *d);
      return buf;
    }
    if (const auto* i = std::get_if<long long>(&cell)) return std::to_string(*i);
    if (const auto* b = std::get_if<bool>(&cell)) return *b ? "true" : "false";
    const auto& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
    return quoted + "\"";
  }

  std::size_t columns_;
  std::ostringstream out_;
};

// --------------------------------------------------------------- context

struct Context {
  Config& config;
  Json& results;
  std::optional<Csv> csv;
  std::vector<AssertionResult> assertions;

  void check(std::string name, bool passed, std::string detail = {}) {
    assertions.push_back({std::move(name), passed, std::move(detail)});
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Engine parse_engine(const std::string& name) {
  if (name == "exact") return Engine::exact;
  if (name == "bosonic") return Engine::bosonic;
  throw Error(ErrorKind::config_invalid, "engine must be exact or bosonic");
}

SweepProfile parse_profile(const std::string& name) {
  for (auto p : {SweepProfile::linear, SweepProfile::cosine, SweepProfile::tanh, SweepProfile::hold})
    if (name == to_string(p)) return p;
  throw Error(ErrorKind::config_invalid, "unknown sweep profile '" + name + "'");
}

Json fit_json(const LogLogFit& fit) {
  return Json{{"slope", fit.slope},         {"slope_error", fit.slope_error}, {"intercept", fit.intercept},
              {"intercept_error", fit.intercept_error}, {"residual_norm", fit.residual_norm},
              {"points", fit.points},       {"weighted", fit.weighted},       {"notes", fit.notes}};
}


// ----------------------------------------------------------------- scans

struct ScanSetup {
  const char* scenario;
  Engine engine;
  std::vector<int> atoms;
  bool exact_only = false;
};

double default_tolerance(const std::string& scenario, Engine engine, const StateSpec& state, int N) {
  const bool fock = state.kind == StateSpec::Kind::fock;
  const double nbar = state.mean_number();
  const double cross = 5.0 * (nbar + 1.0) / (double(N) * N);
  if (scenario == "loss") return fock ? 1e-12 : 4.0 / (double(N) * N);
  if (scenario == "phase_flip") {
    if (fock && (engine == Engine::exact || state.n <= 1)) return 1e-12;
    return cross;
  }
  return engine == Engine::bosonic ? 1e-10 : cross;
}

void run_scan(Context& ctx, const ScanSetup& setup) {
  Config& cfg = ctx.config;
  const std::string scenario = setup.scenario;
  const Engine engine = parse_engine(cfg.get<std::string>("engine", to_string(setup.engine)));
  if (setup.exact_only && engine != Engine::exact)
    throw Error(ErrorKind::config_invalid, scenario + " is only defined on the exact engine");
  std::vector<int> atoms = cfg.get<std::vector<int>>("N_list", setup.atoms);
  const std::string kind = cfg.get<std::string>("state", "fock");
  std::vector<StateSpec> states;
  if (kind == "fock") {
    for (int n : cfg.get<std::vector<int>>("n_list", {1})) {
      if (n < 0) throw Error(ErrorKind::config_invalid, "n must be >= 0");
      states.push_back(StateSpec::fock(n));
    }
  } else if (kind == "coherent") {
    const auto alphas = cfg.complex_list("alpha_list", {Complex{1.0, 0.0}});
    const int cutoff = cfg.get<int>("cutoff", -1);
    for (const Complex& a : alphas) states.push_back(StateSpec::coherent(a, cutoff));
  } else {
    throw Error(ErrorKind::config_invalid, "state must be fock or coherent");
  }
  const double tolerance = cfg.get<double>("tolerance", 0.0);
  const bool assert_slope = cfg.get<bool>("assert_slope", atoms.size() >= 4);
  const bool steep = scenario == "loss" && kind == "coherent";
  const double slope_min = cfg.get<double>("slope_min", steep ? -100.0 : -1.1);
  const double slope_max = cfg.get<double>("slope_max", steep ? -1.8 : -0.9);
  cfg.finish();

  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  if (atoms.empty() || atoms.front() < 1) throw Error(ErrorKind::config_invalid, "N_list needs positive entries");
  if (assert_slope && atoms.size() < 4) throw Error(ErrorKind::config_invalid, "a slope assertion needs >= 4 N values");
  if (tolerance < 0.0) throw Error(ErrorKind::config_invalid, "tolerance must be >= 0");

  struct Point {
    std::size_t state;
    int N;
    std::future<EventFidelity> job;
  };
  std::vector<Point> points;
  Json skipped = Json::array();
  for (std::size_t s = 0; s < states.size(); ++s) {
    for (int N : atoms) {
      const StateSpec& st = states[s];
      const bool fits = st.kind != StateSpec::Kind::fock || engine == Engine::bosonic
                            ? true
                            : (scenario == "loss" ? st.n < N : st.n <= N);
      if (!fits || (scenario == "loss" && N < 2)) {
        skipped.push_back(Json{{"N", N}, {"state", st.label()}, {"reason", "n exceeds the atom number"}});
        continue;
      }
      points.push_back({s, N, std::async(std::launch::async, [&, s, N] {
                          return single_event_fidelity(scenario, N, states[s], engine);
                        })});
    }
  }

  ctx.csv.emplace(std::vector<std::string>{"N", "state", "n", "f_computed", "f_reference", "f_paper", "infidelity",
                                           "engine", "tolerance", "reference_match"});
  Json per_state = Json::array();
  for (std::size_t s = 0; s < states.size(); ++s) {
    std::vector<double> x, y;
    double worst = 0.0;
    bool all_match = true;
    ReferenceValue last;
    for (auto& p : points) {
      if (p.state != s) continue;
      const EventFidelity f = p.job.get();
      const ReferenceValue ref = reference_formula(scenario, p.N, states[s]);
      const double tol = tolerance > 0.0 ? tolerance : default_tolerance(scenario, f.engine, states[s], p.N);
      const double gap = std::abs(f.fidelity - ref.derived);
      const bool match = gap <= tol;
      all_match = all_match && match;
      worst = std::max(worst, gap / tol);
      ctx.csv->row({double(p.N), states[s].label(), states[s].mean_number(), f.fidelity, ref.derived, ref.paper,
                    1.0 - f.fidelity, std::string(to_string(f.engine)), tol, match});
      x.push_back(p.N);
      y.push_back(1.0 - f.fidelity);
      last = ref;
    }
    Json entry{{"state", states[s].label()},
               {"reference_expression", last.derived_expression},
               {"paper_expression", last.paper_expression},
               {"contested", last.contested},
               {"remainder", last.order},
               {"worst_gap_over_tolerance", worst}};
    ctx.check("reference match " + states[s].label(), all_match, "worst gap/tolerance " + fmt(worst));
    std::size_t usable = 0;
    for (double v : y) usable += v > 0.0;
    if (usable >= 2) {
      const LogLogFit fit = fit_loglog(x, y);
      entry["fit"] = fit_json(fit);
      if (assert_slope)
        ctx.check("slope " + states[s].label(), fit.slope >= slope_min && fit.slope <= slope_max,
                  "slope " + fmt(fit.slope) + " +- " + fmt(fit.slope_error) + " in [" + fmt(slope_min) + ", " +
                      fmt(slope_max) + "]");
    } else if (assert_slope) {
      ctx.check("slope " + states[s].label(), false, "fewer than two nonzero infidelities");
    }
    per_state.push_back(entry);
  }
  ctx.results["scenario"] = scenario;
  ctx.results["states"] = per_state;
  ctx.results["skipped"] = skipped;
}


// ---------------------------------------------------------------- motion

struct RateFit {
  double rate = 0.0;
  double error = 0.0;
  int points = 0;
};

// -log f = r t, weighted through the origin with sigma_y = sigma_f / f.
RateFit fit_rate(const MotionCurve& curve) {
  double swt2 = 0.0, swty = 0.0;
  RateFit fit;
  for (std::size_t i = 0; i < curve.times.size(); ++i) {
    const double t = curve.times[i], f = curve.fidelity[i], se = curve.std_error[i];
    if (!(t > 0.0) || !(f > 0.0) || !(se > 0.0)) continue;
    const double w = std::pow(f / se, 2);
    swt2 += w * t * t;
    swty += w * t * -std::log(f);
    ++fit.points;
  }
  if (fit.points == 0) return fit;
  fit.rate = swty / swt2;
  fit.error = 1.0 / std::sqrt(swt2);
  return fit;
}

void run_motion(Context& ctx) {
  Config& cfg = ctx.config;
  std::vector<int> atoms = cfg.get<std::vector<int>>("N_list", {16});
  const int n = cfg.get<int>("n", 1);
  const double D = cfg.get<double>("D", 1.0);
  const auto times = cfg.get<std::vector<double>>("times", {0.5, 1.0, 2.0});
  const int trajectories = cfg.get<int>("trajectories", 10000);
  const auto seed = cfg.require<std::uint64_t>("seed");
  const double dt = cfg.get<double>("dt", 0.01 / D);
  const int workers = cfg.get<int>("workers", 0);
  const double sigmas = cfg.get<double>("sigma_tolerance", 3.0);
  const bool assert_formula = cfg.get<bool>("assert_formula", n == 1);
  const bool assert_rate = cfg.get<bool>("assert_rate", n >= 2);
  const double rate_tolerance = cfg.get<double>("rate_tolerance", 0.1);
  const bool assert_agreement = cfg.get<bool>("assert_agreement", atoms.size() >= 2);
  cfg.finish();

  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  if (atoms.empty() || atoms.front() < 1) throw Error(ErrorKind::config_invalid, "N_list needs positive entries");
  if (n < 1 || !(D > 0.0) || trajectories < 2 || times.empty())
    throw Error(ErrorKind::config_invalid, "need n >= 1, D > 0, trajectories >= 2 and at least one time");
  for (double t : times)
    if (t < 0.0) throw Error(ErrorKind::config_invalid, "times must be >= 0");

  ctx.csv.emplace(std::vector<std::string>{"N", "n", "t", "Dt", "f_mc", "std_error", "f_reference", "z_score"});
  Json per_n = Json::array();
  std::vector<RateFit> rates;
  for (int N : atoms) {
    MotionConfig mc;
    mc.n = n;
    mc.atoms = N;
    mc.diffusion = D;
    mc.times = times;
    mc.trajectories = trajectories;
    mc.seed = seed;
    mc.dt = dt;
    mc.workers = workers;
    const MotionCurve curve = motion_sample_fidelity(mc);
    double worst_z = 0.0;
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
      const double ref = reference_formula("motion", N, StateSpec::fock(n), D * curve.times[i]).derived;
      const double se = curve.std_error[i];
      const double gap = std::abs(curve.fidelity[i] - ref);
      const double z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
      worst_z = std::max(worst_z, z);
      ctx.csv->row({double(N), double(n), curve.times[i], D * curve.times[i], curve.fidelity[i], se, ref, z});
    }
    const RateFit rate = fit_rate(curve);
    rates.push_back(rate);
    per_n.push_back(Json{{"N", N},
                         {"seed", curve.seed},
                         {"trajectories", curve.trajectories},
                         {"dt", curve.dt},
                         {"fitted_rate", rate.rate},
                         {"fitted_rate_error", rate.error},
                         {"rate_over_D", rate.rate / D},
                         {"initial_rate_finite_N", n * D * (1.0 - 1.0 / N)},
                         {"max_z_score", worst_z}});
    if (assert_formula)
      ctx.check("ensemble formula N=" + std::to_string(N), worst_z <= sigmas,
                "max |f - f_ref| / se = " + fmt(worst_z));
    if (assert_rate)
      ctx.check("rate n D N=" + std::to_string(N), std::abs(rate.rate - n * D) <= rate_tolerance * n * D,
                "rate " + fmt(rate.rate) + " vs " + fmt(n * D));
  }
  if (assert_agreement) {
    const RateFit& lo = rates.front();
    const RateFit& hi = rates.back();
    const double combined = std::hypot(lo.error, hi.error);
    ctx.check("rate independent of N", std::abs(lo.rate - hi.rate) <= sigmas * combined,
              "N=" + std::to_string(atoms.front()) + ": " + fmt(lo.rate) + ", N=" + std::to_string(atoms.back()) +
                  ": " + fmt(hi.rate) + ", combined error " + fmt(combined));
  }
  ctx.results["per_N"] = per_n;
  ctx.results["rate_fit"] = "-log f = r t, inverse-variance weighted, through the origin";
}

// ----------------------------------------------------------- liouvillian

void run_liouvillian(Context& ctx) {
  Config& cfg = ctx.config;
  const int N = cfg.get<int>("N", 4);
  const int n = cfg.get<int>("n", 0);
  const double Gamma = cfg.get<double>("Gamma", 1.0);
  const double t_max = cfg.get<double>("t_max", 0.5);
  const double dt = cfg.get<double>("dt", 0.005);
  const int record_every = cfg.get<int>("record_every", 10);
  const int cutoff = cfg.get<int>("cutoff", 30);
  const double factor = cfg.get<double>("tolerance_factor", 5.0);
  cfg.finish();
  if (N < 1 || n < 0 || n > N || !(Gamma >= 0.0) || !(t_max > 0.0) || !(dt > 0.0) || record_every < 1 ||
      cutoff <= N)
    throw Error(ErrorKind::config_invalid, "need 0 <= n <= N, Gamma >= 0, t_max, dt > 0, record_every >= 1, cutoff > N");
  const int steps = static_cast<int>(std::lround(t_max / dt));

  const BasisPtr basis = build_basis({N, {Level::b, Level::c}, 0, Sector::full_product});
  const PureState stored = dark_state(basis, {n, N}, PolaritonFrame::storage(N));
  const LiouvillianRun run = spin_flip_liouvillian(DensityOperator::from_pure(stored), Gamma, dt, steps, record_every);
  const ModeTransform T = polariton_transform(kHalfPi, N);
  const int c_slot = basis->slot(Level::c);

  CMatrix start = CMatrix::Zero(cutoff, cutoff), vacuum = CMatrix::Zero(cutoff, cutoff);
  start(n, n) = 1.0;
  vacuum(0, 0) = 1.0;

  ctx.csv.emplace(std::vector<std::string>{"t", "k", "p_full", "p_trphi", "p_reduced", "abs_diff"});
  double worst = 0.0, worst_p0 = 0.0, nc_max = 0.0;
  for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
    const double t = run.times[s];
    const DensityOperator& W = run.snapshots[s];
    const CMatrix full = exact_photon_density(W);
    const CMatrix hard_core = trace_out_bright(embed_spin_density(W, N), T);
    const CMatrix reduced = reduced_spin_flip_liouvillian(start, Gamma, t);
    double nc = 0.0;
    for (std::size_t i = 0; i < basis->dimension(); ++i) {
      int m = 0;
      for (int j = 0; j < N; ++j) m += basis->atom_slot(i, j) == c_slot;
      nc += m * W.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    }
    const bool in_window = Gamma * t <= 0.5 + 1e-12;
    if (in_window) nc_max = std::max(nc_max, nc);
    for (int k = 0; k <= N; ++k) {
      const double pf = full(k, k).real();
      const double ph = k < hard_core.rows() ? hard_core(k, k).real() : 0.0;
      const double pr = reduced(k, k).real();
      if (in_window) worst = std::max(worst, std::abs(pf - pr));
      ctx.csv->row({t, double(k), pf, ph, pr, std::abs(pf - pr)});
    }
    const double p0 = reduced_spin_flip_liouvillian(vacuum, Gamma, t)(0, 0).real();
    worst_p0 = std::max(worst_p0, std::abs(p0 - std::exp(-Gamma * t)));
  }
  const double bound = factor * nc_max / N;
  ctx.check("dark populations follow the reduced Liouvillian", worst <= bound,
            "max |p_full - p_reduced| = " + fmt(worst) + ", bound " + fmt(bound) + " (n_c = " + fmt(nc_max) + ")");
  ctx.check("vacuum p0 = exp(-Gamma t)", worst_p0 <= 1e-6, "max error " + fmt(worst_p0));
  ctx.results["steps"] = steps;
  ctx.results["max_population_gap"] = worst;
  ctx.results["max_c_excitation"] = nc_max;
  ctx.results["bound"] = bound;
  ctx.results["max_p0_error"] = worst_p0;
  ctx.results["max_trace_drift"] = run.max_trace_drift;
  ctx.results["p_full"] = "photon-number distribution on adiabatic retrieval";
  ctx.results["p_trphi"] = "hard-core embedding followed by a partial trace over bright modes";
}

// --------------------------------------------------------------- thermal

void run_thermal(Context& ctx) {
  Config& cfg = ctx.config;
  std::vector<int> atoms = cfg.get<std::vector<int>>("N_list", {4, 16});
  const double beta = cfg.get<double>("beta", 5.0);
  const double omega_c = cfg.get<double>("omega_c", 1.0);
  const int E = cfg.get<int>("max_excitation", 4);
  cfg.finish();
  std::sort(atoms.begin(), atoms.end());
  if (atoms.empty() || atoms.front() < 1 || E < 0) throw Error(ErrorKind::config_invalid, "need N >= 1, max_excitation >= 0");

  ctx.csv.emplace(std::vector<std::string>{"N", "dark_occupation", "bose_einstein", "c_population", "gap_bose_einstein",
                                           "gap_c_population", "tail"});
  for (int N : atoms) {
    const ThermalState th = thermal_prepare(beta, omega_c, N, E);
    const double gap_be = std::abs(th.dark_occupation - th.bose_einstein);
    const double gap_c = std::abs(th.dark_occupation - th.c_population);
    ctx.csv->row({double(N), th.dark_occupation, th.bose_einstein, th.c_population, gap_be, gap_c, th.tail});
    const std::string tag = " N=" + std::to_string(N);
    ctx.check("cutoff tail below 1e-4" + tag, th.tail < 1e-4, "tail " + fmt(th.tail));
    // Psi is one of N equally weighted modes, so the weight beyond the cutoff carries
    // about (E + 1) / N dark quanta per unit probability.
    const double bound = th.tail * std::max(1.0, (E + 2.0) / N) + 1e-14;
    ctx.check("Bose-Einstein occupation" + tag, gap_be <= bound, "gap " + fmt(gap_be) + ", bound " + fmt(bound));
    ctx.check("mean c population" + tag, gap_c <= 1e-10, "gap " + fmt(gap_c));
  }
}


// ------------------------------------------------------------- transfer

void run_transfer(Context& ctx) {
  Config& cfg = ctx.config;
  const int N = cfg.get<int>("N", 4);
  const int photons = cfg.get<int>("photons", 1);
  const double g = cfg.get<double>("g", 1.0);
  const double gamma = cfg.get<double>("gamma", 5.0);
  const std::string profile_name = cfg.get<std::string>("profile", "linear");
  const double theta_min = cfg.get<double>("theta_min", 0.05);
  auto adiabaticity = cfg.get<std::vector<double>>("adiabaticity_list", {10.0, 30.0, 100.0, 300.0, 1000.0});
  EvolveOptions options;
  options.dt = cfg.get<double>("dt", 0.0);
  options.steps_per_period = cfg.get<int>("steps_per_period", 50);
  options.max_halvings = cfg.get<int>("max_halvings", 3);
  options.halving_tolerance = cfg.get<double>("halving_tolerance", 1e-8);
  const double min_fidelity = cfg.get<double>("min_fidelity", 0.98);
  const double min_fidelity_at = cfg.get<double>("min_fidelity_at", 100.0);
  const bool assert_monotone = cfg.get<bool>("assert_monotone", true);
  cfg.finish();

  const SweepProfile profile = parse_profile(profile_name);
  std::sort(adiabaticity.begin(), adiabaticity.end());
  if (N < 1 || photons < 1 || !(g > 0.0) || gamma < 0.0 || adiabaticity.empty() || adiabaticity.front() <= 0.0)
    throw Error(ErrorKind::config_invalid, "need N, photons >= 1, g > 0, gamma >= 0, positive adiabaticities");
  HamiltonianParams params;
  params.g = g;
  params.gamma = gamma;
  params.validate();
  const BasisPtr basis = build_basis({N, {Level::b, Level::c, Level::a}, photons, Sector::symmetric});
  const double unit = 1.0 / (g * std::sqrt(double(N)));

  const auto schedule = [&](SweepDirection direction, double T) {
    SweepSchedule s;
    s.profile = profile;
    s.direction = direction;
    s.duration = T;
    s.theta_min = theta_min;
    s.validate();
    return s;
  };
  std::vector<std::future<Readout>> jobs;
  for (double A : adiabaticity) {
    const std::vector<SweepSchedule> segments{schedule(SweepDirection::store, A * unit),
                                              schedule(SweepDirection::retrieve, A * unit)};
    jobs.push_back(std::async(std::launch::async, [&, segments] {
      return readout_reduce(ground_state(basis, photons), params, segments, options);
    }));
  }

  ctx.csv.emplace(std::vector<std::string>{"adiabaticity", "T", "fidelity", "infidelity", "retained", "dt",
                                           "converged", "halving_error"});
  std::vector<double> infidelity;
  bool all_converged = true;
  std::optional<double> at_threshold;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Readout r = jobs[i].get();
    const double f = r.field(photons, photons).real();
    infidelity.push_back(1.0 - f);
    all_converged = all_converged && r.trajectory.converged;
    if (std::abs(adiabaticity[i] - min_fidelity_at) <= 1e-9 * min_fidelity_at) at_threshold = f;
    ctx.csv->row({adiabaticity[i], adiabaticity[i] * unit, f, 1.0 - f, r.retained, r.trajectory.dt,
                  r.trajectory.converged, r.trajectory.halving_error});
  }
  if (assert_monotone) {
    bool monotone = true;
    for (std::size_t i = 1; i < infidelity.size(); ++i) monotone = monotone && infidelity[i] < infidelity[i - 1];
    ctx.check("infidelity decreases with g sqrt(N) T", monotone);
  }
  if (at_threshold)
    ctx.check("round trip at g sqrt(N) T = " + fmt(min_fidelity_at), *at_threshold >= min_fidelity,
              "fidelity " + fmt(*at_threshold) + ", required " + fmt(min_fidelity));
  ctx.check("time step converged under halving", all_converged);
  ctx.results["time_unit"] = "T in units of 1/g; adiabaticity = g sqrt(N) T per sweep";
  ctx.results["fit"] = fit_json(fit_loglog(adiabaticity, infidelity));
}

// --------------------------------------------------------- non-adiabatic

void run_isolation(Context& ctx) {
  Config& cfg = ctx.config;
  NonAdiabaticModel model;
  model.atoms = cfg.get<int>("N", 4);
  model.bath_modes = cfg.get<int>("bath_modes", 32);
  model.kappa = cfg.get<double>("kappa", 0.3);
  model.g = cfg.get<double>("g", 1.0);
  model.gamma = cfg.get<double>("gamma", 2.0);
  model.pumping = cfg.get<bool>("pumping", true);
  const double T = cfg.get<double>("T", 5.0);
  const std::string profile_name = cfg.get<std::string>("profile", "cosine");
  const double dt = cfg.get<double>("dt", 1e-3);
  const double isolation = cfg.get<double>("isolation_tolerance", 1e-12);
  const double min_effect = cfg.get<double>("min_bright_effect", 1e-3);
  cfg.finish();
  if (model.atoms < 2) throw Error(ErrorKind::config_invalid, "need N >= 2 for a nonsymmetric spin wave");

  SweepSchedule retrieve;
  retrieve.profile = parse_profile(profile_name);
  retrieve.direction = SweepDirection::retrieve;
  retrieve.duration = T;
  retrieve.validate();
  model.initial = CVector::Zero(model.size());
  model.validate();

  const auto run = [&](std::optional<Eigen::Index> seeded) {
    NonAdiabaticModel m = model;
    m.initial[0] = 1.0;
    if (seeded) m.initial[*seeded] += 1.0;
    return nonadiabatic_linear(m, retrieve, dt);
  };
  const NonAdiabaticResult base = run(std::nullopt);
  ctx.csv.emplace(std::vector<std::string>{"seeded_mode", "delta_retrieved_field", "core_norm"});
  ctx.csv->row({std::string("none"), 0.0, base.core_norm});
  double worst_bright = 0.0;
  for (int l = 1; l < model.atoms; ++l) {
    const NonAdiabaticResult r = run(model.bright(l));
    const double delta = (r.retrieved_field - base.retrieved_field).norm();
    worst_bright = std::max(worst_bright, delta);
    ctx.csv->row({"Phi_" + std::to_string(l), delta, r.core_norm});
  }
  const NonAdiabaticResult phi0 = run(Eigen::Index{1});
  const double delta0 = (phi0.retrieved_field - base.retrieved_field).norm();
  ctx.csv->row({std::string("Phi_0"), delta0, phi0.core_norm});
  ctx.check("nonsymmetric spin waves do not reach the field", worst_bright < isolation, "max change " + fmt(worst_bright));
  ctx.check("bright polariton Phi_0 reaches the field", delta0 > min_effect, "change " + fmt(delta0));
  ctx.results["baseline_retrieved_norm"] = base.retrieved_field.norm();
  ctx.results["max_bright_change"] = worst_bright;
  ctx.results["phi0_change"] = delta0;
}

// ---------------------------------------------------------------- ledger

void run_ledger(Context& ctx) {
  Config& cfg = ctx.config;
  const auto seed = cfg.get<std::uint64_t>("seed", 7);
  cfg.finish();
  ctx.csv.emplace(std::vector<std::string>{"scenario", "paper_formula", "oracle_formula", "paper_value", "oracle_value",
                                           "gap", "classification", "note"});
  int open = 0, typos = 0;
  for (const LedgerEntry& e : discrepancy_ledger(seed)) {
    ctx.csv->row({e.scenario, e.paper_formula, e.oracle_formula, e.paper_value, e.oracle_value, e.gap,
                  std::string(to_string(e.classification)), e.note});
    open += e.classification == Classification::open;
    typos += e.classification == Classification::typo_candidate;
  }
  ctx.check("every entry classified", open == 0, std::to_string(open) + " open");
  ctx.results["typo_candidates"] = typos;
}

// -------------------------------------------------------------- registry

using Runner = std::function<void(Context&)>;

const std::map<std::string, Runner>& registry() {
  static const std::map<std::string, Runner> table{
      {"spinflip-scan", [](Context& c) { run_scan(c, {"flip_cb", Engine::bosonic, {32, 64, 128, 256}}); }},
      {"symflip-scan", [](Context& c) { run_scan(c, {"symmetric_flip", Engine::bosonic, {32, 64, 128, 256}}); }},
      {"phaseflip-scan", [](Context& c) { run_scan(c, {"phase_flip", Engine::exact, {4, 8, 12, 16}}); }},
      {"loss-scan", [](Context& c) { run_scan(c, {"loss", Engine::exact, {4, 6, 8, 12}, true}); }},
      {"motion-mc", run_motion},
      {"liouvillian-reduce", run_liouvillian},
      {"thermal-prep", run_thermal},
      {"adiabatic-transfer", run_transfer},
      {"nonadiabatic-isolation", run_isolation},
      {"discrepancy-ledger", run_ledger},
  };
  return table;
}

int status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension_overflow:
    case ErrorKind::cutoff_exceeded:
    case ErrorKind::excitation_overflow:
      return exit_resource;
    default:
      return exit_config;
  }
}

std::string compiler() {
#ifdef __VERSION__
  return __VERSION__;
#else
  return "unknown";
#endif
}

}  // namespace

std::string software_version() { return kVersion; }

std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& [name, runner] : registry()) names.push_back(name);
  return names;
}

RunReport run_experiment(const RunRequest& request) {
  RunReport report;
  Json parameters = Json::object();
  Json results = Json::object();
  try {
    const auto entry = registry().find(request.experiment);
    if (entry == registry().end()) throw Error(ErrorKind::config_invalid, "unknown experiment '" + request.experiment + "'");
    Config config(request.config_text, parameters);
    if (request.seed) config.override_value("seed", *request.seed);
    if (request.engine) config.override_value("engine", std::string(to_string(*request.engine)));
    Context ctx{config, results, std::nullopt, {}};
    entry->second(ctx);
    report.assertions = ctx.assertions;
    for (const auto& a : report.assertions)
      if (!a.passed) report.status = exit_assertion;

    Json checks = Json::array();
    for (const auto& a : report.assertions)
      checks.push_back(Json{{"name", a.name}, {"passed", a.passed}, {"detail", a.detail}});
    const std::string software = std::string("qmem ") + kVersion + " / " + compiler();
    Json summary{{"experiment", request.experiment},
                 {"status", report.status},
                 {"parameters", parameters},
                 {"ignored_overrides", config.unused_overrides()},
                 {"fingerprints",
                  {{"config", hex(fnv1a(request.experiment + "\n" + parameters.dump()))}, {"software", hex(fnv1a(software))}}},
                 {"software", software},
                 {"results", results},
                 {"assertions", checks},
                 {"csv", request.experiment + ".csv"}};

    namespace fs = std::filesystem;
    const fs::path dir = request.out_dir.empty() ? fs::path(".") : fs::path(request.out_dir);
    fs::create_directories(dir);
    report.csv_path = (dir / (request.experiment + ".csv")).string();
    report.json_path = (dir / (request.experiment + ".json")).string();
    std::ofstream csv(report.csv_path, std::ios::binary);
    csv << (ctx.csv ? ctx.csv->str() : std::string());
    std::ofstream json(report.json_path, std::ios::binary);
    json << summary.dump(2) << '\n';
    if (!csv || !json) throw Error(ErrorKind::config_invalid, "cannot write to " + dir.string());
  } catch (const Error& e) {
    report.status = status_for(e.kind());
    report.error = e.what();
  } catch (const YAML::Exception& e) {
    report.status = exit_config;
    report.error = std::string("config_invalid: ") + e.what();
  } catch (const std::filesystem::filesystem_error& e) {
    report.status = exit_config;
    report.error = e.what();
  } catch (const std::bad_alloc&) {
    report.status = exit_resource;
    report.error = "out of memory";
  }
  return report;
}

}  // namespace qmem
