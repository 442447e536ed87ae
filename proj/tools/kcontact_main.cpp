// Batch front-end: configure a model, run verification / simulation /
// convergence / dissipation / symmetry checks, emit CSV reports.
//
// Exit codes: 0 = all checks passed, 1 = a check failed (including stability
// violations), 2 = usage or configuration error.

#include "kcontact/kcontact.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

using namespace kcontact;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string model = "damped-string";
  // model parameters
  double rho = 1.0, tau = 1.0, damp = 0.2;
  double diff = 0.1;
  std::optional<double> gamma;  // burgers: default -1/diff; coupled/oscillator: 0.3
  double coupling_weight = 1.0;
  int n = 1, k = 2;  // canonical
  // grid / integration
  double x0 = 0.0, x1 = 1.0;
  int nodes = 201;
  double dt = 0.0;  // 0 = pick from the stability bound
  double t_end = 1.0;
  int frames = 61;
  // initial data
  std::string ic = "sine:1";
  double q0 = 1.0, p0 = 0.0, s0 = 0.0;  // oscillator
  // run controls
  std::vector<std::string> checks;
  double tol = 1e-6;
  std::string out = "out";
  std::uint64_t seed = 12345;
  int points = 50;
  std::string symmetry;
  double probe_eps = 0.1;
};

const std::set<std::string> kKnownKeys = {
    "model", "rho", "tau", "damp", "diff", "gamma", "coupling_weight", "n", "k",
    "x0", "x1", "N", "dt", "t_end", "frames", "ic", "q0", "p0", "s0",
    "checks", "tol", "out", "seed", "points", "symmetry", "probe_eps"};

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  if (path.empty()) return cfg;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a flat JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (!kKnownKeys.count(key)) throw ConfigError("unknown config key: " + key);
      if (key == "model") cfg.model = value.get<std::string>();
      else if (key == "rho") cfg.rho = value.get<double>();
      else if (key == "tau") cfg.tau = value.get<double>();
      else if (key == "damp") cfg.damp = value.get<double>();
      else if (key == "diff") cfg.diff = value.get<double>();
      else if (key == "gamma") cfg.gamma = value.get<double>();
      else if (key == "coupling_weight") cfg.coupling_weight = value.get<double>();
      else if (key == "n") cfg.n = value.get<int>();
      else if (key == "k") cfg.k = value.get<int>();
      else if (key == "x0") cfg.x0 = value.get<double>();
      else if (key == "x1") cfg.x1 = value.get<double>();
      else if (key == "N") cfg.nodes = value.get<int>();
      else if (key == "dt") cfg.dt = value.get<double>();
      else if (key == "t_end") cfg.t_end = value.get<double>();
      else if (key == "frames") cfg.frames = value.get<int>();
      else if (key == "ic") cfg.ic = value.get<std::string>();
      else if (key == "q0") cfg.q0 = value.get<double>();
      else if (key == "p0") cfg.p0 = value.get<double>();
      else if (key == "s0") cfg.s0 = value.get<double>();
      else if (key == "tol") cfg.tol = value.get<double>();
      else if (key == "out") cfg.out = value.get<std::string>();
      else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
      else if (key == "points") cfg.points = value.get<int>();
      else if (key == "symmetry") cfg.symmetry = value.get<std::string>();
      else if (key == "probe_eps") cfg.probe_eps = value.get<double>();
      else if (key == "checks") {
        if (value.is_string()) {
          std::stringstream ss(value.get<std::string>());
          std::string item;
          while (std::getline(ss, item, ',')) cfg.checks.push_back(item);
        } else {
          for (const auto& item : value) cfg.checks.push_back(item.get<std::string>());
        }
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config value error: ") + e.what());
  }
  if (cfg.tol <= 0.0) throw ConfigError("tol must be positive");
  return cfg;
}

bool has_check(const RunConfig& cfg, const std::string& name) {
  for (const auto& c : cfg.checks)
    if (c == name) return true;
  return false;
}

// ---------------------------------------------------------------------------
// model registry

KContactSystem build_model(const RunConfig& cfg) {
  if (cfg.model == "canonical") return build_canonical(cfg.n, cfg.k);
  if (cfg.model == "example3") return build_example3();
  if (cfg.model == "degenerate-duplicate") return build_degenerate_duplicate();
  if (cfg.model == "damped-string")
    return build_damped_string(DampedStringParams(cfg.rho, cfg.tau, cfg.damp));
  if (cfg.model == "burgers")
    return build_burgers(BurgersParams(cfg.diff, cfg.gamma.value_or(-1.0 / cfg.diff)));
  if (cfg.model == "coupled-strings")
    return build_coupled_strings(
        CoupledStringsParams::quadratic(cfg.gamma.value_or(0.3), cfg.coupling_weight));
  if (cfg.model == "damped-oscillator")
    return build_damped_oscillator(OscillatorParams(cfg.gamma.value_or(0.3)));
  throw ConfigError("unknown model: " + cfg.model);
}

std::function<double(double)> parse_profile(const std::string& spec, double x0, double x1) {
  const double length = x1 - x0;
  auto fail = [&]() -> std::function<double(double)> {
    throw ConfigError("bad ic spec: " + spec + " (want sine:<n> | gaussian:<c>,<w> | const:<c>)");
  };
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
  try {
    if (kind == "sine") {
      const int mode = std::stoi(args);
      return [mode, x0, length](double x) { return std::sin(mode * M_PI * (x - x0) / length); };
    }
    if (kind == "gaussian") {
      const auto comma = args.find(',');
      if (comma == std::string::npos) return fail();
      const double center = std::stod(args.substr(0, comma));
      const double width = std::stod(args.substr(comma + 1));
      return [center, width](double x) {
        const double z = (x - center) / width;
        return std::exp(-0.5 * z * z);
      };
    }
    if (kind == "const") {
      const double c = std::stod(args);
      return [c](double) { return c; };
    }
  } catch (const std::exception&) {
    return fail();
  }
  return fail();
}

// For Burgers the sine profile must be periodic on [x0, x1]
std::function<double(double)> parse_periodic_profile(const std::string& spec, double x0,
                                                     double x1) {
  const auto colon = spec.find(':');
  if (spec.substr(0, colon) == "sine") {
    const int mode = std::stoi(spec.substr(colon + 1));
    const double length = x1 - x0;
    return [mode, x0, length](double x) {
      return std::sin(2.0 * M_PI * mode * (x - x0) / length);
    };
  }
  return parse_profile(spec, x0, x1);
}

// ---------------------------------------------------------------------------
// reporting

struct CheckResult {
  std::string name;
  std::string status;  // pass | fail | error
  double worst = 0.0;
  std::string csv_path;
};

struct RunReport {
  std::vector<CheckResult> checks;
  double wall_seconds = 0.0;

  void add(const std::string& name, bool pass, double worst, const std::string& path = "") {
    checks.push_back({name, pass ? "pass" : "fail", worst, path});
  }
  bool pass() const {
    for (const auto& c : checks)
      if (c.status != "pass") return false;
    return !checks.empty();
  }
};

fs::path resolve_out_dir(const RunConfig& cfg) {
  const char* env = std::getenv("KCONTACT_OUT");
  fs::path dir = env && *env ? fs::path(env) : fs::path(cfg.out);
  fs::create_directories(dir);
  return dir;
}

// wall time stays on stdout: the CSV outputs must be byte-identical across
// identical seeded runs
void finish(const RunReport& report, const fs::path& out_dir) {
  std::ofstream csv(out_dir / "run_report.csv");
  csv << "check,status,worst_residual,csv\n";
  for (const auto& c : report.checks)
    csv << c.name << ',' << c.status << ',' << format_full(c.worst) << ',' << c.csv_path << '\n';
  for (const auto& c : report.checks)
    std::cout << "[" << (c.status == "pass" ? "PASS" : "FAIL") << "] " << c.name
              << "  worst=" << c.worst << '\n';
  std::cout << "report: " << (out_dir / "run_report.csv").string()
            << "  wall=" << report.wall_seconds << "s\n";
}

double default_dt(const RunConfig& cfg, const SpaceGrid& grid) {
  if (cfg.dt > 0.0) return cfg.dt;
  if (cfg.model == "damped-string") {
    const double c = std::sqrt(cfg.tau / cfg.rho);
    return 0.05 * grid.dx() / c;
  }
  if (cfg.model == "burgers") return 0.2 * grid.dx() * grid.dx() / cfg.diff;
  if (cfg.model == "coupled-strings") return 0.05 * grid.dx();
  return 1e-3;
}

int frame_stride(const RunConfig& cfg, double dt) {
  const int target = std::max(2, cfg.frames);
  return std::max(1, static_cast<int>(std::round(cfg.t_end / (dt * (target - 1)))));
}

SectionGrid simulate_section(const RunConfig& cfg) {
  if (cfg.model == "damped-string") {
    const SpaceGrid grid(cfg.x0, cfg.x1, cfg.nodes, Boundary::DirichletZero);
    const double dt = default_dt(cfg, grid);
    StringIC ic{parse_profile(cfg.ic, cfg.x0, cfg.x1), [](double) { return 0.0; }};
    return integrate_damped_string(DampedStringParams(cfg.rho, cfg.tau, cfg.damp), grid, ic,
                                   cfg.t_end, dt, frame_stride(cfg, dt));
  }
  if (cfg.model == "burgers") {
    const SpaceGrid grid(cfg.x0, cfg.x1, cfg.nodes, Boundary::Periodic);
    const double dt = default_dt(cfg, grid);
    return integrate_burgers(BurgersParams(cfg.diff, cfg.gamma.value_or(-1.0 / cfg.diff)), grid,
                             parse_periodic_profile(cfg.ic, cfg.x0, cfg.x1), cfg.t_end, dt,
                             frame_stride(cfg, dt));
  }
  if (cfg.model == "coupled-strings") {
    const SpaceGrid grid(cfg.x0, cfg.x1, cfg.nodes, Boundary::DirichletZero);
    const double dt = default_dt(cfg, grid);
    CoupledIC ic;
    ic.q1_0 = parse_profile(cfg.ic, cfg.x0, cfg.x1);
    ic.q2_0 = [f = ic.q1_0](double x) { return 0.4 * f(x); };
    return integrate_coupled_strings(
        CoupledStringsParams::quadratic(cfg.gamma.value_or(0.3), cfg.coupling_weight), grid, ic,
        cfg.t_end, dt, frame_stride(cfg, dt));
  }
  throw ConfigError("model does not support grid simulation: " + cfg.model);
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_verify(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  const KContactSystem sys = build_model(cfg);
  SampleRng rng(cfg.seed);
  const auto points = sample_box(rng, sys.dim, -0.5, 0.5, cfg.points);

  RunReport report;
  const fs::path out_dir = resolve_out_dir(cfg);
  const StructureReport structure = verify_structure(sys, points);

  const fs::path csv_path = out_dir / "verify_report.csv";
  {
    std::ofstream csv(csv_path);
    csv << "point,rank_contact,dim_reeb,dim_intersection,margin,reeb_residual,pass\n";
    for (std::size_t i = 0; i < structure.points.size(); ++i) {
      const auto& c = structure.points[i];
      double reeb_res = std::numeric_limits<double>::quiet_NaN();
      if (c.pass()) reeb_res = solve_reeb(sys, c.point).residual;
      csv << i << ',' << c.rank_contact << ',' << c.dim_reeb << ',' << c.dim_intersection << ','
          << format_full(c.margin) << ',' << format_full(reeb_res) << ','
          << (c.pass() ? "1" : "0") << '\n';
    }
  }

  report.add("structure", structure.pass(), 1.0 - structure.worst_margin, csv_path.string());
  if (!structure.pass()) {
    std::cout << "structure verification failed: " << structure.first_failure() << '\n';
  } else {
    double worst_reeb = 0.0;
    for (const Point& x : points) worst_reeb = std::max(worst_reeb, solve_reeb(sys, x).residual);
    report.add("reeb", worst_reeb < 1e-8, worst_reeb);

    double worst_comm = 0.0;
    for (int i = 0; i < std::min<int>(5, points.size()); ++i)
      worst_comm = std::max(worst_comm, reeb_commutator_norm(sys, points[i]));
    report.add("reeb-commutators", worst_comm < 1e-6, worst_comm);

    const ReebFrame frame = solve_reeb(sys, points.front());
    std::cout << "Reeb frame at the first sample point:\n";
    for (int a = 0; a < sys.k; ++a) {
      std::cout << "  R_" << a + 1 << " =";
      for (int i = 0; i < sys.dim; ++i) {
        const double v = frame.vectors(i, a);
        if (std::abs(v) > 1e-9)
          std::cout << ' ' << (v > 0 ? "+" : "") << v << "*d/d" << sys.coordinate_names[i];
      }
      std::cout << '\n';
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  finish(report, out_dir);
  return report.pass() ? 0 : 1;
}

int cmd_simulate(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  const fs::path out_dir = resolve_out_dir(cfg);

  if (cfg.model == "damped-oscillator") {
    Vec ic(3);
    ic << cfg.q0, cfg.p0, cfg.s0;
    const OscillatorTrajectory traj = integrate_damped_oscillator(
        OscillatorParams(cfg.gamma.value_or(0.3)), ic, cfg.t_end, cfg.dt > 0 ? cfg.dt : 1e-3);
    const fs::path path = out_dir / "trajectory.csv";
    std::ofstream csv(path);
    csv << "t,q,p,s,H\n";
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      csv << format_full(traj.times[i]) << ',' << format_full(traj.states(0, i)) << ','
          << format_full(traj.states(1, i)) << ',' << format_full(traj.states(2, i)) << ','
          << format_full(traj.energy[i]) << '\n';
    report.add("simulate", true, 0.0, path.string());
  } else {
    const SectionGrid psi = simulate_section(cfg);
    const fs::path path = out_dir / "section.csv";
    std::ofstream csv(path);
    psi.write_csv(csv);
    report.add("simulate", true, 0.0, path.string());

    if (has_check(cfg, "residual-scan")) {
      const ResidualScan scan = residual_scan(build_model(cfg), psi);
      std::cout << "field-equation residuals: max form " << scan.max_form << ", mean form "
                << scan.mean_form << ", max scalar " << scan.max_scalar << ", mean scalar "
                << scan.mean_scalar << " over " << scan.nodes << " nodes\n";
      report.add("residual-scan", scan.max_combined() < cfg.tol, scan.max_combined());
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  finish(report, out_dir);
  return report.pass() ? 0 : 1;
}

int cmd_convergence(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  const fs::path out_dir = resolve_out_dir(cfg);

  std::vector<double> levels, errors;
  double expected_order = 2.0, lo = 1.7, hi = 2.3;

  if (cfg.model == "damped-string") {
    const DampedStringParams params(cfg.rho, cfg.tau, cfg.damp);
    const auto colon = cfg.ic.find(':');
    if (cfg.ic.substr(0, colon) != "sine")
      throw ConfigError("the modal string oracle needs a sine:<n> initial condition");
    const int mode = std::stoi(cfg.ic.substr(colon + 1));
    for (int level = 0; level < 3; ++level) {
      const int n = (cfg.nodes - 1) * (1 << level) + 1;
      const SpaceGrid grid(cfg.x0, cfg.x1, n, Boundary::DirichletZero);
      const double dt = 0.05 * grid.dx() / params.wave_speed();
      const SectionGrid psi = integrate_damped_string(params, grid, StringIC::sine_mode(mode, grid),
                                                      cfg.t_end, dt, 1 << 24);
      double err = 0.0;
      const int ti = psi.n_times() - 1;
      for (int j = 0; j < grid.n; ++j)
        err = std::max(err, std::abs(psi.frames[ti](0, j) -
                                     modal_string_oracle(params, mode, cfg.x0, cfg.x1,
                                                         psi.times[ti], grid.node(j))));
      levels.push_back(n);
      errors.push_back(err);
    }
  } else if (cfg.model == "burgers") {
    const BurgersParams params(cfg.diff, cfg.gamma.value_or(-1.0 / cfg.diff));
    auto u0 = parse_periodic_profile(cfg.ic, cfg.x0, cfg.x1);
    const ColeHopfOracle oracle(u0, cfg.x0, cfg.x1, params.diff);
    if (params.gamma != -1.0 / params.diff)
      throw ConfigError("convergence oracle needs gamma = -1/diff (Cole-Hopf)");
    for (int level = 0; level < 3; ++level) {
      const int n = (cfg.nodes - 1) * (1 << level) + 1;
      const SpaceGrid grid(cfg.x0, cfg.x1, n, Boundary::Periodic);
      const double dt = 0.2 * grid.dx() * grid.dx() / params.diff;
      const SectionGrid psi = integrate_burgers(params, grid, u0, cfg.t_end, dt, 1 << 24);
      double err = 0.0;
      const int ti = psi.n_times() - 1;
      for (int j = 0; j < grid.n; ++j)
        err = std::max(err, std::abs(psi.frames[ti](0, j) - oracle(psi.times[ti], grid.node(j))));
      levels.push_back(n);
      errors.push_back(err);
    }
  } else if (cfg.model == "damped-oscillator") {
    expected_order = 4.0;
    lo = 3.4;
    hi = 4.6;
    const double gamma = cfg.gamma.value_or(0.3);
    Vec ic(3);
    ic << cfg.q0, cfg.p0, cfg.s0;
    const KContactSystem sys = build_damped_oscillator(OscillatorParams(gamma));
    const double h0 = sys.hamiltonian(ic);
    for (int level = 0; level < 3; ++level) {
      const double dt = (cfg.dt > 0 ? cfg.dt : 8e-3) / (1 << level);
      const OscillatorTrajectory traj =
          integrate_damped_oscillator(OscillatorParams(gamma), ic, cfg.t_end, dt);
      double err = 0.0;
      for (std::size_t i = 0; i < traj.times.size(); ++i)
        err = std::max(err, std::abs(traj.energy[i] - h0 * std::exp(-gamma * traj.times[i])));
      levels.push_back(dt);
      errors.push_back(err);
    }
  } else {
    throw ConfigError("no convergence oracle for model: " + cfg.model);
  }

  const fs::path path = out_dir / "convergence.csv";
  std::ofstream csv(path);
  csv << "level,error,observed_order\n";
  bool pass = true;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    double order = std::numeric_limits<double>::quiet_NaN();
    if (i > 0) {
      order = std::log2(errors[i - 1] / errors[i]);
      pass = pass && order > lo && order < hi;
    }
    csv << format_full(levels[i]) << ',' << format_full(errors[i]) << ',' << format_full(order)
        << '\n';
    std::cout << "level " << levels[i] << ": error " << errors[i];
    if (i > 0) std::cout << ", observed order " << order << " (expect ~" << expected_order << ")";
    std::cout << '\n';
  }
  report.add("convergence", pass, errors.back(), path.string());
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  finish(report, out_dir);
  return report.pass() ? 0 : 1;
}

VectorFieldExpr named_symmetry(const RunConfig& cfg, const KContactSystem& sys,
                               std::string* expected) {
  const std::string name = cfg.symmetry;
  if (cfg.model == "damped-string" && (name.empty() || name == "translation-u")) {
    *expected = "hamiltonian";
    return damped_string_translation();
  }
  if (cfg.model == "coupled-strings" && (name.empty() || name == "rotation")) {
    *expected = "hamiltonian";
    return coupled_strings_rotation();
  }
  if (cfg.model == "burgers") {
    if (name.empty() || name == "translation-v") {
      *expected = "dynamical";
      return burgers_v_translation();
    }
    if (name == "translation-v-lifted") {
      *expected = "hamiltonian";
      return burgers_v_translation_lifted();
    }
    if (name == "scaling-u") {
      *expected = "none";
      return burgers_u_scaling();
    }
  }
  if (cfg.model == "damped-oscillator" && (name.empty() || name == "hamiltonian-flow")) {
    *expected = "flow";
    return oscillator_hamiltonian_flow(sys);
  }
  throw ConfigError("unknown symmetry '" + name + "' for model " + cfg.model);
}

int cmd_symmetry(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  const fs::path out_dir = resolve_out_dir(cfg);

  const KContactSystem sys = build_model(cfg);
  std::string expected;
  const VectorFieldExpr y = named_symmetry(cfg, sys, &expected);
  if (expected == "flow") throw ConfigError("use the dissipation subcommand for the flow field");

  SampleRng rng(cfg.seed);
  const auto points = sample_box(rng, sys.dim, -0.5, 0.5, std::min(cfg.points, 25));

  const fs::path points_path = out_dir / "symmetry_points.csv";
  {
    std::ofstream csv(points_path);
    csv << "point,form_residual,h_residual\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto one = check_hamiltonian_symmetry(sys, y, {points[i]}, kDefaultFdStep, cfg.tol);
      csv << i << ',' << format_full(one.max_form_residual) << ','
          << format_full(one.max_h_residual) << '\n';
    }
  }

  SymmetryCandidate candidate{y, SymmetryKind::Unknown, cfg.symmetry};
  std::optional<SectionGrid> psi;
  if (cfg.model == "burgers" || cfg.model == "damped-string") {
    RunConfig sim = cfg;
    sim.nodes = std::min(cfg.nodes, 129);
    sim.t_end = std::min(cfg.t_end, 0.25);
    sim.frames = 40;
    psi = simulate_section(sim);
  }
  const SymmetryClassification result = classify_symmetry(
      sys, candidate, points, psi ? &*psi : nullptr, cfg.probe_eps, kDefaultFdStep, cfg.tol);

  std::string classification = "none";
  if (result.verified == SymmetryKind::HamiltonianKContact) classification = "hamiltonian";
  if (result.verified == SymmetryKind::Dynamical) classification = "dynamical";
  if (result.probe)
    std::cout << "transport probe: form " << result.probe->form_before << " -> "
              << result.probe->form_after << ", scalar " << result.probe->scalar_before << " -> "
              << result.probe->scalar_after << '\n'
              << "  note: " << result.probe->note << '\n';

  const fs::path path = out_dir / "symmetry_report.csv";
  std::ofstream csv(path);
  csv << "check,value\n";
  csv << "max_form_residual," << format_full(result.hamiltonian_check.max_form_residual) << '\n';
  csv << "max_h_residual," << format_full(result.hamiltonian_check.max_h_residual) << '\n';
  csv << "max_reeb_commutator," << format_full(result.reeb_commutator) << '\n';
  csv << "classification," << classification << '\n';

  std::cout << "classification: " << classification << " (expected " << expected << ")\n";
  report.add("hamiltonian-check", result.hamiltonian_check.pass == (expected == "hamiltonian"),
             std::max(result.hamiltonian_check.max_form_residual,
                      result.hamiltonian_check.max_h_residual),
             path.string());
  report.add("classification", classification == expected, result.probe ? result.probe->form_after : 0.0);
  if (expected == "hamiltonian")
    report.add("reeb-preservation", result.reeb_commutator < 1e-6, result.reeb_commutator);

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  finish(report, out_dir);
  return report.pass() ? 0 : 1;
}

int cmd_dissipation(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  RunReport report;
  const fs::path out_dir = resolve_out_dir(cfg);
  const KContactSystem sys = build_model(cfg);

  if (cfg.model == "damped-oscillator") {
    const double gamma = cfg.gamma.value_or(0.3);
    Vec ic(3);
    ic << cfg.q0, cfg.p0, cfg.s0;
    const OscillatorTrajectory traj = integrate_damped_oscillator(
        OscillatorParams(gamma), ic, cfg.t_end, cfg.dt > 0 ? cfg.dt : 1e-3);
    // energy dissipation: H(t) = H(0) exp(-gamma t)
    const double h0 = traj.energy.front();
    double worst = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i)
      worst = std::max(worst,
                       std::abs(traj.energy[i] - h0 * std::exp(-gamma * traj.times[i])) /
                           std::max(1e-12, std::abs(h0)));
    report.add("energy-decay", worst < cfg.tol, worst);

    DissipationLaw energy{[sys](const Point& x) {
                            Vec f(1);
                            f << sys.hamiltonian(x);
                            return f;
                          },
                          "induced-from-symmetry"};
    std::vector<VectorFieldExpr> flow{oscillator_hamiltonian_flow(sys)};
    double law_worst = 0.0;
    for (int i = 0; i < static_cast<int>(traj.times.size()); i += 500)
      law_worst = std::max(law_worst, std::abs(dissipation_residual_kvector(
                                          sys, energy, flow, traj.states.col(i))));
    report.add("kvector-law", law_worst < 1e-8, law_worst);
  } else {
    std::string expected;
    const VectorFieldExpr y = named_symmetry(cfg, sys, &expected);
    const DissipationLaw law = induced_dissipation_law(sys, y);
    const SectionGrid psi = simulate_section(cfg);

    const fs::path path = out_dir / "dissipation_report.csv";
    std::ofstream csv(path);
    csv << "t,x,residual\n";
    DissipationScan scan;
    for (int ti = 1; ti + 1 < psi.n_times(); ++ti) {
      const int xhi = psi.grid.boundary == Boundary::Periodic ? psi.grid.unique_nodes()
                                                              : psi.grid.n - 1;
      for (int xi = psi.grid.boundary == Boundary::Periodic ? 0 : 1; xi < xhi; ++xi) {
        const double r = std::abs(dissipation_residual_section(sys, law, psi, ti, xi));
        scan.max_residual = std::max(scan.max_residual, r);
        scan.mean_residual += r;
        ++scan.nodes;
        csv << format_full(psi.times[ti]) << ',' << format_full(psi.grid.node(xi)) << ','
            << format_full(r) << '\n';
      }
    }
    if (scan.nodes) scan.mean_residual /= scan.nodes;

    // threshold scaled by a crude discretization estimate
    const double dx = psi.grid.dx(), fdt = psi.frame_dt();
    const double disc = 1e4 * (dx * dx + fdt * fdt);
    std::cout << "dissipation residuals: max " << scan.max_residual << ", mean "
              << scan.mean_residual << " over " << scan.nodes << " nodes (threshold "
              << cfg.tol * (1.0 + disc) << ")\n";
    report.add("dissipation-law", scan.max_residual < cfg.tol * (1.0 + disc), scan.max_residual,
               path.string());
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  finish(report, out_dir);
  return report.pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"k-contact field theory toolkit"};
  app.require_subcommand(1);

  std::string config_path, model, out, symmetry;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON config file (flat object)");
    sub->add_option("--model", model, "model id (overrides config)");
    sub->add_option("--out", out, "output directory (KCONTACT_OUT env overrides)");
    sub->add_option("--seed", seed, "rng seed for sample points");
    sub->add_option("--tol", tol, "pass/fail tolerance");
    sub->add_option("--symmetry", symmetry, "named symmetry candidate");
    return sub;
  };

  auto* verify = add_common(app.add_subcommand("verify", "structure + Reeb checks"));
  auto* simulate = add_common(app.add_subcommand("simulate", "integrate and dump the section"));
  auto* convergence = add_common(app.add_subcommand("convergence", "order study vs oracle"));
  auto* dissipation = add_common(app.add_subcommand("dissipation", "dissipation-law residuals"));
  auto* symmetry_cmd = add_common(app.add_subcommand("symmetry", "symmetry classification"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!model.empty()) cfg.model = model;
    if (!out.empty()) cfg.out = out;
    if (seed) cfg.seed = *seed;
    if (tol) cfg.tol = *tol;
    if (!symmetry.empty()) cfg.symmetry = symmetry;

    if (verify->parsed()) return cmd_verify(cfg);
    if (simulate->parsed()) return cmd_simulate(cfg);
    if (convergence->parsed()) return cmd_convergence(cfg);
    if (dissipation->parsed()) return cmd_dissipation(cfg);
    if (symmetry_cmd->parsed()) return cmd_symmetry(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const StabilityError& e) {
    std::cerr << "stability violation: " << e.what() << '\n';
    return 1;
  } catch (const BlowUpError& e) {
    std::cerr << "blow-up: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
