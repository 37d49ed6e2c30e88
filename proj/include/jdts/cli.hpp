#pragma once

// Command-line front end. Everything here is a thin shell over the library:
// parse a JSON config, build the model, dispatch, serialize. Kept header-only
// and testable by letting run() take arbitrary arg vectors and streams.

#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jdts/io.hpp"
#include "jdts/presets.hpp"

namespace jdts::cli {

namespace fs = std::filesystem;
using njson = nlohmann::json;

// Exit codes, fixed contract:
//   0 success, 2 invalid config or arguments, 3 loading ODE blow-up,
//   4 inconsistent (residual or martingale verdict), 5 jump-measure
//   regularity failure, 6 rank-deficient recovery.
enum ExitCode : int {
  kOk = 0,
  kInvalid = 2,
  kBlowUp = 3,
  kInconsistent = 4,
  kRegularity = 5,
  kRankDeficient = 6,
};

struct Options {
  std::string command;
  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  bool quiet = false;
};

inline bool known_command(const std::string& c) {
  return c == "price" || c == "check" || c == "recover" || c == "ns-demo" ||
         c == "simulate" || c == "martingale";
}

inline Options parse_args(const std::vector<std::string>& args) {
  if (args.empty())
    throw InvalidInput(
        "usage: jdts <price|check|recover|ns-demo|simulate|martingale> "
        "--config <path> [--out <dir>] [--seed <u64>] [--tol <float>] [--quiet]");
  Options opt;
  opt.command = args[0];
  if (!known_command(opt.command))
    throw InvalidInput("unknown command '" + opt.command + "'");
  for (std::size_t i = 1; i < args.size(); ++i) {
    const std::string& a = args[i];
    auto need_value = [&](const char* flag) -> const std::string& {
      if (i + 1 >= args.size())
        throw InvalidInput(std::string(flag) + " requires a value");
      return args[++i];
    };
    if (a == "--config") {
      opt.config_path = need_value("--config");
    } else if (a == "--out") {
      opt.out_dir = need_value("--out");
    } else if (a == "--seed") {
      const std::string& v = need_value("--seed");
      try {
        std::size_t pos = 0;
        opt.seed = std::stoull(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw InvalidInput("--seed: cannot parse '" + v + "' as an unsigned integer");
      }
    } else if (a == "--tol") {
      const std::string& v = need_value("--tol");
      try {
        std::size_t pos = 0;
        opt.tol = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw InvalidInput("--tol: cannot parse '" + v + "' as a number");
      }
      if (!(*opt.tol > 0.0)) throw InvalidInput("--tol must be positive");
    } else if (a == "--quiet") {
      opt.quiet = true;
    } else {
      throw InvalidInput("unknown argument '" + a + "'");
    }
  }
  if (opt.config_path.empty()) throw InvalidInput("--config <path> is required");
  return opt;
}

// ---------------------------------------------------------------------------
// config parsing

namespace detail {

inline Vec json_vec(const njson& j, const char* what) {
  if (!j.is_array()) throw InvalidInput(std::string(what) + ": expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number())
      throw InvalidInput(std::string(what) + ": entries must be numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline Mat json_mat(const njson& j, const char* what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw InvalidInput(std::string(what) + ": expected an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const njson& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw InvalidInput(std::string(what) + ": ragged rows");
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

// bound arrays accept null for an open side
inline Vec json_bound(const njson& j, Eigen::Index n, double open, const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
    throw InvalidInput(std::string(what) + ": expected " + std::to_string(n) +
                       " entries");
  Vec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const njson& e = j[static_cast<std::size_t>(i)];
    v[i] = e.is_null() ? open : e.get<double>();
  }
  return v;
}

inline DomainBox box_from(const njson& j, std::size_t dim) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (j.is_null()) return DomainBox::unbounded(dim);
  const double inf = std::numeric_limits<double>::infinity();
  Vec lo = j.contains("lo") ? json_bound(j["lo"], n, -inf, "box.lo")
                            : Vec::Constant(n, -inf);
  Vec hi = j.contains("hi") ? json_bound(j["hi"], n, inf, "box.hi")
                            : Vec::Constant(n, inf);
  return DomainBox(std::move(lo), std::move(hi));
}

// {"constant": [...], "linear": [[...]]}; a bare number is a constant scalar
inline CoefficientFunction vec_coeff_from(const njson& j, std::size_t dim,
                                          const char* what) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (j.is_number()) {
    if (n != 1)
      throw InvalidInput(std::string(what) +
                         ": scalar shorthand needs a one-dimensional target");
    Vec c(1);
    c << j.get<double>();
    return CoefficientFunction::constant(std::move(c), dim);
  }
  if (!j.is_object() || !j.contains("constant"))
    throw InvalidInput(std::string(what) + ": expected {\"constant\": [...]}");
  Vec c = json_vec(j["constant"], what);
  if (!j.contains("linear")) return CoefficientFunction::constant(std::move(c), dim);
  Mat l = json_mat(j["linear"], what);
  return CoefficientFunction::affine(std::move(c), std::move(l));
}

// intensity is scalar-valued whatever the state dimension
inline CoefficientFunction intensity_from(const njson& j, std::size_t dim) {
  if (j.is_number()) {
    Vec c(1);
    c << j.get<double>();
    return CoefficientFunction::constant(std::move(c), dim);
  }
  if (!j.is_object() || !j.contains("constant"))
    throw InvalidInput("intensity: expected a number or {\"constant\": [...]}");
  Vec c = json_vec(j["constant"], "intensity");
  if (!j.contains("linear")) return CoefficientFunction::constant(std::move(c), dim);
  Mat l = json_mat(j["linear"], "intensity");
  return CoefficientFunction::affine(std::move(c), std::move(l));
}

// matrix-valued coefficient on the flattened n*n layout;
// "linear" is one matrix per state coordinate
inline CoefficientFunction mat_coeff_from(const njson& j, std::size_t dim,
                                          const char* what) {
  const auto n = static_cast<Eigen::Index>(dim);
  if (!j.is_object() || !j.contains("constant"))
    throw InvalidInput(std::string(what) + ": expected {\"constant\": [[...]]}");
  Mat c = json_mat(j["constant"], what);
  if (c.rows() != n || c.cols() != n)
    throw InvalidInput(std::string(what) + ": constant block must be n by n");
  Vec flat = flatten(c);
  if (!j.contains("linear"))
    return CoefficientFunction::constant(std::move(flat), dim);
  const njson& lin = j["linear"];
  if (!lin.is_array() || static_cast<Eigen::Index>(lin.size()) != n)
    throw InvalidInput(std::string(what) + ": linear part needs one matrix per coordinate");
  Mat l(n * n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    Mat mr = json_mat(lin[static_cast<std::size_t>(r)], what);
    if (mr.rows() != n || mr.cols() != n)
      throw InvalidInput(std::string(what) + ": linear blocks must be n by n");
    l.col(r) = flatten(mr);
  }
  return CoefficientFunction::affine(std::move(flat), std::move(l));
}

inline JumpMeasure jumps_from(const njson& j, std::size_t dim) {
  if (j.is_null()) return JumpMeasure::dirac_zero(dim);
  if (!j.is_object() || !j.contains("type"))
    throw InvalidInput("jumps: expected {\"type\": ...}");
  const std::string type = j["type"].get<std::string>();
  if (type == "dirac") return JumpMeasure::dirac_zero(dim);
  if (type == "discrete") {
    std::vector<Vec> atoms;
    for (const njson& a : j.at("atoms")) atoms.push_back(json_vec(a, "jumps.atoms"));
    std::vector<double> w = j.at("weights").get<std::vector<double>>();
    return JumpMeasure::discrete(std::move(atoms), std::move(w));
  }
  if (type == "exponential") {
    Vec rates = json_vec(j.at("rates"), "jumps.rates");
    std::vector<int> signs;
    if (j.contains("signs")) signs = j["signs"].get<std::vector<int>>();
    return JumpMeasure::exponential_product(std::move(rates), std::move(signs));
  }
  if (type == "gaussian") {
    Vec mean = json_vec(j.at("mean"), "jumps.mean");
    Vec sd = json_vec(j.at("stddev"), "jumps.stddev");
    std::vector<bool> nonneg;
    if (j.contains("nonneg")) nonneg = j["nonneg"].get<std::vector<bool>>();
    return JumpMeasure::gaussian_diagonal(std::move(mean), std::move(sd),
                                          std::move(nonneg));
  }
  if (type == "empirical") {
    std::vector<Vec> samples;
    for (const njson& s : j.at("samples"))
      samples.push_back(json_vec(s, "jumps.samples"));
    return JumpMeasure::empirical(std::move(samples));
  }
  throw InvalidInput("jumps: unknown type '" + type + "'");
}

inline JumpDiffusionModel model_from(const njson& j) {
  if (!j.is_object() || !j.contains("dim"))
    throw InvalidInput("model: expected a preset name or {\"dim\": ...}");
  const auto dim = j["dim"].get<std::size_t>();
  if (dim == 0) throw InvalidInput("model: dim must be positive");
  DomainBox box = box_from(j.contains("box") ? j["box"] : njson(), dim);
  if (!j.contains("drift")) throw InvalidInput("model: drift table required");
  auto drift = vec_coeff_from(j["drift"], dim, "drift");
  auto lam = j.contains("intensity")
                 ? intensity_from(j["intensity"], dim)
                 : CoefficientFunction::constant(Vec::Zero(1), dim);
  auto jumps = jumps_from(j.contains("jumps") ? j["jumps"] : njson(), dim);
  const bool has_c = j.contains("diffusion_c");
  const bool has_a = j.contains("diffusion_a");
  if (has_c == has_a)
    throw InvalidInput("model: exactly one of diffusion_c / diffusion_a required");
  if (has_c) {
    auto c = mat_coeff_from(j["diffusion_c"], dim, "diffusion_c");
    return JumpDiffusionModel::with_c(std::move(box), std::move(drift), std::move(c),
                                      std::move(lam), std::move(jumps));
  }
  auto a = mat_coeff_from(j["diffusion_a"], dim, "diffusion_a");
  return JumpDiffusionModel::with_a(std::move(box), std::move(drift), std::move(a),
                                    std::move(lam), std::move(jumps));
}

// shift the level component of an affine drift; turns a consistent fixture
// into a controlled misspecification for check / martingale demos
inline JumpDiffusionModel shift_drift(const JumpDiffusionModel& m, double eps) {
  const CoefficientFunction& d = m.drift_fn();
  if (!d.is_affine())
    throw InvalidInput("perturb_drift requires an affine drift table");
  Vec c0 = d.constant_part();
  c0[0] += eps;
  auto nd = CoefficientFunction::affine(std::move(c0), d.linear_part());
  if (m.c_fn())
    return JumpDiffusionModel::with_c(m.domain(), std::move(nd), *m.c_fn(),
                                      m.intensity_fn(), m.jumps());
  return JumpDiffusionModel::with_a(m.domain(), std::move(nd), *m.a_fn(),
                                    m.intensity_fn(), m.jumps());
}

}  // namespace detail

// Everything a command can consume, with per-command defaults resolved at
// dispatch time. Unset numeric fields stay negative / empty.
struct Config {
  std::optional<JumpDiffusionModel> model;
  Vec x0;
  Vec h0;
  double tau_max = -1.0;
  std::vector<double> tau_grid;
  std::vector<Vec> x_points;
  std::vector<NSState> ns_states;
  std::vector<std::pair<double, double>> regularity_probes;
  std::optional<JumpMeasure> recover_measure;
  double dt = 1e-3;
  std::size_t n_paths = 0;
  std::optional<std::uint64_t> seed;
  double t = 1.0;
  double T = -1.0;
  double tol = -1.0;
  double perturb_drift = 0.0;
};

inline Config make_config(const njson& j, const Options& opt) {
  if (!j.is_object()) throw InvalidInput("config: top level must be an object");
  Config cfg;
  if (j.contains("model")) {
    const njson& m = j["model"];
    if (m.is_string()) {
      Preset p = load_preset(m.get<std::string>());
      cfg.model = std::move(p.model);
      cfg.x0 = std::move(p.x0);
      cfg.tau_max = p.tau_max;
    } else {
      cfg.model = detail::model_from(m);
    }
  }
  if (j.contains("recover_measure")) {
    if (!cfg.model)
      throw InvalidInput("recover_measure: needs a model to fix the dimension");
    cfg.recover_measure =
        detail::jumps_from(j["recover_measure"], cfg.model->dim());
  }
  if (j.contains("x0")) cfg.x0 = detail::json_vec(j["x0"], "x0");
  if (j.contains("h0")) cfg.h0 = detail::json_vec(j["h0"], "h0");
  if (j.contains("tau_max")) cfg.tau_max = j["tau_max"].get<double>();
  if (j.contains("tau_grid"))
    cfg.tau_grid = j["tau_grid"].get<std::vector<double>>();
  if (j.contains("x_points"))
    for (const njson& p : j["x_points"])
      cfg.x_points.push_back(detail::json_vec(p, "x_points"));
  if (j.contains("ns_states"))
    for (const njson& s : j["ns_states"])
      cfg.ns_states.push_back(NSState::from_vec(detail::json_vec(s, "ns_states")));
  if (j.contains("regularity_probes"))
    for (const njson& p : j["regularity_probes"]) {
      Vec v = detail::json_vec(p, "regularity_probes");
      if (v.size() != 2)
        throw InvalidInput("regularity_probes: entries are [r2, r3] pairs");
      cfg.regularity_probes.emplace_back(v[0], v[1]);
    }
  if (j.contains("dt")) cfg.dt = j["dt"].get<double>();
  if (j.contains("n_paths")) cfg.n_paths = j["n_paths"].get<std::size_t>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("t")) cfg.t = j["t"].get<double>();
  if (j.contains("T")) cfg.T = j["T"].get<double>();
  if (j.contains("tol")) cfg.tol = j["tol"].get<double>();
  if (j.contains("perturb_drift"))
    cfg.perturb_drift = j["perturb_drift"].get<double>();
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.tol) cfg.tol = *opt.tol;
  return cfg;
}

// ---------------------------------------------------------------------------
// command implementations

namespace detail {

inline const JumpDiffusionModel& need_model(const Config& cfg) {
  if (!cfg.model) throw InvalidInput("config: model required");
  return *cfg.model;
}

inline Vec need_x0(const Config& cfg, std::size_t dim) {
  if (cfg.x0.size() == 0) throw InvalidInput("config: x0 required");
  if (static_cast<std::size_t>(cfg.x0.size()) != dim)
    throw InvalidInput("config: x0 has wrong dimension");
  return cfg.x0;
}

inline Vec default_h0(std::size_t dim) {
  Vec h0 = Vec::Zero(static_cast<Eigen::Index>(dim) + 1);
  h0[1] = 1.0;
  return h0;
}

inline std::uint64_t need_seed(const Config& cfg, const char* cmd) {
  if (!cfg.seed)
    throw InvalidInput(std::string(cmd) +
                       ": seed required (config \"seed\" or --seed)");
  return *cfg.seed;
}

inline std::ofstream open_out(const fs::path& dir, const std::string& name) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InvalidInput("cannot create output directory " + dir.string());
  fs::path p = dir / name;
  std::ofstream os(p, std::ios::binary);
  if (!os) throw InvalidInput("cannot open output file " + p.string());
  return os;
}

inline HPath solve_family_path(const JumpDiffusionModel& model, const Vec& h0,
                               double tau_max) {
  GRESystem sys = build_gre(model, model.jumps(), h0);
  return solve_gre(std::move(sys), model.jumps(), tau_max);
}

inline std::vector<double> default_yield_grid(double tau_max) {
  const double base[] = {0.25, 0.5, 1, 2, 3, 5, 7, 10, 15, 20, 30};
  std::vector<double> g;
  for (double t : base)
    if (t <= tau_max) g.push_back(t);
  if (g.empty() || g.back() < tau_max) g.push_back(tau_max);
  return g;
}

inline int cmd_price(const Config& cfg, const Options& opt, std::ostream& out) {
  const auto& model = need_model(cfg);
  const Vec x0 = need_x0(cfg, model.dim());
  const double tau_max = cfg.tau_max > 0.0 ? cfg.tau_max : 30.0;
  std::vector<double> grid =
      cfg.tau_grid.empty() ? default_yield_grid(tau_max) : cfg.tau_grid;
  double solve_to = tau_max;
  for (double t : grid) solve_to = std::max(solve_to, t);
  const Vec h0 = cfg.h0.size() > 0 ? cfg.h0 : default_h0(model.dim());

  HPath path = solve_family_path(model, h0, solve_to);
  YieldCurve yc = yield_curve(path, x0, grid);

  std::vector<double> dump;
  const int kNodes = 121;
  for (int i = 0; i < kNodes; ++i) dump.push_back(solve_to * i / (kNodes - 1));
  {
    auto os = open_out(opt.out_dir, "hpath.csv");
    write_hpath_csv(os, path, dump);
  }
  {
    auto os = open_out(opt.out_dir, "yield.csv");
    write_yield_csv(os, yc);
  }
  if (!opt.quiet) {
    JsonObject o;
    o.field("command", "price")
        .field("tau_max", path.tau_max())
        .field("grid_points", yc.tau.size())
        .field("price_last", yc.price.back())
        .field("yield_last", yc.yield.back());
    out << o.str() << "\n";
  }
  return kOk;
}

inline int cmd_check(const Config& cfg, const Options& opt, std::ostream& out) {
  const auto& model = need_model(cfg);
  const Vec x0 = need_x0(cfg, model.dim());
  std::vector<double> grid =
      cfg.tau_grid.empty() ? default_tau_grid() : cfg.tau_grid;
  double solve_to = 0.0;
  for (double t : grid) solve_to = std::max(solve_to, t);
  if (cfg.tau_max > 0.0) solve_to = std::max(solve_to, cfg.tau_max);
  const Vec h0 = cfg.h0.size() > 0 ? cfg.h0 : default_h0(model.dim());
  const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-6;

  HPath path = solve_family_path(model, h0, solve_to);
  SeparableFamily family = family_from_path(path, model.domain());

  if (!model.jumps().is_dirac_zero()) {
    RegularityCheck reg = regularity_check(family, model.jumps(), x0, solve_to);
    if (!reg.finite)
      throw RegularityError(
          "check: jump-size integral of the curve increment diverges");
  }

  // the family always comes from the declared table; a drift perturbation
  // only enters the dynamics side, so it shows up in the residual
  const JumpDiffusionModel dyn =
      cfg.perturb_drift != 0.0 ? shift_drift(model, cfg.perturb_drift) : model;
  std::vector<Vec> pts = cfg.x_points;
  if (pts.empty()) pts.push_back(x0);
  ResidualReport rep = residual_report(dyn, family, grid, pts);
  {
    auto os = open_out(opt.out_dir, "residual.csv");
    write_residual_csv(os, rep, model.dim());
  }
  const std::string verdict = residual_json(rep, tol);
  {
    auto os = open_out(opt.out_dir, "check.json");
    os << verdict << "\n";
  }
  if (!opt.quiet) out << verdict << "\n";
  return rep.consistent(tol) ? kOk : kInconsistent;
}

inline int cmd_recover(const Config& cfg, const Options& opt, std::ostream& out) {
  const auto& model = need_model(cfg);
  const Vec x0 = need_x0(cfg, model.dim());
  std::vector<double> samples = cfg.tau_grid;
  if (samples.empty())
    for (int i = 1; i <= 16; ++i) samples.push_back(0.25 * i);
  double solve_to = 0.0;
  for (double t : samples) solve_to = std::max(solve_to, t);
  const Vec h0 = cfg.h0.size() > 0 ? cfg.h0 : default_h0(model.dim());
  const double quad_tol = cfg.tol > 0.0 ? cfg.tol : 1e-10;

  HPath path = solve_family_path(model, h0, solve_to);
  SeparableFamily family = family_from_path(path, model.domain());
  // the reference measure for the jump column defaults to the model's own;
  // a declared-jumpless model then has a dead column and reports rank
  // deficiency, so configs that want lambda = 0 identified pass an explicit
  // recover_measure instead
  const JumpMeasure& Q =
      cfg.recover_measure ? *cfg.recover_measure : model.jumps();
  RecoveredCoefficients rec =
      recover_coefficients(family, Q, x0, samples, quad_tol);

  const std::string rendered = recovered_json(rec);
  {
    auto os = open_out(opt.out_dir, "recovered.json");
    os << rendered << "\n";
  }
  if (!opt.quiet) out << rendered << "\n";
  return rec.rank_deficient ? kRankDeficient : kOk;
}

inline int cmd_ns_demo(const Config& cfg, const Options& opt, std::ostream& out) {
  const auto& model = need_model(cfg);
  if (model.dim() != 4)
    throw InvalidInput("ns-demo: model must have four state coordinates");
  std::vector<NSState> states = cfg.ns_states;
  if (states.empty()) {
    states.push_back({0.03, -0.01, 0.02, 0.5});
    states.push_back({0.05, 0.015, -0.01, 1.2});
  }
  std::vector<double> grid =
      cfg.tau_grid.empty() ? std::vector<double>{0.25, 0.5, 1, 2, 3, 5, 8, 12}
                           : cfg.tau_grid;
  const double tol = cfg.tol > 0.0 ? cfg.tol : 1e-6;

  if (!cfg.regularity_probes.empty() && !model.jumps().is_dirac_zero()) {
    NSRegularity reg = ns_regularity_check(model.jumps(), cfg.regularity_probes);
    if (!reg.ok) {
      std::ostringstream msg;
      msg << "ns-demo: jump measure fails the moment bound";
      if (reg.failed_probe)
        msg << " at probe (" << reg.failed_probe->first << ", "
            << reg.failed_probe->second << ")";
      throw RegularityError(msg.str());
    }
  }

  NSScanReport rep = ns_impossibility_scan(model, states, grid, tol);
  const Vec xs = states.front().vec();
  std::vector<NSQDiscrepancy> table =
      ns_q_discrepancies(states.front(), model.a(xs), model.drift(xs));

  {
    auto os = open_out(opt.out_dir, "ns_scan.csv");
    write_scan_csv(os, rep);
  }
  {
    auto os = open_out(opt.out_dir, "ns_coefficients.csv");
    write_q_table_csv(os, table);
  }
  const std::string rendered = scan_json(rep, table);
  {
    auto os = open_out(opt.out_dir, "ns_summary.json");
    os << rendered << "\n";
  }
  if (!opt.quiet) out << rendered << "\n";
  return rep.consistent ? kOk : kInconsistent;
}

inline int cmd_simulate(const Config& cfg, const Options& opt, std::ostream& out) {
  const auto& model = need_model(cfg);
  const Vec x0 = need_x0(cfg, model.dim());
  const std::uint64_t seed = need_seed(cfg, "simulate");
  const double T = cfg.T > 0.0 ? cfg.T : 5.0;
  const JumpDiffusionModel dyn =
      cfg.perturb_drift != 0.0 ? shift_drift(model, cfg.perturb_drift) : model;

  SimPath path = simulate_state(dyn, x0, T, cfg.dt, seed);
  {
    auto os = open_out(opt.out_dir, "path.csv");
    write_path_csv(os, path);
  }

  std::string rendered;
  if (cfg.n_paths > 0) {
    MCEstimate est = mc_bond_price(
        dyn, [](const Vec& x) { return x[0]; }, x0, T, cfg.dt, cfg.n_paths, seed);
    rendered = mc_estimate_json(est);
    auto os = open_out(opt.out_dir, "estimate.json");
    os << rendered << "\n";
  } else {
    JsonObject o;
    o.field("command", "simulate")
        .field("steps", path.times.size() - 1)
        .field("jumps", path.jumps.size())
        .field("final", path.states.back()[0])
        .field("max_jump_prob", path.max_jump_prob)
        .field("left_domain", path.left_domain);
    rendered = o.str();
  }
  if (!opt.quiet) out << rendered << "\n";
  return kOk;
}

inline int cmd_martingale(const Config& cfg, const Options& opt, std::ostream& out) {
  const auto& model = need_model(cfg);
  const Vec x0 = need_x0(cfg, model.dim());
  const std::uint64_t seed = need_seed(cfg, "martingale");
  const double T = cfg.T > 0.0 ? cfg.T : 2.0;
  const std::size_t n_paths = cfg.n_paths > 0 ? cfg.n_paths : 10000;
  const Vec h0 = cfg.h0.size() > 0 ? cfg.h0 : default_h0(model.dim());

  // the family is always solved from the declared table; a drift shift only
  // biases the simulated dynamics, so it shows up as a martingale defect
  HPath path = solve_family_path(model, h0, T);
  SeparableFamily family = family_from_path(path, model.domain());
  const JumpDiffusionModel dyn =
      cfg.perturb_drift != 0.0 ? shift_drift(model, cfg.perturb_drift) : model;

  MartingaleReport rep =
      martingale_test(dyn, family, x0, cfg.t, T, cfg.dt, n_paths, seed);
  const std::string rendered = martingale_json(rep);
  {
    auto os = open_out(opt.out_dir, "martingale.json");
    os << rendered << "\n";
  }
  if (!opt.quiet) out << rendered << "\n";
  return std::abs(rep.z) < 3.0 ? kOk : kInconsistent;
}

inline void diagnostic(std::ostream& err, const char* kind, const std::string& what,
                       int code, std::optional<double> tau = {}) {
  JsonObject o;
  o.field("error", kind).field("message", what).field("exit_code", code);
  if (tau) o.field("tau_reached", *tau);
  err << o.str() << "\n";
}

}  // namespace detail

inline int run(const std::vector<std::string>& args, std::ostream& out,
               std::ostream& err) {
  std::string command;
  try {
    Options opt = parse_args(args);
    command = opt.command;
    njson raw;
    {
      std::ifstream is(opt.config_path);
      if (!is) throw InvalidInput("cannot read config file " + opt.config_path);
      try {
        raw = njson::parse(is);
      } catch (const njson::exception& e) {
        throw InvalidInput(std::string("config: ") + e.what());
      }
    }
    Config cfg = make_config(raw, opt);
    if (command == "price") return detail::cmd_price(cfg, opt, out);
    if (command == "check") return detail::cmd_check(cfg, opt, out);
    if (command == "recover") return detail::cmd_recover(cfg, opt, out);
    if (command == "ns-demo") return detail::cmd_ns_demo(cfg, opt, out);
    if (command == "simulate") return detail::cmd_simulate(cfg, opt, out);
    return detail::cmd_martingale(cfg, opt, out);
  } catch (const ExplosionError& e) {
    detail::diagnostic(err, "blow_up", e.what(), kBlowUp, e.tau_reached);
    return kBlowUp;
  } catch (const RegularityError& e) {
    detail::diagnostic(err, "regularity", e.what(), kRegularity);
    return kRegularity;
  } catch (const DivergentIntegral& e) {
    detail::diagnostic(err, "regularity", e.what(), kRegularity);
    return kRegularity;
  } catch (const InvalidInput& e) {
    detail::diagnostic(err, "invalid_input", e.what(), kInvalid);
    return kInvalid;
  } catch (const Error& e) {
    detail::diagnostic(err, "error", e.what(), kInvalid);
    return kInvalid;
  } catch (const std::exception& e) {
    detail::diagnostic(err, "invalid_input", e.what(), kInvalid);
    return kInvalid;
  }
}

}  // namespace jdts::cli
