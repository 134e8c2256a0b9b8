#include "tandem/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "tandem/control.hpp"
#include "tandem/hitting.hpp"
#include "tandem/invariant.hpp"
#include "tandem/orthopoly.hpp"
#include "tandem/qbd_core.hpp"
#include "tandem/validation.hpp"

namespace tandem {

namespace {

using Json = nlohmann::ordered_json;

constexpr const char* kSchemaVersion = "1.0.0";

struct RunConfig {
  double lambda = 1.0;
  double mu1 = 3.0;
  double mu2 = 2.0;
  std::string capacity = "inf";
  double tol = 1e-13;
  int phase_cap = 0;
  int level_cap = 100;
  int k_max = 200;
  int m_max = 30;
  std::uint64_t seed = 20240917;
  long replications = 1'000'000;
  std::string format = "json";
  std::string output = "-";
  int threads = 1;
  // design / invariant / hitting
  std::string kind = "ArrivalMod";
  double z = 0.5;
  int terms = 20;
  int start_phase = 0;
  int end_phase = 0;
  std::vector<int> only;
};

Capacity parse_capacity(const std::string& s) {
  if (s == "inf" || s == "infinite") return Capacity::infinite();
  std::size_t used = 0;
  int m = 0;
  try {
    m = std::stoi(s, &used);
  } catch (const std::exception&) {
    throw InvalidArgument("capacity must be 'inf' or a positive integer, got '" + s + "'");
  }
  if (used != s.size()) throw InvalidArgument("capacity must be 'inf' or a positive integer");
  return Capacity::finite(m);
}

TandemParams params_of(const RunConfig& c) {
  return make_params(c.lambda, c.mu1, c.mu2, parse_capacity(c.capacity));
}

Json params_json(const TandemParams& p) {
  return Json{{"lambda", p.lambda},
              {"mu1", p.mu1},
              {"mu2", p.mu2},
              {"capacity", p.capacity.to_string()}};
}

Json envelope(const std::string& command, const TandemParams& p) {
  return Json{{"schema_version", kSchemaVersion}, {"command", command}, {"params", params_json(p)}};
}

// Phase count for commands that need finite blocks: m itself, or the
// surrogate cap for an infinite waiting room.
int block_phase_cap(const TandemParams& p, const RunConfig& c) {
  if (p.capacity.is_finite()) return p.capacity.value();
  if (c.phase_cap < 1)
    throw InvalidArgument("infinite capacity needs --phase-cap for a finite surrogate");
  return c.phase_cap;
}

Json matrix_json(const Eigen::MatrixXd& a) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) row.push_back(a(i, j));
    rows.push_back(row);
  }
  return rows;
}

const char* rule_name(StabilityRule r) {
  switch (r) {
    case StabilityRule::FiniteRhoNotOne: return "FiniteRhoNotOne";
    case StabilityRule::FiniteRhoOne: return "FiniteRhoOne";
    default: return "InfiniteCapacity";
  }
}

// Reports come back as a JSON document or, for sweeps, as CSV text.
struct Report {
  std::string text;
  int code = kExitOk;
};

Report json_report(const Json& j, int code = kExitOk) { return {j.dump(2) + "\n", code}; }

Report cmd_spectral(const RunConfig& c) {
  const TandemParams p = params_of(c);
  const SpectralReport s = spectral_report(p);
  Json j = envelope("spectral", p);
  j["rho1"] = s.rho1;
  j["rho2"] = s.rho2;
  j["eta"] = s.eta;
  j["z1"] = s.z1;
  j["regime"] = to_string(s.regime);
  j["feasible_interval"] = {{"lower", s.feasible_decay_interval.lower},
                            {"upper", s.feasible_decay_interval.upper},
                            {"closed", "left"}};
  j["stability"] = {{"stable", s.stability.stable},
                    {"rule", rule_name(s.stability.rule)},
                    {"lhs", s.stability.lhs},
                    {"rhs", s.stability.rhs}};
  return json_report(j);
}

struct SweepRow {
  int m = 0;
  double zhat = 0.0;
  double gap = 0.0;
  std::string error;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

Report cmd_sweep_zhat(const RunConfig& c) {
  const TandemParams p = params_of(c);
  if (c.m_max < 1) throw InvalidArgument("m_max must be >= 1");
  if (c.threads < 1) throw InvalidArgument("threads must be >= 1");
  validate_rates(p);
  const bool first = regime_of(p) == Regime::FirstBottleneck;
  const double limit = first ? compute_eta(p) : p.rho2();

  std::vector<SweepRow> rows(c.m_max);
  auto work = [&](int t) {
    for (int m = 1 + t; m <= c.m_max; m += c.threads) {
      SweepRow& r = rows[m - 1];
      r.m = m;
      try {
        r.zhat = compute_zhat(make_params(p.lambda, p.mu1, p.mu2, Capacity::finite(m)), m);
        r.gap = std::abs(r.zhat - limit);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < c.threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();

  if (c.format == "csv") {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "m,zhat,gap_to_limit,error\n";
    for (const SweepRow& r : rows) {
      os << r.m << ',';
      if (r.error.empty()) os << r.zhat << ',' << r.gap << ",\n";
      else os << ",," << csv_field(r.error) << '\n';
    }
    return {os.str(), kExitOk};
  }
  Json j = envelope("sweep-zhat", p);
  j["limit"] = limit;
  j["limit_label"] = first ? "eta" : "rho2";
  Json arr = Json::array();
  bool increasing = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Json r{{"m", rows[i].m}};
    if (rows[i].error.empty()) {
      r["zhat"] = rows[i].zhat;
      r["gap_to_limit"] = rows[i].gap;
    } else {
      r["error"] = rows[i].error;
    }
    if (i > 0 && !(rows[i].error.empty() && rows[i - 1].error.empty() &&
                   rows[i].zhat > rows[i - 1].zhat))
      increasing = false;
    arr.push_back(r);
  }
  j["rows"] = arr;
  j["strictly_increasing"] = increasing;
  return json_report(j);
}

Report cmd_design(const RunConfig& c) {
  const TandemParams p = params_of(c);
  DesignKind kind;
  if (c.kind == "ArrivalMod") kind = DesignKind::ArrivalMod;
  else if (c.kind == "RemovalMod") kind = DesignKind::RemovalMod;
  else throw InvalidArgument("kind must be ArrivalMod or RemovalMod");
  if (!(c.z > 0.0 && c.z < 1.0)) throw InfeasibleTarget("target decay must lie in (0, 1)");
  if (c.level_cap < 8) throw InvalidArgument("level_cap must be >= 8");

  const InvariantMeasure probe = solve_w(p, c.z, 2);
  if (kind == DesignKind::ArrivalMod && !classify(p, c.z).feasible)
    throw InfeasibleTarget("target decay is outside the feasible interval");
  const int cap = c.phase_cap > 0 ? c.phase_cap : recommended_phase_cap(probe, c.level_cap);
  const BoundaryDesign d = kind == DesignKind::ArrivalMod ? design_arrival_rates(p, c.z, cap)
                                                          : design_removal_rates(p, c.z, cap);
  const QbdBlocks b = build_modified_blocks(p, d, cap);
  const ProductFormReport pf = verify_product_form(b, c.z, d.w, c.level_cap, 1e-4, 1e-3);

  Json j = envelope("design", p);
  j["kind"] = to_string(kind);
  j["target_z"] = c.z;
  j["phase_cap"] = cap;
  j["level_cap"] = c.level_cap;
  j["rates"] = d.rates;
  j["measured_decay"] = pf.measured_decay;
  j["max_relative_deviation"] = pf.max_relative_deviation;
  j["fitted_c"] = pf.fitted_c;
  j["bulk_window"] = {{"level_lo", pf.level_lo}, {"level_hi", pf.level_hi},
                      {"phase_hi", pf.phase_hi}};
  j["solver_residual"] = pf.solver_residual;
  j["verification_passed"] = pf.passed;
  return json_report(j, pf.passed ? kExitOk : kExitValidationFailure);
}

Report cmd_validate(const RunConfig& c) {
  ValidationOptions o;
  o.tol = c.tol;
  o.seed = c.seed;
  o.replications = c.replications;
  o.only = std::set<int>(c.only.begin(), c.only.end());
  for (int id : o.only)
    if (id < 1 || id > 9) throw InvalidArgument("criterion ids run from 1 to 9");
  const auto results = run_acceptance(o);
  Json j{{"schema_version", kSchemaVersion}, {"command", "validate"}};
  j["options"] = {{"tol", o.tol}, {"seed", o.seed}, {"replications", o.replications}};
  Json arr = Json::array();
  bool all = true;
  for (const CriterionResult& r : results) {
    Json ms = Json::array();
    for (const Measurement& m : r.measurements)
      ms.push_back({{"name", m.name},
                    {"value", m.value},
                    {"threshold", m.threshold},
                    {"relation", m.relation},
                    {"gating", m.gating},
                    {"passed", m.passed}});
    arr.push_back({{"id", r.id},
                   {"title", r.title},
                   {"passed", r.passed()},
                   {"note", r.note},
                   {"measurements", ms}});
    all = all && r.passed();
  }
  j["criteria"] = arr;
  j["passed"] = all;
  return json_report(j, all ? kExitOk : kExitValidationFailure);
}

Report cmd_rmatrix(const RunConfig& c) {
  const TandemParams p = params_of(c);
  const int cap = block_phase_cap(p, c);
  if (p.capacity.is_finite() && !stability_check(p).stable)
    throw InstabilityError(stability_check(p).describe());
  const QbdBlocks b = build_blocks(p, cap);
  const RSolution r = solve_R(b, c.tol);
  if (!(r.spectral_radius < 1.0)) throw InstabilityError("sp(R) >= 1");
  Json j = envelope("rmatrix", p);
  j["phase_cap"] = cap;
  j["spectral_radius"] = r.spectral_radius;
  j["iterations"] = r.iterations;
  j["residual"] = r.residual;
  if (p.capacity.is_finite()) j["zhat"] = compute_zhat(p, cap);
  if (b.truncation_note) j["truncation_note"] = *b.truncation_note;
  j["r"] = matrix_json(r.r);
  return json_report(j);
}

Report cmd_hitting(const RunConfig& c) {
  const TandemParams p = params_of(c);
  const int cap = block_phase_cap(p, c);
  const QbdBlocks b = build_blocks(p, cap);
  const HittingLadder h = solve_H(b, c.tol);
  const HittingDecay d = hitting_decay_estimate(p, b, c.start_phase, c.end_phase, c.k_max);
  Json j = envelope("hitting", p);
  j["phase_cap"] = cap;
  j["k_max"] = c.k_max;
  j["start_phase"] = d.i;
  j["end_phase"] = d.j;
  j["h_spectral_radius"] = spectral_radius(h.h_star);
  j["h_residual"] = h.residual;
  j["ratio_estimate"] = d.ratio_estimate;
  j["log_slope_estimate"] = d.log_slope_estimate;
  j["row_sum_estimate"] = d.row_sum_estimate;
  j["log_average"] = d.log_average;
  j["reference"] = d.reference;
  j["reference_label"] = d.reference_label;
  j["gap"] = d.gap;
  j["ratios"] = d.ratios;
  return json_report(j);
}

Report cmd_invariant(const RunConfig& c) {
  const TandemParams p = params_of(c);
  if (c.terms < 2) throw InvalidArgument("terms must be >= 2");
  const InvariantMeasure w = solve_w(p, c.z, c.terms);
  Json j = envelope("invariant", p);
  j["z"] = c.z;
  j["regime"] = to_string(w.regime());
  Json coeff;
  if (const auto* rr = std::get_if<RealRootsCoefficients>(&w.coefficients()))
    coeff = {{"c1", rr->c1}, {"c2", rr->c2}, {"u1", rr->u1}, {"u2", rr->u2}};
  else if (const auto* dg = std::get_if<DegenerateCoefficients>(&w.coefficients()))
    coeff = {{"u", dg->u}, {"c", dg->c}};
  else {
    const auto& os = std::get<OscillatingCoefficients>(w.coefficients());
    coeff = {{"modulus", os.modulus}, {"phi", os.phi}, {"c", os.c}};
  }
  j["coefficients"] = coeff;
  const Classification cl = classify(p, c.z);
  j["in_ell1"] = cl.in_ell1;
  j["positive"] = cl.positive;
  j["feasible"] = cl.feasible;
  j["tail_ratio"] = w.tail_ratio();
  j["w"] = w.materialize(c.terms);
  return json_report(j);
}

void emit(const Report& r, const RunConfig& c, const std::string& command, std::ostream& out) {
  if (c.output == "-") {
    out << r.text;
    return;
  }
  std::filesystem::path path(c.output);
  if (const char* dir = std::getenv("TANDEM_OUTPUT_DIR"); dir && *dir)
    path = std::filesystem::path(dir) / path.filename();
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw InvalidArgument("cannot open output file " + path.string() + " for " + command);
  f << r.text;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  RunConfig c;
  CLI::App app{
      "Spectral objects of the tandem Jackson network as a QBD process.\n"
      "A --config file holds one key=value per line using the long option names\n"
      "without dashes (e.g. mu1=3, capacity=inf); flags on the command line win.\n"
      "Exit codes: 0 ok, 1 validation failure, 2 bad config, 3 instability,\n"
      "4 infeasible target.",
      "tandem"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);

  app.add_option("--lambda", c.lambda, "arrival rate (1/time)");
  app.add_option("--mu1", c.mu1, "service rate of queue 1 (1/time)");
  app.add_option("--mu2", c.mu2, "service rate of queue 2 (1/time)");
  app.add_option("--capacity", c.capacity, "waiting room m of queue 1: integer or inf");
  app.add_option("--tol", c.tol, "tolerance for the iterative solvers");
  app.add_option("--phase-cap", c.phase_cap,
                 "phase cap: surrogate for infinite capacity, or design cap (0 = recommended)");
  app.add_option("--level-cap", c.level_cap, "level cap of the truncated oracle solve");
  app.add_option("--k-max", c.k_max, "largest level K of the hitting ladder");
  app.add_option("--m-max", c.m_max, "largest m in the zhat sweep");
  app.add_option("--seed", c.seed, "simulation seed");
  app.add_option("--replications", c.replications, "simulation replications");
  app.add_option("--format", c.format, "output format for sweeps")
      ->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--output", c.output,
                 "output file, - for stdout; TANDEM_OUTPUT_DIR replaces its directory");
  app.add_option("--threads", c.threads, "worker threads for sweeps");
  app.add_option("--kind", c.kind, "boundary design kind")
      ->check(CLI::IsMember({"ArrivalMod", "RemovalMod"}));
  app.add_option("--z", c.z, "decay rate z (dimensionless)");
  app.add_option("--terms", c.terms, "number of invariant-measure terms to print");
  app.add_option("--start-phase", c.start_phase, "phase i of P_1^K(i, j)");
  app.add_option("--end-phase", c.end_phase, "phase j of P_1^K(i, j)");
  app.add_option("--only", c.only, "criteria to validate (default all)");

  std::string command;
  auto sub = [&](const char* name, const char* help) {
    CLI::App* s = app.add_subcommand(name, help);
    s->fallthrough();
    s->callback([&command, name] { command = name; });
  };
  sub("spectral", "rho1, rho2, eta, z1, regime and feasible decay interval");
  sub("sweep-zhat", "zhat for m = 1..m-max with the gap to its limit (CSV by default)");
  sub("design", "boundary design forcing decay z, verified by a truncated solve");
  sub("validate", "run the acceptance criteria");
  sub("rmatrix", "R matrix by fixed-point iteration");
  sub("hitting", "hitting ladder and hitting-decay estimates");
  sub("invariant", "z^{-1}-invariant measure w and its classification");

  // The sweep defaults to CSV unless --format is given.
  bool format_given = false;
  try {
    app.parse(argc, argv);
    format_given = app.count("--format") > 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadConfig;
  }
  if (command == "sweep-zhat" && !format_given) c.format = "csv";

  try {
    Report r;
    if (command == "spectral") r = cmd_spectral(c);
    else if (command == "sweep-zhat") r = cmd_sweep_zhat(c);
    else if (command == "design") r = cmd_design(c);
    else if (command == "validate") r = cmd_validate(c);
    else if (command == "rmatrix") r = cmd_rmatrix(c);
    else if (command == "hitting") r = cmd_hitting(c);
    else r = cmd_invariant(c);
    emit(r, c, command, out);
    return r.code;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  } catch (const InfeasibleTarget& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const InstabilityError& e) {
    err << "unstable: " << e.what() << '\n';
    return kExitInstability;
  } catch (const ConvergenceError& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitInstability;
  } catch (const SingularMatrix& e) {
    err << "singular: " << e.what() << '\n';
    return kExitInstability;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadConfig;
  }
}

}  // namespace tandem
