#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include "ispcav/harness/config.hpp"
#include "ispcav/harness/record.hpp"
#include "ispcav/ispcav.hpp"

namespace ispcav::harness {

enum ExitCode : int { kOk = 0, kParameterError = 1, kResourceLimit = 2, kIoError = 3 };

struct RunResult {
  std::vector<ExperimentRecord> records;
  int exit_code = kOk;
  std::string message;
};

namespace detail {

inline ExperimentRecord base_record(const ExperimentConfig& cfg) {
  ExperimentRecord r;
  r.command = cfg.command;
  for (const auto& [k, v] : cfg.values) {
    if (k != "workers" && !v.empty()) r.params[k] = v;
  }
  r.seed = cfg.seed;
  r.version = kVersion;
  return r;
}

inline unsigned workers(const ExperimentConfig& cfg) { return static_cast<unsigned>(cfg.count("workers")); }

inline ModelParams model_params(const ExperimentConfig& cfg) {
  ModelParams p{cfg.has("beta") ? cfg.real("beta") : 0.0, cfg.has("h") ? cfg.real("h") : 0.0,
                cfg.has("gamma") ? cfg.real("gamma") : 0.0};
  p.validate();
  return p;
}

inline void echo_params(ExperimentRecord& r, const ModelParams& p, bool with_gamma = true) {
  r.beta = p.beta;
  r.h = p.h;
  if (with_gamma) r.gamma = p.gamma;
}

inline Fixpoint solve_from_config(const ExperimentConfig& cfg, const ModelParams& p, const RngStream& rng) {
  InitialPopulation init = InitialPopulation::uniform_grid;
  if (cfg.has("init") && cfg.raw("init") == "zero") init = InitialPopulation::all_zero;
  if (cfg.has("init") && cfg.raw("init") == "one") init = InitialPopulation::all_one;
  auto fix = solve_fixpoint(p, cfg.count("pop_size"), cfg.real("tol"), cfg.count("max_iter"), rng, init, workers(cfg));
  if (!fix.report.certified) {
    std::clog << "warning: C(beta, gamma) = " << fix.report.contraction_constant
              << " >= 1; the fixpoint is outside the certified replica-symmetric region\n";
  }
  return fix;
}

inline void fixpoint_diagnostics(ExperimentRecord& r, const FixpointReport& rep) {
  r.pop_size = rep.population_size;
  r.c_beta_gamma = rep.contraction_constant;
  r.converged = rep.converged;
  r.extrapolated = !rep.certified;
  r.diagnostics["iterations"] = std::to_string(rep.iterations);
  r.diagnostics["final_step_distance"] = format_double(rep.final_step_distance);
}

inline std::string out_path(const ExperimentConfig& cfg, const std::string& file) {
  if (cfg.out_dir.empty()) throw IoError("--out is required for " + cfg.command);
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out_dir + ": " + ec.message());
  return (std::filesystem::path(cfg.out_dir) / file).string();
}

inline std::vector<ExperimentRecord> run_gen_graph(const ExperimentConfig& cfg) {
  const auto n = cfg.count("n");
  const double gamma = cfg.real("gamma");
  const Graph g = generate_graph(n, gamma, RngStream(cfg.seed));
  auto r = base_record(cfg);
  r.n = n;
  r.gamma = gamma;
  r.estimate = static_cast<double>(g.num_edges());
  if (!cfg.out_dir.empty()) {
    const auto path = out_path(cfg, "graph.txt");
    save_edge_list(path, g);
    r.diagnostics["graph_file"] = path;
  }
  return {r};
}

inline std::vector<ExperimentRecord> run_exact(const ExperimentConfig& cfg) {
  const ModelParams p = model_params(cfg);
  auto r = base_record(cfg);
  echo_params(r, p, !cfg.has("graph"));
  if (cfg.has("graph")) {
    const Graph g = load_edge_list(cfg.raw("graph"));
    if (g.num_vertices() == 0) throw ConfigError("graph", "graph has no vertices");
    r.n = g.num_vertices();
    r.estimate = exact_log_partition(g, p) / static_cast<double>(g.num_vertices());
    r.std_error = 0.0;
    r.diagnostics["log_partition"] = format_double(exact_log_partition(g, p));
    return {r};
  }
  const auto n = cfg.count("n");
  const auto f = mean_free_energy(n, p, cfg.count("num_graphs"), RngStream(cfg.seed), workers(cfg));
  r.n = n;
  r.num_graphs = cfg.count("num_graphs");
  r.estimate = f.mean;
  r.std_error = f.std_error;
  r.c_beta_gamma = contraction_constant(p.beta, p.gamma);
  r.extrapolated = !(*r.c_beta_gamma < 1.0);
  return {r};
}

inline std::vector<ExperimentRecord> run_mis(const ExperimentConfig& cfg) {
  auto r = base_record(cfg);
  if (cfg.has("graph")) {
    const Graph g = load_edge_list(cfg.raw("graph"));
    const auto res = max_independent_set(g);
    r.n = g.num_vertices();
    r.estimate = static_cast<double>(res.size);
    std::string witness;
    for (auto b : res.witness.bits) witness += b ? '1' : '0';
    r.diagnostics["witness"] = witness;
    return {r};
  }
  const auto n = cfg.count("n");
  const double gamma = cfg.real("gamma");
  const auto est = mean_isp_density(n, gamma, cfg.count("num_graphs"), RngStream(cfg.seed), workers(cfg));
  r.n = n;
  r.gamma = gamma;
  r.num_graphs = cfg.count("num_graphs");
  r.estimate = est.mean;
  r.std_error = est.std_error;
  return {r};
}

inline std::vector<ExperimentRecord> run_cavity_check(const ExperimentConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const Graph g = cfg.has("graph") ? load_edge_list(cfg.raw("graph"))
                                   : generate_graph(cfg.count("n"), cfg.real("gamma"), RngStream(cfg.seed));
  auto r = base_record(cfg);
  echo_params(r, p, !cfg.has("graph"));
  r.n = g.num_vertices();
  double worst = 0.0;
  if (cfg.has("vertex")) {
    const auto v = cfg.count("vertex");
    if (v >= g.num_vertices()) throw ConfigError("vertex", "out of range");
    worst = cavity_identity_residual(g, p, static_cast<Vertex>(v));
  } else {
    for (Vertex v = 0; v < g.num_vertices(); ++v) worst = std::max(worst, cavity_identity_residual(g, p, v));
  }
  r.estimate = worst;
  return {r};
}

inline std::vector<ExperimentRecord> run_fixpoint(const ExperimentConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const auto fix = solve_from_config(cfg, p, RngStream(cfg.seed));
  auto r = base_record(cfg);
  echo_params(r, p);
  fixpoint_diagnostics(r, fix.report);
  r.estimate = fix.population.mean();
  if (!cfg.out_dir.empty()) {
    FixpointMetadata meta{p,
                          fix.report.iterations,
                          cfg.seed,
                          fix.report.population_size,
                          cfg.real("tol"),
                          fix.report.converged,
                          fix.report.final_step_distance};
    save_fixpoint(out_path(cfg, "population.txt"), out_path(cfg, "population.meta"), fix.population, meta);
  }
  return {r};
}

inline std::vector<ExperimentRecord> run_rs_free_energy(const ExperimentConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const RngStream rng(cfg.seed);
  auto r = base_record(cfg);
  echo_params(r, p);
  std::optional<EmpiricalMeasure> population;
  if (cfg.has("population")) {
    population = load_measure(cfg.raw("population"));
    r.c_beta_gamma = contraction_constant(p.beta, p.gamma);
    r.extrapolated = !(*r.c_beta_gamma < 1.0);
  } else {
    auto fix = solve_from_config(cfg, p, rng.substream(0));
    fixpoint_diagnostics(r, fix.report);
    population = std::move(fix.population);
  }
  const auto f = rs_free_energy(*population, p, cfg.count("num_samples"), rng.substream(1), workers(cfg));
  r.num_samples = cfg.count("num_samples");
  r.estimate = f.total.mean;
  r.std_error = f.total.std_error;
  r.diagnostics["term_a"] = format_double(f.term_a.mean);
  r.diagnostics["term_b"] = format_double(f.term_b.mean);
  r.diagnostics["sign_convention"] = "minus_b";
  return {r};
}

inline std::vector<ExperimentRecord> run_contraction_check(const ExperimentConfig& cfg) {
  const ModelParams p = model_params(cfg);
  auto r = base_record(cfg);
  echo_params(r, p);
  r.pop_size = cfg.count("pop_size");
  r.num_samples = cfg.count("num_pairs");
  r.estimate = empirical_contraction_check(p, cfg.count("num_pairs"), cfg.count("pop_size"), RngStream(cfg.seed),
                                           workers(cfg));
  r.c_beta_gamma = contraction_constant(p.beta, p.gamma);
  r.extrapolated = !(*r.c_beta_gamma < 1.0);
  r.diagnostics["coupling_bound"] = format_double(std::expm1(p.beta) * p.gamma / 4.0);
  return {r};
}

inline std::vector<ExperimentRecord> run_isp_curve(const ExperimentConfig& cfg) {
  const double gamma = cfg.real("gamma");
  IspSchedule schedule{cfg.count("pop_size"), cfg.count("num_samples"), cfg.real("tol"), cfg.count("max_iter")};
  const auto cells = rs_isp_density(gamma, cfg.reals("betas"), cfg.reals("hs"), schedule, RngStream(cfg.seed),
                                    workers(cfg));
  std::vector<ExperimentRecord> out;
  for (const auto& cell : cells) {
    auto r = base_record(cfg);
    // Every cell shares the streams, so a one-cell schedule reproduces it.
    r.params["betas"] = format_double(cell.beta);
    r.params["hs"] = format_double(cell.h);
    r.beta = cell.beta;
    r.h = cell.h;
    r.gamma = gamma;
    r.pop_size = schedule.pop_size;
    r.num_samples = schedule.num_samples;
    r.estimate = cell.f_over_h;
    r.std_error = cell.f_over_h_error;
    r.c_beta_gamma = cell.contraction_constant;
    r.converged = cell.converged;
    r.extrapolated = cell.extrapolated;
    r.diagnostics["free_energy"] = format_double(cell.free_energy.mean);
    out.push_back(std::move(r));
  }
  return out;
}

inline EmpiricalMeasure leaf_from_token(const std::string& token) {
  if (token.rfind("file:", 0) == 0) return load_measure(token.substr(5));
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(token, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != token.size()) throw ConfigError("tree_leaves", "expected a number or file:<path>, got '" + token + "'");
  return EmpiricalMeasure::point_mass(x);
}

struct Structure {
  CascadeSpec cascade;
  DirectingSpec directing;
  std::optional<FixpointReport> fixpoint;
};

inline Structure structure_from_config(const ExperimentConfig& cfg, const ModelParams& p, const RngStream& rng) {
  Structure s{CascadeSpec{}, DirectingSpec::degenerate(EmpiricalMeasure::point_mass(0.0)), std::nullopt};
  s.cascade.m = cfg.reals("m");
  s.cascade.truncation = cfg.has("truncation") ? cfg.count("truncation") : (s.cascade.m.size() == 1 ? 64 : 16);
  s.cascade.validate();
  const auto& directing = cfg.raw("directing");
  if (directing == "rs") {
    auto fix = solve_from_config(cfg, p, rng);
    s.fixpoint = fix.report;
    s.directing = DirectingSpec::degenerate(std::move(fix.population));
  } else if (directing.rfind("point:", 0) == 0) {
    s.directing = DirectingSpec::degenerate(leaf_from_token(directing.substr(6)));
  } else if (directing.rfind("file:", 0) == 0) {
    s.directing = DirectingSpec::degenerate(load_measure(directing.substr(5)));
  } else {
    std::vector<DirectingNode> leaves;
    for (const auto& token : cfg.list("tree_leaves")) leaves.push_back(DirectingNode::make_leaf(leaf_from_token(token)));
    s.directing = DirectingSpec::tree(DirectingNode::make_choice(cfg.reals("tree_weights"), std::move(leaves)));
    try {
      s.directing.validate(1);
    } catch (const ParameterError& e) {
      throw ConfigError("tree_weights", e.what());
    }
  }
  return s;
}

inline void structure_diagnostics(ExperimentRecord& r, const Structure& s) {
  if (s.fixpoint) fixpoint_diagnostics(r, *s.fixpoint);
}

inline std::vector<ExperimentRecord> run_mp_eval(const ExperimentConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const RngStream rng(cfg.seed);
  const auto s = structure_from_config(cfg, p, rng.substream(0));
  const auto mp = mp_functional(s.cascade, s.directing, p, cfg.count("num_outer"), rng.substream(1), workers(cfg));
  auto r = base_record(cfg);
  echo_params(r, p);
  structure_diagnostics(r, s);
  r.num_samples = cfg.count("num_outer");
  r.estimate = mp.value.mean;
  r.std_error = mp.value.std_error;
  r.diagnostics["term_phi0"] = format_double(mp.term_phi0.mean);
  r.diagnostics["term_edge"] = format_double(mp.term_edge.mean);
  r.diagnostics["structure_id"] = mp.structure_id;
  return {r};
}

inline std::vector<ExperimentRecord> run_residual(const ExperimentConfig& cfg) {
  const ModelParams p = model_params(cfg);
  const RngStream rng(cfg.seed);
  const auto s = structure_from_config(cfg, p, rng.substream(0));
  const auto n = cfg.count("n");
  const auto res = interpolation_residual(n, s.cascade, s.directing, p, cfg.count("num_graphs"), cfg.count("num_outer"),
                                          rng.substream(1), workers(cfg));
  auto r = base_record(cfg);
  echo_params(r, p);
  structure_diagnostics(r, s);
  r.n = n;
  r.num_graphs = cfg.count("num_graphs");
  r.num_samples = cfg.count("num_outer");
  r.estimate = res.mean;
  r.std_error = res.std_error;
  r.diagnostics["structure_id"] = describe_structure(s.cascade, s.directing);
  return {r};
}

inline std::vector<ExperimentRecord> run_command_records(const ExperimentConfig& cfg);

/// One `exact` ensemble record per N plus one `rs-free-energy` record, all on
/// the sweep seed. Each row's echo is a complete invocation of its command.
inline std::vector<ExperimentRecord> run_sweep(const ExperimentConfig& cfg) {
  std::vector<ExperimentRecord> out;
  for (auto n : cfg.counts("ns")) {
    KeyValues values{{"n", std::to_string(n)},         {"gamma", cfg.raw("gamma")},
                     {"beta", cfg.raw("beta")},        {"h", cfg.raw("h")},
                     {"num_graphs", cfg.raw("num_graphs")}, {"workers", cfg.raw("workers")}};
    const auto sub = make_config("exact", {}, values, cfg.seed, cfg.out_dir);
    for (auto& r : run_command_records(sub)) out.push_back(std::move(r));
  }
  KeyValues values{{"gamma", cfg.raw("gamma")},         {"beta", cfg.raw("beta")},
                   {"h", cfg.raw("h")},                 {"num_samples", cfg.raw("num_samples")},
                   {"pop_size", cfg.raw("pop_size")},   {"tol", cfg.raw("tol")},
                   {"max_iter", cfg.raw("max_iter")},   {"workers", cfg.raw("workers")}};
  const auto sub = make_config("rs-free-energy", {}, values, cfg.seed, cfg.out_dir);
  for (auto& r : run_command_records(sub)) out.push_back(std::move(r));
  return out;
}

inline std::vector<ExperimentRecord> run_command_records(const ExperimentConfig& cfg) {
  const auto& c = cfg.command;
  if (c == "gen-graph") return run_gen_graph(cfg);
  if (c == "exact") return run_exact(cfg);
  if (c == "mis") return run_mis(cfg);
  if (c == "cavity-check") return run_cavity_check(cfg);
  if (c == "fixpoint") return run_fixpoint(cfg);
  if (c == "rs-free-energy") return run_rs_free_energy(cfg);
  if (c == "contraction-check") return run_contraction_check(cfg);
  if (c == "isp-curve") return run_isp_curve(cfg);
  if (c == "mp-eval") return run_mp_eval(cfg);
  if (c == "residual") return run_residual(cfg);
  if (c == "sweep") return run_sweep(cfg);
  throw ConfigError("command", "unknown subcommand '" + c + "'");
}

}  // namespace detail

/// Runs the command and, when an output directory is set, writes the
/// records. Errors map to exit codes: 1 parameter, 2 resource limit, 3 I/O.
inline RunResult run_command(const ExperimentConfig& cfg) {
  RunResult result;
  try {
    result.records = detail::run_command_records(cfg);
    if (!cfg.out_dir.empty()) emit_report(result.records, cfg.out_dir);
  } catch (const ResourceLimitError& e) {
    result.exit_code = kResourceLimit;
    result.message = e.what();
  } catch (const IoError& e) {
    result.exit_code = kIoError;
    result.message = e.what();
  } catch (const std::invalid_argument& e) {
    result.exit_code = kParameterError;
    result.message = e.what();
  } catch (const std::out_of_range& e) {
    result.exit_code = kParameterError;
    result.message = e.what();
  }
  if (result.exit_code != kOk) result.records.clear();
  return result;
}

}  // namespace ispcav::harness
