#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/basic_file_sink.h>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>

#include "ks/config.hpp"
#include "ks/experiments.hpp"
#include "ks/fields.hpp"
#include "ks/geometry.hpp"
#include "ks/run_control.hpp"

#ifndef KS_CONFIG_DIR
#define KS_CONFIG_DIR "configs"
#endif

namespace ks::cli {
namespace {

namespace fs = std::filesystem;

/// Logger writing to <dir>/run.log and stderr.
std::shared_ptr<spdlog::logger> open_log(const fs::path& dir) {
  auto file = std::make_shared<spdlog::sinks::basic_file_sink_mt>((dir / "run.log").string(), true);
  auto console = std::make_shared<spdlog::sinks::stderr_sink_mt>();
  auto log = std::make_shared<spdlog::logger>("ks", spdlog::sinks_init_list{file, console});
  log->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
  log->flush_on(spdlog::level::info);
  return log;
}

/// Accepts a path, a path without ".ini", or a bare name looked up in
/// ./configs and the installed configuration directory.
std::optional<fs::path> resolve_config(const std::string& name) {
  const std::vector<fs::path> candidates = {
      name, name + ".ini", fs::path("configs") / (name + ".ini"), fs::path(KS_CONFIG_DIR) / (name + ".ini")};
  for (const auto& c : candidates) {
    std::error_code ec;
    if (fs::is_regular_file(c, ec)) return c;
  }
  return std::nullopt;
}

SimConfig load_or_throw(const std::string& name) {
  const auto path = resolve_config(name);
  if (!path) throw ConfigError({"config '" + name + "' not found"});
  return load_config(path->string());
}

void report_config_error(const ConfigError& e) {
  std::cerr << "configuration error:\n";
  for (const auto& msg : e.errors()) std::cerr << "  " << msg << "\n";
}

fs::path prepare_directory(const std::string& dir) {
  fs::path p(dir);
  fs::create_directories(p);
  return p;
}

std::string g17(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

void write_snapshot_file(const fs::path& path, const Field& u, const Field& v, double t) {
  std::ofstream os(path);
  write_snapshot(os, u, v, t);
}

// ---------------------------------------------------------------- run

struct RunArgs {
  std::string config;
  std::string out;
};

int cmd_run(const RunArgs& args) {
  SimConfig cfg;
  try {
    cfg = load_or_throw(args.config);
    if (!args.out.empty()) cfg.output.directory = args.out;
    validate(cfg);
  } catch (const ConfigError& e) {
    report_config_error(e);
    return kConfigError;
  }

  const auto dir = prepare_directory(cfg.output.directory);
  const auto log = open_log(dir);
  {
    std::ofstream(dir / "config.ini") << serialize_config(cfg);
  }
  log->info("run: theta={} R={} mesh={}x{} grading={} mass={} init={} v0={} t_end={}", g17(cfg.domain.theta),
            g17(cfg.domain.radius), cfg.nr, cfg.nphi, g17(cfg.grading), g17(cfg.init.mass), to_string(cfg.init.kind),
            to_string(cfg.v0.kind), g17(cfg.scheme.t_end));

  std::ofstream csv(dir / "diagnostics.csv");
  write_csv_header(csv);
  const auto snap_dir = dir / "snapshots";
  fs::create_directories(snap_dir);
  int snap_count = 0;

  RunControls controls;
  controls.record_every = cfg.output.csv_every;
  controls.on_record = [&](const DiagnosticsRecord& rec) { write_csv_row(csv, rec); };
  controls.snapshot_interval = cfg.output.snapshot_interval;
  controls.on_snapshot = [&](const SimState& s) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(6) << std::setfill('0') << snap_count++ << ".txt";
    write_snapshot_file(snap_dir / name.str(), s.u, s.v, s.t);
  };

  RunOutcome out;
  try {
    out = run(cfg, controls);
  } catch (const std::exception& e) {
    log->error("run aborted: {}", e.what());
    return kInternalError;
  }
  csv << "# outcome " << to_string(out.kind) << " t_final " << g17(out.t_final) << "\n";

  const auto mesh = make_mesh(cfg);
  write_snapshot_file(dir / "final.txt", Field(mesh, out.u_final), Field(mesh, out.v_final), out.t_final);

  std::ofstream summary(dir / "summary.txt");
  summary << std::setprecision(17) << "outcome " << to_string(out.kind) << "\n"
          << "t_final " << out.t_final << "\n"
          << "steps " << out.trajectory.back().step << "\n"
          << "rejected_steps " << out.rejected_steps << "\n"
          << "linf_final " << out.trajectory.back().linf_u << "\n"
          << "ext_final " << out.trajectory.back().ext_quantity << "\n";
  if (out.kind == OutcomeKind::BlowUp) {
    summary << "blowup_r " << out.blowup_location.r << "\n"
            << "blowup_phi " << out.blowup_location.phi << "\n";
  }
  if (!out.failure_reason.empty()) summary << "failure " << out.failure_reason << "\n";

  log->info("outcome {} at t={} after {} steps ({} rejected)", to_string(out.kind), g17(out.t_final),
            out.trajectory.back().step, out.rejected_steps);
  if (out.kind == OutcomeKind::BlowUp) {
    log->info("blow-up location r={} phi={}", g17(out.blowup_location.r), g17(out.blowup_location.phi));
  }
  if (out.kind == OutcomeKind::SolverFailure) {
    log->error("solver failure: {}", out.failure_reason);
    return kSolverFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
  std::string config;
  std::string out;
  double seed_global = 0.0;
  double seed_blowup = 0.0;
  double width = 0.0;
  int budget = 12;
};

int cmd_sweep(const SweepArgs& args) {
  SimConfig cfg;
  BisectOptions opt;
  try {
    cfg = load_or_throw(args.config);
    if (!args.out.empty()) cfg.output.directory = args.out;
    const double critical = 4.0 * cfg.domain.theta;
    opt.seed_global = args.seed_global > 0.0 ? args.seed_global : 0.5 * critical;
    opt.seed_blowup = args.seed_blowup > 0.0 ? args.seed_blowup : 1.5 * critical;
    opt.target_width = args.width > 0.0 ? args.width : 0.4 * critical;
    opt.budget = args.budget;
    std::vector<std::string> errors;
    if (!(opt.seed_global < opt.seed_blowup)) errors.emplace_back("--seed-global must be below --seed-blowup");
    if (opt.budget < 0) errors.emplace_back("--budget must be >= 0");
    if (!errors.empty()) throw ConfigError(errors);
    validate(cfg);
  } catch (const ConfigError& e) {
    report_config_error(e);
    return kConfigError;
  }

  const auto dir = prepare_directory(cfg.output.directory);
  const auto log = open_log(dir);
  {
    std::ofstream(dir / "config.ini") << serialize_config(cfg);
  }
  log->info("sweep: theta={} seeds=[{}, {}] budget={} width={} t_end={}", g17(cfg.domain.theta),
            g17(opt.seed_global), g17(opt.seed_blowup), opt.budget, g17(opt.target_width), g17(cfg.scheme.t_end));
  opt.on_run = [&](const SweepRun& r) {
    log->info("mass={} outcome={} t_final={} linf={} ext={}", g17(r.mass), to_string(r.outcome), g17(r.t_final),
              g17(r.linf_final), g17(r.ext_final));
    if (r.extensibility.flagged) log->warn("extensibility monitor: {}", r.extensibility.reason);
  };

  SweepResult res;
  try {
    res = critical_mass_bisect(cfg, opt);
  } catch (const std::exception& e) {
    log->error("sweep aborted: {}", e.what());
    return kInternalError;
  }
  {
    std::ofstream csv(dir / "sweep.csv");
    write_sweep_csv(csv, res);
    std::ofstream summary(dir / "summary.txt");
    write_sweep_summary(summary, res);
  }
  write_sweep_summary(std::cout, res);
  log->info("bracket [{}, {}], 4 theta = {}", g17(res.mass_lower), g17(res.mass_upper), g17(res.predicted_critical));
  for (const auto& r : res.runs) {
    if (r.outcome == OutcomeKind::SolverFailure) {
      log->error("solver failure at mass {}: {}", g17(r.mass), r.failure_reason);
      return kSolverFailure;
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- compare-radial

struct CompareArgs {
  RestrictionOptions opt;
  double t_end = 0.1;
  double dt_max = 0.0;
  std::string out = "compare_out";
};

int cmd_compare(CompareArgs args) {
  auto& o = args.opt;
  std::vector<std::string> errors;
  if (!(o.theta > 0.0 && o.theta <= kTwoPi)) errors.emplace_back("--theta must lie in (0, 2pi]");
  if (!(o.radius > 0.0)) errors.emplace_back("--radius must be positive");
  if (!(o.disc_mass > 0.0)) errors.emplace_back("--disc-mass must be positive");
  if (!(o.concentration > 0.0)) errors.emplace_back("--concentration must be positive");
  if (!(args.t_end > 0.0)) errors.emplace_back("--t-end must be positive");
  if (!(o.compare_interval > 0.0)) errors.emplace_back("--interval must be positive");
  for (auto* s : {&o.sector_scheme, &o.radial_scheme}) {
    s->t_end = args.t_end;
    if (args.dt_max > 0.0) {
      s->dt_max = args.dt_max;
      s->dt0 = std::min(s->dt0, args.dt_max);
    }
  }
  for (auto& p : o.sector_scheme.problems()) errors.push_back(p);
  if (!errors.empty()) {
    report_config_error(ConfigError(errors));
    return kConfigError;
  }

  const auto dir = prepare_directory(args.out);
  const auto log = open_log(dir);
  log->info("compare-radial: theta={} R={} sector={}x{} radial_nr={} disc_mass={} concentration={} t_end={}",
            g17(o.theta), g17(o.radius), o.sector_nr, o.sector_nphi, o.radial_nr, g17(o.disc_mass),
            g17(o.concentration), g17(args.t_end));
  RestrictionReport rep;
  try {
    rep = restriction_experiment(o);
  } catch (const std::invalid_argument& e) {
    log->error("{}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    log->error("compare-radial aborted: {}", e.what());
    return kInternalError;
  }
  {
    std::ofstream csv(dir / "comparison.csv");
    csv << std::setprecision(17) << "t,linf_discrepancy,relative_discrepancy\n";
    for (const auto& s : rep.samples) csv << s.t << ',' << s.linf_discrepancy << ',' << s.relative_discrepancy << '\n';
    std::ofstream summary(dir / "summary.txt");
    summary << std::setprecision(17) << "sector_outcome " << to_string(rep.sector.kind) << "\n"
            << "radial_outcome " << to_string(rep.radial.kind) << "\n"
            << "same_outcome " << (rep.same_outcome ? "yes" : "no") << "\n"
            << "sector_t_final " << rep.sector.t_final << "\n"
            << "radial_t_final " << rep.radial.t_final << "\n"
            << "sector_argmax_r " << rep.sector_argmax_r << "\n";
    if (!rep.samples.empty()) summary << "final_linf_discrepancy " << rep.samples.back().linf_discrepancy << "\n";
  }
  log->info("sector {} / radial {}; {} comparison times", to_string(rep.sector.kind), to_string(rep.radial.kind),
            rep.samples.size());
  if (!rep.samples.empty()) log->info("final L-infinity discrepancy {}", g17(rep.samples.back().linf_discrepancy));
  if (rep.sector.kind == OutcomeKind::SolverFailure || rep.radial.kind == OutcomeKind::SolverFailure) {
    log->error("solver failure: sector '{}' radial '{}'", rep.sector.failure_reason, rep.radial.failure_reason);
    return kSolverFailure;
  }
  return kOk;
}

// ---------------------------------------------------------------- tm-sweep

struct TmArgs {
  TmSweepOptions opt;
  std::string out = "tm_out";
};

int cmd_tm(TmArgs args) {
  auto& o = args.opt;
  std::vector<std::string> errors;
  if (!(o.domain.theta > 0.0 && o.domain.theta <= kTwoPi)) errors.emplace_back("--theta must lie in (0, 2pi]");
  if (!(o.domain.radius > 0.0)) errors.emplace_back("--radius must be positive");
  if (o.members < 1) errors.emplace_back("--members must be >= 1");
  if (!(o.level_min > 0.0 && o.level_min <= o.level_max)) errors.emplace_back("need 0 < --level-min <= --level-max");
  if (!errors.empty()) {
    report_config_error(ConfigError(errors));
    return kConfigError;
  }
  const auto dir = prepare_directory(args.out);
  const auto log = open_log(dir);
  std::vector<TmMember> members;
  try {
    members = tm_family_sweep(o);
  } catch (const std::invalid_argument& e) {
    log->error("{}", e.what());
    return kConfigError;
  }
  const auto s = summarize_tm(members);
  {
    std::ofstream csv(dir / "tm.csv");
    write_tm_csv(csv, members);
    std::ofstream summary(dir / "summary.txt");
    summary << std::setprecision(17) << "sup_gap " << s.sup_gap << "\n"
            << "last5_mean " << s.last5_mean << "\n"
            << "energy_span " << s.energy_span << "\n"
            << "finite " << (s.finite ? "yes" : "no") << "\n"
            << "non_trending " << (s.non_trending ? "yes" : "no") << "\n";
  }
  log->info("tm-sweep: {} members, sup G = {}, last-5 mean = {}, energy span = {}", members.size(), g17(s.sup_gap),
            g17(s.last5_mean), g17(s.energy_span));
  return kOk;
}

// ---------------------------------------------------------------- mesh-info

struct MeshArgs {
  DomainSpec domain;
  int nr = 0;
  int nphi = 0;
  double grading = 1.0;
  bool cells = false;
};

int cmd_mesh(const MeshArgs& args) {
  try {
    const SectorMesh mesh(args.domain, args.nr, args.nphi, args.grading);
    if (args.cells) {
      write_mesh_summary(std::cout, mesh);
      return kOk;
    }
    std::cout << std::setprecision(17) << "theta " << args.domain.theta << "\n"
              << "radius " << args.domain.radius << "\n"
              << "cells " << mesh.cell_area().size() << "\n"
              << "area " << mesh.total_area() << "\n"
              << "innermost_width " << mesh.radial_edges()[1] << "\n"
              << "min_interior_angle " << min_interior_angle(args.domain) << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error:\n  " << e.what() << "\n";
    return kConfigError;
  }
  return kOk;
}

/// Angles may be written as numbers or multiples of pi.
void add_angle(CLI::App* app, const std::string& name, double& target, const std::string& help) {
  app->add_option_function<std::string>(
         name,
         [&target, name](const std::string& s) {
           const auto x = parse_number(s);
           if (!x) throw CLI::ValidationError(name, "expected a number or a multiple of pi, got '" + s + "'");
           target = *x;
         },
         help)
      ->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keller-Segel chemotaxis on circular sectors and discs"};
  app.require_subcommand(1);

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "integrate one configuration");
  run->add_option("--config", run_args.config, "config file or name under configs/")->required();
  run->add_option("--out", run_args.out, "output directory (overrides output.directory)");

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "bracket the critical mass by bisection");
  sweep->add_option("--config", sweep_args.config, "base config; init.mass is replaced per run")->required();
  sweep->add_option("--out", sweep_args.out, "output directory");
  sweep->add_option("--seed-global", sweep_args.seed_global, "mass expected to stay global (default 2 theta)");
  sweep->add_option("--seed-blowup", sweep_args.seed_blowup, "mass expected to blow up (default 6 theta)");
  sweep->add_option("--budget", sweep_args.budget, "number of simulations, seeds included")->capture_default_str();
  sweep->add_option("--width", sweep_args.width, "stop once the bracket is this narrow (default 1.6 theta)");

  CompareArgs cmp;
  cmp.opt.radial_grading = 1.0;
  auto* compare = app.add_subcommand("compare-radial", "sector run against the radial solver on restricted data");
  add_angle(compare, "--theta", cmp.opt.theta, "sector angle");
  compare->add_option("--radius", cmp.opt.radius)->capture_default_str();
  compare->add_option("--nr", cmp.opt.sector_nr)->capture_default_str();
  compare->add_option("--nphi", cmp.opt.sector_nphi)->capture_default_str();
  compare->add_option("--grading", cmp.opt.sector_grading)->capture_default_str();
  compare->add_option("--radial-nr", cmp.opt.radial_nr)->capture_default_str();
  compare->add_option("--radial-grading", cmp.opt.radial_grading)->capture_default_str();
  compare->add_option("--disc-mass", cmp.opt.disc_mass, "mass of the disc profile")->required();
  compare->add_option("--concentration", cmp.opt.concentration)->capture_default_str();
  compare->add_option("--t-end", cmp.t_end)->capture_default_str();
  compare->add_option("--dt-max", cmp.dt_max, "cap on the step of both runs");
  compare->add_option("--interval", cmp.opt.compare_interval, "comparison interval")->capture_default_str();
  compare->add_option("--out", cmp.out)->capture_default_str();

  TmArgs tm;
  auto* tms = app.add_subcommand("tm-sweep", "Trudinger-Moser gap over a vertex-concentrating family");
  add_angle(tms, "--theta", tm.opt.domain.theta, "sector angle");
  tms->add_option("--radius", tm.opt.domain.radius)->capture_default_str();
  tms->add_option("--nr", tm.opt.nr)->capture_default_str();
  tms->add_option("--nphi", tm.opt.nphi)->capture_default_str();
  tms->add_option("--grading", tm.opt.grading)->capture_default_str();
  tms->add_option("--members", tm.opt.members)->capture_default_str();
  tms->add_option("--level-min", tm.opt.level_min)->capture_default_str();
  tms->add_option("--level-max", tm.opt.level_max)->capture_default_str();
  tms->add_option("--out", tm.out)->capture_default_str();

  MeshArgs mesh_args;
  auto* mesh = app.add_subcommand("mesh-info", "print a mesh summary");
  add_angle(mesh, "--theta", mesh_args.domain.theta, "sector angle");
  mesh->add_option("--radius", mesh_args.domain.radius)->required();
  mesh->add_option("--nr", mesh_args.nr)->required();
  mesh->add_option("--nphi", mesh_args.nphi)->required();
  mesh->add_option("--grading", mesh_args.grading)->capture_default_str();
  mesh->add_flag("--cells", mesh_args.cells, "list every cell");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*compare) return cmd_compare(cmp);
    if (*tms) return cmd_tm(tm);
    if (*mesh) return cmd_mesh(mesh_args);
  } catch (const ConfigError& e) {
    report_config_error(e);
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternalError;
  }
  return kInternalError;
}

}  // namespace ks::cli
