#ifndef KS_EXPERIMENTS_HPP
#define KS_EXPERIMENTS_HPP

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "ks/config.hpp"
#include "ks/radial1d.hpp"

namespace ks {

/// Checks of a finished trajectory against the structural properties every
/// run must keep.
struct TrajectoryAudit {
  /// max_t |mass_u(t) - mass_u(0)| / mass_u(0)
  double max_mass_drift = 0.0;
  double min_u = 0.0;
  /// max_t int v(t) - max(int v0, m); <= 0 when the bound holds
  double max_vmass_excess = 0.0;
  /// records with E(t_{k+1}) > E(t_k) + 1e-6 (1 + |E(t_{k+1})|) (t_{k+1} - t_k)
  int energy_increases = 0;
  double worst_energy_increase = 0.0;
};

TrajectoryAudit audit_trajectory(const std::vector<DiagnosticsRecord>& trajectory);

struct ExtensibilityReport {
  double initial = 0.0;
  double maximum = 0.0;
  double final_value = 0.0;
  bool flagged = false;
  std::string reason;
};

/// Flags BlowUp runs whose extensibility quantity never rose by |initial|
/// (i.e. stayed below twice its initial value when that is positive), and
/// GlobalUpToHorizon runs whose quantity still rose strictly over the last
/// ten records and more than doubled across them.
ExtensibilityReport monitor_extensibility(const RunOutcome& outcome);

struct SweepRun {
  double mass = 0.0;
  OutcomeKind outcome = OutcomeKind::SolverFailure;
  double t_final = 0.0;
  double linf_final = 0.0;
  double ext_initial = 0.0;
  double ext_final = 0.0;
  PolarPoint blowup_location;
  std::string failure_reason;
  TrajectoryAudit audit;
  ExtensibilityReport extensibility;
};

struct SweepResult {
  double theta = 0.0;
  double radius = 0.0;
  double t_end = 0.0;
  /// largest tested mass that stayed global up to t_end (the lower seed if none was run)
  double mass_lower = 0.0;
  /// smallest tested mass that blew up (the upper seed if none was run)
  double mass_upper = 0.0;
  double predicted_critical = 0.0;
  std::vector<SweepRun> runs;
  /// the bracket is wider than the requested width
  bool partial = false;
  /// why the bisection stopped early ("" when it reached the width)
  std::string note;

  double width() const { return mass_upper - mass_lower; }
  bool contains_prediction() const { return mass_lower < predicted_critical && predicted_critical < mass_upper; }
  /// (4 theta - mass_lower) / width
  double relative_position() const { return (predicted_critical - mass_lower) / width(); }
};

struct BisectOptions {
  double seed_global = 0.0;
  double seed_blowup = 0.0;
  /// total number of simulations, seeds included
  int budget = 12;
  double target_width = 0.0;
  std::function<void(const SweepRun&)> on_run;
};

/// Runs the base configuration with init.mass replaced by each tested mass.
/// The seeds are run first; then geometric midpoints sqrt(lo * hi) are tested
/// until the bracket is no wider than target_width or the budget is spent.
/// A seed whose outcome contradicts its role, or a SolverFailure, stops the
/// bisection with `note` set.
SweepResult critical_mass_bisect(const SimConfig& base, const BisectOptions& options);

/// Runs one mass of the family described by `base`.
SweepRun run_family_member(const SimConfig& base, double mass, RunOutcome* full = nullptr);

/// `mass,outcome,t_final,linf_final,ext_final`
void write_sweep_csv(std::ostream& os, const SweepResult& result);
void write_sweep_summary(std::ostream& os, const SweepResult& result);

struct RestrictionOptions {
  double theta = 0.0;
  double radius = 1.0;
  int sector_nr = 64;
  int sector_nphi = 16;
  double sector_grading = 1.0;
  int radial_nr = 256;
  double radial_grading = 1.0;
  double disc_mass = 0.0;
  double concentration = 0.2;
  SchemeConfig sector_scheme;
  SchemeConfig radial_scheme;
  /// comparison times are the multiples of this interval up to t_end
  double compare_interval = 0.1;
};

struct RestrictionSample {
  double t = 0.0;
  /// max over sector cells |u_sector - u_radial(r)|
  double linf_discrepancy = 0.0;
  /// same, divided by max u_radial
  double relative_discrepancy = 0.0;
};

struct RestrictionReport {
  std::vector<RestrictionSample> samples;
  RunOutcome sector;
  RunOutcome radial;
  bool same_outcome = false;
  /// radius of the sector argmax at the end of the sector run
  double sector_argmax_r = 0.0;
};

/// Runs the radial solver from the blow-up candidate of `disc_mass` and the
/// sector solver from its restriction, comparing densities at common times.
/// Throws std::invalid_argument for a non-positive mass or interval.
RestrictionReport restriction_experiment(const RestrictionOptions& options);

struct TmMember {
  /// ln(delta / epsilon)
  double level = 0.0;
  double epsilon = 0.0;
  double dirichlet = 0.0;
  double gap = 0.0;
};

struct TmSweepOptions {
  DomainSpec domain;
  int nr = 3000;
  int nphi = 4;
  double grading = 1.04;
  int members = 20;
  double level_min = 0.1;
  double level_max = 100.0;
};

/// Evaluates tm_gap on phi_k = 4 ln(delta / max(r, eps_k)) for r < delta and
/// 0 beyond, delta = R / sqrt(2), eps_k = delta e^{-L_k} with L_k log-spaced
/// in [level_min, level_max]. The profile concentrates at the vertex with the
/// sharp weight for which the gap neither grows nor falls linearly in L.
std::vector<TmMember> tm_family_sweep(const TmSweepOptions& options);

struct TmSummary {
  double sup_gap = 0.0;
  double last5_mean = 0.0;
  double energy_span = 0.0;
  bool finite = false;
  /// |last5_mean - sup_gap| <= 0.1 |sup_gap|
  bool non_trending = false;
};

TmSummary summarize_tm(const std::vector<TmMember>& members);

/// `level,epsilon,dirichlet,gap`
void write_tm_csv(std::ostream& os, const std::vector<TmMember>& members);

}  // namespace ks

#endif  // KS_EXPERIMENTS_HPP
