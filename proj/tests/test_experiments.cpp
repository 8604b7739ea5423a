#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ks/experiments.hpp"

using std::numbers::pi;

namespace {

ks::SimConfig cheap_family() {
  ks::SimConfig c;
  c.domain = {pi / 2, 1.0};
  c.nr = 24;
  c.nphi = 8;
  c.grading = 1.1;
  c.init.kind = ks::InitKind::RestrictedRadial;
  c.init.concentration = 0.2;
  c.init.mass = pi;
  c.scheme.t_end = 2.0;
  c.scheme.dt0 = 1e-5;
  c.scheme.linf_blowup = 1e3;
  return c;
}

ks::DiagnosticsRecord rec(double t, double mass_u, double mass_v, double energy, double min_u = 0.0) {
  ks::DiagnosticsRecord r;
  r.t = t;
  r.mass_u = mass_u;
  r.mass_v = mass_v;
  r.energy = energy;
  r.min_u = min_u;
  return r;
}

ks::RunOutcome ext_outcome(ks::OutcomeKind kind, const std::vector<double>& ext) {
  ks::RunOutcome out;
  out.kind = kind;
  for (std::size_t k = 0; k < ext.size(); ++k) {
    ks::DiagnosticsRecord r;
    r.step = static_cast<long>(k);
    r.ext_quantity = ext[k];
    out.trajectory.push_back(r);
  }
  return out;
}

}  // namespace

TEST_CASE("trajectory audit") {
  const std::vector<ks::DiagnosticsRecord> tr{rec(0.0, 2.0, 1.0, 5.0), rec(0.1, 2.0 + 2e-12, 1.5, 4.0),
                                              rec(0.2, 2.0, 2.5, 4.5, -1e-3)};
  const auto a = ks::audit_trajectory(tr);
  CHECK(a.max_mass_drift == doctest::Approx(1e-12).epsilon(1e-3));
  CHECK(a.min_u == -1e-3);
  CHECK(a.max_vmass_excess == doctest::Approx(0.5));
  CHECK(a.energy_increases == 1);
  CHECK(a.worst_energy_increase == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("extensibility monitor") {
  SUBCASE("blow-up with a quantity that never doubled is flagged") {
    CHECK(ks::monitor_extensibility(ext_outcome(ks::OutcomeKind::BlowUp, {10.0, 12.0, 15.0})).flagged);
  }
  SUBCASE("blow-up with a growing quantity is not flagged") {
    const auto r = ks::monitor_extensibility(ext_outcome(ks::OutcomeKind::BlowUp, {10.0, 40.0, 110.0}));
    CHECK_FALSE(r.flagged);
    CHECK(r.maximum == 110.0);
  }
  SUBCASE("global run that is still diverging is flagged") {
    std::vector<double> ext;
    for (int k = 0; k < 15; ++k) ext.push_back(std::pow(1.5, k));
    CHECK(ks::monitor_extensibility(ext_outcome(ks::OutcomeKind::GlobalUpToHorizon, ext)).flagged);
  }
  SUBCASE("constant run is not flagged") {
    ks::SimConfig c = cheap_family();
    c.init.kind = ks::InitKind::Constant;
    c.scheme.t_end = 0.5;
    const auto out = ks::run(c);
    const auto r = ks::monitor_extensibility(out);
    CHECK_FALSE(r.flagged);
    CHECK(r.final_value == doctest::Approx(r.initial).epsilon(1e-12));
  }
}

TEST_CASE("subcritical run to the horizon is not flagged") {
  auto c = cheap_family();
  c.nr = 32;
  c.nphi = 16;
  c.grading = 1.05;
  c.scheme.t_end = 50.0;
  c.scheme.linf_blowup = 1e6;
  const auto run = ks::run_family_member(c, pi);
  REQUIRE(run.outcome == ks::OutcomeKind::GlobalUpToHorizon);
  CHECK_FALSE(run.extensibility.flagged);
  CHECK(std::isfinite(run.extensibility.maximum));
}

TEST_CASE("extensibility quantity at firing is ten times its initial value" * doctest::may_fail()) {
  ks::SimConfig c;
  c.domain = {pi / 2, 1.0};
  c.nr = 64;
  c.nphi = 64;
  c.grading = 1.05;
  c.init.kind = ks::InitKind::RestrictedRadial;
  c.init.mass = 3 * pi;
  c.scheme.t_end = 1.0;
  c.scheme.dt0 = 1e-5;
  const auto run = ks::run_family_member(c, 3 * pi);
  REQUIRE(run.outcome == ks::OutcomeKind::BlowUp);
  CHECK_FALSE(run.extensibility.flagged);
  CHECK(run.ext_final >= 10.0 * run.ext_initial);
}

TEST_CASE("zero budget returns the seed bracket") {
  ks::BisectOptions opts;
  opts.seed_global = pi;
  opts.seed_blowup = 3 * pi;
  opts.budget = 0;
  const auto res = ks::critical_mass_bisect(cheap_family(), opts);
  CHECK(res.runs.empty());
  CHECK(res.mass_lower == pi);
  CHECK(res.mass_upper == 3 * pi);
  CHECK(res.predicted_critical == doctest::Approx(2 * pi));
  CHECK(res.contains_prediction());
  CHECK(res.relative_position() == doctest::Approx(0.5));
}

TEST_CASE("predicted critical mass for an eighth of the disc") {
  auto c = cheap_family();
  c.domain.theta = pi / 4;
  ks::BisectOptions opts;
  opts.seed_global = 0.5;
  opts.seed_blowup = 2.0;
  opts.budget = 0;
  CHECK(ks::critical_mass_bisect(c, opts).predicted_critical == doctest::Approx(pi));
}

TEST_CASE("invalid seeds are rejected") {
  ks::BisectOptions opts;
  opts.seed_global = 3.0;
  opts.seed_blowup = 2.0;
  CHECK_THROWS_AS(ks::critical_mass_bisect(cheap_family(), opts), std::invalid_argument);
}

TEST_CASE("bisection narrows a bracket monotonically and deterministically") {
  ks::BisectOptions opts;
  opts.seed_global = 0.5 * 2 * pi;
  opts.seed_blowup = 2.0 * 2 * pi;
  opts.budget = 5;
  opts.target_width = 0.01;
  std::vector<double> tested;
  opts.on_run = [&](const ks::SweepRun& r) { tested.push_back(r.mass); };
  const auto res = ks::critical_mass_bisect(cheap_family(), opts);
  REQUIRE(res.runs.size() == 5);
  CHECK(tested.size() == 5);
  CHECK(res.partial);
  double lo = opts.seed_global;
  double hi = opts.seed_blowup;
  for (const auto& r : res.runs) {
    CHECK(r.mass >= lo);
    CHECK(r.mass <= hi);
    CHECK(r.outcome != ks::OutcomeKind::SolverFailure);
    if (r.outcome == ks::OutcomeKind::GlobalUpToHorizon) lo = std::max(lo, r.mass);
    if (r.outcome == ks::OutcomeKind::BlowUp) hi = std::min(hi, r.mass);
    CHECK(r.audit.max_mass_drift < 1e-11);
    CHECK(r.audit.min_u >= 0.0);
  }
  CHECK(res.mass_lower == lo);
  CHECK(res.mass_upper == hi);
  CHECK(res.width() < opts.seed_blowup - opts.seed_global);

  const auto again = ks::critical_mass_bisect(cheap_family(), opts);
  REQUIRE(again.runs.size() == res.runs.size());
  for (std::size_t k = 0; k < res.runs.size(); ++k) {
    CHECK(again.runs[k].mass == res.runs[k].mass);
    CHECK(again.runs[k].t_final == res.runs[k].t_final);
  }

  std::ostringstream csv;
  ks::write_sweep_csv(csv, res);
  std::istringstream is(csv.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "mass,outcome,t_final,linf_final,ext_final");
  int rows = 0;
  while (std::getline(is, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == 5);

  std::ostringstream summary;
  ks::write_sweep_summary(summary, res);
  CHECK(summary.str().find("mass_lower") != std::string::npos);
}

TEST_CASE("restriction experiment on a subcritical disc mass") {
  ks::RestrictionOptions o;
  o.theta = pi / 2;
  o.sector_nr = 32;
  o.sector_nphi = 8;
  o.sector_grading = 1.05;
  o.radial_nr = 256;
  o.radial_grading = 1.02;
  o.disc_mass = 4 * pi;
  o.concentration = 0.3;
  o.sector_scheme.t_end = 0.3;
  o.sector_scheme.dt0 = 1e-4;
  o.radial_scheme = o.sector_scheme;
  const auto r = ks::restriction_experiment(o);
  CHECK(r.same_outcome);
  CHECK(r.sector.kind == ks::OutcomeKind::GlobalUpToHorizon);
  REQUIRE(r.samples.size() == 4);
  CHECK(r.samples.front().t == 0.0);
  CHECK(r.samples.back().t == doctest::Approx(0.3));
  for (const auto& s : r.samples) CHECK(s.relative_discrepancy < 0.05);
  o.disc_mass = -1.0;
  CHECK_THROWS_AS(ks::restriction_experiment(o), std::invalid_argument);
}

TEST_CASE("Trudinger-Moser family stays finite") {
  ks::TmSweepOptions o;
  o.domain = {pi / 2, 1.0};
  o.nr = 800;
  o.members = 8;
  o.level_max = 20.0;
  const auto members = ks::tm_family_sweep(o);
  REQUIRE(members.size() == 8);
  CHECK(members.front().level == doctest::Approx(0.1));
  CHECK(members.back().level == doctest::Approx(20.0));
  for (std::size_t k = 1; k < members.size(); ++k) CHECK(members[k].dirichlet > members[k - 1].dirichlet);
  const auto s = ks::summarize_tm(members);
  CHECK(s.finite);
  CHECK(std::isfinite(s.sup_gap));

  std::ostringstream csv;
  ks::write_tm_csv(csv, members);
  CHECK(csv.str().rfind("level,epsilon,dirichlet,gap\n", 0) == 0);
}

TEST_CASE("Trudinger-Moser family does not trend" * doctest::may_fail()) {
  ks::TmSweepOptions o;
  o.domain = {pi / 2, 1.0};
  const auto s = ks::summarize_tm(ks::tm_family_sweep(o));
  CHECK(s.finite);
  CHECK(s.energy_span >= 1000.0);
  CHECK(s.non_trending);
}
