#include "ks/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace ks {

TrajectoryAudit audit_trajectory(const std::vector<DiagnosticsRecord>& trajectory) {
  TrajectoryAudit a;
  if (trajectory.empty()) return a;
  const auto& first = trajectory.front();
  const double m0 = first.mass_u;
  const double vbound = std::max(first.mass_v, m0);
  a.min_u = std::numeric_limits<double>::infinity();
  a.max_vmass_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const auto& rec = trajectory[k];
    const double drift = std::abs(rec.mass_u - m0);
    a.max_mass_drift = std::max(a.max_mass_drift, m0 > 0.0 ? drift / m0 : drift);
    a.min_u = std::min(a.min_u, rec.min_u);
    a.max_vmass_excess = std::max(a.max_vmass_excess, rec.mass_v - vbound);
    if (k == 0) continue;
    const auto& prev = trajectory[k - 1];
    const double tol = 1e-6 * (1.0 + std::abs(rec.energy)) * (rec.t - prev.t);
    const double rise = rec.energy - prev.energy;
    if (rise > tol) {
      ++a.energy_increases;
      a.worst_energy_increase = std::max(a.worst_energy_increase, rise);
    }
  }
  return a;
}

ExtensibilityReport monitor_extensibility(const RunOutcome& outcome) {
  const auto& tr = outcome.trajectory;
  if (tr.empty()) throw std::invalid_argument("monitor_extensibility: empty trajectory");
  ExtensibilityReport r;
  r.initial = tr.front().ext_quantity;
  r.final_value = tr.back().ext_quantity;
  r.maximum = r.initial;
  for (const auto& rec : tr) r.maximum = std::max(r.maximum, rec.ext_quantity);

  if (outcome.kind == OutcomeKind::BlowUp && r.maximum - r.initial < std::abs(r.initial)) {
    r.flagged = true;
    r.reason = "blow-up fired while the extensibility quantity stayed below twice its initial value";
  }
  constexpr std::size_t kTail = 10;
  if (outcome.kind == OutcomeKind::GlobalUpToHorizon && tr.size() > kTail) {
    const std::size_t start = tr.size() - 1 - kTail;
    bool rising = true;
    for (std::size_t k = start + 1; k < tr.size(); ++k) rising = rising && tr[k].ext_quantity > tr[k - 1].ext_quantity;
    const double base = tr[start].ext_quantity;
    if (rising && r.final_value - base > std::abs(base)) {
      r.flagged = true;
      r.reason = "extensibility quantity still diverging at the horizon";
    }
  }
  return r;
}

SweepRun run_family_member(const SimConfig& base, double mass, RunOutcome* full) {
  SimConfig cfg = base;
  cfg.init.mass = mass;
  RunOutcome out = run(cfg);
  SweepRun r;
  r.mass = mass;
  r.outcome = out.kind;
  r.t_final = out.t_final;
  r.linf_final = out.trajectory.back().linf_u;
  r.ext_initial = out.trajectory.front().ext_quantity;
  r.ext_final = out.trajectory.back().ext_quantity;
  r.blowup_location = out.blowup_location;
  r.failure_reason = out.failure_reason;
  r.audit = audit_trajectory(out.trajectory);
  r.extensibility = monitor_extensibility(out);
  if (full) *full = std::move(out);
  return r;
}

SweepResult critical_mass_bisect(const SimConfig& base, const BisectOptions& options) {
  if (!(options.seed_global > 0.0 && options.seed_global < options.seed_blowup)) {
    throw std::invalid_argument("critical_mass_bisect: need 0 < seed_global < seed_blowup");
  }
  SweepResult res;
  res.theta = base.domain.theta;
  res.radius = base.domain.radius;
  res.t_end = base.scheme.t_end;
  res.predicted_critical = 4.0 * base.domain.theta;
  res.mass_lower = options.seed_global;
  res.mass_upper = options.seed_blowup;

  int used = 0;
  auto test = [&](double mass) {
    ++used;
    res.runs.push_back(run_family_member(base, mass));
    if (options.on_run) options.on_run(res.runs.back());
    return res.runs.back().outcome;
  };
  auto finish = [&](std::string note) {
    res.partial = res.width() > options.target_width;
    res.note = res.partial && note.empty() ? "budget exhausted" : std::move(note);
    return res;
  };

  if (used >= options.budget) return finish("");
  const OutcomeKind low = test(options.seed_global);
  if (low != OutcomeKind::GlobalUpToHorizon) {
    return finish("lower seed did not stay global (" + std::string(to_string(low)) + ")");
  }
  if (used >= options.budget) return finish("");
  const OutcomeKind high = test(options.seed_blowup);
  if (high != OutcomeKind::BlowUp) {
    return finish("upper seed did not blow up (" + std::string(to_string(high)) + ")");
  }

  while (res.width() > options.target_width && used < options.budget) {
    const double mid = std::sqrt(res.mass_lower * res.mass_upper);
    const OutcomeKind kind = test(mid);
    if (kind == OutcomeKind::GlobalUpToHorizon) {
      res.mass_lower = mid;
    } else if (kind == OutcomeKind::BlowUp) {
      res.mass_upper = mid;
    } else {
      return finish("solver failure at mass " + std::to_string(mid));
    }
  }
  return finish("");
}

void write_sweep_csv(std::ostream& os, const SweepResult& result) {
  const auto old = os.precision(17);
  os << "mass,outcome,t_final,linf_final,ext_final\n";
  for (const auto& r : result.runs) {
    os << r.mass << ',' << to_string(r.outcome) << ',' << r.t_final << ',' << r.linf_final << ',' << r.ext_final
       << '\n';
  }
  os.precision(old);
}

void write_sweep_summary(std::ostream& os, const SweepResult& result) {
  const auto old = os.precision(17);
  os << "theta " << result.theta << "\n"
     << "radius " << result.radius << "\n"
     << "horizon " << result.t_end << " (global means global up to this time)\n"
     << "runs " << result.runs.size() << "\n"
     << "mass_lower " << result.mass_lower << "\n"
     << "mass_upper " << result.mass_upper << "\n"
     << "width " << result.width() << "\n"
     << "predicted_critical " << result.predicted_critical << "\n"
     << "bracket_contains_prediction " << (result.contains_prediction() ? "yes" : "no") << "\n"
     << "relative_position " << result.relative_position() << "\n"
     << "partial " << (result.partial ? "yes" : "no") << "\n";
  if (!result.note.empty()) os << "note " << result.note << "\n";
  os.precision(old);
}

RestrictionReport restriction_experiment(const RestrictionOptions& o) {
  if (!(o.disc_mass > 0.0)) throw std::invalid_argument("restriction_experiment: disc_mass must be positive");
  if (!(o.compare_interval > 0.0)) throw std::invalid_argument("restriction_experiment: compare_interval must be positive");

  BlowupCandidateOptions cand;
  cand.nr = o.radial_nr;
  cand.grading = o.radial_grading;
  const RadialProfile profile = make_blowup_candidate(o.disc_mass, o.concentration, o.radius, cand);
  const auto mesh = make_mesh(DomainSpec{o.theta, o.radius}, o.sector_nr, o.sector_nphi, o.sector_grading);
  auto [u0, v0] = restrict_to_sector(profile, o.theta, mesh);

  struct Frame {
    double t;
    std::vector<double> u;
  };
  std::vector<Frame> radial_frames;
  std::vector<Frame> sector_frames;

  RadialRunControls rc;
  rc.snapshot_interval = o.compare_interval;
  rc.on_snapshot = [&](const RadialProfile& p) { radial_frames.push_back({p.t, p.u}); };
  RunControls sc;
  sc.snapshot_interval = o.compare_interval;
  sc.on_snapshot = [&](const SimState& s) {
    sector_frames.push_back({s.t, std::vector<double>(s.u.values().begin(), s.u.values().end())});
  };

  RestrictionReport rep;
  rep.radial = simulate_radial(profile, o.radial_scheme, rc);
  rep.sector = simulate(make_state(std::move(u0), std::move(v0), o.sector_scheme), o.sector_scheme, sc);
  rep.same_outcome = rep.radial.kind == rep.sector.kind;
  rep.sector_argmax_r = rep.sector.trajectory.back().argmax_r;

  // A run that ends at t_end between snapshot times contributes its final state too.
  auto add_final = [&](std::vector<Frame>& frames, const RunOutcome& out) {
    if (out.kind == OutcomeKind::GlobalUpToHorizon && (frames.empty() || frames.back().t < out.t_final)) {
      frames.push_back({out.t_final, out.u_final});
    }
  };
  add_final(radial_frames, rep.radial);
  add_final(sector_frames, rep.sector);

  const auto& grid = *profile.grid;
  const auto centers = mesh->cell_centers();
  std::size_t j = 0;
  for (const auto& sf : sector_frames) {
    while (j < radial_frames.size() && radial_frames[j].t < sf.t - 1e-12 * std::max(1.0, sf.t)) ++j;
    if (j == radial_frames.size()) break;
    const auto& rf = radial_frames[j];
    if (std::abs(rf.t - sf.t) > 1e-12 * std::max(1.0, sf.t)) continue;
    RestrictionSample s;
    s.t = sf.t;
    double peak = 0.0;
    for (std::size_t i = 0; i < sf.u.size(); ++i) {
      const double ref = radial_value_at(grid, rf.u, centers[i].r);
      s.linf_discrepancy = std::max(s.linf_discrepancy, std::abs(sf.u[i] - ref));
      peak = std::max(peak, ref);
    }
    s.relative_discrepancy = peak > 0.0 ? s.linf_discrepancy / peak : s.linf_discrepancy;
    rep.samples.push_back(s);
  }
  return rep;
}

std::vector<TmMember> tm_family_sweep(const TmSweepOptions& o) {
  if (o.members < 1) throw std::invalid_argument("tm_family_sweep: members must be >= 1");
  if (!(o.level_min > 0.0 && o.level_min <= o.level_max)) {
    throw std::invalid_argument("tm_family_sweep: need 0 < level_min <= level_max");
  }
  const auto mesh = make_mesh(o.domain, o.nr, o.nphi, o.grading);
  const double theta_eff = min_interior_angle(o.domain);
  const double delta = o.domain.radius / std::sqrt(2.0);
  std::vector<TmMember> out;
  for (int k = 0; k < o.members; ++k) {
    const double s = o.members == 1 ? 0.0 : static_cast<double>(k) / (o.members - 1);
    TmMember m;
    m.level = o.level_min * std::pow(o.level_max / o.level_min, s);
    m.epsilon = delta * std::exp(-m.level);
    const Field phi = Field::sample(mesh, [&](double r, double) {
      return r < delta ? 4.0 * std::log(delta / std::max(r, m.epsilon)) : 0.0;
    });
    m.dirichlet = dirichlet_energy(phi);
    m.gap = tm_gap(phi, theta_eff);
    out.push_back(m);
  }
  return out;
}

TmSummary summarize_tm(const std::vector<TmMember>& members) {
  TmSummary s;
  if (members.empty()) return s;
  s.finite = true;
  s.sup_gap = -std::numeric_limits<double>::infinity();
  double dmin = std::numeric_limits<double>::infinity();
  double dmax = 0.0;
  for (const auto& m : members) {
    s.finite = s.finite && std::isfinite(m.gap);
    s.sup_gap = std::max(s.sup_gap, m.gap);
    dmin = std::min(dmin, m.dirichlet);
    dmax = std::max(dmax, m.dirichlet);
  }
  const std::size_t tail = std::min<std::size_t>(5, members.size());
  for (std::size_t k = members.size() - tail; k < members.size(); ++k) s.last5_mean += members[k].gap;
  s.last5_mean /= static_cast<double>(tail);
  s.energy_span = dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity();
  s.non_trending = s.finite && std::abs(s.last5_mean - s.sup_gap) <= 0.1 * std::abs(s.sup_gap);
  return s;
}

void write_tm_csv(std::ostream& os, const std::vector<TmMember>& members) {
  const auto old = os.precision(17);
  os << "level,epsilon,dirichlet,gap\n";
  for (const auto& m : members) os << m.level << ',' << m.epsilon << ',' << m.dirichlet << ',' << m.gap << '\n';
  os.precision(old);
}

}  // namespace ks
