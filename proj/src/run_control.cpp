#include "ks/run_control.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace ks {

std::vector<std::string> SchemeConfig::problems() const {
  std::vector<std::string> out;
  if (!(dt_min > 0.0) || !(dt_min < dt0) || !(dt0 <= dt_max)) out.emplace_back("scheme: need 0 < dt_min < dt0 <= dt_max");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) out.emplace_back("scheme: cfl_safety must lie in (0, 1]");
  if (!(linf_blowup > 0.0)) out.emplace_back("scheme: linf_blowup must be positive");
  if (!(t_end > 0.0)) out.emplace_back("scheme: t_end must be positive");
  if (!(linear_tol > 0.0 && linear_tol < 1.0)) out.emplace_back("scheme: linear_tol must lie in (0, 1)");
  if (!(theta_scheme >= 0.5 && theta_scheme <= 1.0)) out.emplace_back("scheme: theta_scheme must lie in [1/2, 1]");
  if (blowup_window < 2) out.emplace_back("scheme: blowup_window must be >= 2");
  if (!(dt_growth >= 1.0)) out.emplace_back("scheme: dt_growth must be >= 1");
  if (!(max_linf_ratio > 1.0)) out.emplace_back("scheme: max_linf_ratio must exceed 1");
  if (max_steps <= 0) out.emplace_back("scheme: max_steps must be positive");
  return out;
}

void SchemeConfig::validate() const {
  const auto p = problems();
  if (!p.empty()) throw std::invalid_argument(p.front());
}

DtChoice combine_dt_limits(double drift_limit, double min_distance, const SchemeConfig& scheme) {
  DtChoice c;
  c.drift_limit = scheme.cfl_safety * drift_limit;
  c.diffusion_limit = std::numeric_limits<double>::infinity();
  if (scheme.theta_scheme < 1.0) {
    c.diffusion_limit = scheme.cfl_safety * min_distance * min_distance / (4.0 * (1.0 - scheme.theta_scheme));
  }
  c.dt = std::min({scheme.dt_max, c.drift_limit, c.diffusion_limit});
  c.collapsed = c.dt < scheme.dt_min;
  return c;
}

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::GlobalUpToHorizon:
      return "GlobalUpToHorizon";
    case OutcomeKind::BlowUp:
      return "BlowUp";
    case OutcomeKind::SolverFailure:
      return "SolverFailure";
  }
  return "?";
}

bool strictly_increasing_tail(std::span<const DiagnosticsRecord> history, std::size_t k) {
  if (k < 2 || history.size() < k) return false;
  const auto tail = history.last(k);
  for (std::size_t i = 1; i < tail.size(); ++i) {
    if (!(tail[i].linf_u > tail[i - 1].linf_u)) return false;
  }
  return true;
}

BlowupDecision detect_blowup(std::span<const DiagnosticsRecord> history, const SchemeConfig& scheme) {
  BlowupDecision d;
  if (history.empty()) return d;
  const auto& last = history.back();
  d.ext_quantity = last.ext_quantity;
  d.by_threshold = last.linf_u >= scheme.linf_blowup;
  d.by_dt_collapse =
      last.dt < scheme.dt_min && strictly_increasing_tail(history, static_cast<std::size_t>(scheme.blowup_window));
  d.blowup = d.by_threshold || d.by_dt_collapse;
  return d;
}

void write_csv_header(std::ostream& os) {
  os << "t,dt,mass_u,mass_v,linf_u,energy,vmean,ext_quantity,argmax_r,argmax_phi\n";
}

void write_csv_row(std::ostream& os, const DiagnosticsRecord& r) {
  const auto old_precision = os.precision();
  os << std::setprecision(17) << r.t << ',' << r.dt << ',' << r.mass_u << ',' << r.mass_v << ',' << r.linf_u << ','
     << r.energy << ',' << r.vmean << ',' << r.ext_quantity << ',' << r.argmax_r << ',' << r.argmax_phi << '\n';
  os.precision(old_precision);
}

}  // namespace ks
