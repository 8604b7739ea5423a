#ifndef KS_RUN_CONTROL_HPP
#define KS_RUN_CONTROL_HPP

#include <algorithm>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ks/geometry.hpp"

namespace ks {

struct SchemeConfig {
  double dt0 = 1e-4;
  /// steps shorter than this count as a collapse of the time step
  double dt_min = 1e-10;
  double dt_max = 0.05;
  double cfl_safety = 0.5;
  double linf_blowup = 1e6;
  double t_end = 1.0;
  double linear_tol = 1e-10;
  double theta_scheme = 1.0;
  /// number of trailing records inspected by the dt-collapse rule
  int blowup_window = 10;
  /// factor by which dt may grow from one accepted step to the next
  double dt_growth = 1.25;
  /// a step that multiplies linf_u by more than this (below linf_blowup) is
  /// rejected and retried with half the step
  double max_linf_ratio = 2.0;
  long max_steps = 5'000'000;

  /// One message per violated constraint, empty when valid.
  std::vector<std::string> problems() const;
  /// Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  bool operator==(const SchemeConfig&) const = default;
};

/// Thrown by a step when the linear solve fails, the result is not finite or
/// positivity cannot be kept.
class StepFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DtChoice {
  double dt = 0.0;
  /// set when the drift/diffusion limit falls below dt_min
  bool collapsed = false;
  double drift_limit = 0.0;
  double diffusion_limit = 0.0;
};

/// Combines the drift limit cfl * min d^2/|dv| with dt_max and, for
/// theta_scheme < 1, the diffusion limit cfl * h^2 / (4 (1 - theta)).
DtChoice combine_dt_limits(double drift_limit, double min_distance, const SchemeConfig& scheme);

struct DiagnosticsRecord {
  long step = 0;
  double t = 0.0;
  double dt = 0.0;
  double mass_u = 0.0;
  double mass_v = 0.0;
  double linf_u = 0.0;
  double min_u = 0.0;
  double energy = 0.0;
  /// int v / |Omega|
  double vmean = 0.0;
  /// int u ln u + sum_n dt int ((v^{n+1}-v^n)/dt)^2
  double ext_quantity = 0.0;
  double argmax_r = 0.0;
  double argmax_phi = 0.0;
};

enum class OutcomeKind { GlobalUpToHorizon, BlowUp, SolverFailure };

const char* to_string(OutcomeKind kind);

struct BlowupDecision {
  bool blowup = false;
  bool by_threshold = false;
  bool by_dt_collapse = false;
  double ext_quantity = 0.0;
};

/// BlowUp iff the last linf_u reaches linf_blowup, or the last dt is below
/// dt_min while linf_u increased strictly across the last `blowup_window` records.
BlowupDecision detect_blowup(std::span<const DiagnosticsRecord> history, const SchemeConfig& scheme);

bool strictly_increasing_tail(std::span<const DiagnosticsRecord> history, std::size_t k);

struct RunOutcome {
  OutcomeKind kind = OutcomeKind::GlobalUpToHorizon;
  double t_final = 0.0;
  PolarPoint blowup_location;
  std::string failure_reason;
  std::vector<DiagnosticsRecord> trajectory;
  /// state after the last accepted step
  std::vector<double> u_final;
  std::vector<double> v_final;
  long rejected_steps = 0;
};

template <class State>
struct BasicRunControls {
  /// keep every n-th accepted step in the trajectory (the final state is always kept)
  int record_every = 1;
  /// called for every kept record
  std::function<void(const DiagnosticsRecord&)> on_record;
  /// called at t = 0 and at every multiple of snapshot_interval; steps are
  /// shortened to land on these times
  double snapshot_interval = 0.0;
  std::function<void(const State&)> on_snapshot;
};

/// CSV header: t,dt,mass_u,mass_v,linf_u,energy,vmean,ext_quantity,argmax_r,argmax_phi
void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const DiagnosticsRecord& rec);

namespace detail {

/// Time loop shared by the sector and radial solvers. `Ops` supplies
/// step(State) -> State, adapt(State) -> DtChoice, diagnose(State) -> record,
/// u(State)/v(State) -> value spans.
template <class State, class Ops>
RunOutcome run_loop(State state, const SchemeConfig& scheme, const BasicRunControls<State>& controls,
                    const Ops& ops) {
  scheme.validate();
  RunOutcome out;
  std::vector<DiagnosticsRecord> window;
  const auto window_size = static_cast<std::size_t>(scheme.blowup_window);
  const int every = std::max(1, controls.record_every);

  auto keep = [&](const DiagnosticsRecord& rec, bool force) {
    window.push_back(rec);
    if (window.size() > window_size) window.erase(window.begin());
    if (force || rec.step % every == 0) {
      out.trajectory.push_back(rec);
      if (controls.on_record) controls.on_record(rec);
    }
  };
  auto finish = [&](OutcomeKind kind, const State& s) {
    out.kind = kind;
    out.t_final = s.t;
    const auto u = ops.u(s);
    const auto v = ops.v(s);
    out.u_final.assign(u.begin(), u.end());
    out.v_final.assign(v.begin(), v.end());
    if (out.trajectory.empty() || out.trajectory.back().step != s.step_count) {
      const auto rec = (!window.empty() && window.back().step == s.step_count) ? window.back() : ops.diagnose(s);
      out.trajectory.push_back(rec);
      if (controls.on_record) controls.on_record(rec);
    }
    return out;
  };
  auto location_of = [](const DiagnosticsRecord& rec) { return PolarPoint{rec.argmax_r, rec.argmax_phi}; };

  if (controls.on_snapshot) controls.on_snapshot(state);
  long snapshot_index = 1;
  double next_snapshot = controls.snapshot_interval;
  keep(ops.diagnose(state), true);
  if (detect_blowup(window, scheme).by_threshold) {
    out.blowup_location = location_of(window.back());
    return finish(OutcomeKind::BlowUp, state);
  }

  state.dt = std::min(state.dt, scheme.dt_max);
  while (state.t < scheme.t_end) {
    if (state.step_count >= scheme.max_steps) {
      out.failure_reason = "step budget exhausted";
      return finish(OutcomeKind::SolverFailure, state);
    }
    const bool snapshots = controls.on_snapshot && controls.snapshot_interval > 0.0;
    // a snapshot time within round-off of t_end is merged into t_end
    const double target =
        snapshots && next_snapshot < scheme.t_end * (1.0 - 1e-12) ? next_snapshot : scheme.t_end;
    const double remaining = target - state.t;
    const bool last_step = remaining <= 1.5 * state.dt;
    const double dt_try = last_step ? remaining : state.dt;

    std::string reject_reason;
    State next = state;
    try {
      State trial = state;
      trial.dt = dt_try;
      next = ops.step(trial);
      if (next.last_linf_u > scheme.max_linf_ratio * state.last_linf_u && next.last_linf_u < scheme.linf_blowup &&
          dt_try >= scheme.dt_min) {
        reject_reason = "L-infinity jump";
      }
    } catch (const StepFailure& e) {
      reject_reason = e.what();
    }
    if (!reject_reason.empty()) {
      ++out.rejected_steps;
      state.dt = 0.5 * dt_try;
      if (state.dt < scheme.dt_min) {
        if (strictly_increasing_tail(window, window_size)) {
          out.blowup_location = location_of(window.back());
          return finish(OutcomeKind::BlowUp, state);
        }
        out.failure_reason = "time step collapsed after rejected steps (" + reject_reason + ")";
        return finish(OutcomeKind::SolverFailure, state);
      }
      continue;
    }
    if (last_step) next.t = target;

    const auto rec = ops.diagnose(next);
    keep(rec, false);
    if (snapshots && next.t >= next_snapshot) {
      controls.on_snapshot(next);
      while (next_snapshot <= next.t) next_snapshot = controls.snapshot_interval * static_cast<double>(++snapshot_index);
    }

    if (detect_blowup(window, scheme).blowup) {
      out.blowup_location = location_of(rec);
      return finish(OutcomeKind::BlowUp, next);
    }
    if (rec.dt < scheme.dt_min) {
      out.failure_reason = "time step collapsed without L-infinity growth";
      return finish(OutcomeKind::SolverFailure, next);
    }

    const DtChoice choice = ops.adapt(next);
    const double grown = std::min(choice.dt, scheme.dt_growth * state.dt);
    state = std::move(next);
    state.dt = choice.collapsed ? choice.dt : grown;
  }
  return finish(OutcomeKind::GlobalUpToHorizon, state);
}

}  // namespace detail

}  // namespace ks

#endif  // KS_RUN_CONTROL_HPP
