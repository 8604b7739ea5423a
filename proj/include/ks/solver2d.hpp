#ifndef KS_SOLVER2D_HPP
#define KS_SOLVER2D_HPP

#include "ks/fields.hpp"
#include "ks/run_control.hpp"

namespace ks {

/// The evolving solution on a SectorMesh.
struct SimState {
  Field u;
  Field v;
  double t = 0.0;
  double dt = 0.0;
  long step_count = 0;
  double last_linf_u = 0.0;
  /// running sum of dt * int ((v^{n+1} - v^n)/dt)^2
  double vt_squared_integral = 0.0;
};

SimState make_state(Field u0, Field v0, const SchemeConfig& scheme);

/// Advances by state.dt: theta-weighted implicit signal solve with the old
/// density as source, then the Scharfetter-Gummel density solve in the new
/// signal. Throws StepFailure.
SimState step(const SimState& state, const SchemeConfig& scheme);

/// Largest admissible next step for `state` (see combine_dt_limits).
DtChoice adapt_dt(const SimState& state, const SchemeConfig& scheme);

DiagnosticsRecord diagnose(const SimState& state);

using RunControls = BasicRunControls<SimState>;

/// Integrates from `initial` until scheme.t_end, detected blow-up or solver failure.
RunOutcome simulate(SimState initial, const SchemeConfig& scheme, const RunControls& controls = {});

}  // namespace ks

#endif  // KS_SOLVER2D_HPP
