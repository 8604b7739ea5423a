#include "ks/solver2d.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ks/fv_scheme.hpp"

namespace ks {

SimState make_state(Field u0, Field v0, const SchemeConfig& scheme) {
  if (!u0.same_mesh(v0)) throw std::invalid_argument("u0 and v0 live on different meshes");
  SimState s{std::move(u0), std::move(v0)};
  s.dt = scheme.dt0;
  s.last_linf_u = argmax(s.u).value;
  return s;
}

SimState step(const SimState& state, const SchemeConfig& scheme) {
  const auto& mesh = state.u.mesh();
  ImplicitOptions opt;
  opt.dt = state.dt;
  opt.theta_scheme = scheme.theta_scheme;
  opt.linear_tol = scheme.linear_tol;

  auto signal = advance_signal(mesh, state.v.values(), state.u.values(), opt);
  if (!signal.stats.converged) throw StepFailure("signal solve did not converge");
  double vscale = 0.0;
  for (double x : signal.values) {
    if (!std::isfinite(x)) throw StepFailure("signal is not finite");
    vscale = std::max(vscale, std::abs(x));
  }
  for (double& x : signal.values) {
    if (x < 0.0) {
      if (x < -1e-12 * vscale) throw StepFailure("signal lost positivity");
      x = 0.0;
    }
  }

  auto density = advance_density(mesh, state.u.values(), signal.values, opt);
  if (!density.stats.converged) throw StepFailure("density solve did not converge");
  const double m = mass(state.u);
  if (density.clipped_mass > 1e-9 * std::max(m, std::numeric_limits<double>::min())) {
    throw StepFailure("density lost positivity");
  }
  for (double x : density.values) {
    if (!std::isfinite(x)) throw StepFailure("density is not finite");
  }

  SimState next{Field(state.u.mesh_ptr(), std::move(density.values)),
                Field(state.v.mesh_ptr(), std::move(signal.values))};
  const auto area = mesh.cell_area();
  double vt2 = 0.0;
  for (std::size_t i = 0; i < area.size(); ++i) {
    const double vt = (next.v[i] - state.v[i]) / state.dt;
    vt2 += area[i] * vt * vt;
  }
  next.t = state.t + state.dt;
  next.dt = state.dt;
  next.step_count = state.step_count + 1;
  next.last_linf_u = argmax(next.u).value;
  next.vt_squared_integral = state.vt_squared_integral + state.dt * vt2;
  return next;
}

DtChoice adapt_dt(const SimState& state, const SchemeConfig& scheme) {
  const auto& mesh = state.v.mesh();
  double drift = std::numeric_limits<double>::infinity();
  for (const auto& f : mesh.interior_faces()) {
    const double jump =
        std::abs(state.v[static_cast<std::size_t>(f.right)] - state.v[static_cast<std::size_t>(f.left)]);
    if (jump > 0.0) drift = std::min(drift, f.distance * f.distance / jump);
  }
  return combine_dt_limits(drift, mesh.min_center_distance(), scheme);
}

DiagnosticsRecord diagnose(const SimState& state) {
  DiagnosticsRecord r;
  r.step = state.step_count;
  r.t = state.t;
  r.dt = state.dt;
  r.mass_u = mass(state.u);
  r.mass_v = mass(state.v);
  const auto am = argmax(state.u);
  r.linf_u = am.value;
  r.min_u = min_value(state.u);
  r.energy = energy(state.u, state.v);
  r.vmean = r.mass_v / state.u.mesh().domain().area();
  r.ext_quantity = entropy(state.u) + state.vt_squared_integral;
  r.argmax_r = am.location.r;
  r.argmax_phi = am.location.phi;
  return r;
}

RunOutcome simulate(SimState initial, const SchemeConfig& scheme, const RunControls& controls) {
  struct Ops {
    const SchemeConfig& scheme;
    SimState step(const SimState& s) const { return ks::step(s, scheme); }
    DtChoice adapt(const SimState& s) const { return adapt_dt(s, scheme); }
    DiagnosticsRecord diagnose(const SimState& s) const { return ks::diagnose(s); }
    std::span<const double> u(const SimState& s) const { return s.u.values(); }
    std::span<const double> v(const SimState& s) const { return s.v.values(); }
  };
  return detail::run_loop(std::move(initial), scheme, controls, Ops{scheme});
}

}  // namespace ks
