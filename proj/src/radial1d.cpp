#include "ks/radial1d.hpp"

// pchip.hpp in Boost 1.74 calls unqualified isnan
#include <boost/math/special_functions/fpclassify.hpp>
#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "ks/fv_scheme.hpp"

namespace ks {

double RadialGrid::disc_area() const { return std::numbers::pi * radius * radius; }

RadialGridPtr make_radial_grid(double radius, int nr, double grading) {
  if (!(radius > 0.0)) throw std::invalid_argument("radial grid: radius must be positive");
  if (nr < 4) throw std::invalid_argument("radial grid: nr must be >= 4");
  if (!(grading >= 1.0)) throw std::invalid_argument("radial grid: grading must be >= 1");
  auto g = std::make_shared<RadialGrid>();
  g->radius = radius;
  g->nr = nr;
  g->grading = grading;
  g->edges = graded_radial_edges(radius, nr, grading);
  const auto n = static_cast<std::size_t>(nr);
  g->centers.resize(n);
  g->volumes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g->centers[i] = 0.5 * (g->edges[i] + g->edges[i + 1]);
    g->volumes[i] = std::numbers::pi * (g->edges[i + 1] * g->edges[i + 1] - g->edges[i] * g->edges[i]);
  }
  g->transmissibility.resize(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    g->transmissibility[i] = 2.0 * std::numbers::pi * g->edges[i + 1] / (g->centers[i + 1] - g->centers[i]);
  }
  return g;
}

double disc_mass(const RadialGrid& grid, const std::vector<double>& values) {
  double m = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) m += grid.volumes[i] * values[i];
  return m;
}

namespace {

/// Thomas elimination; lower[0] and upper[n-1] are ignored.
std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
  return x;
}

/// (K x)_i for the radial two-point Laplacian stiffness.
std::vector<double> stiffness_apply(const RadialGrid& g, const std::vector<double>& x) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t f = 0; f + 1 < x.size(); ++f) {
    const double flux = g.transmissibility[f] * (x[f] - x[f + 1]);
    out[f] += flux;
    out[f + 1] -= flux;
  }
  return out;
}

/// Scharfetter-Gummel flux from cell f to f+1.
double sg_flux(const RadialGrid& g, std::size_t f, const std::vector<double>& u, const std::vector<double>& v) {
  const double psi = v[f + 1] - v[f];
  return g.transmissibility[f] * (bernoulli(-psi) * u[f] - bernoulli(psi) * u[f + 1]);
}

bool all_finite(const std::vector<double>& x) {
  return std::all_of(x.begin(), x.end(), [](double a) { return std::isfinite(a); });
}

}  // namespace

std::vector<double> quasi_stationary_signal(const RadialGrid& g, const std::vector<double>& u) {
  const std::size_t n = u.size();
  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = g.volumes[i];
    rhs[i] = g.volumes[i] * u[i];
  }
  for (std::size_t f = 0; f + 1 < n; ++f) {
    const double t = g.transmissibility[f];
    diag[f] += t;
    diag[f + 1] += t;
    upper[f] = -t;
    lower[f + 1] = -t;
  }
  return solve_tridiagonal(std::move(lower), std::move(diag), std::move(upper), std::move(rhs));
}

RadialProfile radial_step(const RadialProfile& p, const SchemeConfig& scheme) {
  const auto& g = *p.grid;
  const std::size_t n = p.u.size();
  const double dt = p.dt;
  const double th = scheme.theta_scheme;

  // signal
  const auto kv_old = stiffness_apply(g, p.v);
  std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
  // both solves are written for the increment, so steady states give a zero right-hand side
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = g.volumes[i] * (1.0 / dt + th);
    rhs[i] = g.volumes[i] * (p.u[i] - p.v[i]) - kv_old[i];
  }
  for (std::size_t f = 0; f + 1 < n; ++f) {
    const double t = th * g.transmissibility[f];
    diag[f] += t;
    diag[f + 1] += t;
    upper[f] = -t;
    lower[f + 1] = -t;
  }
  auto v_new = solve_tridiagonal(lower, diag, upper, rhs);
  for (std::size_t i = 0; i < n; ++i) v_new[i] += p.v[i];
  if (!all_finite(v_new)) throw StepFailure("radial signal is not finite");
  double vscale = 0.0;
  for (double x : v_new) vscale = std::max(vscale, std::abs(x));
  for (double& x : v_new) {
    if (x < 0.0) {
      if (x < -1e-12 * vscale) throw StepFailure("radial signal lost positivity");
      x = 0.0;
    }
  }

  // density
  std::fill(lower.begin(), lower.end(), 0.0);
  std::fill(upper.begin(), upper.end(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = g.volumes[i] / dt;
    rhs[i] = 0.0;
  }
  for (std::size_t f = 0; f + 1 < n; ++f) {
    const double psi = v_new[f + 1] - v_new[f];
    const double t = th * g.transmissibility[f];
    const double out_left = t * bernoulli(-psi);
    const double in_right = t * bernoulli(psi);
    diag[f] += out_left;
    upper[f] -= in_right;
    lower[f + 1] -= out_left;
    diag[f + 1] += in_right;
    const double flux = sg_flux(g, f, p.u, v_new);
    rhs[f] -= flux;
    rhs[f + 1] += flux;
  }
  auto u_new = solve_tridiagonal(lower, diag, upper, rhs);
  for (std::size_t i = 0; i < n; ++i) u_new[i] += p.u[i];
  if (!all_finite(u_new)) throw StepFailure("radial density is not finite");
  const double m = disc_mass(g, p.u);
  double clipped = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (u_new[i] < 0.0) {
      clipped += -u_new[i] * g.volumes[i];
      u_new[i] = 0.0;
    }
  }
  if (clipped > 1e-9 * std::max(m, std::numeric_limits<double>::min())) {
    throw StepFailure("radial density lost positivity");
  }

  RadialProfile next;
  next.grid = p.grid;
  double vt2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double vt = (v_new[i] - p.v[i]) / dt;
    vt2 += g.volumes[i] * vt * vt;
  }
  next.u = std::move(u_new);
  next.v = std::move(v_new);
  next.t = p.t + dt;
  next.dt = dt;
  next.step_count = p.step_count + 1;
  next.last_linf_u = *std::max_element(next.u.begin(), next.u.end());
  next.vt_squared_integral = p.vt_squared_integral + dt * vt2;
  return next;
}

DtChoice radial_adapt_dt(const RadialProfile& p, const SchemeConfig& scheme) {
  const auto& g = *p.grid;
  double drift = std::numeric_limits<double>::infinity();
  double hmin = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f + 1 < p.v.size(); ++f) {
    const double d = g.centers[f + 1] - g.centers[f];
    hmin = std::min(hmin, d);
    const double jump = std::abs(p.v[f + 1] - p.v[f]);
    if (jump > 0.0) drift = std::min(drift, d * d / jump);
  }
  return combine_dt_limits(drift, hmin, scheme);
}

DiagnosticsRecord radial_diagnose(const RadialProfile& p) {
  const auto& g = *p.grid;
  DiagnosticsRecord r;
  r.step = p.step_count;
  r.t = p.t;
  r.dt = p.dt;
  r.mass_u = disc_mass(g, p.u);
  r.mass_v = disc_mass(g, p.v);
  double entropy_sum = 0.0;
  double e = 0.0;
  std::size_t imax = 0;
  r.min_u = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    entropy_sum += g.volumes[i] * xlogx(p.u[i]);
    e += g.volumes[i] * (xlogx(p.u[i]) - p.u[i] * p.v[i] + 0.5 * p.v[i] * p.v[i]);
    if (p.u[i] > p.u[imax]) imax = i;
    r.min_u = std::min(r.min_u, p.u[i]);
  }
  for (std::size_t f = 0; f + 1 < p.v.size(); ++f) {
    const double jump = p.v[f + 1] - p.v[f];
    e += 0.5 * g.transmissibility[f] * jump * jump;
  }
  r.linf_u = p.u[imax];
  r.energy = e;
  r.vmean = r.mass_v / g.disc_area();
  r.ext_quantity = entropy_sum + p.vt_squared_integral;
  r.argmax_r = g.centers[imax];
  r.argmax_phi = 0.0;
  return r;
}

RunOutcome simulate_radial(RadialProfile initial, const SchemeConfig& scheme, const RadialRunControls& controls) {
  struct Ops {
    const SchemeConfig& scheme;
    RadialProfile step(const RadialProfile& p) const { return radial_step(p, scheme); }
    DtChoice adapt(const RadialProfile& p) const { return radial_adapt_dt(p, scheme); }
    DiagnosticsRecord diagnose(const RadialProfile& p) const { return radial_diagnose(p); }
    std::span<const double> u(const RadialProfile& p) const { return p.u; }
    std::span<const double> v(const RadialProfile& p) const { return p.v; }
  };
  if (initial.dt <= 0.0) initial.dt = scheme.dt0;
  initial.last_linf_u = *std::max_element(initial.u.begin(), initial.u.end());
  return detail::run_loop(std::move(initial), scheme, controls, Ops{scheme});
}

RadialProfile make_blowup_candidate(double disc_mass_target, double concentration, double radius,
                                    const BlowupCandidateOptions& options) {
  if (!(disc_mass_target > 0.0)) throw std::invalid_argument("blow-up candidate: disc mass must be positive");
  if (!(concentration > 0.0)) throw std::invalid_argument("blow-up candidate: concentration must be positive");
  RadialProfile p;
  p.grid = make_radial_grid(radius, options.nr, options.grading);
  const auto& g = *p.grid;
  p.u.resize(g.centers.size());
  const double w2 = concentration * concentration;
  for (std::size_t i = 0; i < p.u.size(); ++i) p.u[i] = std::exp(-g.centers[i] * g.centers[i] / w2);
  const double m = disc_mass(g, p.u);
  if (!(m > 0.0)) throw std::invalid_argument("blow-up candidate: concentration too small for the grid");
  for (auto& x : p.u) x *= disc_mass_target / m;
  switch (options.signal) {
    case SignalInit::QuasiStationary:
      p.v = quasi_stationary_signal(g, p.u);
      break;
    case SignalInit::Zero:
      p.v.assign(p.u.size(), 0.0);
      break;
    case SignalInit::Constant:
      p.v.assign(p.u.size(), options.signal_constant);
      break;
  }
  p.last_linf_u = *std::max_element(p.u.begin(), p.u.end());
  return p;
}

double radial_value_at(const RadialGrid& g, const std::vector<double>& values, double r) {
  const auto& c = g.centers;
  if (r <= c.front()) return values.front();
  if (r >= c.back()) return values.back();
  const auto it = std::upper_bound(c.begin(), c.end(), r);
  const auto k = static_cast<std::size_t>(it - c.begin());
  const double s = (r - c[k - 1]) / (c[k] - c[k - 1]);
  return (1.0 - s) * values[k - 1] + s * values[k];
}

std::pair<Field, Field> restrict_to_sector(const RadialProfile& profile, double theta, const MeshPtr& mesh) {
  const auto& g = *profile.grid;
  const auto& dom = mesh->domain();
  if (std::abs(dom.radius - g.radius) > 1e-12 * g.radius) {
    throw std::invalid_argument("restrict_to_sector: mesh radius differs from profile radius");
  }
  if (std::abs(dom.theta - theta) > 1e-12 * theta) {
    throw std::invalid_argument("restrict_to_sector: mesh angle differs from theta");
  }
  using boost::math::interpolators::pchip;
  auto make = [&](const std::vector<double>& y) {
    return pchip<std::vector<double>>(std::vector<double>(g.centers), std::vector<double>(y));
  };
  const auto u_interp = make(profile.u);
  const auto v_interp = make(profile.v);
  const double rlo = g.centers.front();
  const double rhi = g.centers.back();

  const auto edges = mesh->radial_edges();
  std::vector<double> u_ring(static_cast<std::size_t>(mesh->nr()));
  std::vector<double> v_ring(u_ring.size());
  for (std::size_t i = 0; i < u_ring.size(); ++i) {
    const double r = std::clamp(0.5 * (edges[i] + edges[i + 1]), rlo, rhi);
    u_ring[i] = std::max(u_interp(r), 0.0);
    v_ring[i] = std::max(v_interp(r), 0.0);
  }
  std::vector<double> u(static_cast<std::size_t>(mesh->cell_count()));
  std::vector<double> v(u.size());
  for (int c = 0; c < mesh->cell_count(); ++c) {
    const auto ring = static_cast<std::size_t>(mesh->ring_of(c));
    u[static_cast<std::size_t>(c)] = u_ring[ring];
    v[static_cast<std::size_t>(c)] = v_ring[ring];
  }
  Field uf(mesh, std::move(u));
  const double target = theta / kTwoPi * disc_mass(g, profile.u);
  if (target > 0.0 && mass(uf) > 0.0) uf = normalize_to_mass(uf, target);
  return {std::move(uf), Field(mesh, std::move(v))};
}

void write_profile(std::ostream& os, const RadialProfile& p) {
  const auto old_precision = os.precision();
  os << std::setprecision(17) << "# " << p.grid->radius << ' ' << p.grid->nr << ' ' << p.t << '\n';
  for (std::size_t i = 0; i < p.u.size(); ++i) {
    os << p.grid->centers[i] << ' ' << p.u[i] << ' ' << p.v[i] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace ks
