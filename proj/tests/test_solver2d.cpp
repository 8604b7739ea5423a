#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "ks/fields.hpp"
#include "ks/fv_scheme.hpp"
#include "ks/solver2d.hpp"

using ks::Field;
using ks::SchemeConfig;
using std::numbers::pi;

namespace {

ks::MeshPtr quarter(int nr, int nphi, double grading = 1.0) { return ks::make_mesh({pi / 2, 1.0}, nr, nphi, grading); }

Field centered_gaussian(const ks::MeshPtr& mesh, double width, double mass) {
  return ks::normalize_to_mass(
      Field::sample(mesh, [width](double r, double) { return std::exp(-r * r / (width * width)); }), mass);
}

Field stationary(const Field& u) {
  return Field(u.mesh_ptr(), ks::stationary_signal(u.mesh(), u.values()).values);
}

ks::DiagnosticsRecord record(long step, double linf, double dt) {
  ks::DiagnosticsRecord r;
  r.step = step;
  r.linf_u = linf;
  r.dt = dt;
  return r;
}

}  // namespace

TEST_CASE("constant equilibria are preserved to machine precision") {
  const auto mesh = quarter(32, 32, 1.05);
  for (double c : {1e-3, 1.0, 1e3}) {
    SchemeConfig scheme;
    scheme.dt0 = 0.01;
    scheme.t_end = 0.2;
    const auto out = ks::simulate(ks::make_state(Field(mesh, c), Field(mesh, c), scheme), scheme);
    CHECK(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
    for (std::size_t i = 0; i < out.u_final.size(); ++i) {
      CHECK(std::abs(out.u_final[i] - c) <= 1e-14 * c);
      CHECK(std::abs(out.v_final[i] - c) <= 1e-14 * c);
    }
  }
}

TEST_CASE("zero density: the signal decays like e^-t") {
  const auto mesh = quarter(16, 16);
  SchemeConfig scheme;
  scheme.dt0 = 1e-3;
  scheme.dt_max = 1e-3;
  scheme.t_end = 1.0;
  const auto out = ks::simulate(ks::make_state(Field(mesh, 0.0), Field(mesh, 1.0), scheme), scheme);
  REQUIRE(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
  const double ratio = out.trajectory.back().mass_v / out.trajectory.front().mass_v;
  CHECK(std::abs(ratio - std::exp(-1.0)) <= 1e-3);
  const long steps = out.trajectory.back().step;
  CHECK(ratio == doctest::Approx(std::pow(1.0 + 1e-3, -static_cast<double>(steps))).epsilon(1e-10));
  for (double u : out.u_final) CHECK(u == 0.0);
}

TEST_CASE("zero initial data stays zero and global") {
  const auto mesh = quarter(8, 8);
  SchemeConfig scheme;
  scheme.t_end = 1.0;
  const auto out = ks::simulate(ks::make_state(Field(mesh, 0.0), Field(mesh, 0.0), scheme), scheme);
  CHECK(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
  CHECK(out.t_final == 1.0);
  for (double u : out.u_final) CHECK(u == 0.0);
}

TEST_CASE("subcritical run conserves mass and keeps positivity, energy and the v mean bound") {
  const auto mesh = quarter(32, 32, 1.05);
  const auto u0 = centered_gaussian(mesh, 0.2, pi);
  const auto v0 = stationary(u0);
  SchemeConfig scheme;
  scheme.dt0 = 1e-5;
  scheme.t_end = 2.0;
  const auto out = ks::simulate(ks::make_state(u0, v0, scheme), scheme);
  REQUIRE(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
  const double m0 = out.trajectory.front().mass_u;
  const double bound = std::max(out.trajectory.front().mass_v, m0);
  for (std::size_t k = 0; k < out.trajectory.size(); ++k) {
    const auto& rec = out.trajectory[k];
    CHECK(std::abs(rec.mass_u - m0) / m0 < 1e-11);
    CHECK(rec.min_u >= 0.0);
    CHECK(rec.mass_v <= bound * (1 + 1e-12));
    if (k > 0) {
      const auto& prev = out.trajectory[k - 1];
      CHECK(rec.energy <= prev.energy + 1e-6 * (1 + std::abs(prev.energy)) * (rec.t - prev.t));
    }
  }
}

TEST_CASE("radially symmetric data stays symmetric on the disc") {
  const auto mesh = ks::make_mesh({2 * pi, 1.0}, 24, 16, 1.05);
  const auto u0 = centered_gaussian(mesh, 0.3, 4 * pi);
  SchemeConfig scheme;
  scheme.dt0 = 1e-4;
  scheme.t_end = 0.05;
  scheme.linear_tol = 1e-12;
  const auto out = ks::simulate(ks::make_state(u0, stationary(u0), scheme), scheme);
  REQUIRE(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
  for (int i = 0; i < mesh->nr(); ++i) {
    const auto begin = out.u_final.begin() + mesh->cell_index(i, 0);
    const auto [lo, hi] = std::minmax_element(begin, begin + mesh->nphi());
    CHECK((*hi - *lo) <= 1e-8 * *hi);
  }
}

TEST_CASE("adapt_dt") {
  const auto mesh = quarter(16, 16);
  SchemeConfig scheme;
  scheme.dt_max = 1e6;
  scheme.cfl_safety = 0.5;
  SUBCASE("a constant signal leaves only dt_max") {
    SchemeConfig capped = scheme;
    capped.dt_max = 0.05;
    const auto s = ks::make_state(Field(mesh, 1.0), Field(mesh, 4.0), capped);
    CHECK(ks::adapt_dt(s, capped).dt == 0.05);
  }
  SUBCASE("doubling the signal gradient halves the step") {
    auto lin = [](double k) {
      return [k](double r, double phi) { return k * r * std::cos(phi); };
    };
    const auto mesh_u = Field(mesh, 1.0);
    const auto s1 = ks::make_state(mesh_u, Field::sample(mesh, lin(1.0)), scheme);
    const auto s2 = ks::make_state(mesh_u, Field::sample(mesh, lin(2.0)), scheme);
    const double dt1 = ks::adapt_dt(s1, scheme).dt;
    const double dt2 = ks::adapt_dt(s2, scheme).dt;
    CHECK(dt1 < scheme.dt_max);
    CHECK(dt2 == doctest::Approx(0.5 * dt1).epsilon(1e-12));
  }
  SUBCASE("Crank-Nicolson adds the diffusion limit") {
    SchemeConfig cn = scheme;
    cn.theta_scheme = 0.5;
    const auto s = ks::make_state(Field(mesh, 1.0), Field(mesh, 1.0), cn);
    const auto choice = ks::adapt_dt(s, cn);
    CHECK(choice.dt < 1.0);
    CHECK(choice.dt == doctest::Approx(choice.diffusion_limit));
  }
}

TEST_CASE("detect_blowup") {
  SchemeConfig scheme;
  scheme.linf_blowup = 1e6;
  scheme.dt_min = 1e-10;
  scheme.blowup_window = 5;
  SUBCASE("threshold") {
    const std::vector<ks::DiagnosticsRecord> h{record(0, 10.0, 1e-3), record(1, 1.1e6, 1e-4)};
    const auto d = ks::detect_blowup(h, scheme);
    CHECK(d.blowup);
    CHECK(d.by_threshold);
  }
  SUBCASE("flat history at dt_max") {
    std::vector<ks::DiagnosticsRecord> h;
    for (long k = 0; k < 10; ++k) h.push_back(record(k, 5.0, scheme.dt_max));
    CHECK_FALSE(ks::detect_blowup(h, scheme).blowup);
  }
  SUBCASE("dt collapse with strictly growing peak") {
    std::vector<ks::DiagnosticsRecord> h;
    for (long k = 0; k < 5; ++k) h.push_back(record(k, 100.0 * (k + 1), 1e-8 / std::pow(10.0, k)));
    const auto d = ks::detect_blowup(h, scheme);
    CHECK(d.blowup);
    CHECK(d.by_dt_collapse);
  }
  SUBCASE("dt collapse without growth") {
    std::vector<ks::DiagnosticsRecord> h;
    for (long k = 0; k < 5; ++k) h.push_back(record(k, 100.0, 1e-8 / std::pow(10.0, k)));
    CHECK_FALSE(ks::detect_blowup(h, scheme).blowup);
  }
}

TEST_CASE("supercritical concentrated data blows up at the vertex") {
  const auto mesh = quarter(48, 16, 1.08);
  const auto u0 = centered_gaussian(mesh, 0.1, 3 * pi);
  SchemeConfig scheme;
  scheme.dt0 = 1e-6;
  scheme.t_end = 1.0;
  const auto out = ks::simulate(ks::make_state(u0, stationary(u0), scheme), scheme);
  REQUIRE(out.kind == ks::OutcomeKind::BlowUp);
  CHECK(out.blowup_location.r <= 0.05);
  CHECK(out.t_final < 1.0);
  const double m0 = out.trajectory.front().mass_u;
  for (const auto& rec : out.trajectory) {
    CHECK(std::abs(rec.mass_u - m0) / m0 < 1e-11);
    CHECK(rec.min_u >= 0.0);
  }
  REQUIRE(out.trajectory.size() > 10);
  for (std::size_t k = out.trajectory.size() - 10; k < out.trajectory.size(); ++k) {
    CHECK(out.trajectory[k].dt <= out.trajectory[k - 1].dt);
  }
}

TEST_CASE("spread-out subcritical data stays global up to t = 50") {
  const auto mesh = quarter(32, 32, 1.05);
  const auto u0 = ks::normalize_to_mass(
      Field::sample(mesh, [](double r, double phi) { return 1.0 + 0.5 * std::cos(2 * phi) * r * r; }), pi);
  SchemeConfig scheme;
  scheme.t_end = 50.0;
  const auto out = ks::simulate(ks::make_state(u0, Field(mesh, 0.0), scheme), scheme);
  REQUIRE(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
  CHECK(out.t_final == 50.0);
  double sup = 0.0;
  for (std::size_t k = 0; k < out.trajectory.size(); ++k) {
    const auto& rec = out.trajectory[k];
    sup = std::max(sup, rec.linf_u);
    if (k > 0) {
      const auto& prev = out.trajectory[k - 1];
      CHECK(rec.energy <= prev.energy + 1e-6 * (1 + std::abs(rec.energy)) * (rec.t - prev.t));
    }
  }
  CHECK(std::isfinite(sup));
}

TEST_CASE("step budget exhaustion is a solver failure") {
  const auto mesh = quarter(8, 8);
  SchemeConfig scheme;
  scheme.dt0 = 1e-3;
  scheme.dt_max = 1e-3;
  scheme.max_steps = 3;
  scheme.t_end = 1.0;
  const auto out = ks::simulate(ks::make_state(Field(mesh, 1.0), Field(mesh, 1.0), scheme), scheme);
  CHECK(out.kind == ks::OutcomeKind::SolverFailure);
  CHECK(out.failure_reason.find("budget") != std::string::npos);
}

TEST_CASE("snapshot times are hit exactly") {
  const auto mesh = quarter(8, 8);
  SchemeConfig scheme;
  scheme.dt0 = 0.03;
  scheme.t_end = 0.5;
  ks::RunControls controls;
  controls.snapshot_interval = 0.1;
  std::vector<double> times;
  controls.on_snapshot = [&](const ks::SimState& s) { times.push_back(s.t); };
  const auto u0 = centered_gaussian(mesh, 0.5, 1.0);
  ks::simulate(ks::make_state(u0, stationary(u0), scheme), scheme, controls);
  REQUIRE(times.size() == 6);
  for (std::size_t k = 0; k < times.size(); ++k) CHECK(times[k] == doctest::Approx(0.1 * k).epsilon(1e-14));
}

TEST_CASE("invalid schemes are rejected") {
  SchemeConfig s;
  s.dt0 = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_FALSE(s.problems().empty());
  SchemeConfig ok;
  CHECK(ok.problems().empty());
}

TEST_CASE("diagnostics CSV") {
  std::ostringstream os;
  ks::write_csv_header(os);
  CHECK(os.str() == "t,dt,mass_u,mass_v,linf_u,energy,vmean,ext_quantity,argmax_r,argmax_phi\n");
  std::ostringstream row;
  auto rec = record(3, 2.5, 1e-3);
  rec.t = 1.0 / 3.0;
  ks::write_csv_row(row, rec);
  const auto line = row.str();
  CHECK(std::count(line.begin(), line.end(), ',') == 9);
  CHECK(line.find("0.33333333333333331") != std::string::npos);
}
