#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "ks/radial1d.hpp"
#include "ks/solver2d.hpp"

using ks::SchemeConfig;
using std::numbers::pi;

namespace {

ks::RadialProfile constant_profile(const ks::RadialGridPtr& grid, double u, double v) {
  ks::RadialProfile p;
  p.grid = grid;
  p.u.assign(static_cast<std::size_t>(grid->nr), u);
  p.v.assign(static_cast<std::size_t>(grid->nr), v);
  return p;
}

}  // namespace

TEST_CASE("radial grid matches the sector radial edges") {
  const auto grid = ks::make_radial_grid(1.5, 40, 1.06);
  const auto edges = ks::graded_radial_edges(1.5, 40, 1.06);
  REQUIRE(grid->edges.size() == edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) CHECK(grid->edges[k] == edges[k]);
  double total = 0.0;
  for (double v : grid->volumes) total += v;
  CHECK(total == doctest::Approx(pi * 1.5 * 1.5).epsilon(1e-14));
  CHECK(grid->disc_area() == doctest::Approx(pi * 2.25));
  CHECK(grid->transmissibility.size() == 39);
  CHECK_THROWS_AS(ks::make_radial_grid(1.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(ks::make_radial_grid(1.0, 16, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(ks::make_radial_grid(0.0, 16), std::invalid_argument);
}

TEST_CASE("radial constant equilibria are exact") {
  const auto grid = ks::make_radial_grid(1.0, 64, 1.05);
  for (double c : {1e-3, 1.0, 1e3}) {
    SchemeConfig scheme;
    scheme.dt0 = 0.01;
    scheme.t_end = 0.3;
    const auto out = ks::simulate_radial(constant_profile(grid, c, c), scheme);
    CHECK(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
    for (std::size_t i = 0; i < out.u_final.size(); ++i) {
      CHECK(std::abs(out.u_final[i] - c) <= 1e-14 * c);
      CHECK(std::abs(out.v_final[i] - c) <= 1e-14 * c);
    }
  }
}

TEST_CASE("radial zero density decays the signal") {
  const auto grid = ks::make_radial_grid(1.0, 32);
  SchemeConfig scheme;
  scheme.dt0 = 1e-3;
  scheme.dt_max = 1e-3;
  scheme.t_end = 1.0;
  const auto out = ks::simulate_radial(constant_profile(grid, 0.0, 1.0), scheme);
  const double ratio = out.trajectory.back().mass_v / out.trajectory.front().mass_v;
  CHECK(std::abs(ratio - std::exp(-1.0)) <= 1e-3);
}

TEST_CASE("blow-up candidate carries the requested disc mass") {
  const auto p = ks::make_blowup_candidate(30.0, 0.2, 1.0);
  CHECK(ks::disc_mass(*p.grid, p.u) == doctest::Approx(30.0).epsilon(1e-12));
  CHECK(p.grid->nr == 256);
  const auto flat = ks::make_blowup_candidate(8 * pi, 1e3, 1.0);
  for (double u : flat.u) CHECK(u == doctest::Approx(8.0).epsilon(1e-5));
  ks::BlowupCandidateOptions zero;
  zero.signal = ks::SignalInit::Zero;
  for (double v : ks::make_blowup_candidate(4 * pi, 0.3, 1.0, zero).v) CHECK(v == 0.0);
  CHECK_THROWS(ks::make_blowup_candidate(-1.0, 0.2, 1.0));
}

TEST_CASE("quasi-stationary signal of a constant is that constant") {
  const auto grid = ks::make_radial_grid(1.0, 48, 1.04);
  const std::vector<double> u(48, 2.5);
  for (double v : ks::quasi_stationary_signal(*grid, u)) CHECK(v == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("restriction to a sector") {
  const auto mesh = ks::make_mesh({pi / 2, 1.0}, 32, 8, 1.05);
  SUBCASE("constant profile") {
    const auto grid = ks::make_radial_grid(1.0, 64, 1.05);
    const auto p = constant_profile(grid, 3.0, 1.0);
    const auto [u, v] = ks::restrict_to_sector(p, pi / 2, mesh);
    for (std::size_t i = 0; i < u.size(); ++i) {
      CHECK(u[i] == doctest::Approx(3.0).epsilon(1e-13));
      CHECK(v[i] == doctest::Approx(1.0).epsilon(1e-13));
    }
    CHECK(ks::mass(u) == doctest::Approx(ks::disc_mass(*grid, p.u) / 4).epsilon(1e-13));
  }
  SUBCASE("concentrated profile is constant in phi and carries a quarter of the mass") {
    const auto p = ks::make_blowup_candidate(12 * pi, 0.2, 1.0);
    const auto [u, v] = ks::restrict_to_sector(p, pi / 2, mesh);
    CHECK(ks::mass(u) == doctest::Approx(3 * pi).epsilon(1e-12));
    for (int i = 0; i < mesh->nr(); ++i) {
      for (int j = 1; j < mesh->nphi(); ++j) {
        CHECK(u[static_cast<std::size_t>(mesh->cell_index(i, j))] == u[static_cast<std::size_t>(mesh->cell_index(i, 0))]);
        CHECK(v[static_cast<std::size_t>(mesh->cell_index(i, j))] == v[static_cast<std::size_t>(mesh->cell_index(i, 0))]);
      }
    }
  }
  SUBCASE("mismatched radius or angle is rejected") {
    const auto p = ks::make_blowup_candidate(4 * pi, 0.2, 2.0);
    CHECK_THROWS_AS(ks::restrict_to_sector(p, pi / 2, mesh), std::invalid_argument);
    const auto q = ks::make_blowup_candidate(4 * pi, 0.2, 1.0);
    CHECK_THROWS_AS(ks::restrict_to_sector(q, pi / 3, mesh), std::invalid_argument);
  }
}

TEST_CASE("sector run on the radial grid reproduces the radial run") {
  const int nr = 32;
  const double g = 1.05;
  ks::BlowupCandidateOptions opts;
  opts.nr = nr;
  opts.grading = g;
  const auto p = ks::make_blowup_candidate(4 * pi, 0.3, 1.0, opts);
  const auto mesh = ks::make_mesh({pi / 2, 1.0}, nr, 4, g);
  const auto [u0, v0] = ks::restrict_to_sector(p, pi / 2, mesh);
  SchemeConfig scheme;
  scheme.dt0 = 1e-4;
  scheme.dt_max = 1e-4;
  scheme.t_end = 0.02;
  scheme.linear_tol = 1e-13;
  const auto sector = ks::simulate(ks::make_state(u0, v0, scheme), scheme);
  const auto radial = ks::simulate_radial(p, scheme);
  REQUIRE(sector.kind == ks::OutcomeKind::GlobalUpToHorizon);
  REQUIRE(radial.kind == ks::OutcomeKind::GlobalUpToHorizon);
  CHECK(sector.trajectory.back().step == radial.trajectory.back().step);
  for (int i = 0; i < nr; ++i) {
    const double ur = radial.u_final[static_cast<std::size_t>(i)];
    for (int j = 0; j < 4; ++j) {
      CHECK(sector.u_final[static_cast<std::size_t>(mesh->cell_index(i, j))] == doctest::Approx(ur).epsilon(1e-8));
    }
  }
}

TEST_CASE("radial runs conserve mass and keep positivity") {
  ks::BlowupCandidateOptions opts;
  opts.nr = 128;
  opts.grading = 1.05;
  const auto p = ks::make_blowup_candidate(6 * pi, 0.2, 1.0, opts);
  SchemeConfig scheme;
  scheme.dt0 = 1e-5;
  scheme.t_end = 2.0;
  const auto out = ks::simulate_radial(p, scheme);
  CHECK(out.kind == ks::OutcomeKind::GlobalUpToHorizon);
  const double m0 = out.trajectory.front().mass_u;
  for (const auto& rec : out.trajectory) {
    CHECK(std::abs(rec.mass_u - m0) / m0 < 1e-11);
    CHECK(rec.min_u >= 0.0);
    CHECK(rec.argmax_phi == 0.0);
  }
}

TEST_CASE("radial supercritical data blows up at the center") {
  ks::BlowupCandidateOptions opts;
  opts.nr = 128;
  opts.grading = 1.05;
  const auto p = ks::make_blowup_candidate(1.2 * 8 * pi, 0.05, 1.0, opts);
  SchemeConfig scheme;
  scheme.dt0 = 1e-6;
  scheme.t_end = 5.0;
  const auto out = ks::simulate_radial(p, scheme);
  CHECK(out.kind == ks::OutcomeKind::BlowUp);
  CHECK(out.blowup_location.r < 0.05);
}

TEST_CASE("radial_value_at interpolates linearly between centers") {
  const auto grid = ks::make_radial_grid(1.0, 8);
  std::vector<double> values;
  for (double c : grid->centers) values.push_back(2.0 * c + 1.0);
  CHECK(ks::radial_value_at(*grid, values, 0.5) == doctest::Approx(2.0));
  CHECK(ks::radial_value_at(*grid, values, 0.0) == doctest::Approx(values.front()));
  CHECK(ks::radial_value_at(*grid, values, 1.0) == doctest::Approx(values.back()));
}

TEST_CASE("profile output") {
  const auto p = ks::make_blowup_candidate(4 * pi, 0.3, 1.0, {16, 1.0, ks::SignalInit::Zero, 0.0});
  std::ostringstream os;
  ks::write_profile(os, p);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line.rfind("#", 0) == 0);
  int rows = 0;
  while (std::getline(is, line)) rows += line.empty() ? 0 : 1;
  CHECK(rows == 16);
}
