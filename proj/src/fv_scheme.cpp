#include "ks/fv_scheme.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>

namespace ks {

double bernoulli(double x) {
  if (std::abs(x) < 1e-5) return 1.0 - x / 2.0 + x * x / 12.0;
  return x / std::expm1(x);
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

LinearSolveStats solve_spd(const SpMat& a, const Vec& b, Vec& x, const ImplicitOptions& opt) {
  Eigen::ConjugateGradient<SpMat, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  cg.setTolerance(opt.linear_tol);
  cg.setMaxIterations(opt.max_iterations);
  cg.compute(a);
  x = cg.solveWithGuess(b, x);
  LinearSolveStats stats;
  stats.iterations = static_cast<int>(cg.iterations());
  stats.relative_residual = cg.error();
  stats.converged = cg.info() == Eigen::Success && x.allFinite();
  return stats;
}

/// Assembles diag + sum_f coeff_f (e_L - e_R)(e_L - e_R)^T.
SpMat assemble(const SectorMesh& mesh, const std::vector<double>& diag, const std::vector<double>& face_coeff) {
  std::vector<Eigen::Triplet<double>> trip;
  const auto faces = mesh.interior_faces();
  trip.reserve(diag.size() + 4 * faces.size());
  for (std::size_t i = 0; i < diag.size(); ++i) {
    trip.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
  }
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const int l = faces[k].left;
    const int r = faces[k].right;
    const double c = face_coeff[k];
    trip.emplace_back(l, l, c);
    trip.emplace_back(r, r, c);
    trip.emplace_back(l, r, -c);
    trip.emplace_back(r, l, -c);
  }
  const auto n = static_cast<Eigen::Index>(diag.size());
  SpMat a(n, n);
  a.setFromTriplets(trip.begin(), trip.end());
  return a;
}

/// out_i = sum over faces of coeff_f (x_i - x_j), the net outflow for a
/// symmetric two-point flux.
std::vector<double> net_outflow(const SectorMesh& mesh, const std::vector<double>& face_coeff,
                                std::span<const double> x) {
  std::vector<double> out(x.size(), 0.0);
  const auto faces = mesh.interior_faces();
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const auto l = static_cast<std::size_t>(faces[k].left);
    const auto r = static_cast<std::size_t>(faces[k].right);
    const double flux = face_coeff[k] * (x[l] - x[r]);
    out[l] += flux;
    out[r] -= flux;
  }
  return out;
}

}  // namespace

SubstepResult advance_signal(const SectorMesh& mesh, std::span<const double> v_old,
                             std::span<const double> u_source, const ImplicitOptions& opt) {
  const auto area = mesh.cell_area();
  const auto faces = mesh.interior_faces();
  const std::size_t n = area.size();
  const double th = opt.theta_scheme;
  const double dt = opt.dt;

  std::vector<double> trans(faces.size());
  std::transform(faces.begin(), faces.end(), trans.begin(),
                 [](const InteriorFace& f) { return f.transmissibility(); });

  const auto k_old = net_outflow(mesh, trans, v_old);
  std::vector<double> diag(n);
  Vec rhs(static_cast<Eigen::Index>(n));
  Vec x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = area[i] * (1.0 / dt + th);
    rhs[static_cast<Eigen::Index>(i)] =
        area[i] * (v_old[i] / dt + u_source[i] - (1.0 - th) * v_old[i]) - (1.0 - th) * k_old[i];
    x[static_cast<Eigen::Index>(i)] = v_old[i];
  }
  std::vector<double> coeff(trans.size());
  std::transform(trans.begin(), trans.end(), coeff.begin(), [th](double t) { return th * t; });
  const SpMat a = assemble(mesh, diag, coeff);

  SubstepResult res;
  res.stats = solve_spd(a, rhs, x, opt);

  // A uniform shift restores the discrete balance
  // (1/dt + th) int v1 = (1/dt - (1 - th)) int v0 + int u
  // that the solver residual perturbs.
  double total_area = 0.0;
  double v_old_mass = 0.0;
  double u_mass = 0.0;
  double v_new_mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total_area += area[i];
    v_old_mass += area[i] * v_old[i];
    u_mass += area[i] * u_source[i];
    v_new_mass += area[i] * x[static_cast<Eigen::Index>(i)];
  }
  const double target = ((1.0 / dt - (1.0 - th)) * v_old_mass + u_mass) / (1.0 / dt + th);
  const double shift = (target - v_new_mass) / total_area;
  res.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) res.values[i] = x[static_cast<Eigen::Index>(i)] + shift;
  return res;
}

SubstepResult stationary_signal(const SectorMesh& mesh, std::span<const double> u, double linear_tol,
                                int max_iterations) {
  const auto area = mesh.cell_area();
  const auto faces = mesh.interior_faces();
  const std::size_t n = area.size();
  std::vector<double> trans(faces.size());
  std::transform(faces.begin(), faces.end(), trans.begin(),
                 [](const InteriorFace& f) { return f.transmissibility(); });
  std::vector<double> diag(area.begin(), area.end());
  Vec rhs(static_cast<Eigen::Index>(n));
  Vec x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    rhs[static_cast<Eigen::Index>(i)] = area[i] * u[i];
    x[static_cast<Eigen::Index>(i)] = u[i];
  }
  ImplicitOptions opt;
  opt.linear_tol = linear_tol;
  opt.max_iterations = max_iterations;
  SubstepResult res;
  res.stats = solve_spd(assemble(mesh, diag, trans), rhs, x, opt);
  res.values.assign(x.data(), x.data() + static_cast<Eigen::Index>(n));
  return res;
}

std::vector<double> sg_net_outflow(const SectorMesh& mesh, std::span<const double> u,
                                   std::span<const double> v) {
  std::vector<double> out(u.size(), 0.0);
  for (const auto& f : mesh.interior_faces()) {
    const auto l = static_cast<std::size_t>(f.left);
    const auto r = static_cast<std::size_t>(f.right);
    const double psi = v[r] - v[l];
    const double flux = f.transmissibility() * (bernoulli(-psi) * u[l] - bernoulli(psi) * u[r]);
    out[l] += flux;
    out[r] -= flux;
  }
  return out;
}

SubstepResult advance_density(const SectorMesh& mesh, std::span<const double> u_old,
                              std::span<const double> v, const ImplicitOptions& opt) {
  const auto area = mesh.cell_area();
  const auto faces = mesh.interior_faces();
  const std::size_t n = area.size();
  const double th = opt.theta_scheme;
  const double dt = opt.dt;

  // Slotboom weights e^{v - vmax} stay in (0, 1].
  const double vmax = *std::max_element(v.begin(), v.end());
  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = std::exp(v[i] - vmax);

  std::vector<double> coeff(faces.size());
  for (std::size_t k = 0; k < faces.size(); ++k) {
    const auto l = static_cast<std::size_t>(faces[k].left);
    const auto r = static_cast<std::size_t>(faces[k].right);
    coeff[k] = faces[k].transmissibility() * weight[r] * bernoulli(v[r] - v[l]);
  }

  std::vector<double> explicit_part(n, 0.0);
  if (th < 1.0) explicit_part = sg_net_outflow(mesh, u_old, v);

  std::vector<double> diag(n);
  Vec rhs(static_cast<Eigen::Index>(n));
  Vec x(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    diag[i] = area[i] * weight[i] / dt;
    rhs[static_cast<Eigen::Index>(i)] = area[i] * u_old[i] / dt - (1.0 - th) * explicit_part[i];
    x[static_cast<Eigen::Index>(i)] = u_old[i] / weight[i];
  }
  std::vector<double> implicit_coeff(coeff.size());
  std::transform(coeff.begin(), coeff.end(), implicit_coeff.begin(), [th](double c) { return th * c; });
  const SpMat a = assemble(mesh, diag, implicit_coeff);

  SubstepResult res;
  res.stats = solve_spd(a, rhs, x, opt);

  // Negative entries can only come from the iterative solve; they are cut off
  // and the density is rescaled to the incoming mass.
  res.values.resize(n);
  double mass_old = 0.0;
  double mass_new = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = weight[i] * x[static_cast<Eigen::Index>(i)];
    if (ui < 0.0) res.clipped_mass += -ui * area[i];
    res.values[i] = std::max(ui, 0.0);
    mass_old += area[i] * u_old[i];
    mass_new += area[i] * res.values[i];
  }
  if (mass_new > 0.0 && mass_new != mass_old) {
    const double s = mass_old / mass_new;
    for (auto& ui : res.values) ui *= s;
  }
  return res;
}

}  // namespace ks
