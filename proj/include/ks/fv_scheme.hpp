#ifndef KS_FV_SCHEME_HPP
#define KS_FV_SCHEME_HPP

#include <span>
#include <vector>

#include "ks/geometry.hpp"

namespace ks {

/// Bernoulli function B(x) = x / (e^x - 1), B(0) = 1.
double bernoulli(double x);

struct LinearSolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = true;
};

struct SubstepResult {
  std::vector<double> values;
  LinearSolveStats stats;
  /// mass removed by cutting negative solver output to zero (density step only)
  double clipped_mass = 0.0;
};

struct ImplicitOptions {
  double dt = 1e-3;
  /// weight of the new time level, 1 = backward Euler, 1/2 = Crank-Nicolson
  double theta_scheme = 1.0;
  double linear_tol = 1e-10;
  int max_iterations = 20000;
};

/// One step of v_t = Lap v - v + u with u frozen, zero-flux boundaries.
///
/// The linear system (A/dt + theta (K + A)) v = rhs is SPD (K the two-point
/// Laplacian stiffness, A the cell areas) and is solved by Jacobi-PCG. The
/// solution is shifted by a constant so that the discrete balance for int v
/// holds to round-off whatever the solver residual.
SubstepResult advance_signal(const SectorMesh& mesh, std::span<const double> v_old,
                             std::span<const double> u_source, const ImplicitOptions& opt);

/// One step of u_t = div(grad u - u grad v) with v frozen, zero-flux boundaries.
///
/// Face fluxes are Scharfetter-Gummel. Written for the Slotboom variable
/// w = u e^{-v}, the face coefficient e^{v_R} B(v_R - v_L) is symmetric in
/// the two cells, so the implicit system is an SPD M-matrix. Solver output is
/// clipped at zero and rescaled to the incoming mass, which removes the
/// residual-sized mass leak of the iterative solve.
SubstepResult advance_density(const SectorMesh& mesh, std::span<const double> u_old,
                              std::span<const double> v, const ImplicitOptions& opt);

/// Solves the stationary signal equation -Lap v + v = u with zero-flux
/// boundaries, (K + A) v = A u.
SubstepResult stationary_signal(const SectorMesh& mesh, std::span<const double> u, double linear_tol = 1e-12,
                                int max_iterations = 20000);

/// Net outflow of the Scharfetter-Gummel flux from every cell for density u
/// in potential v (positive = mass leaving the cell).
std::vector<double> sg_net_outflow(const SectorMesh& mesh, std::span<const double> u,
                                   std::span<const double> v);

}  // namespace ks

#endif  // KS_FV_SCHEME_HPP
