#ifndef KS_RADIAL1D_HPP
#define KS_RADIAL1D_HPP

#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "ks/fields.hpp"
#include "ks/run_control.hpp"

namespace ks {

/// Annular cells of the disc B_R(0), graded toward r = 0 exactly like the
/// radial direction of SectorMesh.
struct RadialGrid {
  double radius = 1.0;
  int nr = 0;
  double grading = 1.0;
  std::vector<double> edges;    // nr + 1
  std::vector<double> centers;  // midpoints
  std::vector<double> volumes;  // pi (r_{i+1}^2 - r_i^2)
  /// 2 pi r_{i+1} / (c_{i+1} - c_i) for the nr - 1 interior faces
  std::vector<double> transmissibility;

  double disc_area() const;
};

using RadialGridPtr = std::shared_ptr<const RadialGrid>;

/// Throws std::invalid_argument for nr < 4, grading < 1 or radius <= 0.
RadialGridPtr make_radial_grid(double radius, int nr, double grading = 1.0);

/// Radially symmetric state (u(r), v(r)) on the full disc.
struct RadialProfile {
  RadialGridPtr grid;
  std::vector<double> u;
  std::vector<double> v;
  double t = 0.0;
  double dt = 0.0;
  long step_count = 0;
  double last_linf_u = 0.0;
  double vt_squared_integral = 0.0;
};

/// sum of u * annulus area
double disc_mass(const RadialGrid& grid, const std::vector<double>& values);

/// One step of the radial system with the same decoupled structure as the
/// sector solver (implicit signal, then implicit Scharfetter-Gummel density),
/// solved directly with tridiagonal eliminations. Throws StepFailure.
RadialProfile radial_step(const RadialProfile& profile, const SchemeConfig& scheme);

DtChoice radial_adapt_dt(const RadialProfile& profile, const SchemeConfig& scheme);

/// Diagnostics for the disc; argmax_phi is always 0.
DiagnosticsRecord radial_diagnose(const RadialProfile& profile);

using RadialRunControls = BasicRunControls<RadialProfile>;

RunOutcome simulate_radial(RadialProfile initial, const SchemeConfig& scheme,
                           const RadialRunControls& controls = {});

/// Solves -v'' - v'/r + v = u on the disc with zero flux at r = R.
std::vector<double> quasi_stationary_signal(const RadialGrid& grid, const std::vector<double>& u);

enum class SignalInit { QuasiStationary, Zero, Constant };

struct BlowupCandidateOptions {
  int nr = 256;
  double grading = 1.0;
  SignalInit signal = SignalInit::QuasiStationary;
  double signal_constant = 0.0;
};

/// u0 = Gaussian exp(-r^2 / concentration^2) normalised to `disc_mass` over
/// B_R(0); v0 per options (default: the quasi-stationary signal of u0).
RadialProfile make_blowup_candidate(double disc_mass, double concentration, double radius,
                                    const BlowupCandidateOptions& options = {});

/// Samples the profile at the sector cell radii (monotone cubic interpolation
/// between radial cell centers, constant beyond the first and last center) and
/// rescales u to carry theta/(2 pi) of the disc mass. The result is constant in
/// phi. Throws std::invalid_argument when the radii or angles disagree.
std::pair<Field, Field> restrict_to_sector(const RadialProfile& profile, double theta, const MeshPtr& mesh);

/// Linear interpolation of radial cell values at radius r (constant outside
/// the center range); used to compare sector fields against a radial run.
double radial_value_at(const RadialGrid& grid, const std::vector<double>& values, double r);

/// Rows `r u v`, preceded by a `# R nr t` comment line.
void write_profile(std::ostream& os, const RadialProfile& profile);

}  // namespace ks

#endif  // KS_RADIAL1D_HPP
