#ifndef KS_FIELDS_HPP
#define KS_FIELDS_HPP

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "ks/geometry.hpp"

namespace ks {

using MeshPtr = std::shared_ptr<const SectorMesh>;

inline MeshPtr make_mesh(const DomainSpec& domain, int nr, int nphi, double grading = 1.0) {
  return std::make_shared<const SectorMesh>(domain, nr, nphi, grading);
}

/// Cell-averaged scalar on a SectorMesh. Copies share the mesh, not the values.
class Field {
 public:
  Field(MeshPtr mesh, double value);
  Field(MeshPtr mesh, std::vector<double> values);

  /// Samples `fn(r, phi)` at every cell center.
  static Field sample(MeshPtr mesh, const std::function<double(double, double)>& fn);

  const SectorMesh& mesh() const { return *mesh_; }
  const MeshPtr& mesh_ptr() const { return mesh_; }
  std::size_t size() const { return values_.size(); }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  bool same_mesh(const Field& other) const { return mesh_ == other.mesh_; }
  bool is_nonnegative() const;

  Field& operator*=(double s);
  Field& operator+=(double c);

 private:
  MeshPtr mesh_;
  std::vector<double> values_;
};

/// Values below this are treated as zero inside logarithms (0 ln 0 = 0).
inline constexpr double kLogFloor = 1e-300;

/// s * ln(s) with the 0 ln 0 = 0 convention.
double xlogx(double s);

double mass(const Field& f);
double entropy(const Field& u);
/// Two-point face approximation of the Dirichlet integral of |grad f|^2.
double dirichlet_energy(const Field& f);
/// Lyapunov functional: int u ln u - int uv + 1/2 int v^2 + 1/2 int |grad v|^2.
double energy(const Field& u, const Field& v);

struct ArgMax {
  double value = 0.0;
  int cell = 0;
  PolarPoint location;
};

/// Maximum cell value; ties go to the lowest cell index.
ArgMax argmax(const Field& f);
double min_value(const Field& f);

/// Trudinger-Moser gap
///   G(phi) = ln int e^|phi| - 1/(8 theta_eff) int |grad phi|^2 - 1/|Omega| int |phi|,
/// evaluated with a max-shifted exponential sum so peaked phi never overflows.
double tm_gap(const Field& phi, double theta_eff);

struct EntropyBound {
  double mass = 0.0;
  /// (1+eta) int uv - int u ln u
  double lhs = 0.0;
  /// m ln(1/m) + 1/2 int |grad v|^2 + (1+eta) m/|Omega| int v, i.e. the bound without m ln C
  double rhs = 0.0;
  /// lhs - rhs, which the inequality caps by m ln C_Omega
  double excess() const { return lhs - rhs; }
};

/// Requires (1+eta) m / (8 theta_eff) < 1/2; throws std::invalid_argument otherwise.
EntropyBound entropy_bound_check(const Field& u, const Field& v, double theta_eff, double eta);

/// Returns f scaled to carry exactly `target` mass. Throws if mass(f) <= 0 or target <= 0.
Field normalize_to_mass(const Field& f, double target);

struct FunctionalReport {
  double mass_u = 0.0;
  double mass_v = 0.0;
  double entropy = 0.0;
  double energy = 0.0;
  double tm_gap = 0.0;
  double linf_u = 0.0;
  PolarPoint argmax_location;
};

/// tm_gap is evaluated on v.
FunctionalReport report(const Field& u, const Field& v, double theta_eff);

/// Snapshot: header `# theta R nr nphi t`, then rows `i r phi u v`.
void write_snapshot(std::ostream& os, const Field& u, const Field& v, double t);

struct Snapshot {
  DomainSpec domain;
  int nr = 0;
  int nphi = 0;
  double t = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

Snapshot read_snapshot(std::istream& is);

}  // namespace ks

#endif  // KS_FIELDS_HPP
