#ifndef KS_GEOMETRY_HPP
#define KS_GEOMETRY_HPP

#include <iosfwd>
#include <numbers>
#include <span>
#include <vector>

namespace ks {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Circular sector {0 < r < radius, 0 < phi < theta}. theta == 2*pi is the full disc.
struct DomainSpec {
  double theta = std::numbers::pi / 2.0;
  double radius = 1.0;

  bool is_disc() const { return theta == kTwoPi; }
  double area() const { return 0.5 * theta * radius * radius; }

  /// Throws std::invalid_argument when theta is outside (0, 2pi] or radius <= 0.
  void validate() const;

  bool operator==(const DomainSpec&) const = default;
};

enum class BoundaryTag { RadialEdgeLow, RadialEdgeHigh, Arc };

const char* to_string(BoundaryTag tag);

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct PolarPoint {
  double r = 0.0;
  double phi = 0.0;
};

/// Face shared by two cells; `normal` points from `left` into `right`.
struct InteriorFace {
  int left = 0;
  int right = 0;
  double length = 0.0;
  /// Distance between the two cell centers measured along the polar metric
  /// (radial gap for radial faces, arc length r * dphi for angular faces).
  double distance = 0.0;
  Vec2 normal;

  double transmissibility() const { return length / distance; }
};

struct BoundaryFace {
  int cell = 0;
  BoundaryTag tag = BoundaryTag::Arc;
  double length = 0.0;
};

/// Radial cell edges 0 = r_0 < r_1 < ... < r_nr = radius. Consecutive widths
/// grow by the factor `grading`, so cells refine toward the vertex.
std::vector<double> graded_radial_edges(double radius, int nr, double grading);

/// Structured polar finite-volume mesh of a sector or disc.
///
/// Cells are annular wedges indexed ring-major: cell(ir, jphi) = ir * nphi + jphi.
/// The vertex r = 0 is a corner of every innermost cell and never a degree of
/// freedom. Immutable after construction.
class SectorMesh {
 public:
  SectorMesh(DomainSpec domain, int nr, int nphi, double grading);

  const DomainSpec& domain() const { return domain_; }
  int nr() const { return nr_; }
  int nphi() const { return nphi_; }
  double grading() const { return grading_; }
  int cell_count() const { return nr_ * nphi_; }
  int cell_index(int ir, int jphi) const { return ir * nphi_ + jphi; }
  int ring_of(int cell) const { return cell / nphi_; }
  double dphi() const { return dphi_; }

  std::span<const double> radial_edges() const { return radial_edges_; }
  std::span<const double> cell_area() const { return cell_area_; }
  std::span<const PolarPoint> cell_centers() const { return cell_centers_; }
  std::span<const InteriorFace> interior_faces() const { return interior_faces_; }
  std::span<const BoundaryFace> boundary_faces() const { return boundary_faces_; }

  double total_area() const;
  double max_face_length() const;
  double min_center_distance() const;

 private:
  DomainSpec domain_;
  int nr_;
  int nphi_;
  double grading_;
  double dphi_;
  std::vector<double> radial_edges_;
  std::vector<double> cell_area_;
  std::vector<PolarPoint> cell_centers_;
  std::vector<InteriorFace> interior_faces_;
  std::vector<BoundaryFace> boundary_faces_;
};

/// Throws std::invalid_argument on nr < 2, nphi < 2, grading < 1 or an invalid domain.
SectorMesh build_sector_mesh(const DomainSpec& domain, int nr, int nphi, double grading = 1.0);

/// Smallest interior angle of the sector boundary: min(theta, pi/2) for a
/// genuine sector (the arc meets the straight edges at right angles) and pi
/// for the disc, which has no corners.
double min_interior_angle(const DomainSpec& domain);

/// Plain-text dump: a header with theta, R, nr, nphi, grading followed by one
/// row per cell (index, r-center, phi-center, area).
void write_mesh_summary(std::ostream& os, const SectorMesh& mesh);

}  // namespace ks

#endif  // KS_GEOMETRY_HPP
