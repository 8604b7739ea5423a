#include "ks/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ks {

void DomainSpec::validate() const {
  if (!(theta > 0.0) || theta > kTwoPi) {
    throw std::invalid_argument("theta must lie in (0, 2*pi], got " + std::to_string(theta));
  }
  if (!(radius > 0.0)) {
    throw std::invalid_argument("radius must be positive, got " + std::to_string(radius));
  }
}

const char* to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::RadialEdgeLow:
      return "RadialEdgeLow";
    case BoundaryTag::RadialEdgeHigh:
      return "RadialEdgeHigh";
    case BoundaryTag::Arc:
      return "Arc";
  }
  return "?";
}

std::vector<double> graded_radial_edges(double radius, int nr, double grading) {
  std::vector<double> edges(static_cast<std::size_t>(nr) + 1, 0.0);
  // widths w_i = w_0 * grading^i, normalised so that they sum to radius
  std::vector<double> widths(static_cast<std::size_t>(nr));
  double w = 1.0;
  double total = 0.0;
  for (auto& wi : widths) {
    wi = w;
    total += w;
    w *= grading;
  }
  double acc = 0.0;
  for (int i = 0; i < nr; ++i) {
    acc += widths[static_cast<std::size_t>(i)];
    edges[static_cast<std::size_t>(i) + 1] = radius * (acc / total);
  }
  edges.back() = radius;
  return edges;
}

SectorMesh::SectorMesh(DomainSpec domain, int nr, int nphi, double grading)
    : domain_(domain), nr_(nr), nphi_(nphi), grading_(grading) {
  domain_.validate();
  if (nr < 2) throw std::invalid_argument("nr must be >= 2");
  if (nphi < 2) throw std::invalid_argument("nphi must be >= 2");
  if (!(grading >= 1.0) || !std::isfinite(grading)) {
    throw std::invalid_argument("grading must be >= 1");
  }

  dphi_ = domain_.theta / nphi_;
  radial_edges_ = graded_radial_edges(domain_.radius, nr_, grading_);

  const auto ncell = static_cast<std::size_t>(cell_count());
  cell_area_.resize(ncell);
  cell_centers_.resize(ncell);
  std::vector<double> rc(static_cast<std::size_t>(nr_));
  for (int i = 0; i < nr_; ++i) {
    const double r0 = radial_edges_[static_cast<std::size_t>(i)];
    const double r1 = radial_edges_[static_cast<std::size_t>(i) + 1];
    rc[static_cast<std::size_t>(i)] = 0.5 * (r0 + r1);
    const double area = 0.5 * (r1 * r1 - r0 * r0) * dphi_;
    for (int j = 0; j < nphi_; ++j) {
      const auto c = static_cast<std::size_t>(cell_index(i, j));
      cell_area_[c] = area;
      cell_centers_[c] = {rc[static_cast<std::size_t>(i)], (j + 0.5) * dphi_};
    }
  }

  const bool periodic = domain_.is_disc();
  for (int i = 0; i < nr_; ++i) {
    const double r0 = radial_edges_[static_cast<std::size_t>(i)];
    const double r1 = radial_edges_[static_cast<std::size_t>(i) + 1];
    const double dr = r1 - r0;
    for (int j = 0; j < nphi_; ++j) {
      const int c = cell_index(i, j);
      const double phi_mid = (j + 0.5) * dphi_;
      // radial face toward the next ring
      if (i + 1 < nr_) {
        InteriorFace f;
        f.left = c;
        f.right = cell_index(i + 1, j);
        f.length = r1 * dphi_;
        f.distance = rc[static_cast<std::size_t>(i) + 1] - rc[static_cast<std::size_t>(i)];
        f.normal = {std::cos(phi_mid), std::sin(phi_mid)};
        interior_faces_.push_back(f);
      } else {
        boundary_faces_.push_back({c, BoundaryTag::Arc, r1 * dphi_});
      }
      // angular face toward the next wedge
      const double phi_face = (j + 1) * dphi_;
      if (j + 1 < nphi_ || periodic) {
        InteriorFace f;
        f.left = c;
        f.right = cell_index(i, (j + 1) % nphi_);
        f.length = dr;
        f.distance = rc[static_cast<std::size_t>(i)] * dphi_;
        f.normal = {-std::sin(phi_face), std::cos(phi_face)};
        interior_faces_.push_back(f);
      } else {
        boundary_faces_.push_back({c, BoundaryTag::RadialEdgeHigh, dr});
      }
      if (j == 0 && !periodic) {
        boundary_faces_.push_back({c, BoundaryTag::RadialEdgeLow, dr});
      }
    }
  }
}

double SectorMesh::total_area() const {
  double sum = 0.0;
  for (double a : cell_area_) sum += a;
  return sum;
}

double SectorMesh::max_face_length() const {
  double m = 0.0;
  for (const auto& f : interior_faces_) m = std::max(m, f.length);
  for (const auto& f : boundary_faces_) m = std::max(m, f.length);
  return m;
}

double SectorMesh::min_center_distance() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& f : interior_faces_) m = std::min(m, f.distance);
  return m;
}

SectorMesh build_sector_mesh(const DomainSpec& domain, int nr, int nphi, double grading) {
  return SectorMesh(domain, nr, nphi, grading);
}

double min_interior_angle(const DomainSpec& domain) {
  domain.validate();
  if (domain.is_disc()) return std::numbers::pi;
  return std::min(domain.theta, std::numbers::pi / 2.0);
}

void write_mesh_summary(std::ostream& os, const SectorMesh& mesh) {
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  os << "# theta " << mesh.domain().theta << '\n'
     << "# R " << mesh.domain().radius << '\n'
     << "# nr " << mesh.nr() << '\n'
     << "# nphi " << mesh.nphi() << '\n'
     << "# grading " << mesh.grading() << '\n'
     << "# total_area " << mesh.total_area() << '\n'
     << "# index r phi area\n";
  const auto centers = mesh.cell_centers();
  const auto area = mesh.cell_area();
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const auto k = static_cast<std::size_t>(c);
    os << c << ' ' << centers[k].r << ' ' << centers[k].phi << ' ' << area[k] << '\n';
  }
  os.precision(old_precision);
}

}  // namespace ks
