#include "ks/fields.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace ks {

Field::Field(MeshPtr mesh, double value)
    : mesh_(std::move(mesh)), values_(static_cast<std::size_t>(mesh_->cell_count()), value) {}

Field::Field(MeshPtr mesh, std::vector<double> values) : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(mesh_->cell_count())) {
    throw std::invalid_argument("field length does not match the mesh cell count");
  }
}

Field Field::sample(MeshPtr mesh, const std::function<double(double, double)>& fn) {
  const auto centers = mesh->cell_centers();
  std::vector<double> values(centers.size());
  std::transform(centers.begin(), centers.end(), values.begin(),
                 [&](const PolarPoint& p) { return fn(p.r, p.phi); });
  return Field(std::move(mesh), std::move(values));
}

bool Field::is_nonnegative() const {
  return std::all_of(values_.begin(), values_.end(), [](double x) { return x >= 0.0; });
}

Field& Field::operator*=(double s) {
  for (auto& x : values_) x *= s;
  return *this;
}

Field& Field::operator+=(double c) {
  for (auto& x : values_) x += c;
  return *this;
}

double xlogx(double s) { return s > kLogFloor ? s * std::log(s) : 0.0; }

namespace {

void require_same_mesh(const Field& a, const Field& b) {
  if (!a.same_mesh(b)) throw std::invalid_argument("fields live on different meshes");
}

template <class F>
double integrate(const Field& f, F&& integrand) {
  const auto area = f.mesh().cell_area();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += area[i] * integrand(f[i], i);
  return sum;
}

}  // namespace

double mass(const Field& f) {
  return integrate(f, [](double x, std::size_t) { return x; });
}

double entropy(const Field& u) {
  return integrate(u, [](double x, std::size_t) { return xlogx(x); });
}

double dirichlet_energy(const Field& f) {
  double sum = 0.0;
  for (const auto& face : f.mesh().interior_faces()) {
    const double jump = f[static_cast<std::size_t>(face.right)] - f[static_cast<std::size_t>(face.left)];
    sum += face.transmissibility() * jump * jump;
  }
  return sum;
}

double energy(const Field& u, const Field& v) {
  require_same_mesh(u, v);
  const auto area = u.mesh().cell_area();
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    sum += area[i] * (xlogx(u[i]) - u[i] * v[i] + 0.5 * v[i] * v[i]);
  }
  return sum + 0.5 * dirichlet_energy(v);
}

ArgMax argmax(const Field& f) {
  ArgMax best;
  best.value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] > best.value) {
      best.value = f[i];
      best.cell = static_cast<int>(i);
    }
  }
  best.location = f.mesh().cell_centers()[static_cast<std::size_t>(best.cell)];
  return best;
}

double min_value(const Field& f) {
  const auto vals = f.values();
  return *std::min_element(vals.begin(), vals.end());
}

double tm_gap(const Field& phi, double theta_eff) {
  if (!(theta_eff > 0.0)) throw std::invalid_argument("theta_eff must be positive");
  const auto area = phi.mesh().cell_area();
  double peak = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) peak = std::max(peak, std::abs(phi[i]));
  double shifted = 0.0;
  double abs_integral = 0.0;
  for (std::size_t i = 0; i < phi.size(); ++i) {
    const double a = std::abs(phi[i]);
    shifted += area[i] * std::exp(a - peak);
    abs_integral += area[i] * a;
  }
  const double log_exp_integral = peak + std::log(shifted);
  return log_exp_integral - dirichlet_energy(phi) / (8.0 * theta_eff) -
         abs_integral / phi.mesh().domain().area();
}

EntropyBound entropy_bound_check(const Field& u, const Field& v, double theta_eff, double eta) {
  require_same_mesh(u, v);
  if (!(eta > 0.0)) throw std::invalid_argument("eta must be positive");
  EntropyBound out;
  out.mass = mass(u);
  const double m = out.mass;
  if (!(m > 0.0)) throw std::invalid_argument("entropy bound needs positive mass");
  if (!((1.0 + eta) * m / (8.0 * theta_eff) < 0.5)) {
    throw std::invalid_argument("(1+eta) m / (8 theta) must be below 1/2");
  }
  const auto area = u.mesh().cell_area();
  double uv = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) uv += area[i] * u[i] * v[i];
  out.lhs = (1.0 + eta) * uv - entropy(u);
  out.rhs = m * std::log(1.0 / m) + 0.5 * dirichlet_energy(v) +
            (1.0 + eta) * m / u.mesh().domain().area() * mass(v);
  return out;
}

Field normalize_to_mass(const Field& f, double target) {
  if (!(target > 0.0)) throw std::invalid_argument("target mass must be positive");
  const double m = mass(f);
  if (!(m > 0.0)) throw std::invalid_argument("cannot normalize a field with non-positive mass");
  Field out = f;
  out *= target / m;
  return out;
}

FunctionalReport report(const Field& u, const Field& v, double theta_eff) {
  FunctionalReport r;
  r.mass_u = mass(u);
  r.mass_v = mass(v);
  r.entropy = entropy(u);
  r.energy = energy(u, v);
  r.tm_gap = tm_gap(v, theta_eff);
  const auto am = argmax(u);
  r.linf_u = am.value;
  r.argmax_location = am.location;
  return r;
}

void write_snapshot(std::ostream& os, const Field& u, const Field& v, double t) {
  require_same_mesh(u, v);
  const auto& mesh = u.mesh();
  const auto old_precision = os.precision();
  os << std::setprecision(17);
  os << "# " << mesh.domain().theta << ' ' << mesh.domain().radius << ' ' << mesh.nr() << ' '
     << mesh.nphi() << ' ' << t << '\n';
  const auto centers = mesh.cell_centers();
  for (std::size_t i = 0; i < u.size(); ++i) {
    os << i << ' ' << centers[i].r << ' ' << centers[i].phi << ' ' << u[i] << ' ' << v[i] << '\n';
  }
  os.precision(old_precision);
}

Snapshot read_snapshot(std::istream& is) {
  Snapshot s;
  std::string line;
  if (!std::getline(is, line) || line.empty() || line[0] != '#') {
    throw std::runtime_error("snapshot: missing header");
  }
  std::istringstream header(line.substr(1));
  if (!(header >> s.domain.theta >> s.domain.radius >> s.nr >> s.nphi >> s.t)) {
    throw std::runtime_error("snapshot: malformed header");
  }
  const auto n = static_cast<std::size_t>(s.nr) * static_cast<std::size_t>(s.nphi);
  s.u.reserve(n);
  s.v.reserve(n);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t idx = 0;
    double r = 0.0, phi = 0.0, u = 0.0, v = 0.0;
    if (!(row >> idx >> r >> phi >> u >> v) || idx != s.u.size()) {
      throw std::runtime_error("snapshot: malformed row " + std::to_string(s.u.size()));
    }
    s.u.push_back(u);
    s.v.push_back(v);
  }
  if (s.u.size() != n) throw std::runtime_error("snapshot: row count does not match nr * nphi");
  return s;
}

}  // namespace ks
