#ifndef KS_CONFIG_HPP
#define KS_CONFIG_HPP

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ks/fields.hpp"
#include "ks/run_control.hpp"
#include "ks/solver2d.hpp"

namespace ks {

enum class InitKind { Constant, Gaussian, RestrictedRadial };
enum class SignalKind { Zero, Constant, QuasiStationary };

const char* to_string(InitKind kind);
const char* to_string(SignalKind kind);

struct InitSpec {
  InitKind kind = InitKind::Gaussian;
  /// target int u0 over the sector
  double mass = 0.0;
  /// gaussian: bump exp(-|x - c|^2 / width^2) centred at radius center_r on
  /// the bisector phi = theta/2
  double center_r = 0.0;
  double width = 0.25;
  /// restricted_radial: Gaussian width of the disc profile
  double concentration = 0.2;
  /// restricted_radial: radial cells of the disc profile (0 = same as mesh nr)
  int radial_nr = 0;

  bool operator==(const InitSpec&) const = default;
};

struct SignalSpec {
  SignalKind kind = SignalKind::QuasiStationary;
  double value = 0.0;

  bool operator==(const SignalSpec&) const = default;
};

struct OutputSpec {
  std::string directory = "out";
  /// 0 disables intermediate snapshots
  double snapshot_interval = 0.0;
  /// write every n-th accepted step to the diagnostics CSV
  int csv_every = 1;

  bool operator==(const OutputSpec&) const = default;
};

struct SimConfig {
  DomainSpec domain;
  int nr = 0;
  int nphi = 0;
  double grading = 1.0;
  InitSpec init;
  SignalSpec v0;
  SchemeConfig scheme;
  OutputSpec output;

  bool operator==(const SimConfig&) const = default;

  /// Disc mass whose restriction carries init.mass: (2 pi / theta) m.
  double disc_mass() const;
};

/// Carries every problem found in a document, one message per entry.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Plain numbers plus multiples of pi: "pi", "2pi", "2*pi", "pi/2", "0.5*pi/3".
std::optional<double> parse_number(const std::string& text);

/// Parses a sectioned key = value document:
///
///   [domain]  theta, radius                                   (required)
///   [mesh]    nr, nphi (required), grading = 1
///   [init]    type = constant | gaussian | restricted_radial, mass (required),
///             center_r = 0, width = 0.25 R, concentration = 0.2, radial_nr = 0
///   [signal]  v0 = zero | constant | quasi_stationary, value = 0
///   [scheme]  t_end (required) and the remaining SchemeConfig fields
///   [output]  directory = out, snapshot_interval = 0, csv_every = 1
///
/// Throws ConfigError listing every unknown key, missing key, malformed value
/// and out-of-range value.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

/// Writes every field with 17 significant digits; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& config);

/// Throws ConfigError when a constraint is violated.
void validate(const SimConfig& config);

MeshPtr make_mesh(const SimConfig& config);

/// Builds (u0, v0) on `mesh` as described by the init and signal sections.
std::pair<Field, Field> make_initial_data(const SimConfig& config, const MeshPtr& mesh);

/// Builds mesh and initial data, then integrates to t_end.
RunOutcome run(const SimConfig& config, const RunControls& controls = {});

}  // namespace ks

#endif  // KS_CONFIG_HPP
