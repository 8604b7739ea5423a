#include "ks/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>

#include "ks/fv_scheme.hpp"
#include "ks/radial1d.hpp"

namespace ks {

const char* to_string(InitKind kind) {
  switch (kind) {
    case InitKind::Constant:
      return "constant";
    case InitKind::Gaussian:
      return "gaussian";
    case InitKind::RestrictedRadial:
      return "restricted_radial";
  }
  return "?";
}

const char* to_string(SignalKind kind) {
  switch (kind) {
    case SignalKind::Zero:
      return "zero";
    case SignalKind::Constant:
      return "constant";
    case SignalKind::QuasiStationary:
      return "quasi_stationary";
  }
  return "?";
}

double SimConfig::disc_mass() const { return kTwoPi / domain.theta * init.mass; }

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& e : items) {
    if (!out.empty()) out += "; ";
    out += e;
  }
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> plain_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return x;
}

std::optional<long> parse_integer(const std::string& raw) {
  const std::string s = trim(raw);
  long x = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return x;
}

using boost::property_tree::ptree;

/// Reads keys from one ptree while remembering which ones were consumed.
class Reader {
 public:
  Reader(const ptree& root, std::vector<std::string>& errors) : root_(root), errors_(errors) {}

  std::optional<std::string> text(const std::string& section, const std::string& key, bool required) {
    seen_.insert(section + "." + key);
    const auto sec = root_.get_child_optional(section);
    if (sec) {
      const auto v = sec->get_optional<std::string>(key);
      if (v) return trim(*v);
    }
    if (required) {
      errors_.push_back("missing required key " + section + "." + key);
      failed_.insert(section + "." + key);
    }
    return std::nullopt;
  }

  void real(const std::string& section, const std::string& key, double& target, bool required = false) {
    const auto s = text(section, key, required);
    if (!s) return;
    const auto x = parse_number(*s);
    if (!x || !std::isfinite(*x)) {
      errors_.push_back(section + "." + key + ": expected a finite number, got '" + *s + "'");
      failed_.insert(section + "." + key);
      return;
    }
    target = *x;
  }

  template <class Int>
  void integer(const std::string& section, const std::string& key, Int& target, bool required = false) {
    const auto s = text(section, key, required);
    if (!s) return;
    const auto x = parse_integer(*s);
    if (!x) {
      errors_.push_back(section + "." + key + ": expected an integer, got '" + *s + "'");
      failed_.insert(section + "." + key);
      return;
    }
    target = static_cast<Int>(*x);
  }

  template <class Enum>
  void choice(const std::string& section, const std::string& key, Enum& target,
              const std::map<std::string, Enum>& options, bool required = false) {
    const auto s = text(section, key, required);
    if (!s) return;
    const auto it = options.find(*s);
    if (it == options.end()) {
      std::string names;
      for (const auto& [name, value] : options) names += (names.empty() ? "" : " | ") + name;
      errors_.push_back(section + "." + key + ": expected one of " + names + ", got '" + *s + "'");
      failed_.insert(section + "." + key);
      return;
    }
    target = it->second;
  }

  bool failed(const std::string& key) const { return failed_.contains(key); }

  void report_unknown() {
    for (const auto& [name, node] : root_) {
      if (node.empty()) {
        errors_.push_back("unknown key '" + name + "' outside any section");
        continue;
      }
      for (const auto& entry : node) {
        const std::string full = name + "." + entry.first;
        if (!seen_.contains(full)) errors_.push_back("unknown key " + full);
      }
    }
  }

 private:
  const ptree& root_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
  std::set<std::string> failed_;
};

struct Problem {
  std::string key;
  std::string message;
};

std::vector<Problem> problems(const SimConfig& c) {
  std::vector<Problem> out;
  auto add = [&out](std::string key, std::string message) { out.push_back({std::move(key), std::move(message)}); };
  if (!(c.domain.theta > 0.0) || c.domain.theta > kTwoPi) add("domain.theta", "domain.theta must lie in (0, 2pi]");
  if (!(c.domain.radius > 0.0)) add("domain.radius", "domain.radius must be positive");
  if (c.nr < 2) add("mesh.nr", "mesh.nr must be >= 2");
  if (c.nphi < 2) add("mesh.nphi", "mesh.nphi must be >= 2");
  if (!(c.grading >= 1.0)) add("mesh.grading", "mesh.grading must be >= 1");
  if (!(c.init.mass > 0.0)) add("init.mass", "mass must be positive");
  if (c.init.kind == InitKind::Gaussian) {
    if (!(c.init.width > 0.0)) add("init.width", "init.width must be positive");
    if (!(c.init.center_r >= 0.0 && c.init.center_r <= c.domain.radius)) {
      add("init.center_r", "init.center_r must lie in [0, radius]");
    }
  }
  if (c.init.kind == InitKind::RestrictedRadial) {
    if (!(c.init.concentration > 0.0)) add("init.concentration", "init.concentration must be positive");
    if (c.init.radial_nr != 0 && c.init.radial_nr < 4) add("init.radial_nr", "init.radial_nr must be 0 or >= 4");
  }
  if (c.v0.kind == SignalKind::Constant && !(c.v0.value >= 0.0)) add("signal.value", "signal.value must be >= 0");
  for (auto& p : c.scheme.problems()) add("scheme", std::move(p));
  if (c.output.directory.empty()) add("output.directory", "output.directory must not be empty");
  if (!(c.output.snapshot_interval >= 0.0)) add("output.snapshot_interval", "output.snapshot_interval must be >= 0");
  if (c.output.csv_every < 1) add("output.csv_every", "output.csv_every must be >= 1");
  return out;
}

}  // namespace

std::optional<double> parse_number(const std::string& raw) {
  std::string s;
  for (char c : raw) {
    if (c != ' ' && c != '\t') s += c;
  }
  const auto at = s.find("pi");
  if (at == std::string::npos) return plain_number(s);
  std::string factor = s.substr(0, at);
  std::string rest = s.substr(at + 2);
  if (!factor.empty() && factor.back() == '*') factor.pop_back();
  double value = std::numbers::pi;
  if (!factor.empty()) {
    const auto f = plain_number(factor);
    if (!f) return std::nullopt;
    value *= *f;
  }
  if (!rest.empty()) {
    if (rest.front() != '/') return std::nullopt;
    const auto d = plain_number(rest.substr(1));
    if (!d || *d == 0.0) return std::nullopt;
    value /= *d;
  }
  return value;
}

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration: " + join(errors)), errors_(std::move(errors)) {}

void validate(const SimConfig& config) {
  std::vector<std::string> messages;
  for (auto& p : problems(config)) messages.push_back(std::move(p.message));
  if (!messages.empty()) throw ConfigError(std::move(messages));
}

SimConfig parse_config(const std::string& text) {
  ptree root;
  try {
    std::istringstream is(text);
    boost::property_tree::ini_parser::read_ini(is, root);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError({"line " + std::to_string(e.line()) + ": " + e.message()});
  }

  std::vector<std::string> errors;
  Reader r(root, errors);
  SimConfig c;

  r.real("domain", "theta", c.domain.theta, true);
  r.real("domain", "radius", c.domain.radius, true);

  r.integer("mesh", "nr", c.nr, true);
  r.integer("mesh", "nphi", c.nphi, true);
  r.real("mesh", "grading", c.grading);

  r.choice("init", "type", c.init.kind,
           {{"constant", InitKind::Constant},
            {"gaussian", InitKind::Gaussian},
            {"restricted_radial", InitKind::RestrictedRadial}},
           true);
  r.real("init", "mass", c.init.mass, true);
  r.real("init", "center_r", c.init.center_r);
  c.init.width = 0.25 * c.domain.radius;
  r.real("init", "width", c.init.width);
  r.real("init", "concentration", c.init.concentration);
  r.integer("init", "radial_nr", c.init.radial_nr);

  r.choice("signal", "v0", c.v0.kind,
           {{"zero", SignalKind::Zero},
            {"constant", SignalKind::Constant},
            {"quasi_stationary", SignalKind::QuasiStationary}});
  r.real("signal", "value", c.v0.value);

  auto& s = c.scheme;
  r.real("scheme", "t_end", s.t_end, true);
  r.real("scheme", "dt0", s.dt0);
  r.real("scheme", "dt_min", s.dt_min);
  r.real("scheme", "dt_max", s.dt_max);
  r.real("scheme", "cfl_safety", s.cfl_safety);
  r.real("scheme", "linf_blowup", s.linf_blowup);
  r.real("scheme", "linear_tol", s.linear_tol);
  r.real("scheme", "theta_scheme", s.theta_scheme);
  r.integer("scheme", "blowup_window", s.blowup_window);
  r.real("scheme", "dt_growth", s.dt_growth);
  r.real("scheme", "max_linf_ratio", s.max_linf_ratio);
  r.integer("scheme", "max_steps", s.max_steps);

  if (auto dir = r.text("output", "directory", false)) c.output.directory = *dir;
  r.real("output", "snapshot_interval", c.output.snapshot_interval);
  r.integer("output", "csv_every", c.output.csv_every);

  r.report_unknown();
  // Keys that are already reported as missing or malformed get no range message.
  for (auto& p : problems(c)) {
    if (!r.failed(p.key)) errors.push_back(std::move(p.message));
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open config file '" + path + "'"});
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

std::string serialize_config(const SimConfig& c) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "[domain]\n"
     << "theta = " << c.domain.theta << "\n"
     << "radius = " << c.domain.radius << "\n\n";
  os << "[mesh]\n"
     << "nr = " << c.nr << "\n"
     << "nphi = " << c.nphi << "\n"
     << "grading = " << c.grading << "\n\n";
  os << "[init]\n"
     << "type = " << to_string(c.init.kind) << "\n"
     << "mass = " << c.init.mass << "\n"
     << "center_r = " << c.init.center_r << "\n"
     << "width = " << c.init.width << "\n"
     << "concentration = " << c.init.concentration << "\n"
     << "radial_nr = " << c.init.radial_nr << "\n\n";
  os << "[signal]\n"
     << "v0 = " << to_string(c.v0.kind) << "\n"
     << "value = " << c.v0.value << "\n\n";
  const auto& s = c.scheme;
  os << "[scheme]\n"
     << "t_end = " << s.t_end << "\n"
     << "dt0 = " << s.dt0 << "\n"
     << "dt_min = " << s.dt_min << "\n"
     << "dt_max = " << s.dt_max << "\n"
     << "cfl_safety = " << s.cfl_safety << "\n"
     << "linf_blowup = " << s.linf_blowup << "\n"
     << "linear_tol = " << s.linear_tol << "\n"
     << "theta_scheme = " << s.theta_scheme << "\n"
     << "blowup_window = " << s.blowup_window << "\n"
     << "dt_growth = " << s.dt_growth << "\n"
     << "max_linf_ratio = " << s.max_linf_ratio << "\n"
     << "max_steps = " << s.max_steps << "\n\n";
  os << "[output]\n"
     << "directory = " << c.output.directory << "\n"
     << "snapshot_interval = " << c.output.snapshot_interval << "\n"
     << "csv_every = " << c.output.csv_every << "\n";
  return os.str();
}

MeshPtr make_mesh(const SimConfig& config) {
  return make_mesh(config.domain, config.nr, config.nphi, config.grading);
}

std::pair<Field, Field> make_initial_data(const SimConfig& config, const MeshPtr& mesh) {
  validate(config);
  const auto& init = config.init;

  if (init.kind == InitKind::RestrictedRadial) {
    BlowupCandidateOptions opt;
    opt.nr = init.radial_nr > 0 ? init.radial_nr : config.nr;
    opt.grading = config.grading;
    switch (config.v0.kind) {
      case SignalKind::Zero:
        opt.signal = SignalInit::Zero;
        break;
      case SignalKind::Constant:
        opt.signal = SignalInit::Constant;
        opt.signal_constant = config.v0.value;
        break;
      case SignalKind::QuasiStationary:
        opt.signal = SignalInit::QuasiStationary;
        break;
    }
    const auto profile = make_blowup_candidate(config.disc_mass(), init.concentration, config.domain.radius, opt);
    return restrict_to_sector(profile, config.domain.theta, mesh);
  }

  Field u(mesh, init.mass / mesh->total_area());
  if (init.kind == InitKind::Gaussian) {
    const double c = 0.5 * config.domain.theta;
    const double cx = init.center_r * std::cos(c);
    const double cy = init.center_r * std::sin(c);
    const double w2 = init.width * init.width;
    const Field bump = Field::sample(mesh, [&](double r, double phi) {
      const double dx = r * std::cos(phi) - cx;
      const double dy = r * std::sin(phi) - cy;
      return std::exp(-(dx * dx + dy * dy) / w2);
    });
    if (!(mass(bump) > 0.0)) throw ConfigError({"init: gaussian bump has no mass on this mesh"});
    u = normalize_to_mass(bump, init.mass);
  }

  switch (config.v0.kind) {
    case SignalKind::Zero:
      return {u, Field(mesh, 0.0)};
    case SignalKind::Constant:
      return {u, Field(mesh, config.v0.value)};
    case SignalKind::QuasiStationary: {
      auto solved = stationary_signal(*mesh, u.values());
      if (!solved.stats.converged) throw std::runtime_error("quasi-stationary signal solve did not converge");
      for (double& x : solved.values) x = std::max(x, 0.0);
      return {u, Field(mesh, std::move(solved.values))};
    }
  }
  return {u, Field(mesh, 0.0)};
}

RunOutcome run(const SimConfig& config, const RunControls& controls) {
  validate(config);
  const auto mesh = make_mesh(config);
  auto [u0, v0] = make_initial_data(config, mesh);
  return simulate(make_state(std::move(u0), std::move(v0), config.scheme), config.scheme, controls);
}

}  // namespace ks
