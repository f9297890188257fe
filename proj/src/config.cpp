#include "pdc/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

namespace pdc {

ConfigFileError::ConfigFileError(std::string source, int line, const std::string& message)
    : InputError(line > 0 ? fmt::format("{}:{}: {}", source, line, message) : fmt::format("{}: {}", source, message)),
      line_(line) {}

double instrument_factor_for_ceiling(double ceiling, double slit_width, double fringe_period) {
  const double slit = slit_visibility_factor(slit_width, fringe_period);
  if (!(slit > 0.0)) throw ConfigurationError("slit averages the fringe out; no instrument factor reaches the ceiling");
  const double factor = ceiling / slit;
  if (!(factor >= 0.0 && factor <= 1.0)) throw ConfigurationError("requested ceiling exceeds the slit-limited contrast");
  return factor;
}

namespace {

ScanConfig default_scan(double ceiling) {
  ScanConfig scan;
  scan.mode = ScanMode::kSignalOnly;
  scan.positions = linear_positions(-kDefaultFringePeriod, kDefaultFringePeriod, 64);
  scan.integration_time = 10.0;
  scan.peak_rate = 100.0;
  scan.background_rate = 0.0;
  scan.slit_width = 0.5e-3;
  scan.instrument_factor = instrument_factor_for_ceiling(ceiling, scan.slit_width, kDefaultFringePeriod);
  scan.seed = 20260101;
  return scan;
}

GeometryConfig default_geometry() {
  return {GeometryConfig::kDefaultWavelength, GeometryConfig::kDefaultCrystalSeparation,
          GeometryConfig::kDefaultDetectorDistance, kDefaultFringePeriod};
}

}  // namespace

RunConfig RunConfig::defaults() {
  RunConfig config;
  config.pump = PumpState::linear(PolarizationAngle::diagonal());
  config.source = SourceConfig::parallel_crystals();
  config.geometry = default_geometry();
  config.analyzers = Analyzers::none();
  config.scan = default_scan(0.83);
  return config;
}

RunConfig RunConfig::fig5() {
  RunConfig config;
  config.pump = PumpState::elliptical(0.08, PolarizationAngle::diagonal());
  config.source = SourceConfig::orthogonal_crystals();
  config.geometry = default_geometry();
  config.analyzers = Analyzers::both(PolarizationAngle::diagonal());
  config.scan = default_scan(0.77);
  return config;
}

void RunConfig::validate() const {
  if (schema_version != kSchemaVersion) {
    throw ConfigurationError(fmt::format("unsupported schema_version {}", schema_version));
  }
  source.validate();
  analyzers.validate();
  scan.validate();
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

class Reader {
 public:
  Reader(const YAML::Node& node, std::string path, const std::string& source)
      : node_(node), path_(std::move(path)), source_(source) {}

  [[noreturn]] void fail(const std::string& message, const YAML::Node& at) const {
    throw ConfigFileError(source_, at.Mark().line >= 0 ? at.Mark().line + 1 : 0, message);
  }
  [[noreturn]] void fail(const std::string& message) const { fail(message, node_); }

  void expect_map() const {
    if (!node_.IsMap()) fail(fmt::format("'{}' must be a mapping", path_));
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    expect_map();
    const std::set<std::string_view> allowed(keys);
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) fail(fmt::format("unknown key '{}' in '{}'", key, path_), kv.first);
    }
  }

  [[nodiscard]] bool has(const std::string& key) const { return node_[key].IsDefined() && !node_[key].IsNull(); }

  [[nodiscard]] Reader child(const std::string& key) const {
    return Reader(node_[key], path_.empty() ? key : path_ + "." + key, source_);
  }

  template <typename T>
  [[nodiscard]] std::optional<T> get(const std::string& key) const {
    const YAML::Node value = node_[key];
    if (!value.IsDefined() || value.IsNull()) return std::nullopt;
    if (!value.IsScalar()) fail(fmt::format("'{}.{}' must be a scalar", path_, key), value);
    try {
      return value.as<T>();
    } catch (const YAML::Exception&) {
      fail(fmt::format("'{}.{}' has an invalid value '{}'", path_, key, value.Scalar()), value);
    }
  }

  /// Angle given as key_rad or key_deg (not both).
  [[nodiscard]] std::optional<double> angle(const std::string& key) const {
    const auto rad = get<double>(key + "_rad");
    const auto deg = get<double>(key + "_deg");
    if (rad && deg) fail(fmt::format("give '{0}_rad' or '{0}_deg' in '{1}', not both", key, path_));
    if (deg) return *deg * std::numbers::pi / 180.0;
    return rad;
  }

  [[nodiscard]] const YAML::Node& node() const { return node_; }
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& source_;
};

CrystalConfig read_crystal(const Reader& r, CrystalConfig crystal) {
  r.allow_only({"pair_polarization_rad", "pair_polarization_deg", "pump_axis_rad", "pump_axis_deg"});
  if (auto a = r.angle("pair_polarization")) crystal.pair_polarization = PolarizationAngle{*a};
  if (auto a = r.angle("pump_axis")) crystal.pump_axis = PolarizationAngle{*a};
  return crystal;
}

ScanMode parse_mode(const Reader& r, const std::string& text) {
  if (text == "signal") return ScanMode::kSignalOnly;
  if (text == "idler") return ScanMode::kIdlerOnly;
  if (text == "both") return ScanMode::kBoth;
  r.fail(fmt::format("scan.mode must be signal, idler or both, got '{}'", text), r.node()["mode"]);
}

std::string_view mode_name(ScanMode mode) {
  switch (mode) {
    case ScanMode::kSignalOnly: return "signal";
    case ScanMode::kIdlerOnly: return "idler";
    case ScanMode::kBoth: return "both";
  }
  return "signal";
}

template <typename Fn>
auto checked(const Reader& r, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigFileError&) {
    throw;
  } catch (const Error& e) {
    r.fail(fmt::format("invalid '{}': {}", r.path(), e.what()));
  }
}

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& source_name) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigFileError(source_name, e.mark.line + 1, e.msg);
  }
  RunConfig config = RunConfig::defaults();
  if (root.IsNull()) return config;
  const Reader top(root, "", source_name);
  if (!root.IsMap()) throw ConfigFileError(source_name, root.Mark().line + 1, "config must be a mapping");
  top.allow_only({"schema_version", "pump", "source", "geometry", "analyzers", "scan"});

  const auto version = top.get<int>("schema_version");
  if (!version) top.fail("missing schema_version");
  if (*version != kSchemaVersion) {
    top.fail(fmt::format("unsupported schema_version {} (expected {})", *version, kSchemaVersion),
             root["schema_version"]);
  }

  if (top.has("pump")) {
    const Reader r = top.child("pump");
    r.allow_only({"eps2", "theta_rad", "theta_deg"});
    const double eps2 = r.get<double>("eps2").value_or(config.pump.eps2());
    const double theta = r.angle("theta").value_or(config.pump.theta_p().radians());
    config.pump = checked(r, [&] { return PumpState::elliptical(eps2, PolarizationAngle{theta}); });
  }

  if (top.has("source")) {
    const Reader r = top.child("source");
    r.allow_only({"crystal1", "crystal2", "phi0_rad"});
    if (r.has("crystal1")) config.source.crystal1 = read_crystal(r.child("crystal1"), config.source.crystal1);
    if (r.has("crystal2")) config.source.crystal2 = read_crystal(r.child("crystal2"), config.source.crystal2);
    config.source.phi0 = r.get<double>("phi0_rad").value_or(config.source.phi0);
    checked(r, [&] { config.source.validate(); return 0; });
  }

  if (top.has("geometry")) {
    const Reader r = top.child("geometry");
    r.allow_only({"wavelength_m", "crystal_separation_m", "detector_distance_m", "fringe_period_m"});
    const GeometryConfig& g = config.geometry;
    const double wavelength = r.get<double>("wavelength_m").value_or(g.wavelength());
    const double separation = r.get<double>("crystal_separation_m").value_or(g.crystal_separation());
    const double distance = r.get<double>("detector_distance_m").value_or(g.detector_distance());
    // An explicit null falls back to the geometric lambda L / d period.
    std::optional<double> period = r.get<double>("fringe_period_m");
    if (!r.node()["fringe_period_m"].IsDefined() && g.fringe_period_overridden()) period = g.fringe_period();
    config.geometry = checked(r, [&] { return GeometryConfig(wavelength, separation, distance, period); });
  }

  if (top.node()["analyzers"].IsDefined()) {
    if (top.node()["analyzers"].IsNull()) {
      config.analyzers = Analyzers::none();
    } else {
      const Reader r = top.child("analyzers");
      r.allow_only({"signal_rad", "signal_deg", "idler_rad", "idler_deg"});
      Analyzers a;
      if (auto v = r.angle("signal")) a.signal = PolarizationAngle{*v};
      if (auto v = r.angle("idler")) a.idler = PolarizationAngle{*v};
      checked(r, [&] { a.validate(); return 0; });
      config.analyzers = a;
    }
  }

  if (top.has("scan")) {
    const Reader r = top.child("scan");
    r.allow_only({"mode", "positions_m", "positions", "integration_s", "peak_rate_hz", "background_rate_hz",
                  "slit_width_m", "instrument_factor", "seed"});
    ScanConfig& s = config.scan;
    if (auto mode = r.get<std::string>("mode")) s.mode = parse_mode(r, *mode);
    if (r.has("positions_m") && r.has("positions")) r.fail("give 'positions_m' or 'positions', not both");
    if (r.has("positions_m")) {
      const YAML::Node list = r.node()["positions_m"];
      if (!list.IsSequence()) r.fail("'scan.positions_m' must be a list", list);
      s.positions.clear();
      for (const auto& item : list) {
        try {
          s.positions.push_back(item.as<double>());
        } catch (const YAML::Exception&) {
          r.fail(fmt::format("invalid position '{}'", item.Scalar()), item);
        }
      }
    } else if (r.has("positions")) {
      const Reader grid = r.child("positions");
      grid.allow_only({"start_m", "stop_m", "count"});
      const auto start = grid.get<double>("start_m");
      const auto stop = grid.get<double>("stop_m");
      const auto count = grid.get<long long>("count");
      if (!start || !stop || !count) grid.fail("'scan.positions' needs start_m, stop_m and count");
      if (*count <= 0) grid.fail("'scan.positions.count' must be positive", grid.node()["count"]);
      s.positions = linear_positions(*start, *stop, static_cast<std::size_t>(*count));
    }
    s.integration_time = r.get<double>("integration_s").value_or(s.integration_time);
    s.peak_rate = r.get<double>("peak_rate_hz").value_or(s.peak_rate);
    s.background_rate = r.get<double>("background_rate_hz").value_or(s.background_rate);
    s.slit_width = r.get<double>("slit_width_m").value_or(s.slit_width);
    s.instrument_factor = r.get<double>("instrument_factor").value_or(s.instrument_factor);
    s.seed = r.get<std::uint64_t>("seed").value_or(s.seed);
    checked(r, [&] { s.validate(); return 0; });
  }
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigFileError(path.string(), 0, "cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string num(double v) { return fmt::format("{}", v); }

void emit_crystal(YAML::Emitter& out, const char* name, const CrystalConfig& c) {
  out << YAML::Key << name << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pair_polarization_rad" << YAML::Value << num(c.pair_polarization.radians());
  out << YAML::Key << "pump_axis_rad" << YAML::Value << num(c.pump_axis.radians());
  out << YAML::EndMap;
}

}  // namespace

std::string serialize_config(const RunConfig& config) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << config.schema_version;

  out << YAML::Key << "pump" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "eps2" << YAML::Value << num(config.pump.eps2());
  out << YAML::Key << "theta_rad" << YAML::Value << num(config.pump.theta_p().radians());
  out << YAML::EndMap;

  out << YAML::Key << "source" << YAML::Value << YAML::BeginMap;
  emit_crystal(out, "crystal1", config.source.crystal1);
  emit_crystal(out, "crystal2", config.source.crystal2);
  out << YAML::Key << "phi0_rad" << YAML::Value << num(config.source.phi0);
  out << YAML::EndMap;

  const GeometryConfig& g = config.geometry;
  out << YAML::Key << "geometry" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "wavelength_m" << YAML::Value << num(g.wavelength());
  out << YAML::Key << "crystal_separation_m" << YAML::Value << num(g.crystal_separation());
  out << YAML::Key << "detector_distance_m" << YAML::Value << num(g.detector_distance());
  out << YAML::Key << "fringe_period_m" << YAML::Value;
  if (g.fringe_period_overridden()) {
    out << num(g.fringe_period());
  } else {
    out << YAML::Null;
  }
  out << YAML::EndMap;

  out << YAML::Key << "analyzers" << YAML::Value;
  if (config.analyzers.present()) {
    out << YAML::BeginMap;
    out << YAML::Key << "signal_rad" << YAML::Value << num(config.analyzers.signal->radians());
    out << YAML::Key << "idler_rad" << YAML::Value << num(config.analyzers.idler->radians());
    out << YAML::EndMap;
  } else {
    out << YAML::Null;
  }

  const ScanConfig& s = config.scan;
  out << YAML::Key << "scan" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "mode" << YAML::Value << std::string(mode_name(s.mode));
  out << YAML::Key << "positions_m" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double x : s.positions) out << num(x);
  out << YAML::EndSeq;
  out << YAML::Key << "integration_s" << YAML::Value << num(s.integration_time);
  out << YAML::Key << "peak_rate_hz" << YAML::Value << num(s.peak_rate);
  out << YAML::Key << "background_rate_hz" << YAML::Value << num(s.background_rate);
  out << YAML::Key << "slit_width_m" << YAML::Value << num(s.slit_width);
  out << YAML::Key << "instrument_factor" << YAML::Value << num(s.instrument_factor);
  out << YAML::Key << "seed" << YAML::Value << s.seed;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace pdc
