#pragma once

// JSON scenario configs and the simulate -> analyze -> reconstruct -> propagate
// pipeline that the command-line runner drives.
//
// Config units: lengths in mm, wavelengths in nm, angles in mrad. Internally
// every length is in mm and momenta are in rad/mm.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "shtomo/baseline.hpp"
#include "shtomo/errors.hpp"
#include "shtomo/field_model.hpp"
#include "shtomo/io.hpp"
#include "shtomo/propagation.hpp"
#include "shtomo/sensor.hpp"
#include "shtomo/tomography.hpp"

namespace shtomo {

struct ReconstructionConfig {
  bool ml = true;
  bool linear = true;
  MlOptions ml_options;
  double rank_threshold = kRankThreshold;
  double range_threshold = 1e-2;
};

struct ScenarioConfig {
  std::uint64_t seed = 0;
  double wavelength = 0.0;  // mm
  ModeBasis basis;
  MixtureSpec state;
  SensorGeometry::Params sensor;
  NoiseSpec noise;
  ReconstructionConfig reconstruction;
  std::optional<ResponseKernel> plane;
};

namespace detail {

/// Object reader that remembers which keys were consumed, so leftovers can be rejected.
class ConfigObject {
 public:
  ConfigObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "must be an object");
  }

  [[noreturn]] static void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": " + what);
  }

  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json& raw(const std::string& key) {
    used_.insert(key);
    if (!j_.contains(key)) fail(at(key), "is required");
    return j_.at(key);
  }

  ConfigObject object(const std::string& key) { return ConfigObject(raw(key), at(key)); }

  double number(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number()) fail(at(key), "must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(at(key), "must be finite");
    return x;
  }

  double number(const std::string& key, double fallback) { return has(key) ? number(key) : fallback; }

  double positive(const std::string& key) {
    const double x = number(key);
    if (!(x > 0.0)) fail(at(key), "must be positive");
    return x;
  }

  double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : fallback; }

  std::uint64_t count(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      fail(at(key), "must be a nonnegative integer");
    return v.get<std::uint64_t>();
  }

  std::uint64_t count(const std::string& key, std::uint64_t fallback) { return has(key) ? count(key) : fallback; }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (!v.is_boolean()) fail(at(key), "must be true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_string()) fail(at(key), "must be a string");
    return v.get<std::string>();
  }

  std::string string(const std::string& key, const std::string& fallback) { return has(key) ? string(key) : fallback; }

  const nlohmann::json& array(const std::string& key) {
    const auto& v = raw(key);
    if (!v.is_array()) fail(at(key), "must be an array");
    return v;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) fail(at(it.key()), "unknown key");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline double element_number(const nlohmann::json& v, const std::string& path) {
  if (!v.is_number()) ConfigObject::fail(path, "must be a number");
  return v.get<double>();
}

/// Either a scalar (x) or a pair [x, y].
inline Point read_point(const nlohmann::json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (!v.is_array() || v.size() != 2) ConfigObject::fail(path, "must be a number or an [x, y] pair");
  return {element_number(v[0], path + "[0]"), element_number(v[1], path + "[1]")};
}

inline ModeBasis read_basis(ConfigObject o, double wavelength) {
  const std::string kind = o.string("kind");
  ModeBasis b = [&] {
    if (kind == "vortex") {
      std::vector<int> charges;
      const auto& a = o.array("charges");
      for (std::size_t k = 0; k < a.size(); ++k) {
        if (!a[k].is_number_integer()) ConfigObject::fail(o.at("charges") + "[" + std::to_string(k) + "]", "must be an integer");
        charges.push_back(a[k].get<int>());
      }
      return ModeBasis::vortex(std::move(charges), o.positive("waist_mm"), wavelength);
    }
    if (kind == "plane_wave") {
      const double k0 = 2.0 * kPi / wavelength;
      std::vector<Point> momenta;
      const auto& a = o.array("angles_mrad");
      for (std::size_t k = 0; k < a.size(); ++k) {
        const Point t = read_point(a[k], o.at("angles_mrad") + "[" + std::to_string(k) + "]");
        momenta.push_back({k0 * std::sin(1e-3 * t.x), k0 * std::sin(1e-3 * t.y)});
      }
      return ModeBasis::plane_waves(std::move(momenta), wavelength);
    }
    ConfigObject::fail(o.at("kind"), "must be \"vortex\" or \"plane_wave\"");
  }();
  o.finish();
  return b;
}

inline MixtureSpec read_state(ConfigObject o, std::size_t d) {
  MixtureSpec spec;
  const auto& comps = o.array("components");
  if (comps.empty()) ConfigObject::fail(o.at("components"), "must not be empty");
  for (std::size_t c = 0; c < comps.size(); ++c) {
    ConfigObject co(comps[c], o.at("components") + "[" + std::to_string(c) + "]");
    MixtureSpec::Component comp;
    comp.weight = co.number("weight");
    if (comp.weight < 0.0) ConfigObject::fail(co.at("weight"), "must be nonnegative");
    const auto& ket = co.array("ket");
    if (ket.size() != d)
      ConfigObject::fail(co.at("ket"), "has " + std::to_string(ket.size()) + " entries but the basis has " +
                                           std::to_string(d) + " modes");
    comp.ket.resize(static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d; ++k) {
      const Point z = read_point(ket[k], co.at("ket") + "[" + std::to_string(k) + "]");
      comp.ket(static_cast<Eigen::Index>(k)) = {z.x, z.y};
    }
    co.finish();
    spec.components.push_back(std::move(comp));
  }
  o.finish();
  return spec;
}

inline Aperture read_aperture(ConfigObject o) {
  const std::string kind = o.string("kind");
  Aperture a;
  if (kind == "square") a = Aperture::square(o.positive("width_mm"));
  else if (kind == "hexagon") a = Aperture::hexagon(o.positive("width_mm"));
  else if (kind == "gaussian") a = Aperture::gaussian(o.positive("width_mm"));
  else if (kind == "unbounded") a = Aperture::unbounded(o.positive("width_mm"));
  else if (kind == "pointlike") a = Aperture::pointlike();
  else ConfigObject::fail(o.at("kind"), "must be square, hexagon, gaussian, unbounded or pointlike");
  o.finish();
  return a;
}

inline SensorGeometry::Params read_sensor(ConfigObject o, double wavelength) {
  SensorGeometry::Params p;
  const auto dim = o.count("dimension", 2);
  if (dim != 1 && dim != 2) ConfigObject::fail(o.at("dimension"), "must be 1 or 2");
  p.dimension = dim == 1 ? Dimension::One : Dimension::Two;
  p.wavelength = wavelength;

  ConfigObject layout = o.object("layout");
  const std::string kind = layout.string("kind");
  if (kind == "hexagonal") {
    const auto rings = layout.count("rings");
    p.lens_centers = SensorGeometry::hexagonal_layout(static_cast<int>(rings), layout.positive("pitch_mm"));
  } else if (kind == "explicit") {
    const auto& c = layout.array("centers_mm");
    for (std::size_t k = 0; k < c.size(); ++k)
      p.lens_centers.push_back(read_point(c[k], layout.at("centers_mm") + "[" + std::to_string(k) + "]"));
  } else {
    ConfigObject::fail(layout.at("kind"), "must be \"hexagonal\" or \"explicit\"");
  }
  layout.finish();
  if (p.dimension == Dimension::One)
    for (const Point& c : p.lens_centers)
      if (c.y != 0.0) ConfigObject::fail(o.at("layout"), "one-dimensional sensors need lens centers on the x axis");

  p.aperture = read_aperture(o.object("aperture"));
  p.focal_length = o.positive("focal_length_mm");

  ConfigObject px = o.object("pixels");
  const double pitch = px.positive("pitch_mm");
  std::size_t nu = 0, nv = 1;
  const auto& cnt = px.raw("count");
  if (cnt.is_number_unsigned()) {
    nu = cnt.get<std::size_t>();
  } else if (cnt.is_array() && cnt.size() == 2 && cnt[0].is_number_unsigned() && cnt[1].is_number_unsigned()) {
    nu = cnt[0].get<std::size_t>();
    nv = cnt[1].get<std::size_t>();
  } else {
    ConfigObject::fail(px.at("count"), "must be a pixel count or a [nu, nv] pair");
  }
  if (nu == 0 || nv == 0) ConfigObject::fail(px.at("count"), "must be positive");
  px.finish();
  p.pixels = PixelGrid::centered(nu, nv, pitch);
  if (p.dimension == Dimension::One) p.pixels.v = {0.0};

  p.quadrature_points = o.count("quadrature_points", 256);
  p.finite_pixel = o.boolean("finite_pixel", false);
  o.finish();
  return p;
}

inline NoiseSpec read_noise(ConfigObject o, std::uint64_t seed) {
  const std::string kind = o.string("kind");
  NoiseSpec n;
  if (kind == "none") n = NoiseSpec::none();
  else if (kind == "gaussian") n = NoiseSpec::gaussian(o.number("sigma"), seed);
  else if (kind == "poisson") n = NoiseSpec::poisson(o.positive("photons"), seed);
  else if (kind == "background") n = NoiseSpec::background(o.number("offset"), o.number("sigma", 0.0), seed);
  else ConfigObject::fail(o.at("kind"), "must be none, gaussian, poisson or background");
  if (n.sigma < 0.0) ConfigObject::fail(o.at("sigma"), "must be nonnegative");
  if (n.offset < 0.0) ConfigObject::fail(o.at("offset"), "must be nonnegative");
  n.seed = seed;
  o.finish();
  return n;
}

inline ReconstructionConfig read_reconstruction(ConfigObject o) {
  ReconstructionConfig r;
  if (o.has("methods")) {
    r.ml = r.linear = false;
    for (const auto& m : o.array("methods")) {
      if (m == "ml") r.ml = true;
      else if (m == "linear") r.linear = true;
      else ConfigObject::fail(o.at("methods"), "entries must be \"ml\" or \"linear\"");
    }
  }
  r.ml_options.tol = o.positive("tol", r.ml_options.tol);
  r.ml_options.max_iter = o.count("max_iter", r.ml_options.max_iter);
  r.ml_options.probability_floor = o.positive("probability_floor", r.ml_options.probability_floor);
  r.rank_threshold = o.positive("rank_threshold", r.rank_threshold);
  r.range_threshold = o.positive("range_threshold", r.range_threshold);
  if (r.range_threshold > 1.0) ConfigObject::fail(o.at("range_threshold"), "must lie in (0, 1]");
  o.finish();
  return r;
}

inline Grid2D read_grid(ConfigObject o) {
  const auto n = o.count("points");
  if (n == 0) ConfigObject::fail(o.at("points"), "must be positive");
  const Grid2D g = Grid2D::centered(n, o.positive("extent_mm"));
  o.finish();
  return g;
}

inline ResponseKernel read_plane(ConfigObject o, double wavelength) {
  ResponseKernel k;
  const std::string type = o.string("type");
  if (type == "fraunhofer") {
    k.kind = ResponseKernel::Kind::Fraunhofer;
    k.distance = o.positive("f_mm");
  } else if (type == "fresnel") {
    k.kind = ResponseKernel::Kind::Fresnel;
    k.distance = o.positive("distance_mm");
  } else {
    ConfigObject::fail(o.at("type"), "must be \"fraunhofer\" or \"fresnel\"");
  }
  k.wavelength = wavelength;
  k.source = read_grid(o.object("source"));
  k.output = read_grid(o.object("output"));
  o.finish();
  return k;
}

}  // namespace detail

inline constexpr int kConfigSchema = 1;

/// Parses and validates a scenario. Every problem, including errors raised while
/// building the basis or sensor, surfaces as ConfigError.
inline ScenarioConfig parse_config(const nlohmann::json& j) {
  using detail::ConfigObject;
  try {
    ConfigObject root(j, "");
    const auto schema = root.count("schema");
    if (schema != kConfigSchema) ConfigObject::fail("schema", "unsupported version " + std::to_string(schema));
    const std::uint64_t seed = root.count("seed", 0);
    const double wavelength = root.positive("wavelength_nm") * 1e-6;
    ModeBasis basis = detail::read_basis(root.object("basis"), wavelength);
    ScenarioConfig cfg{seed, wavelength, basis, {}, {}, {}, {}, {}};
    cfg.state = detail::read_state(root.object("state"), basis.dim());
    cfg.sensor = detail::read_sensor(root.object("sensor"), wavelength);
    cfg.noise = root.has("noise") ? detail::read_noise(root.object("noise"), seed) : NoiseSpec::none();
    if (root.has("reconstruction")) cfg.reconstruction = detail::read_reconstruction(root.object("reconstruction"));
    if (root.has("plane")) cfg.plane = detail::read_plane(root.object("plane"), wavelength);
    root.finish();
    // construct once so geometric and state problems are reported as config errors
    (void)SensorGeometry(cfg.sensor);
    (void)coherence_from_mixture(cfg.state, cfg.basis);
    if (cfg.plane) cfg.plane->validate();
    return cfg;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string(e.kind()) + ": " + e.what());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
}

inline ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return parse_config(j);
}

/// An error annotated with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, std::string kind, const std::string& message, bool config)
      : Error(message), stage_(std::move(stage)), kind_(std::move(kind)), config_(config) {}
  const char* kind() const noexcept override { return kind_.c_str(); }
  const std::string& stage() const { return stage_; }
  bool is_config_error() const { return config_; }

 private:
  std::string stage_;
  std::string kind_;
  bool config_;
};

template <class F>
auto run_stage(const std::string& stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const ConfigError& e) {
    throw StageError(stage, e.kind(), e.what(), true);
  } catch (const Error& e) {
    throw StageError(stage, e.kind(), e.what(), false);
  } catch (const std::exception& e) {
    throw StageError(stage, "InternalError", e.what(), false);
  }
}

struct SvdAnalysis {
  TomographyMatrix matrix;
  SingularSpectrum spectrum;
  std::size_t rank = 0;
  DynamicalRange range;
  std::vector<NullDirection> missing;
};

struct FarFieldComparison {
  IntensityMap direct;
  IntensityMap tomographic;
  IntensityMap standard;
  double c_tomo = 0.0;
  double c_std = 0.0;
  SlopeField slopes;
  Wavefront wavefront;
};

/// The pipeline stages over one validated config.
class Scenario {
 public:
  explicit Scenario(ScenarioConfig cfg)
      : cfg_(std::move(cfg)),
        geom_(cfg_.sensor),
        truth_(coherence_from_mixture(cfg_.state, cfg_.basis)),
        hb_(cfg_.basis.dim()) {}

  const ScenarioConfig& config() const { return cfg_; }
  const SensorGeometry& geometry() const { return geom_; }
  const CoherenceMatrix& truth() const { return truth_; }
  const HermitianBasis& hermitian() const { return hb_; }

  const PovmSet& povms() {
    if (!povms_) povms_ = run_stage("sensor", [&] { return PovmSet::from_sensor(cfg_.basis, geom_); });
    return *povms_;
  }

  IntensityRecord simulate() {
    const PovmSet& p = povms();
    return run_stage("simulate", [&] { return simulate_intensities(truth_, geom_, p, cfg_.noise); });
  }

  SvdAnalysis analyze() {
    const PovmSet& p = povms();
    return run_stage("analyze-svd", [&] {
      SvdAnalysis a{build_tomography_matrix(p, hb_), {}, 0, {}, {}};
      a.spectrum = singular_spectrum(a.matrix);
      a.rank = a.spectrum.numerical_rank(cfg_.reconstruction.rank_threshold);
      a.range = dynamical_range(a.spectrum, cfg_.reconstruction.range_threshold);
      a.missing = unobservable_directions(a.spectrum, hb_, cfg_.reconstruction.rank_threshold);
      return a;
    });
  }

  ReconstructionResult reconstruct_ml(const IntensityRecord& data) {
    check_record(data);
    const PovmSet& p = povms();
    return run_stage("reconstruct", [&] {
      MlOptions o = cfg_.reconstruction.ml_options;
      o.reference = truth_.rho();
      return ml_reconstruct(data.values, p, cfg_.basis, o);
    });
  }

  LinearReconstruction reconstruct_linear(const IntensityRecord& data, const SvdAnalysis& svd) {
    check_record(data);
    return run_stage("reconstruct", [&] {
      return linear_reconstruct(data.values, svd.spectrum, hb_, cfg_.basis, cfg_.reconstruction.rank_threshold);
    });
  }

  const ResponseKernel& plane() const {
    if (!cfg_.plane) throw StageError("propagate", "ConfigError", "config has no propagation plane", true);
    return *cfg_.plane;
  }

  const PropagatedModes& modes() {
    const ResponseKernel& k = plane();
    if (!modes_) modes_ = run_stage("propagate", [&] { return propagate_modes(cfg_.basis, k); });
    return *modes_;
  }

  IntensityMap propagate(const CMatrix& rho) {
    const PropagatedModes& m = modes();
    return run_stage("propagate", [&] { return far_field_intensity(rho, m); });
  }

  FarFieldComparison compare(const IntensityRecord& data, const CoherenceMatrix& estimate) {
    const ResponseKernel& k = plane();
    FarFieldComparison c{propagate(truth_.rho()), propagate(estimate.rho()), {}, 0.0, 0.0, {}, {}};
    run_stage("compare", [&] {
      c.slopes = centroid_slopes(data, geom_);
      c.wavefront = reconstruct_wavefront(c.slopes, geom_);
      c.standard = standard_far_field(c.slopes, c.wavefront, geom_, k);
      c.c_tomo = correlation_coefficient(c.tomographic, c.direct);
      c.c_std = correlation_coefficient(c.standard, c.direct);
      return 0;
    });
    return c;
  }

 private:
  void check_record(const IntensityRecord& data) const {
    if (data.lenses != geom_.lens_count() || data.pixels_per_lens() != geom_.pixel_count())
      throw StageError("reconstruct", "DimensionError",
                       "intensity data has " + std::to_string(data.lenses) + " lenses x " +
                           std::to_string(data.pixels_per_lens()) + " pixels, sensor has " +
                           std::to_string(geom_.lens_count()) + " x " + std::to_string(geom_.pixel_count()),
                       true);
  }

  ScenarioConfig cfg_;
  SensorGeometry geom_;
  CoherenceMatrix truth_;
  HermitianBasis hb_;
  std::optional<PovmSet> povms_;
  std::optional<PropagatedModes> modes_;
};

// ---- report sections ----

using Report = nlohmann::ordered_json;

inline Report new_report(const std::string& verb, const ScenarioConfig& cfg) {
  Report r;
  r["schema"] = 1;
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  r["generated_at"] = stamp;
  r["command"] = verb;
  r["seed"] = cfg.seed;
  Report basis;
  basis["kind"] = cfg.basis.kind() == BasisKind::Vortex ? "vortex" : "plane_wave";
  basis["dimension"] = cfg.basis.dim();
  Report labels = Report::array();
  for (std::size_t k = 0; k < cfg.basis.dim(); ++k) labels.push_back(cfg.basis.label(k));
  basis["labels"] = labels;
  r["basis"] = basis;
  return r;
}

inline Report simulation_section(const IntensityRecord& rec, const ScenarioConfig& cfg) {
  Report s;
  s["lenses"] = rec.lenses;
  s["pixels_per_lens"] = rec.pixels_per_lens();
  s["samples"] = rec.values.size();
  s["noise"] = cfg.noise.name();
  s["total_intensity"] = rec.total();
  Report power = Report::array();
  for (std::size_t i = 0; i < rec.lenses; ++i) power.push_back(rec.lens_power(i));
  s["lens_power"] = power;
  return s;
}

inline Report svd_section(const SvdAnalysis& a, std::size_t d) {
  Report s;
  s["rank"] = a.rank;
  s["parameters"] = d * d;
  s["informationally_complete"] = a.rank == d * d;
  Report spec = Report::array();
  const RVector n = a.spectrum.normalized();
  for (Eigen::Index k = 0; k < n.size(); ++k) spec.push_back(n(k));
  s["largest_singular_value"] = a.spectrum.largest();
  s["normalized_spectrum"] = spec;
  s["dynamical_range"] = {{"threshold", a.range.threshold}, {"count", a.range.count}};
  Report miss = Report::array();
  for (const NullDirection& nd : a.missing) miss.push_back({{"label", nd.dominant_label}, {"alignment", nd.alignment}});
  s["missing_directions"] = miss;
  return s;
}

inline Report ml_section(const ReconstructionResult& r) {
  Report s;
  if (r.fidelity) s["fidelity"] = *r.fidelity;
  s["purity"] = purity(r.rho_hat);
  s["iterations"] = r.iterations;
  s["converged"] = r.converged;
  s["convergence_delta"] = r.convergence_delta;
  s["log_likelihood"] = r.log_likelihood;
  s["diluted_steps"] = r.diluted_steps;
  s["warnings"] = r.warnings;
  return s;
}

inline Report linear_section(const LinearReconstruction& r, const CoherenceMatrix& truth) {
  Report s;
  s["fidelity"] = fidelity(r.rho, truth);
  s["purity"] = purity(r.rho);
  s["rank_used"] = r.rank;
  s["projection_shift"] = r.projection_shift;
  return s;
}

inline Report far_field_section(const FarFieldComparison& c) {
  Report s;
  s["c_tomo"] = c.c_tomo;
  s["c_std"] = c.c_std;
  s["valid_lenses"] = c.slopes.valid_count();
  s["wavefront_relative_residual"] = c.wavefront.relative_residual;
  return s;
}

/// Flattens a report into "path,value" lines.
inline void write_report_csv(std::ostream& os, const Report& r, const std::string& prefix = "") {
  if (prefix.empty()) os << "key,value\n";
  if (r.is_object()) {
    for (auto it = r.begin(); it != r.end(); ++it)
      write_report_csv(os, it.value(), prefix.empty() ? it.key() : prefix + "." + it.key());
  } else if (r.is_array()) {
    for (std::size_t k = 0; k < r.size(); ++k) write_report_csv(os, r[k], prefix + "[" + std::to_string(k) + "]");
  } else {
    std::string v = r.is_string() ? r.get<std::string>() : r.dump();
    if (v.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
      v = q + "\"";
    }
    os << prefix << ',' << v << '\n';
  }
}

/// Files written by one invocation; removed again unless committed.
class ArtifactSet {
 public:
  explicit ArtifactSet(std::filesystem::path dir) : dir_(std::move(dir)) {}
  ArtifactSet(const ArtifactSet&) = delete;
  ArtifactSet& operator=(const ArtifactSet&) = delete;
  ~ArtifactSet() {
    if (committed_) return;
    std::error_code ec;
    for (const auto& p : written_) std::filesystem::remove(p, ec);
    if (created_dir_) std::filesystem::remove(dir_, ec);  // only succeeds when empty
  }

  std::filesystem::path path(const std::string& name) {
    if (!std::filesystem::exists(dir_)) {
      std::filesystem::create_directories(dir_);
      created_dir_ = true;
    }
    const auto p = dir_ / name;
    written_.push_back(p);
    return p;
  }

  template <class F>
  void write(const std::string& name, F&& body, bool binary = false) {
    std::ofstream out = io::open_output(path(name).string(), binary);
    body(out);
    if (!out) throw ArgumentError("failed writing " + name);
  }

  void commit() { committed_ = true; }
  const std::vector<std::filesystem::path>& written() const { return written_; }

 private:
  std::filesystem::path dir_;
  std::vector<std::filesystem::path> written_;
  bool created_dir_ = false;
  bool committed_ = false;
};

}  // namespace shtomo
