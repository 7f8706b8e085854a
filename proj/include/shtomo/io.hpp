#pragma once

// Serialization of intensity records, coherence matrices, spectra and maps.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shtomo/errors.hpp"
#include "shtomo/field_model.hpp"
#include "shtomo/propagation.hpp"
#include "shtomo/sensor.hpp"
#include "shtomo/tomography.hpp"

namespace shtomo::io {

using nlohmann::json;

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline std::ofstream open_output(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw ArgumentError("cannot write " + path);
  return out;
}

/// CSV with header lens,pixel_u,pixel_v,value.
inline void write_intensity_csv(std::ostream& os, const IntensityRecord& rec) {
  os << "lens,pixel_u,pixel_v,value\n";
  for (std::size_t i = 0; i < rec.lenses; ++i)
    for (std::size_t j = 0; j < rec.pixels_per_lens(); ++j)
      os << i << ',' << j % rec.pixels_u << ',' << j / rec.pixels_u << ',' << format_double(rec.value(i, j)) << '\n';
}

inline IntensityRecord read_intensity_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("lens,pixel_u,pixel_v,value", 0) != 0)
    throw ConfigError("intensity CSV must start with the header lens,pixel_u,pixel_v,value");
  struct Row {
    std::size_t lens, u, v;
    double value;
  };
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    Row r{};
    if (!(ls >> r.lens >> r.u >> r.v >> r.value)) throw ConfigError("malformed intensity CSV line " + std::to_string(lineno));
    rows.push_back(r);
  }
  if (rows.empty()) throw ConfigError("intensity CSV has no samples");
  IntensityRecord rec;
  for (const Row& r : rows) {
    rec.lenses = std::max(rec.lenses, r.lens + 1);
    rec.pixels_u = std::max(rec.pixels_u, r.u + 1);
    rec.pixels_v = std::max(rec.pixels_v, r.v + 1);
  }
  if (rows.size() != rec.lenses * rec.pixels_u * rec.pixels_v)
    throw ConfigError("intensity CSV does not cover a full lens x pixel grid");
  rec.values.assign(rows.size(), 0.0);
  std::vector<bool> seen(rows.size(), false);
  for (const Row& r : rows) {
    const std::size_t k = r.lens * rec.pixels_per_lens() + r.v * rec.pixels_u + r.u;
    if (seen[k]) throw ConfigError("intensity CSV repeats a sample");
    seen[k] = true;
    rec.values[k] = r.value;
  }
  return rec;
}

/// Binary 16-bit PGM (P5, big-endian), scaled so the maximum maps to 65535.
/// rows(r) x cols(c) is read through value(r, c).
template <class F>
void write_pgm16(std::ostream& os, std::size_t rows, std::size_t cols, F value) {
  double peak = 0.0;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) peak = std::max(peak, value(r, c));
  os << "P5\n" << cols << ' ' << rows << "\n65535\n";
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = peak > 0.0 ? std::clamp(value(r, c) / peak, 0.0, 1.0) : 0.0;
      const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
      os.put(static_cast<char>(q >> 8));
      os.put(static_cast<char>(q & 0xff));
    }
}

/// Spot image of one lens; image rows run along v.
inline void write_lens_pgm(std::ostream& os, const IntensityRecord& rec, std::size_t lens) {
  write_pgm16(os, rec.pixels_v, rec.pixels_u,
              [&](std::size_t r, std::size_t c) { return rec.value(lens, r * rec.pixels_u + c); });
}

/// Image rows run along y.
inline void write_map_pgm(std::ostream& os, const IntensityMap& m) {
  write_pgm16(os, m.grid.ny, m.grid.nx, [&](std::size_t r, std::size_t c) {
    return m.values(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r));
  });
}

/// CSV with header x_mm,y_mm,value.
inline void write_map_csv(std::ostream& os, const IntensityMap& m) {
  os << "x_mm,y_mm,value\n";
  for (std::size_t j = 0; j < m.grid.ny; ++j)
    for (std::size_t i = 0; i < m.grid.nx; ++i)
      os << format_double(m.grid.x(i)) << ',' << format_double(m.grid.y(j)) << ','
         << format_double(m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) << '\n';
}

/// CSV with header k,singular_value,normalized.
inline void write_spectrum_csv(std::ostream& os, const SingularSpectrum& s) {
  os << "k,singular_value,normalized\n";
  const RVector n = s.normalized();
  for (Eigen::Index k = 0; k < s.values.size(); ++k)
    os << k << ',' << format_double(s.values(k)) << ',' << format_double(n(k)) << '\n';
}

inline void write_matrix_csv(std::ostream& os, const RMatrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) os << (c ? "," : "") << format_double(m(r, c));
    os << '\n';
  }
}

inline json basis_to_json(const ModeBasis& b) {
  json j;
  j["wavelength_mm"] = b.wavelength();
  json labels = json::array();
  for (std::size_t k = 0; k < b.dim(); ++k) labels.push_back(b.label(k));
  j["labels"] = labels;
  if (b.kind() == BasisKind::Vortex) {
    j["kind"] = "vortex";
    j["charges"] = b.charges();
    j["waist_mm"] = b.waist();
  } else {
    j["kind"] = "plane_wave";
    json p = json::array();
    for (const Point& q : b.momenta()) p.push_back({q.x, q.y});
    j["momenta_per_mm"] = p;
  }
  return j;
}

inline ModeBasis basis_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind");
    const double lam = j.at("wavelength_mm");
    if (kind == "vortex") return ModeBasis::vortex(j.at("charges").get<std::vector<int>>(), j.at("waist_mm"), lam);
    if (kind == "plane_wave") {
      std::vector<Point> p;
      for (const auto& q : j.at("momenta_per_mm")) p.push_back({q.at(0).get<double>(), q.at(1).get<double>()});
      return ModeBasis::plane_waves(std::move(p), lam);
    }
    throw ConfigError("unknown basis kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed basis: ") + e.what());
  }
}

/// {"d", "basis", "rho": row-major [[re, im], ...]}.
inline json coherence_to_json(const CoherenceMatrix& rho) {
  json entries = json::array();
  for (Eigen::Index r = 0; r < rho.rho().rows(); ++r)
    for (Eigen::Index c = 0; c < rho.rho().cols(); ++c) entries.push_back({rho.rho()(r, c).real(), rho.rho()(r, c).imag()});
  return {{"d", rho.dim()}, {"basis", basis_to_json(rho.basis())}, {"rho", entries}};
}

inline CoherenceMatrix coherence_from_json(const json& j) {
  try {
    const ModeBasis basis = basis_from_json(j.at("basis"));
    const auto d = j.at("d").get<std::size_t>();
    const auto& e = j.at("rho");
    if (d != basis.dim() || e.size() != d * d) throw DimensionError("coherence matrix size does not match d");
    CMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t k = 0; k < d * d; ++k)
      m(static_cast<Eigen::Index>(k / d), static_cast<Eigen::Index>(k % d)) = {e[k].at(0).get<double>(), e[k].at(1).get<double>()};
    return CoherenceMatrix(m, basis);
  } catch (const json::exception& ex) {
    throw ConfigError(std::string("malformed coherence matrix: ") + ex.what());
  }
}

}  // namespace shtomo::io
