#pragma once

/// \file
/// Structured-text operator specs and reports (JSON), binary grid fields and
/// CSV profiles.

#include "bvb/ellipticity.hpp"
#include "bvb/field.hpp"
#include "bvb/jump.hpp"
#include "bvb/linearize.hpp"
#include "bvb/projection.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace bvb {

using Json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";

/// Malformed input document; the message names the offending field.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

inline Json matrix_to_json(const RealMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vector_to_json(const RealVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Json complex_vector_to_json(const ComplexVector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

inline Json operator_to_json(const DiffOperator& op) {
  Json coeffs = Json::array();
  for (const auto& [alpha, b] : op.coefficients()) {
    coeffs.push_back({{"alpha", alpha.entries()}, {"matrix", matrix_to_json(b)}});
  }
  return {{"n", op.n()},
          {"k", op.order()},
          {"dimV", op.dim_v()},
          {"dimW", op.dim_w()},
          {"coefficients", std::move(coeffs)}};
}

namespace detail {

inline const Json& require(const Json& doc, const std::string& key, const std::string& where) {
  if (!doc.is_object() || !doc.contains(key)) throw SpecError(where + ": missing field '" + key + "'");
  return doc.at(key);
}

inline int require_int(const Json& doc, const std::string& key, const std::string& where) {
  const Json& v = require(doc, key, where);
  if (!v.is_number_integer()) throw SpecError(where + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

inline RealMatrix parse_matrix(const Json& v, int rows, int cols, const std::string& where) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows) {
    throw SpecError(where + ": expected " + std::to_string(rows) + " rows");
  }
  RealMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != cols) {
      throw SpecError(where + "[" + std::to_string(i) + "]: expected " + std::to_string(cols) + " columns");
    }
    for (int j = 0; j < cols; ++j) {
      if (!v[i][j].is_number()) {
        throw SpecError(where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]: not a number");
      }
      m(i, j) = v[i][j].get<double>();
    }
  }
  return m;
}

}  // namespace detail

/// Accepts either inline coefficients {n, k, dimV, dimW, coefficients} or a
/// catalog reference {catalog, n[, order][, coordinates]}, never both.
inline DiffOperator operator_from_json(const Json& doc) {
  if (!doc.is_object()) throw SpecError("operator spec: document must be an object");
  const bool has_catalog = doc.contains("catalog");
  const bool has_inline = doc.contains("coefficients");
  if (has_catalog == has_inline) {
    throw SpecError("operator spec: exactly one of 'catalog' or 'coefficients' is required");
  }
  const int n = detail::require_int(doc, "n", "operator spec");
  try {
    if (has_catalog) {
      if (!doc.at("catalog").is_string()) throw SpecError("operator spec: field 'catalog' must be a string");
      const int order = doc.contains("order") ? detail::require_int(doc, "order", "operator spec") : 1;
      Coordinates coords = Coordinates::orthonormal;
      if (doc.contains("coordinates")) {
        const auto& c = doc.at("coordinates");
        if (c == "dyadic") {
          coords = Coordinates::dyadic;
        } else if (c != "orthonormal") {
          throw SpecError("operator spec: field 'coordinates' must be 'orthonormal' or 'dyadic'");
        }
      }
      return catalog(doc.at("catalog").get<std::string>(), n, coords, order);
    }
    const int k = detail::require_int(doc, "k", "operator spec");
    const int dv = detail::require_int(doc, "dimV", "operator spec");
    const int dw = detail::require_int(doc, "dimW", "operator spec");
    const Json& list = doc.at("coefficients");
    if (!list.is_array()) throw SpecError("operator spec: field 'coefficients' must be an array");
    DiffOperator::CoefficientMap coeffs;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "coefficients[" + std::to_string(i) + "]";
      const Json& alpha = detail::require(list[i], "alpha", where);
      if (!alpha.is_array()) throw SpecError(where + ".alpha: must be an array of integers");
      std::vector<int> entries;
      for (const auto& e : alpha) {
        if (!e.is_number_integer()) throw SpecError(where + ".alpha: must be an array of integers");
        entries.push_back(e.get<int>());
      }
      MultiIndex a(entries);
      const RealMatrix m = detail::parse_matrix(detail::require(list[i], "matrix", where), dw, dv,
                                                where + ".matrix");
      if (!coeffs.emplace(a, m).second) throw SpecError(where + ".alpha: duplicate multi-index");
    }
    return DiffOperator(n, k, dv, dw, std::move(coeffs));
  } catch (const SpecError&) {
    throw;
  } catch (const std::exception& e) {
    throw SpecError(std::string("operator spec: ") + e.what());
  }
}

inline DiffOperator operator_from_text(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw SpecError(std::string("operator spec: not valid JSON: ") + e.what());
  }
  return operator_from_json(doc);
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

/// Digest of the canonical serialisation.
inline std::string digest(const Json& doc) { return hex64(fnv1a64(doc.dump())); }

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

inline Json to_json(const EllipticityReport& r) {
  return {{"constant", r.constant},
          {"elliptic", r.elliptic},
          {"minimizer_xi", vector_to_json(r.minimizer_xi)},
          {"threshold", r.threshold},
          {"samples", r.samples},
          {"resolution", r.resolution},
          {"refine_steps", r.refine_steps}};
}

inline Json to_json(const EllBound& b) {
  Json out;
  out["ell"] = b.ell ? Json(*b.ell) : Json(nullptr);
  out["nullspace_dims"] = b.dims;
  return out;
}

inline Json to_json(const CEllipticityReport& r) {
  Json out;
  out["decision"] = to_string(r.decision);
  out["nullspace"] = to_json(r.nullspace);
  out["d_max"] = r.d_max;
  out["restarts"] = r.restarts;
  out["seed"] = r.seed;
  if (r.witness) {
    out["witness"] = {{"xi", complex_vector_to_json(r.witness->xi)},
                      {"v", complex_vector_to_json(r.witness->v)},
                      {"residual", r.witness->residual}};
  } else {
    out["witness"] = nullptr;
  }
  return out;
}

inline Json to_json(const MixingReport& r) {
  Json dims = Json::object();
  for (const auto& [d, c] : r.triple_dims) dims[std::to_string(d)] = c;
  Json out{{"status", to_string(r.status)}, {"triple_dims", dims}, {"trials", r.trials},
           {"hyperplanes", r.hyperplanes},  {"xi_grid", r.xi_grid}, {"seed", r.seed}};
  if (r.witness) {
    out["witness"] = {{"w", vector_to_json(r.witness->w)},
                      {"hyperplane_normal", vector_to_json(r.witness->hyperplane_normal)},
                      {"max_residual", r.witness->max_residual}};
  }
  return out;
}

inline Json to_json(const JumpTriple& t) {
  return {{"a", vector_to_json(t.a)}, {"b", vector_to_json(t.b)}, {"nu", vector_to_json(t.nu)}};
}

inline Json to_json(const DensityProfile& p) {
  return {{"center", vector_to_json(p.center)}, {"radii", p.radii}, {"values", p.values}};
}

inline Json to_json(const StructureReport& r) {
  return {{"measured", vector_to_json(r.measured)}, {"expected", vector_to_json(r.expected)},
          {"relative_error", r.relative_error},     {"area", r.area},
          {"tube_cells", r.tube_cells},             {"h", r.h}};
}

inline Json to_json(const QuasiContinuityReport& r) {
  Json rows = Json::array();
  for (const auto& e : r.entries) {
    rows.push_back({{"r", e.r},
                    {"numerator", e.numerator},
                    {"denominator", e.denominator},
                    {"ratio", e.ratio},
                    {"degenerate", e.degenerate}});
  }
  return {{"ell", r.ell}, {"entries", std::move(rows)}};
}

// ---------------------------------------------------------------------------
// Binary grid fields
// ---------------------------------------------------------------------------

inline constexpr char kGridMagic[8] = {'B', 'V', 'B', 'G', 'R', 'I', 'D', '\0'};
inline constexpr std::uint32_t kGridVersion = 1;

namespace detail {

template <typename T>
void put_le(std::ostream& os, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  os.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(bytes), sizeof(T))) {
    throw std::runtime_error("grid field: truncated input");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace detail

/// 16-byte prefix (8-byte magic, u32 version, u32 reserved), header
/// (i32 n, f64 lo, f64 hi, f64 h, i32 dimV), then row-major f64 values.
inline void write_grid_field(std::ostream& os, const GridField& f) {
  os.write(kGridMagic, sizeof(kGridMagic));
  detail::put_le<std::uint32_t>(os, kGridVersion);
  detail::put_le<std::uint32_t>(os, 0);
  const auto& g = f.grid();
  detail::put_le<std::int32_t>(os, g.n());
  detail::put_le<double>(os, g.lo());
  detail::put_le<double>(os, g.hi());
  detail::put_le<double>(os, g.h());
  detail::put_le<std::int32_t>(os, f.dim_v());
  for (double v : f.raw()) detail::put_le<double>(os, v);
}

inline GridField read_grid_field(std::istream& is) {
  char magic[sizeof(kGridMagic)];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kGridMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("grid field: bad magic");
  }
  if (detail::get_le<std::uint32_t>(is) != kGridVersion) {
    throw std::runtime_error("grid field: unsupported version");
  }
  detail::get_le<std::uint32_t>(is);
  const int n = detail::get_le<std::int32_t>(is);
  const double lo = detail::get_le<double>(is);
  const double hi = detail::get_le<double>(is);
  const double h = detail::get_le<double>(is);
  const int dv = detail::get_le<std::int32_t>(is);
  GridField f(Grid(n, lo, hi, h), dv);
  RealVector v(dv);
  for (std::size_t c = 0; c < f.grid().cell_count(); ++c) {
    for (int j = 0; j < dv; ++j) v(j) = detail::get_le<double>(is);
    f.set_value(c, v);
  }
  return f;
}

inline void save_grid_field(const std::string& path, const GridField& f) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_grid_field(os, f);
}

inline GridField load_grid_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_grid_field(is);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

inline void write_profile_csv(std::ostream& os, const std::vector<double>& radii,
                              const std::vector<double>& values) {
  if (radii.size() != values.size()) throw std::invalid_argument("write_profile_csv: length mismatch");
  os << "r,value\n" << std::setprecision(17);
  for (std::size_t i = 0; i < radii.size(); ++i) os << radii[i] << ',' << values[i] << '\n';
}

inline std::pair<std::vector<double>, std::vector<double>> read_profile_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "r,value") throw std::runtime_error("profile csv: bad header");
  std::vector<double> r, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("profile csv: malformed row");
    r.push_back(std::stod(line.substr(0, comma)));
    v.push_back(std::stod(line.substr(comma + 1)));
  }
  return {r, v};
}

}  // namespace bvb
