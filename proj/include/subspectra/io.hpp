#pragma once

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "subspectra/bounds.hpp"
#include "subspectra/model.hpp"
#include "subspectra/protocol.hpp"
#include "subspectra/synth.hpp"
#include "subspectra/types.hpp"

// File formats.  Writers emit every floating-point value through one
// 17-significant-digit formatter so repeated runs produce byte-identical
// files; readers parse with nlohmann::json and reject unknown keys, so a
// typo in a config surfaces as an error instead of a silently ignored field.

namespace subspectra {

inline std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace detail {

inline std::string json_number(double value) {
  if (!std::isfinite(value)) throw IoFailure("json output: value is not finite");
  return format_double(value);
}

inline void append_real_array(std::string& out, const std::vector<double>& values) {
  out += '[';
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ',';
    out += json_number(values[k]);
  }
  out += ']';
}

template <typename Derived>
void append_matrix_part(std::string& out, const Eigen::MatrixBase<Derived>& m, bool real_part) {
  out += '[';
  for (Index r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    out += '[';
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out += ',';
      const std::complex<double> z = static_cast<std::complex<double>>(m(r, c));
      out += json_number(real_part ? z.real() : z.imag());
    }
    out += ']';
  }
  out += ']';
}

template <typename Derived>
void append_complex_matrix(std::string& out, const Eigen::MatrixBase<Derived>& m) {
  out += "{\"re\":";
  append_matrix_part(out, m, true);
  out += ",\"im\":";
  append_matrix_part(out, m, false);
  out += '}';
}

inline void require_keys(const nlohmann::json& j, std::string_view where,
                         std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidSpec(std::string(where) + ": expected a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw InvalidSpec(std::string(where) + ": unknown key \"" + it.key() + "\"");
  }
}

inline double as_number(const nlohmann::json& j, std::string_view where) {
  if (!j.is_number()) throw InvalidSpec(std::string(where) + ": expected a number");
  return j.get<double>();
}

inline std::vector<double> as_number_array(const nlohmann::json& j, std::string_view where) {
  if (!j.is_array()) throw InvalidSpec(std::string(where) + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(as_number(e, where));
  return out;
}

inline std::vector<std::vector<double>> as_number_grid(const nlohmann::json& j,
                                                       std::string_view where) {
  if (!j.is_array() || j.empty())
    throw InvalidSpec(std::string(where) + ": expected a nonempty array of rows");
  std::vector<std::vector<double>> grid;
  grid.reserve(j.size());
  for (const auto& row : j) {
    grid.push_back(as_number_array(row, where));
    if (grid.back().size() != grid.front().size() || grid.back().empty())
      throw InvalidSpec(std::string(where) + ": rows must be nonempty and equal-length");
  }
  return grid;
}

template <typename Real>
ComplexMatrix<Real> as_complex_matrix(const nlohmann::json& j, std::string_view where) {
  require_keys(j, where, {"re", "im"});
  if (!j.contains("re") || !j.contains("im"))
    throw InvalidSpec(std::string(where) + ": need both \"re\" and \"im\"");
  const auto re = as_number_grid(j.at("re"), where);
  const auto im = as_number_grid(j.at("im"), where);
  if (re.size() != im.size() || re.front().size() != im.front().size())
    throw InvalidSpec(std::string(where) + ": \"re\" and \"im\" shapes differ");
  ComplexMatrix<Real> m(static_cast<Index>(re.size()), static_cast<Index>(re.front().size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = Complex<Real>(static_cast<Real>(re[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]),
                              static_cast<Real>(im[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]));
  return m;
}

}  // namespace detail

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoFailure("cannot open for reading: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) throw IoFailure("read failed: " + path);
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoFailure("cannot open for writing: " + path);
  out << content;
  out.flush();
  if (!out.good()) throw IoFailure("write failed: " + path);
}

inline nlohmann::json parse_json(const std::string& text, const std::string& origin) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw IoFailure("invalid JSON in " + origin);
  return j;
}

inline nlohmann::json read_json_file(const std::string& path) {
  return parse_json(read_text_file(path), path);
}

// ---- model.json: {"atoms": [..]} -------------------------------------------

template <typename Real>
std::string write_model(const DiscreteSpectralModel<Real>& model) {
  std::string out = "{\"atoms\":";
  std::vector<double> atoms(model.atoms().begin(), model.atoms().end());
  detail::append_real_array(out, atoms);
  out += "}\n";
  return out;
}

template <typename Real>
DiscreteSpectralModel<Real> read_model(const nlohmann::json& j) {
  detail::require_keys(j, "model", {"atoms"});
  if (!j.contains("atoms")) throw InvalidSpec("model: missing \"atoms\"");
  const auto atoms = detail::as_number_array(j.at("atoms"), "model.atoms");
  return DiscreteSpectralModel<Real>(std::vector<Real>(atoms.begin(), atoms.end()));
}

// ---- subspace.json: {"indices": [..]} or {"interval": [lo, hi]} ------------

template <typename Real>
std::string write_subspace(const SpectralSubspace<Real>& subspace) {
  std::string out;
  if (subspace.interval_form()) {
    out = "{\"interval\":[" + detail::json_number(static_cast<double>(subspace.interval_lo())) +
          ',' + detail::json_number(static_cast<double>(subspace.interval_hi())) + "]}\n";
    return out;
  }
  out = "{\"indices\":[";
  const auto& idx = subspace.indices();
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k) out += ',';
    out += std::to_string(idx[k]);
  }
  out += "]}\n";
  return out;
}

template <typename Real>
SpectralSubspace<Real> read_subspace(const nlohmann::json& j) {
  detail::require_keys(j, "subspace", {"indices", "interval"});
  const bool has_idx = j.contains("indices");
  const bool has_iv = j.contains("interval");
  if (has_idx == has_iv)
    throw InvalidSpec("subspace: need exactly one of \"indices\" or \"interval\"");
  if (has_iv) {
    const auto iv = detail::as_number_array(j.at("interval"), "subspace.interval");
    if (iv.size() != 2) throw InvalidSpec("subspace.interval: expected [lo, hi]");
    return SpectralSubspace<Real>::from_interval(static_cast<Real>(iv[0]),
                                                 static_cast<Real>(iv[1]));
  }
  if (!j.at("indices").is_array()) throw InvalidSpec("subspace.indices: expected an array");
  std::vector<Index> indices;
  for (const auto& e : j.at("indices")) {
    if (!e.is_number_integer()) throw InvalidSpec("subspace.indices: expected integers");
    indices.push_back(e.get<Index>());
  }
  return SpectralSubspace<Real>::from_indices(std::move(indices));
}

// ---- trial.json: {"re": [[..]], "im": [[..]]}, rows = model, cols = trials -

template <typename Real>
std::string write_trial(const TrialMap<Real>& v) {
  std::string out;
  detail::append_complex_matrix(out, v);
  out += '\n';
  return out;
}

template <typename Real>
TrialMap<Real> read_trial(const nlohmann::json& j) {
  return detail::as_complex_matrix<Real>(j, "trial");
}

// ---- delta.json: {"dA": {re, im}, "dB": {re, im}} --------------------------

template <typename Real>
std::string write_delta(const HermitianMatrix<Real>& dA, const HermitianMatrix<Real>& dB) {
  std::string out = "{\"dA\":";
  detail::append_complex_matrix(out, dA.matrix());
  out += ",\"dB\":";
  detail::append_complex_matrix(out, dB.matrix());
  out += "}\n";
  return out;
}

template <typename Real>
std::pair<HermitianMatrix<Real>, HermitianMatrix<Real>> read_delta(const nlohmann::json& j) {
  detail::require_keys(j, "delta", {"dA", "dB"});
  if (!j.contains("dA") || !j.contains("dB"))
    throw InvalidSpec("delta: need both \"dA\" and \"dB\"");
  return {HermitianMatrix<Real>(detail::as_complex_matrix<Real>(j.at("dA"), "delta.dA")),
          HermitianMatrix<Real>(detail::as_complex_matrix<Real>(j.at("dB"), "delta.dB"))};
}

// ---- noise bound tables: {"epsilon": x} or {"epsilon": [..]} ---------------

template <typename Real>
std::string write_noise_bounds(const std::vector<Real>& eps) {
  std::string out = "{\"epsilon\":";
  std::vector<double> values(eps.begin(), eps.end());
  detail::append_real_array(out, values);
  out += "}\n";
  return out;
}

template <typename Real>
NoiseBoundSequence<Real> read_noise_bounds(const nlohmann::json& j) {
  detail::require_keys(j, "noise bound", {"epsilon"});
  if (!j.contains("epsilon")) throw InvalidSpec("noise bound: missing \"epsilon\"");
  const auto& e = j.at("epsilon");
  if (e.is_number())
    return NoiseBoundSequence<Real>::constant(static_cast<Real>(e.get<double>()));
  const auto values = detail::as_number_array(e, "noise bound.epsilon");
  if (values.empty()) throw InvalidSpec("noise bound.epsilon: table must be nonempty");
  return NoiseBoundSequence<Real>::table(std::vector<Real>(values.begin(), values.end()));
}

// ---- generator spec --------------------------------------------------------

inline std::string layout_name(SpectrumLayout layout) {
  switch (layout) {
    case SpectrumLayout::Uniform: return "uniform";
    case SpectrumLayout::Clustered: return "clustered";
    case SpectrumLayout::HeavyTail: return "heavy_tail";
  }
  throw InvalidSpec("layout_name: unknown layout");
}

inline SpectrumLayout parse_layout(const std::string& name) {
  if (name == "uniform") return SpectrumLayout::Uniform;
  if (name == "clustered") return SpectrumLayout::Clustered;
  if (name == "heavy_tail") return SpectrumLayout::HeavyTail;
  throw InvalidSpec("layout: expected uniform, clustered or heavy_tail, got \"" + name + "\"");
}

template <typename Real>
InstanceSpec<Real> read_instance_spec(const nlohmann::json& j) {
  detail::require_keys(j, "instance spec",
                       {"seed", "n_atoms", "layout", "spectrum", "subspace_dim", "band",
                        "trial_dim", "noise_scale", "delta_scale"});
  InstanceSpec<Real> spec;
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned())
      throw InvalidSpec("instance spec.seed: expected a nonnegative integer");
    spec.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("n_atoms")) {
    if (!j.at("n_atoms").is_number_integer())
      throw InvalidSpec("instance spec.n_atoms: expected an integer");
    spec.n_atoms = j.at("n_atoms").get<Index>();
  }
  if (j.contains("layout")) {
    if (!j.at("layout").is_string())
      throw InvalidSpec("instance spec.layout: expected a string");
    spec.layout = parse_layout(j.at("layout").get<std::string>());
  }
  if (j.contains("spectrum")) {
    const auto range = detail::as_number_array(j.at("spectrum"), "instance spec.spectrum");
    if (range.size() != 2) throw InvalidSpec("instance spec.spectrum: expected [lo, hi]");
    spec.spectrum_lo = static_cast<Real>(range[0]);
    spec.spectrum_hi = static_cast<Real>(range[1]);
  }
  if (j.contains("band") && j.contains("subspace_dim"))
    throw InvalidSpec("instance spec: give either band or subspace_dim, not both");
  if (j.contains("subspace_dim")) {
    if (!j.at("subspace_dim").is_number_integer())
      throw InvalidSpec("instance spec.subspace_dim: expected an integer");
    spec.subspace_dim = j.at("subspace_dim").get<Index>();
  }
  if (j.contains("band")) {
    const auto band = detail::as_number_array(j.at("band"), "instance spec.band");
    if (band.size() != 2) throw InvalidSpec("instance spec.band: expected [lo, hi]");
    spec.band = {static_cast<Real>(band[0]), static_cast<Real>(band[1])};
  }
  if (j.contains("trial_dim")) {
    if (!j.at("trial_dim").is_number_integer())
      throw InvalidSpec("instance spec.trial_dim: expected an integer");
    spec.trial_dim = j.at("trial_dim").get<Index>();
  }
  if (j.contains("noise_scale"))
    spec.noise_scale = static_cast<Real>(detail::as_number(j.at("noise_scale"),
                                                           "instance spec.noise_scale"));
  if (j.contains("delta_scale"))
    spec.delta_scale = static_cast<Real>(detail::as_number(j.at("delta_scale"),
                                                           "instance spec.delta_scale"));
  return spec;
}

template <typename Real>
std::string write_instance_spec(const InstanceSpec<Real>& spec) {
  std::string out = "{\"seed\":" + std::to_string(spec.seed);
  out += ",\"n_atoms\":" + std::to_string(spec.n_atoms);
  out += ",\"layout\":\"" + layout_name(spec.layout) + '"';
  out += ",\"spectrum\":[" + detail::json_number(static_cast<double>(spec.spectrum_lo)) + ',' +
         detail::json_number(static_cast<double>(spec.spectrum_hi)) + ']';
  if (spec.band)
    out += ",\"band\":[" + detail::json_number(static_cast<double>(spec.band->first)) + ',' +
           detail::json_number(static_cast<double>(spec.band->second)) + ']';
  else
    out += ",\"subspace_dim\":" + std::to_string(spec.subspace_dim);
  out += ",\"trial_dim\":" + std::to_string(spec.trial_dim);
  out += ",\"noise_scale\":" + detail::json_number(static_cast<double>(spec.noise_scale));
  out += ",\"delta_scale\":" + detail::json_number(static_cast<double>(spec.delta_scale));
  out += "}\n";
  return out;
}

// ---- results ---------------------------------------------------------------

// The bounds report carries the enclosure verdict next to the raw endpoints
// so downstream tooling never re-derives tolerances; the slack used for the
// verdict is echoed at the top.  `reference` holds the true subspace
// eigenvalues (descending, paired with the rows); pass nullptr when no
// reference spectrum is known and the truth columns become null.
template <typename Real>
std::string write_bounds(const EigenvalueBounds<Real>& b, Real margin,
                         const RealVector<Real>* reference, Real tolerance) {
  std::string out = "{\"method\":\"" + std::string(method_name(b.method)) + '"';
  out += ",\"margin\":" + detail::json_number(static_cast<double>(margin));
  out += ",\"denominator\":" + detail::json_number(static_cast<double>(b.denominator));
  out += ",\"tolerance\":" + detail::json_number(static_cast<double>(tolerance));
  out += ",\"flags\":[";
  for (std::size_t k = 0; k < b.flags.size(); ++k) {
    if (k) out += ',';
    out += '"' + b.flags[k] + '"';
  }
  out += "],\"rows\":[";
  for (std::size_t k = 0; k < b.rows.size(); ++k) {
    if (k) out += ',';
    const BoundRow<Real>& row = b.rows[k];
    out += "{\"i\":" + std::to_string(k + 1);
    out += ",\"tilde\":" + detail::json_number(static_cast<double>(row.approx));
    out += ",\"lower\":" + detail::json_number(static_cast<double>(row.lower));
    out += ",\"upper\":" + detail::json_number(static_cast<double>(row.upper));
    if (reference && static_cast<Index>(k) < reference->size()) {
      const Real err = row.approx - (*reference)[static_cast<Index>(k)];
      const bool inside = row.lower - tolerance <= err && err <= row.upper + tolerance;
      out += ",\"true_error\":" + detail::json_number(static_cast<double>(err));
      out += ",\"enclosed\":";
      out += inside ? "true" : "false";
    } else {
      out += ",\"true_error\":null,\"enclosed\":null";
    }
    out += '}';
  }
  out += "]}";
  return out;
}

template <typename Real>
std::string write_bounds_list(const std::vector<EigenvalueBounds<Real>>& all, Real margin,
                              const RealVector<Real>* reference, Real tolerance) {
  std::string out = "[";
  for (std::size_t k = 0; k < all.size(); ++k) {
    if (k) out += ',';
    out += write_bounds(all[k], margin, reference, tolerance);
  }
  out += "]\n";
  return out;
}

// "M" is the final guess dimension, "m" the count of eigenvalues that cleared
// the threshold at that guess.
template <typename Real>
std::string write_detection(const DetectionResult<Real>& r) {
  std::string out = "{\"M\":" + std::to_string(r.guess_dimension);
  out += ",\"m\":" + std::to_string(r.detected);
  out += ",\"threshold\":" + detail::json_number(static_cast<double>(r.threshold));
  out += ",\"estimates\":[";
  if (r.estimates) {
    for (Index k = 0; k < r.estimates->values.size(); ++k) {
      if (k) out += ',';
      out += detail::json_number(static_cast<double>(r.estimates->values[k]));
    }
  }
  out += "],\"flags\":[";
  for (std::size_t k = 0; k < r.flags.size(); ++k) {
    if (k) out += ',';
    out += '"' + r.flags[k] + '"';
  }
  out += "]}\n";
  return out;
}

template <typename Real>
std::string write_sweep_csv(const SweepTrace<Real>& trace) {
  std::string out = "M,lambda_m_BMm,epsilon_M,ratio,detected_m\n";
  for (const SweepRow<Real>& row : trace.rows) {
    out += std::to_string(row.guess);
    out += ',';
    out += format_double(static_cast<double>(row.lambda_m));
    out += ',';
    out += format_double(static_cast<double>(row.eps));
    out += ',';
    out += row.ratio_defined ? format_double(static_cast<double>(row.ratio)) : "nan";
    out += ',';
    out += std::to_string(row.detected);
    out += '\n';
  }
  return out;
}

}  // namespace subspectra
