#pragma once

// Serialization: result JSON, polynomial JSON, and sweep CSVs. The formats
// are part of the external contract, so key order and number formatting are
// pinned here: JSON stores full-precision doubles (shortest round-trip
// form), CSV uses 9 significant digits, '.' decimal separator, LF endings.

#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "vn/pipeline.hpp"
#include "vn/trigpoly.hpp"

namespace vn {

using ordered_json = nlohmann::ordered_json;

// %.9g prints "inf" for the gap records the CSV contract allows.
inline std::string format_g9(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

inline ordered_json result_to_json(const VnResult& r) {
  ordered_json j;
  j["n"] = r.n;
  j["interval"] = ordered_json::array({r.interval_lo, r.interval_hi});
  j["v"] = r.v_value;
  j["a_star"] = r.a_star;
  j["witness_coeffs"] = r.witness.coeffs;
  if (r.witness_factor.empty())
    j["witness_factor"] = nullptr;
  else
    j["witness_factor"] = r.witness_factor;
  j["certified"] = r.certified;
  j["grid_points"] = r.grid_points;
  j["seed"] = r.seed;
  return j;
}

inline std::string result_json_text(const VnResult& r) {
  return result_to_json(r).dump(2) + "\n";
}

inline ordered_json polynomial_to_json(const CosinePolynomial& p) {
  ordered_json j;
  j["degree"] = p.degree();
  j["coeffs"] = p.coeffs;
  return j;
}

// Accepts {"degree": n, "coeffs": [a_0 ... a_n]}; "degree" is optional but
// must match the coefficient count when present.
inline CosinePolynomial polynomial_from_json(const ordered_json& j) {
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array() ||
      j["coeffs"].empty())
    throw std::runtime_error(
        "polynomial JSON: need an object with a nonempty \"coeffs\" array");
  CosinePolynomial p;
  for (const auto& v : j["coeffs"]) {
    if (!v.is_number())
      throw std::runtime_error("polynomial JSON: coefficients must be numbers");
    p.coeffs.push_back(v.get<double>());
  }
  if (j.contains("degree")) {
    if (!j["degree"].is_number_integer() ||
        j["degree"].get<long long>() != p.degree())
      throw std::runtime_error(
          "polynomial JSON: \"degree\" does not match the coefficient count");
  }
  return p;
}

inline CosinePolynomial polynomial_from_json_text(const std::string& text) {
  return polynomial_from_json(ordered_json::parse(text));
}

inline std::string sweep_to_csv(const std::vector<SweepRecord>& records) {
  std::string out = "a,chi,ratio,subproblem,certified\n";
  for (const SweepRecord& r : records) {
    out += format_g9(r.a);
    out += ',';
    out += format_g9(r.chi);
    out += ',';
    out += format_g9(r.ratio);
    out += ',';
    out += std::to_string(r.subproblem_id);
    out += ',';
    out += r.certified ? '1' : '0';
    out += '\n';
  }
  return out;
}

// One CSV per active-set subproblem. `feasible` marks grid points where that
// subproblem's own stationary point kept every constraint nonnegative (the
// red/green split in per-subproblem ratio plots); rows where the subproblem
// produced no stationary point at all carry inf.
inline std::string subproblem_csv(const std::vector<SweepRecord>& records,
                                  int id) {
  std::string out = "a,chi,ratio,subproblem,feasible\n";
  for (const SweepRecord& r : records) {
    double chi = std::numeric_limits<double>::infinity();
    bool feasible = false;
    if (id >= 1 && std::size_t(id) <= r.subproblem_outcomes.size()) {
      const SolveOutcome& o = r.subproblem_outcomes[std::size_t(id) - 1];
      chi = o.objective;
      feasible = o.converged;  // the enumeration clears it on violations
    }
    out += format_g9(r.a);
    out += ',';
    out += format_g9(chi);
    out += ',';
    out += format_g9(ratio_from_chi(chi, r.a));
    out += ',';
    out += std::to_string(id);
    out += ',';
    out += feasible ? '1' : '0';
    out += '\n';
  }
  return out;
}

}  // namespace vn
