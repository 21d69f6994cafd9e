#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "renormlab/circlemap.hpp"
#include "renormlab/contfrac.hpp"
#include "renormlab/error.hpp"
#include "renormlab/precision.hpp"

// JSON schemas shared by the CLI and the python bindings. Decimal
// values travel as strings so extended precision survives the trip.

namespace renormlab::schema {

template <typename Real>
nlohmann::json map_to_json(const map::CircleMap<Real>& m) {
  nlohmann::json j;
  j["theta"] = to_decimal_string(m.theta());
  auto arr = nlohmann::json::array();
  for (const auto& h : m.harmonics())
    arr.push_back({to_decimal_string(h.a), to_decimal_string(h.b)});
  j["harmonics"] = arr;
  j["precision"] = std::is_same_v<Real, double> ? "f64" : "ext";
  return j;
}

inline std::string json_number_or_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw error("schema.bad_value", "expected number or decimal string");
}

template <typename Real>
map::CircleMap<Real> map_from_json(const nlohmann::json& j) {
  if (!j.contains("theta"))
    throw error("schema.missing_field", "theta");
  if (!j.contains("harmonics") || !j["harmonics"].is_array())
    throw error("schema.missing_field", "harmonics");
  Real theta = parse_decimal<Real>(json_number_or_string(j["theta"]));
  std::vector<map::Harmonic<Real>> hs;
  for (const auto& pair : j["harmonics"]) {
    if (!pair.is_array() || pair.size() != 2)
      throw error("schema.bad_value", "harmonics entries are [a_k, b_k]");
    hs.push_back({parse_decimal<Real>(json_number_or_string(pair[0])),
                  parse_decimal<Real>(json_number_or_string(pair[1]))});
  }
  return map::CircleMap<Real>(theta, std::move(hs));
}

inline nlohmann::json cf_to_json(const cf::ContinuedFraction& c) {
  nlohmann::json j;
  j["head"] = c.head();
  if (!c.period().empty()) j["period"] = c.period();
  return j;
}

inline cf::ContinuedFraction cf_from_json(const nlohmann::json& j) {
  std::vector<std::int64_t> head, period;
  if (j.is_array()) {
    head = j.get<std::vector<std::int64_t>>();
  } else {
    if (j.contains("head")) head = j["head"].get<std::vector<std::int64_t>>();
    if (j.contains("period"))
      period = j["period"].get<std::vector<std::int64_t>>();
  }
  return cf::ContinuedFraction(std::move(head), std::move(period));
}

}  // namespace renormlab::schema
