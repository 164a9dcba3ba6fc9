// Copyright 2026 The modalsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// JSON helpers for the domain value types. Grids are nested objects keyed by
// mode then criterion name; every key is required and unknown keys are
// rejected.

#ifndef MODALSIM_SRC_JSON_UTIL_HPP_
#define MODALSIM_SRC_JSON_UTIL_HPP_

#include <string>

#include <nlohmann/json.hpp>

#include "modalsim/types.hpp"

namespace modalsim::json_util {

using nlohmann::json;

inline const json& member(const json& j, const std::string& key,
                          const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(path + "." + key + ": missing");
  return *it;
}

inline double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw ValidationError(path + ": expected number");
  return j.get<double>();
}

inline void expect_keys(const json& j, std::initializer_list<std::string> keys,
                        const std::string& path) {
  if (!j.is_object()) throw ValidationError(path + ": expected object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const auto& key : keys) known = known || key == k;
    if (!known) throw ValidationError(path + "." + k + ": unknown field");
  }
}

template <typename T, typename Fn>
json per_mode_to_json(const PerMode<T>& values, Fn&& convert) {
  json j = json::object();
  for (Mode m : kAllModes) j[std::string(to_string(m))] = convert(values[m]);
  return j;
}

template <typename T, typename Fn>
PerMode<T> per_mode_from_json(const json& j, const std::string& path,
                              Fn&& convert) {
  expect_keys(j, {"car", "bike", "bus", "walk"}, path);
  PerMode<T> out;
  for (Mode m : kAllModes) {
    const std::string key(to_string(m));
    out[m] = convert(member(j, key, path), path + "." + key);
  }
  return out;
}

inline json criteria_to_json(const CriteriaVector& v) {
  json j = json::object();
  for (Criterion c : kAllCriteria) j[std::string(to_string(c))] = v[c];
  return j;
}

inline CriteriaVector criteria_from_json(const json& j,
                                         const std::string& path) {
  expect_keys(j,
              {"ecology", "comfort", "price", "practicality", "time", "safety"},
              path);
  CriteriaVector v;
  for (Criterion c : kAllCriteria) {
    const std::string key(to_string(c));
    v[c] = number(member(j, key, path), path + "." + key);
  }
  return v;
}

inline json grid_to_json(const ModeGrid& g) {
  json j = json::object();
  for (Mode m : kAllModes) {
    j[std::string(to_string(m))] = criteria_to_json(g.row(m));
  }
  return j;
}

inline ModeGrid grid_from_json(const json& j, const std::string& path) {
  ModeGrid g;
  auto rows = per_mode_from_json<CriteriaVector>(j, path, criteria_from_json);
  for (Mode m : kAllModes) g.set_row(m, rows[m]);
  return g;
}

inline json number_map(const PerMode<double>& v) {
  return per_mode_to_json(v, [](double x) { return x; });
}

inline PerMode<double> number_map_from_json(const json& j,
                                            const std::string& path) {
  return per_mode_from_json<double>(j, path, number);
}

}  // namespace modalsim::json_util

#endif  // MODALSIM_SRC_JSON_UTIL_HPP_
