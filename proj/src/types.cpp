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


#include "modalsim/types.hpp"

#include <numeric>

namespace modalsim {
namespace {

constexpr std::array<std::string_view, kModeCount> kModeNames{"car", "bike",
                                                              "bus", "walk"};
constexpr std::array<std::string_view, kCriterionCount> kCriterionNames{
    "ecology", "comfort", "price", "practicality", "time", "safety"};

}  // namespace

std::string_view to_string(Mode m) { return kModeNames[index(m)]; }

std::string_view to_string(Criterion c) { return kCriterionNames[index(c)]; }

std::optional<Mode> parse_mode(std::string_view name) {
  for (Mode m : kAllModes) {
    if (kModeNames[index(m)] == name) return m;
  }
  return std::nullopt;
}

std::optional<Criterion> parse_criterion(std::string_view name) {
  for (Criterion c : kAllCriteria) {
    if (kCriterionNames[index(c)] == name) return c;
  }
  return std::nullopt;
}

double CriteriaVector::sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

ModeGrid ModeGrid::filled(double v) {
  ModeGrid g;
  g.cells_.fill(v);
  return g;
}

CriteriaVector ModeGrid::row(Mode m) const {
  CriteriaVector r;
  for (Criterion c : kAllCriteria) r[c] = (*this)(m, c);
  return r;
}

void ModeGrid::set_row(Mode m, const CriteriaVector& row) {
  for (Criterion c : kAllCriteria) (*this)(m, c) = row[c];
}

bool ModeGrid::within(double lo, double hi) const {
  for (double v : cells_) {
    if (!(v >= lo && v <= hi)) return false;
  }
  return true;
}

}  // namespace modalsim
