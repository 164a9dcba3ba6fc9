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

// Survey ingestion: delimited text in, one SurveyResponse per valid row out.
// Column names are configurable because the published dataset's headers are
// in French.

#ifndef MODALSIM_SURVEY_HPP_
#define MODALSIM_SURVEY_HPP_

#include <cstddef>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modalsim/types.hpp"

namespace modalsim {

// One respondent. Ratings are on the 0-10 Likert scale.
struct SurveyResponse {
  Mode usual_mode = Mode::kCar;
  double distance_km = 0.0;
  CriteriaVector priorities;
  ModeGrid evaluations;
  ModeSet declared_inaccessible;

  friend bool operator==(const SurveyResponse&, const SurveyResponse&) =
      default;
};

// Maps logical survey fields to header names in the input file.
//
// Inaccessibility is read either from one boolean column per mode
// (`inaccessible`) or from a single multi-valued column whose cells list
// mode labels (`inaccessible_list`). Either may be left empty.
struct ColumnMapping {
  char delimiter = ',';
  std::string usual_mode = "usual_mode";
  std::string distance_km = "distance_km";
  std::array<std::string, kCriterionCount> priorities;
  std::array<std::array<std::string, kCriterionCount>, kModeCount> evaluations;
  std::map<Mode, std::string> inaccessible;
  std::string inaccessible_list;
  char list_separator = ';';
  // Cell text (lower-cased) recognised for each mode.
  std::map<std::string, Mode> mode_labels;
  // Cell text (lower-cased) read as "true" in boolean columns.
  std::vector<std::string> true_labels;

  // prio_<criterion>, eval_<mode>_<criterion>, no_<mode>.
  static ColumnMapping defaults();
  static ColumnMapping from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct SurveyParseResult {
  std::vector<SurveyResponse> responses;
  std::size_t rows_read = 0;
  // Rows with a missing or non-numeric field, an unknown mode label or an
  // out-of-range rating.
  std::size_t rows_dropped = 0;
};

// Throws ValidationError("unrecognized survey schema: ...") listing every
// mapped column absent from the header row.
SurveyParseResult parse_survey(std::istream& in,
                               const ColumnMapping& mapping =
                                   ColumnMapping::defaults());

// Writes responses back out using the default column layout.
void write_survey(std::ostream& out,
                  const std::vector<SurveyResponse>& responses);

}  // namespace modalsim

#endif  // MODALSIM_SURVEY_HPP_
