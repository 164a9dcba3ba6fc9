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


#include "modalsim/survey.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>

#include "csv.hpp"

namespace modalsim {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

// Accepts a decimal comma as well as a decimal point.
std::optional<double> parse_number(std::string_view cell) {
  std::string text(trim(cell));
  if (text.empty()) return std::nullopt;
  std::replace(text.begin(), text.end(), ',', '.');
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) return std::nullopt;
  return v;
}

}  // namespace

ColumnMapping ColumnMapping::defaults() {
  ColumnMapping m;
  for (Criterion c : kAllCriteria) {
    m.priorities[index(c)] = "prio_" + std::string(to_string(c));
  }
  for (Mode mode : kAllModes) {
    for (Criterion c : kAllCriteria) {
      m.evaluations[index(mode)][index(c)] = "eval_" +
                                             std::string(to_string(mode)) +
                                             "_" + std::string(to_string(c));
    }
    m.inaccessible[mode] = "no_" + std::string(to_string(mode));
    m.mode_labels[std::string(to_string(mode))] = mode;
  }
  m.true_labels = {"1", "true", "yes", "oui", "x"};
  return m;
}

ColumnMapping ColumnMapping::from_json(const nlohmann::json& j) {
  ColumnMapping m = defaults();
  if (!j.is_object()) throw ValidationError("column mapping: expected object");
  for (const auto& [key, value] : j.items()) {
    if (key == "delimiter" || key == "list_separator") {
      const auto s = value.get<std::string>();
      if (s.size() != 1)
        throw ValidationError("column mapping: " + key +
                              " must be one character");
      (key == "delimiter" ? m.delimiter : m.list_separator) = s[0];
    } else if (key == "usual_mode") {
      m.usual_mode = value.get<std::string>();
    } else if (key == "distance_km") {
      m.distance_km = value.get<std::string>();
    } else if (key == "priorities") {
      for (const auto& [cname, col] : value.items()) {
        auto c = parse_criterion(cname);
        if (!c)
          throw ValidationError("column mapping: priorities." + cname +
                                ": unknown criterion");
        m.priorities[index(*c)] = col.get<std::string>();
      }
    } else if (key == "evaluations") {
      for (const auto& [mname, row] : value.items()) {
        auto mode = parse_mode(mname);
        if (!mode)
          throw ValidationError("column mapping: evaluations." + mname +
                                ": unknown mode");
        for (const auto& [cname, col] : row.items()) {
          auto c = parse_criterion(cname);
          if (!c)
            throw ValidationError("column mapping: evaluations." + mname +
                                  "." + cname + ": unknown criterion");
          m.evaluations[index(*mode)][index(*c)] = col.get<std::string>();
        }
      }
    } else if (key == "inaccessible") {
      m.inaccessible.clear();
      for (const auto& [mname, col] : value.items()) {
        auto mode = parse_mode(mname);
        if (!mode)
          throw ValidationError("column mapping: inaccessible." + mname +
                                ": unknown mode");
        m.inaccessible[*mode] = col.get<std::string>();
      }
    } else if (key == "inaccessible_list") {
      m.inaccessible_list = value.get<std::string>();
    } else if (key == "mode_labels") {
      for (const auto& [mname, labels] : value.items()) {
        auto mode = parse_mode(mname);
        if (!mode)
          throw ValidationError("column mapping: mode_labels." + mname +
                                ": unknown mode");
        for (const auto& label : labels) {
          m.mode_labels[lower(label.get<std::string>())] = *mode;
        }
      }
    } else if (key == "true_labels") {
      m.true_labels.clear();
      for (const auto& label : value) {
        m.true_labels.push_back(lower(label.get<std::string>()));
      }
    } else {
      throw ValidationError("column mapping: unknown field '" + key + "'");
    }
  }
  return m;
}

nlohmann::json ColumnMapping::to_json() const {
  nlohmann::json j;
  j["delimiter"] = std::string(1, delimiter);
  j["list_separator"] = std::string(1, list_separator);
  j["usual_mode"] = usual_mode;
  j["distance_km"] = distance_km;
  for (Criterion c : kAllCriteria) {
    j["priorities"][std::string(to_string(c))] = priorities[index(c)];
  }
  for (Mode mode : kAllModes) {
    for (Criterion c : kAllCriteria) {
      j["evaluations"][std::string(to_string(mode))]
       [std::string(to_string(c))] = evaluations[index(mode)][index(c)];
    }
  }
  j["inaccessible"] = nlohmann::json::object();
  for (const auto& [mode, col] : inaccessible) {
    j["inaccessible"][std::string(to_string(mode))] = col;
  }
  j["inaccessible_list"] = inaccessible_list;
  for (const auto& [label, mode] : mode_labels) {
    j["mode_labels"][std::string(to_string(mode))].push_back(label);
  }
  j["true_labels"] = true_labels;
  return j;
}

SurveyParseResult parse_survey(std::istream& in, const ColumnMapping& mapping) {
  CsvReader reader(in, mapping.delimiter);
  std::vector<std::string> header;
  if (!reader.next(header)) {
    throw ValidationError("unrecognized survey schema: empty input");
  }
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    header[0].erase(0, 3);
  }
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < header.size(); ++i) {
    position.emplace(std::string(trim(header[i])), i);
  }

  std::vector<std::string> missing;
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = position.find(name);
    if (it == position.end()) {
      missing.push_back(name);
      return 0;
    }
    return it->second;
  };

  const std::size_t mode_col = column(mapping.usual_mode);
  const std::size_t dist_col = column(mapping.distance_km);
  std::array<std::size_t, kCriterionCount> prio_cols{};
  for (Criterion c : kAllCriteria) {
    prio_cols[index(c)] = column(mapping.priorities[index(c)]);
  }
  std::array<std::array<std::size_t, kCriterionCount>, kModeCount> eval_cols{};
  for (Mode m : kAllModes) {
    for (Criterion c : kAllCriteria) {
      eval_cols[index(m)][index(c)] = column(mapping.evaluations[index(m)][index(c)]);
    }
  }
  std::map<Mode, std::size_t> inacc_cols;
  for (const auto& [mode, name] : mapping.inaccessible) {
    inacc_cols[mode] = column(name);
  }
  std::optional<std::size_t> list_col;
  if (!mapping.inaccessible_list.empty()) {
    list_col = column(mapping.inaccessible_list);
  }
  if (!missing.empty()) {
    std::string msg = "unrecognized survey schema: missing columns";
    for (std::size_t i = 0; i < missing.size(); ++i) {
      msg += (i == 0 ? " " : ", ") + missing[i];
    }
    throw ValidationError(msg);
  }

  auto is_true = [&](std::string_view cell) {
    const std::string v = lower(trim(cell));
    return std::find(mapping.true_labels.begin(), mapping.true_labels.end(),
                     v) != mapping.true_labels.end();
  };
  auto likert = [](std::string_view cell) -> std::optional<double> {
    auto v = parse_number(cell);
    if (!v || *v < 0.0 || *v > 10.0) return std::nullopt;
    return v;
  };

  SurveyParseResult result;
  std::vector<std::string> row;
  while (reader.next(row)) {
    if (row.size() == 1 && trim(row[0]).empty()) continue;  // blank line
    ++result.rows_read;
    auto cell = [&](std::size_t i) -> std::string_view {
      return i < row.size() ? std::string_view(row[i]) : std::string_view();
    };

    SurveyResponse r;
    bool ok = true;
    auto label = mapping.mode_labels.find(lower(trim(cell(mode_col))));
    if (label == mapping.mode_labels.end()) {
      ok = false;
    } else {
      r.usual_mode = label->second;
    }
    if (auto d = parse_number(cell(dist_col)); d && *d >= 0.0) {
      r.distance_km = *d;
    } else {
      ok = false;
    }
    for (Criterion c : kAllCriteria) {
      if (!ok) break;
      if (auto v = likert(cell(prio_cols[index(c)]))) {
        r.priorities[c] = *v;
      } else {
        ok = false;
      }
    }
    for (Mode m : kAllModes) {
      for (Criterion c : kAllCriteria) {
        if (!ok) break;
        if (auto v = likert(cell(eval_cols[index(m)][index(c)]))) {
          r.evaluations(m, c) = *v;
        } else {
          ok = false;
        }
      }
    }
    if (!ok) {
      ++result.rows_dropped;
      continue;
    }
    for (const auto& [mode, col] : inacc_cols) {
      if (is_true(cell(col))) r.declared_inaccessible.insert(mode);
    }
    if (list_col) {
      std::string_view rest = cell(*list_col);
      while (!rest.empty()) {
        const auto cut = rest.find(mapping.list_separator);
        const auto item = lower(trim(rest.substr(0, cut)));
        if (auto it = mapping.mode_labels.find(item);
            it != mapping.mode_labels.end()) {
          r.declared_inaccessible.insert(it->second);
        }
        if (cut == std::string_view::npos) break;
        rest.remove_prefix(cut + 1);
      }
    }
    result.responses.push_back(r);
  }
  return result;
}

void write_survey(std::ostream& out,
                  const std::vector<SurveyResponse>& responses) {
  const ColumnMapping m = ColumnMapping::defaults();
  std::vector<std::string> header{m.usual_mode, m.distance_km};
  for (Criterion c : kAllCriteria) header.push_back(m.priorities[index(c)]);
  for (Mode mode : kAllModes) {
    for (Criterion c : kAllCriteria) {
      header.push_back(m.evaluations[index(mode)][index(c)]);
    }
  }
  for (Mode mode : kAllModes) header.push_back(m.inaccessible.at(mode));
  write_csv_row(out, header, m.delimiter);

  std::vector<std::string> row;
  for (const auto& r : responses) {
    row.clear();
    row.emplace_back(to_string(r.usual_mode));
    row.push_back(format_number(r.distance_km));
    for (Criterion c : kAllCriteria) row.push_back(format_number(r.priorities[c]));
    for (Mode mode : kAllModes) {
      for (Criterion c : kAllCriteria) {
        row.push_back(format_number(r.evaluations(mode, c)));
      }
    }
    for (Mode mode : kAllModes) {
      row.emplace_back(r.declared_inaccessible.contains(mode) ? "1" : "0");
    }
    write_csv_row(out, row, m.delimiter);
  }
}

}  // namespace modalsim
