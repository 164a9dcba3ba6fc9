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


// Minimal RFC 4180 reader/writer shared by the survey and export code.

#ifndef MODALSIM_SRC_CSV_HPP_
#define MODALSIM_SRC_CSV_HPP_

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace modalsim {

class CsvReader {
 public:
  CsvReader(std::istream& in, char delimiter) : in_(in), delim_(delimiter) {}

  // Reads one record; quoted fields may contain delimiters, doubled quotes
  // and line breaks. Returns false at end of input.
  bool next(std::vector<std::string>& fields) {
    fields.clear();
    if (in_.peek() == std::char_traits<char>::eof()) return false;
    std::string field;
    bool quoted = false;
    char ch = 0;
    while (in_.get(ch)) {
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            quoted = false;
          }
        } else {
          field.push_back(ch);
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == delim_) {
        fields.push_back(std::move(field));
        field.clear();
      } else if (ch == '\n') {
        break;
      } else if (ch != '\r') {
        field.push_back(ch);
      }
    }
    fields.push_back(std::move(field));
    return true;
  }

 private:
  std::istream& in_;
  char delim_;
};

inline void write_csv_row(std::ostream& out,
                          const std::vector<std::string>& fields,
                          char delimiter = ',') {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << delimiter;
    const std::string& f = fields[i];
    if (f.find_first_of(std::string{delimiter, '"', '\n', '\r'}) ==
        std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char ch : f) {
      if (ch == '"') out << '"';
      out << ch;
    }
    out << '"';
  }
  out << '\n';
}

// Shortest text that parses back to the same double.
inline std::string format_number(double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace modalsim

#endif  // MODALSIM_SRC_CSV_HPP_
