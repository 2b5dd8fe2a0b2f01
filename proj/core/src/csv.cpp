/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/
#include "safeset/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace safeset::csv {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0 as well
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, bool* ok) {
  const std::string t = trim(text);
  double value = 0.0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  const bool good = !t.empty() && res.ec == std::errc() && res.ptr == t.data() + t.size();
  if (ok) *ok = good;
  return good ? value : 0.0;
}

long long parse_int(std::string_view text, bool* ok) {
  const std::string t = trim(text);
  long long value = 0;
  auto res = std::from_chars(t.data(), t.data() + t.size(), value);
  bool good = !t.empty() && res.ec == std::errc() && res.ptr == t.data() + t.size();
  if (!good) {
    // Accept integral floats such as "12.0", common in exported tables.
    bool dok = false;
    const double d = parse_double(t, &dok);
    if (dok && std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9e15) {
      value = static_cast<long long>(d);
      good = true;
    }
  }
  if (ok) *ok = good;
  return good ? value : 0;
}

}  // namespace safeset::csv
