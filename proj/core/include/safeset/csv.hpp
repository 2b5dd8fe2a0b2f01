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
#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace safeset::csv {

// Minimal RFC-4180-ish reader: comma separated, optional double quotes with
// "" escapes, no embedded newlines.
std::vector<std::string> split_line(std::string_view line);

std::string trim(std::string_view s);

// Quotes a field only when it contains a comma or a quote.
std::string escape(std::string_view field);

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

double parse_double(std::string_view text, bool* ok);
long long parse_int(std::string_view text, bool* ok);

}  // namespace safeset::csv
