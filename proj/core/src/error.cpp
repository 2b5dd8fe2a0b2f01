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
#include "safeset/error.hpp"

namespace safeset {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::InvalidDataset: return "InvalidDataset";
    case ErrorCode::SpecKindMismatch: return "SpecKindMismatch";
    case ErrorCode::FrameMisalignment: return "FrameMisalignment";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DimensionTooHigh: return "DimensionTooHigh";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InfeasibleAtHi: return "InfeasibleAtHi";
    case ErrorCode::InvalidBeta: return "InvalidBeta";
    case ErrorCode::InvalidCounts: return "InvalidCounts";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::EmptySpace: return "EmptySpace";
    case ErrorCode::CollisionsPresent: return "CollisionsPresent";
    case ErrorCode::NonPositiveGap: return "NonPositiveGap";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::ExclusionViolated: return "ExclusionViolated";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace safeset
