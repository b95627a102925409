// Copyright 2026 The hvreserve Authors
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

#pragma once

// Internal JSON codecs shared by the model serialisers.

#include <cmath>
#include <limits>
#include <string>

#include "hvreserve/boosting.hpp"
#include "hvreserve/cascade.hpp"
#include "hvreserve/error.hpp"
#include "hvreserve/features.hpp"
#include "json.hpp"

namespace hvr::codec {

using ojson = nlohmann::ordered_json;

/// Finite doubles are written as numbers; infinities as "inf" / "-inf".
inline ojson real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

inline double real(const ojson& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::schema_mismatch, "invalid real value '" + s + "'");
  }
  return j.get<double>();
}

inline ojson money(Money m) { return m.to_string(); }
inline Money money(const ojson& j) {
  if (j.is_string()) return Money::parse(j.get<std::string>());
  return Money::from_double(j.get<double>());
}

ojson classifier(const StrongClassifier& c);
StrongClassifier classifier(const ojson& j);

ojson cascade(const CascadeModel& m);
CascadeModel cascade(const ojson& j);

ojson bucket_schema(const BucketSchema& s);
BucketSchema bucket_schema(const ojson& j);

/// Parses text, converting parse errors to Error(io).
ojson parse(std::string_view text, const char* what);

}  // namespace hvr::codec
