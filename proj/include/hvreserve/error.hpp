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

#include <stdexcept>
#include <string>
#include <string_view>

namespace hvr {

enum class ErrorKind {
  config,           // invalid parameters or configuration
  domain,           // argument outside a function's mathematical domain
  schema_mismatch,  // record / model / schema incompatibility
  training,         // training could not proceed (single class, caps hit)
  io,               // file or parse failure
};

std::string_view to_string(ErrorKind kind);

/// Library-wide exception. Every error raised by hvreserve carries a kind so
/// that callers (the CLI in particular) can report it in a machine-parseable
/// form.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hvr
