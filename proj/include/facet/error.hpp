// Copyright 2026 The Facet Authors
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

namespace facet {

/// Stable, machine-readable error vocabulary. The names returned by
/// error_code_name() appear verbatim in CLI JSON output and HTTP error bodies.
enum class ErrorCode {
  MalformedContainer,
  UnsupportedFeature,
  SerializationOverflow,
  DegenerateCamera,
  EmptyMesh,
  EmptyCloud,
  DegenerateSource,
  UndecodableImage,
  ProviderFailure,
  NoDepthInMask,
  NoFeatures,
  EmptyQuery,
  CatalogEmpty,
  StalePlan,
  DegenerateComponent,
  DirectoryUnreadable,
  IoFailure,
  UnsupportedFormat,
  UnsupportedVersion,
  CapacityExceeded,
  PreconditionFailed,
  NotFound,
  NothingToUndo,
  InvalidArgument,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace facet
