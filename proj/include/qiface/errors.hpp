// Copyright 2026 The qiface Authors
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

namespace qiface {

/// A computation failed for numerical reasons (undefined visibility, empty
/// herald mass, non-convergent fit asked to produce a value). Distinct from
/// std::invalid_argument / std::domain_error, which flag bad inputs; the
/// CLI maps input errors to exit 2 and numerical_error to exit 3.
class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what)
      : std::runtime_error(what) {}
};

}  // namespace qiface
