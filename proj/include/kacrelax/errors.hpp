// Copyright 2026 The kacrelax Authors
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

namespace kacrelax {

/// Argument outside the mathematical domain of an operation.
class domain_error : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Mismatched shapes, arities or configurations.
class structural_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A bound was requested for a datum that does not satisfy its hypotheses.
class hypothesis_error : public std::runtime_error {
 public:
  hypothesis_error(std::string bound, std::string hypothesis)
      : std::runtime_error(bound + ": hypothesis violated: " + hypothesis),
        bound_(std::move(bound)),
        hypothesis_(std::move(hypothesis)) {}

  const std::string& bound() const noexcept { return bound_; }
  const std::string& hypothesis() const noexcept { return hypothesis_; }

 private:
  std::string bound_;
  std::string hypothesis_;
};

/// A configured resource cap (series order, tree size, ...) would be exceeded.
class resource_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw domain_error(what);
}

}  // namespace detail
}  // namespace kacrelax
