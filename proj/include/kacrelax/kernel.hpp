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

// Collision kernel of the inelastic Kac model.

#include <cmath>

namespace kacrelax {

/// c(theta) = cos(theta) |cos(theta)|^p
inline double kernel_c(double theta, double p) {
  const double c = std::cos(theta);
  return c * std::pow(std::abs(c), p);
}

/// s(theta) = sin(theta) |sin(theta)|^p
inline double kernel_s(double theta, double p) {
  const double s = std::sin(theta);
  return s * std::pow(std::abs(s), p);
}

}  // namespace kacrelax
