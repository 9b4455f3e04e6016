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

#include "kacrelax/errors.hpp"
#include "kacrelax/quadrature.hpp"
#include "kacrelax/parallel.hpp"
#include "kacrelax/rng.hpp"
#include "kacrelax/constants.hpp"
#include "kacrelax/stable.hpp"
#include "kacrelax/kernel.hpp"
#include "kacrelax/initial_data.hpp"
#include "kacrelax/mckean.hpp"
#include "kacrelax/wild.hpp"
#include "kacrelax/metrics.hpp"
#include "kacrelax/bounds.hpp"
#include "kacrelax/experiment.hpp"
