// Copyright 2026 The sarahnc Authors. All Rights Reserved.
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


// Umbrella header.

#ifndef SARAH_SARAH_HPP
#define SARAH_SARAH_HPP

#include "sarah/data.hpp"
#include "sarah/errors.hpp"
#include "sarah/harness/config.hpp"
#include "sarah/harness/experiment.hpp"
#include "sarah/harness/trace.hpp"
#include "sarah/linalg.hpp"
#include "sarah/mlp.hpp"
#include "sarah/optim/baselines.hpp"
#include "sarah/optim/config.hpp"
#include "sarah/optim/rates.hpp"
#include "sarah/optim/recursive.hpp"
#include "sarah/problem.hpp"
#include "sarah/problems.hpp"
#include "sarah/rng.hpp"
#include "sarah/sampling.hpp"
#include "sarah/verify.hpp"
#include "sarah/verify_suites.hpp"

#endif  // SARAH_SARAH_HPP
