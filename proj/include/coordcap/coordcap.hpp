/*
 * Copyright 2026 The coordcap Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header: the whole library in one include.

#include "coordcap/info.hpp"     // IWYU pragma: export
#include "coordcap/io.hpp"       // IWYU pragma: export
#include "coordcap/lp.hpp"       // IWYU pragma: export
#include "coordcap/rng.hpp"      // IWYU pragma: export
#include "coordcap/sim.hpp"      // IWYU pragma: export
#include "coordcap/solver.hpp"   // IWYU pragma: export
#include "coordcap/typical.hpp"  // IWYU pragma: export
#include "coordcap/types.hpp"    // IWYU pragma: export
#include "coordcap/util.hpp"     // IWYU pragma: export
#include "coordcap/version.hpp"  // IWYU pragma: export
