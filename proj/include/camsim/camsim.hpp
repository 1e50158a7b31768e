// Copyright 2026 The camsim Authors
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

#include "camsim/analysis.hpp"
#include "camsim/cell.hpp"
#include "camsim/config.hpp"
#include "camsim/device.hpp"
#include "camsim/errors.hpp"
#include "camsim/network.hpp"
#include "camsim/report.hpp"
#include "camsim/rng.hpp"
#include "camsim/runner.hpp"
#include "camsim/transient.hpp"
#include "camsim/version.hpp"
