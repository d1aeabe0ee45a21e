// Copyright 2026 The lnms authors
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

#include "lnms/bench.hpp"
#include "lnms/bnb.hpp"
#include "lnms/controller.hpp"
#include "lnms/environments.hpp"
#include "lnms/errors.hpp"
#include "lnms/hybrid_ocp.hpp"
#include "lnms/invariant_set.hpp"
#include "lnms/kkt.hpp"
#include "lnms/mode_sequence.hpp"
#include "lnms/polytope.hpp"
#include "lnms/pwa_system.hpp"
#include "lnms/qp.hpp"
#include "lnms/riccati.hpp"
#include "lnms/sample_store.hpp"
#include "lnms/types.hpp"
