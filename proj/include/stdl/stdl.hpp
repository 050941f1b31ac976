// Copyright 2026 The snn-stdl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "stdl/analysis.hpp"
#include "stdl/auxiliary.hpp"
#include "stdl/checkpoint.hpp"
#include "stdl/data.hpp"
#include "stdl/memory_ledger.hpp"
#include "stdl/model.hpp"
#include "stdl/network.hpp"
#include "stdl/neuron.hpp"
#include "stdl/partition.hpp"
#include "stdl/rng.hpp"
#include "stdl/run_config.hpp"
#include "stdl/tensor.hpp"
#include "stdl/trainer.hpp"
