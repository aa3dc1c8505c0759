// Copyright 2026 The prefrank Authors
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

// Umbrella header pulling in the whole library.

#pragma once

#include "prefrank/cli/run_config.hpp"
#include "prefrank/core/activation.hpp"
#include "prefrank/core/common.hpp"
#include "prefrank/core/init.hpp"
#include "prefrank/core/param_store.hpp"
#include "prefrank/core/tape.hpp"
#include "prefrank/core/tensor.hpp"
#include "prefrank/data/corpus_io.hpp"
#include "prefrank/data/interactions.hpp"
#include "prefrank/data/split.hpp"
#include "prefrank/eval/metrics.hpp"
#include "prefrank/graph/bipartite.hpp"
#include "prefrank/io/checkpoint.hpp"
#include "prefrank/io/lock.hpp"
#include "prefrank/model/config.hpp"
#include "prefrank/model/network.hpp"
#include "prefrank/train/bpr.hpp"
#include "prefrank/train/sampler.hpp"
#include "prefrank/train/trainer.hpp"
