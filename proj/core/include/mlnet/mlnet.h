// Copyright 2026 The MLNet Authors.
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

#ifndef MLNET_MLNET_H_
#define MLNET_MLNET_H_

#include "mlnet/artifact.h"
#include "mlnet/config.h"
#include "mlnet/corpus.h"
#include "mlnet/encoder.h"
#include "mlnet/errors.h"
#include "mlnet/fixtures.h"
#include "mlnet/heads.h"
#include "mlnet/inference.h"
#include "mlnet/metrics.h"
#include "mlnet/model.h"
#include "mlnet/preprocess.h"
#include "mlnet/trainer.h"

#endif  // MLNET_MLNET_H_
