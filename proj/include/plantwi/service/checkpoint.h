// Copyright 2026 The plantwi Authors. All Rights Reserved.
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

// Binary model checkpoints.
//
// Layout (all integers little-endian):
//   8 bytes   magic "PLNTWICK"
//   uint32    format version
//   uint32    header length in bytes
//   header    UTF-8 JSON: dim, classes, margin, scale, context_radius,
//             layer shapes, class names, parent-class table, payload size
//   payload   float32 values: for each extractor layer its weight matrix
//             (row-major [out][in]) then its bias, followed by the
//             classifier weights (row-major [class][dim])

#ifndef PLANTWI_SERVICE_CHECKPOINT_H_
#define PLANTWI_SERVICE_CHECKPOINT_H_

#include <cstdint>
#include <string>

#include "plantwi/model/trainer.h"

namespace plantwi {

inline constexpr uint32_t kCheckpointVersion = 1;

std::string SerializeCheckpoint(const Model& model);
// Throws UnsupportedVersion on a version other than kCheckpointVersion and
// CorruptCheckpoint on a bad magic, malformed header, inconsistent shapes or
// a payload of the wrong length.
Model DeserializeCheckpoint(const std::string& bytes);

// File variants; IoError when the path cannot be written or read.
void SaveCheckpoint(const Model& model, const std::string& path);
Model LoadCheckpoint(const std::string& path);

}  // namespace plantwi

#endif  // PLANTWI_SERVICE_CHECKPOINT_H_
