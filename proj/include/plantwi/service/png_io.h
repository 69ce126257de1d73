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

// Thin libpng wrappers. Encoders return the PNG byte stream; decoders throw
// IoError on malformed input or an unexpected pixel format.

#ifndef PLANTWI_SERVICE_PNG_IO_H_
#define PLANTWI_SERVICE_PNG_IO_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "plantwi/image.h"

namespace plantwi {

using Palette = std::vector<std::array<uint8_t, 3>>;

std::string EncodeRgbPng(const RgbImage& image);
std::string EncodeGray8Png(const Plane<uint8_t>& image);
std::string EncodeGray16Png(const Plane<uint16_t>& image);
// 8-bit indexed PNG; every value must index into palette.
std::string EncodePalettePng(const Plane<uint8_t>& indices,
                             const Palette& palette);

RgbImage DecodeRgbPng(const std::string& bytes);
// Palette images decode to their indices.
Plane<uint8_t> DecodeGray8Png(const std::string& bytes);
Plane<uint16_t> DecodeGray16Png(const std::string& bytes);

// Display colors for class indices 0..classes-1: plant, artificial object and
// ground first, then a cycle of colors for imprinted classes. At most 256.
Palette ClassPalette(int classes);

// Label map as 8-bit palette indices; throws InvalidInput outside [0, 255].
Plane<uint8_t> LabelIndices(const LabelMap& labels);

std::string ReadFileBytes(const std::string& path);
void WriteFileBytes(const std::string& path, const std::string& bytes);

std::string Base64Encode(const std::string& bytes);

}  // namespace plantwi

#endif  // PLANTWI_SERVICE_PNG_IO_H_
