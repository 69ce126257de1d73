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

#include "plantwi/service/checkpoint.h"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "plantwi/error.h"
#include "plantwi/service/png_io.h"

namespace plantwi {
namespace {

constexpr char kMagic[8] = {'P', 'L', 'N', 'T', 'W', 'I', 'C', 'K'};

static_assert(sizeof(float) == 4);

void PutU32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>(v >> (8 * i) & 0xff));
}

uint32_t GetU32(const std::string& in, size_t offset) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<uint32_t>(static_cast<uint8_t>(in[offset + i])) << (8 * i);
  }
  return v;
}

void PutFloats(std::string& out, const std::vector<float>& values) {
  for (float f : values) PutU32(out, std::bit_cast<uint32_t>(f));
}

[[noreturn]] void Corrupt(const std::string& what) {
  Fail(ErrorCode::kCorruptCheckpoint, "corrupt checkpoint: " + what);
}

}  // namespace

std::string SerializeCheckpoint(const Model& model) {
  model.head.Validate();
  nlohmann::json header;
  header["dim"] = model.head.dim;
  header["classes"] = model.head.class_count();
  header["margin"] = model.head.margin;
  header["scale"] = model.head.scale;
  header["context_radius"] = model.extractor.context_radius;
  size_t floats = model.head.weights.size();
  nlohmann::json layers = nlohmann::json::array();
  for (const DenseLayer& layer : model.extractor.layers) {
    layers.push_back({{"in", layer.in}, {"out", layer.out}});
    floats += layer.weight.size() + layer.bias.size();
  }
  header["layers"] = layers;
  header["class_names"] = model.head.class_names;
  header["parent_class"] = model.head.parent_class;
  header["payload_floats"] = floats;
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  PutU32(out, kCheckpointVersion);
  PutU32(out, static_cast<uint32_t>(text.size()));
  out += text;
  for (const DenseLayer& layer : model.extractor.layers) {
    PutFloats(out, layer.weight);
    PutFloats(out, layer.bias);
  }
  PutFloats(out, model.head.weights);
  return out;
}

Model DeserializeCheckpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    Corrupt("bad magic");
  }
  const uint32_t version = GetU32(bytes, 8);
  if (version != kCheckpointVersion) {
    Fail(ErrorCode::kUnsupportedVersion,
         "checkpoint version " + std::to_string(version) + " is not supported");
  }
  const uint32_t header_size = GetU32(bytes, 12);
  if (bytes.size() - 16 < header_size) Corrupt("truncated header");

  Model model;
  size_t expected = 0;
  try {
    const nlohmann::json header =
        nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + header_size);
    model.head.dim = header.at("dim").get<int>();
    model.head.margin = header.at("margin").get<double>();
    model.head.scale = header.at("scale").get<double>();
    model.head.class_names = header.at("class_names").get<std::vector<std::string>>();
    model.head.parent_class = header.at("parent_class").get<std::vector<int32_t>>();
    model.extractor.context_radius = header.at("context_radius").get<int>();
    for (const auto& shape : header.at("layers")) {
      DenseLayer layer;
      layer.in = shape.at("in").get<int>();
      layer.out = shape.at("out").get<int>();
      if (layer.in <= 0 || layer.out <= 0) Corrupt("bad layer shape");
      layer.weight.resize(static_cast<size_t>(layer.in) * layer.out);
      layer.bias.resize(layer.out);
      expected += layer.weight.size() + layer.bias.size();
      model.extractor.layers.push_back(std::move(layer));
    }
    const int classes = header.at("classes").get<int>();
    if (model.head.dim <= 0 || classes != model.head.class_count() ||
        model.head.parent_class.size() != model.head.class_names.size()) {
      Corrupt("inconsistent class table");
    }
    if (model.extractor.layers.empty() ||
        model.extractor.layers.back().out != model.head.dim) {
      Corrupt("extractor output does not match the head");
    }
    for (size_t l = 1; l < model.extractor.layers.size(); ++l) {
      if (model.extractor.layers[l].in != model.extractor.layers[l - 1].out) {
        Corrupt("layer shapes do not chain");
      }
    }
    model.head.weights.resize(static_cast<size_t>(classes) * model.head.dim);
    expected += model.head.weights.size();
    if (header.at("payload_floats").get<size_t>() != expected) {
      Corrupt("payload size disagrees with the layer shapes");
    }
  } catch (const nlohmann::json::exception& e) {
    Corrupt(std::string("header: ") + e.what());
  }

  const size_t payload_offset = 16 + static_cast<size_t>(header_size);
  if (bytes.size() - payload_offset != expected * 4) {
    Corrupt("payload holds " + std::to_string(bytes.size() - payload_offset) +
            " bytes, expected " + std::to_string(expected * 4));
  }
  size_t offset = payload_offset;
  auto read = [&](std::vector<float>& values) {
    for (float& f : values) {
      f = std::bit_cast<float>(GetU32(bytes, offset));
      offset += 4;
    }
  };
  for (DenseLayer& layer : model.extractor.layers) {
    read(layer.weight);
    read(layer.bias);
  }
  read(model.head.weights);
  try {
    model.head.Validate();
  } catch (const Error& e) {
    Corrupt(e.what());
  }
  return model;
}

void SaveCheckpoint(const Model& model, const std::string& path) {
  WriteFileBytes(path, SerializeCheckpoint(model));
}

Model LoadCheckpoint(const std::string& path) {
  return DeserializeCheckpoint(ReadFileBytes(path));
}

}  // namespace plantwi
