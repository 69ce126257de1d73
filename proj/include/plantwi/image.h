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

#ifndef PLANTWI_IMAGE_H_
#define PLANTWI_IMAGE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace plantwi {

// Dense row-major H x W x C array. Pixel (h, w) occupies the contiguous range
// [(h * W + w) * C, (h * W + w + 1) * C).
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int height, int width, int channels, T fill = T{})
      : height_(height),
        width_(width),
        channels_(channels),
        data_(static_cast<size_t>(height) * width * channels, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  size_t pixel_count() const { return static_cast<size_t>(height_) * width_; }
  bool empty() const { return data_.empty(); }

  T& at(int h, int w, int c) { return data_[index(h, w) + c]; }
  const T& at(int h, int w, int c) const { return data_[index(h, w) + c]; }

  std::span<T> pixel(int h, int w) {
    return {data_.data() + index(h, w), static_cast<size_t>(channels_)};
  }
  std::span<const T> pixel(int h, int w) const {
    return {data_.data() + index(h, w), static_cast<size_t>(channels_)};
  }
  std::span<T> pixel(size_t p) {
    return {data_.data() + p * channels_, static_cast<size_t>(channels_)};
  }
  std::span<const T> pixel(size_t p) const {
    return {data_.data() + p * channels_, static_cast<size_t>(channels_)};
  }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  bool same_shape(const Tensor3& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  size_t index(int h, int w) const {
    return (static_cast<size_t>(h) * width_ + w) * channels_;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<T> data_;
};

// Single-channel H x W array.
template <typename T>
class Plane {
 public:
  Plane() = default;
  Plane(int height, int width, T fill = T{})
      : height_(height),
        width_(width),
        data_(static_cast<size_t>(height) * width, fill) {}

  int height() const { return height_; }
  int width() const { return width_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool contains(int h, int w) const {
    return h >= 0 && w >= 0 && h < height_ && w < width_;
  }

  T& at(int h, int w) { return data_[static_cast<size_t>(h) * width_ + w]; }
  const T& at(int h, int w) const {
    return data_[static_cast<size_t>(h) * width_ + w];
  }
  T& operator[](size_t i) { return data_[i]; }
  const T& operator[](size_t i) const { return data_[i]; }

  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  template <typename U>
  bool same_shape(const Plane<U>& other) const {
    return height_ == other.height() && width_ == other.width();
  }

  friend bool operator==(const Plane&, const Plane&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<T> data_;
};

using RgbImage = Tensor3<uint8_t>;
// Per-pixel embeddings; every pixel vector is unit-norm when produced by
// ExtractFeatures.
using FeatureMap = Tensor3<double>;
// Per-pixel cosine scores, one channel per class.
using ScoreMap = Tensor3<double>;
using LabelMap = Plane<int32_t>;
using BinaryMask = Plane<uint8_t>;
// Depth in meters; 0 marks an invalid measurement.
using DepthImage = Plane<double>;

inline size_t CountSet(const BinaryMask& mask) {
  size_t n = 0;
  for (uint8_t v : mask.data()) n += v != 0;
  return n;
}

}  // namespace plantwi

#endif  // PLANTWI_IMAGE_H_
