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

#include "plantwi/service/png_io.h"

#include <png.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "plantwi/error.h"

namespace plantwi {
namespace {

struct ReadCursor {
  const std::string* bytes;
  size_t offset;
};

void WriteToString(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::string*>(png_get_io_ptr(png));
  out->append(reinterpret_cast<const char*>(data), length);
}

void FlushNothing(png_structp) {}

void ReadFromString(png_structp png, png_bytep data, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes->size()) {
    png_error(png, "unexpected end of PNG data");
  }
  std::memcpy(data, cursor->bytes->data() + cursor->offset, length);
  cursor->offset += length;
}

// rows: height pointers to packed big-endian sample rows.
std::string Encode(int width, int height, int bit_depth, int color_type,
                   const std::vector<png_bytep>& rows,
                   const Palette* palette = nullptr) {
  std::string out;
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIoError, "cannot allocate PNG writer");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    Fail(ErrorCode::kIoError, "PNG encoding failed");
  }
  png_set_write_fn(png, &out, WriteToString, FlushNothing);
  png_set_IHDR(png, info, width, height, bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  std::vector<png_color> colors;
  if (palette != nullptr) {
    for (const auto& c : *palette) colors.push_back({c[0], c[1], c[2]});
    png_set_PLTE(png, info, colors.data(), static_cast<int>(colors.size()));
  }
  png_write_info(png, info);
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<uint8_t> data;  // rows packed, 16-bit samples big-endian
};

Decoded Decode(const std::string& bytes, bool expand_palette) {
  if (bytes.size() < 8 ||
      png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
    Fail(ErrorCode::kIoError, "not a PNG stream");
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kIoError, "cannot allocate PNG reader");
  }
  Decoded out;
  std::vector<png_bytep> rows;
  ReadCursor cursor{&bytes, 0};
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    Fail(ErrorCode::kIoError, "PNG decoding failed");
  }
  png_set_read_fn(png, &cursor, ReadFromString);
  png_read_info(png, info);
  const int color_type = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) < 8) png_set_packing(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE && expand_palette) {
    png_set_palette_to_rgb(png);
  }
  if (color_type == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  png_set_strip_alpha(png);
  png_read_update_info(png, info);
  out.width = static_cast<int>(png_get_image_width(png, info));
  out.height = static_cast<int>(png_get_image_height(png, info));
  out.channels = png_get_channels(png, info);
  out.bit_depth = png_get_bit_depth(png, info);
  const size_t stride = png_get_rowbytes(png, info);
  out.data.resize(stride * out.height);
  rows.resize(out.height);
  for (int r = 0; r < out.height; ++r) rows[r] = out.data.data() + r * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

}  // namespace

std::string EncodeRgbPng(const RgbImage& image) {
  std::vector<png_bytep> rows(image.height());
  auto* base = const_cast<uint8_t*>(image.data().data());
  for (int r = 0; r < image.height(); ++r) {
    rows[r] = base + static_cast<size_t>(r) * image.width() * 3;
  }
  return Encode(image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, rows);
}

std::string EncodeGray8Png(const Plane<uint8_t>& image) {
  std::vector<png_bytep> rows(image.height());
  auto* base = const_cast<uint8_t*>(image.data().data());
  for (int r = 0; r < image.height(); ++r) {
    rows[r] = base + static_cast<size_t>(r) * image.width();
  }
  return Encode(image.width(), image.height(), 8, PNG_COLOR_TYPE_GRAY, rows);
}

std::string EncodeGray16Png(const Plane<uint16_t>& image) {
  std::vector<uint8_t> packed(image.size() * 2);
  for (size_t i = 0; i < image.size(); ++i) {
    packed[2 * i] = static_cast<uint8_t>(image[i] >> 8);
    packed[2 * i + 1] = static_cast<uint8_t>(image[i] & 0xff);
  }
  std::vector<png_bytep> rows(image.height());
  for (int r = 0; r < image.height(); ++r) {
    rows[r] = packed.data() + static_cast<size_t>(r) * image.width() * 2;
  }
  return Encode(image.width(), image.height(), 16, PNG_COLOR_TYPE_GRAY, rows);
}

std::string EncodePalettePng(const Plane<uint8_t>& indices,
                             const Palette& palette) {
  if (palette.empty() || palette.size() > 256) {
    Fail(ErrorCode::kInvalidInput, "palette must have 1..256 entries");
  }
  for (uint8_t v : indices.data()) {
    if (v >= palette.size()) {
      Fail(ErrorCode::kInvalidInput, "index outside the palette");
    }
  }
  std::vector<png_bytep> rows(indices.height());
  auto* base = const_cast<uint8_t*>(indices.data().data());
  for (int r = 0; r < indices.height(); ++r) {
    rows[r] = base + static_cast<size_t>(r) * indices.width();
  }
  return Encode(indices.width(), indices.height(), 8, PNG_COLOR_TYPE_PALETTE,
                rows, &palette);
}

RgbImage DecodeRgbPng(const std::string& bytes) {
  const Decoded d = Decode(bytes, /*expand_palette=*/true);
  if (d.bit_depth != 8 || (d.channels != 3 && d.channels != 1)) {
    Fail(ErrorCode::kIoError, "expected an 8-bit RGB PNG");
  }
  RgbImage image(d.height, d.width, 3);
  for (size_t p = 0; p < image.pixel_count(); ++p) {
    for (int c = 0; c < 3; ++c) {
      image.data()[p * 3 + c] =
          d.data[p * d.channels + (d.channels == 3 ? c : 0)];
    }
  }
  return image;
}

Plane<uint8_t> DecodeGray8Png(const std::string& bytes) {
  const Decoded d = Decode(bytes, /*expand_palette=*/false);
  if (d.bit_depth != 8 || d.channels != 1) {
    Fail(ErrorCode::kIoError, "expected an 8-bit single-channel PNG");
  }
  Plane<uint8_t> image(d.height, d.width);
  std::copy(d.data.begin(), d.data.end(), image.data().begin());
  return image;
}

Plane<uint16_t> DecodeGray16Png(const std::string& bytes) {
  const Decoded d = Decode(bytes, /*expand_palette=*/false);
  if (d.bit_depth != 16 || d.channels != 1) {
    Fail(ErrorCode::kIoError, "expected a 16-bit single-channel PNG");
  }
  Plane<uint16_t> image(d.height, d.width);
  for (size_t i = 0; i < image.size(); ++i) {
    image[i] = static_cast<uint16_t>(d.data[2 * i] << 8 | d.data[2 * i + 1]);
  }
  return image;
}

Palette ClassPalette(int classes) {
  if (classes < 0 || classes > 256) {
    Fail(ErrorCode::kInvalidInput, "palette supports 0..256 classes");
  }
  static const Palette kBase = {{40, 170, 60}, {220, 70, 60}, {150, 120, 80}};
  static const Palette kExtra = {
      {200, 230, 40}, {40, 200, 200}, {230, 120, 220}, {250, 170, 40}};
  Palette palette;
  for (int c = 0; c < classes; ++c) {
    palette.push_back(c < 3 ? kBase[c] : kExtra[(c - 3) % kExtra.size()]);
  }
  return palette;
}

Plane<uint8_t> LabelIndices(const LabelMap& labels) {
  Plane<uint8_t> out(labels.height(), labels.width());
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] > 255) {
      Fail(ErrorCode::kInvalidInput, "label outside the 8-bit range");
    }
    out[i] = static_cast<uint8_t>(labels[i]);
  }
  return out;
}

std::string ReadFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIoError, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFileBytes(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIoError, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIoError, "short write to " + path);
}

std::string Base64Encode(const std::string& bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const uint32_t n = static_cast<uint8_t>(bytes[i]) << 16 |
                       static_cast<uint8_t>(bytes[i + 1]) << 8 |
                       static_cast<uint8_t>(bytes[i + 2]);
    out += kAlphabet[n >> 18 & 63];
    out += kAlphabet[n >> 12 & 63];
    out += kAlphabet[n >> 6 & 63];
    out += kAlphabet[n & 63];
  }
  if (i < bytes.size()) {
    uint32_t n = static_cast<uint8_t>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) n |= static_cast<uint8_t>(bytes[i + 1]) << 8;
    out += kAlphabet[n >> 18 & 63];
    out += kAlphabet[n >> 12 & 63];
    out += i + 1 < bytes.size() ? kAlphabet[n >> 6 & 63] : '=';
    out += '=';
  }
  return out;
}

}  // namespace plantwi
