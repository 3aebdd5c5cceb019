// Copyright 2026 The Facet Authors
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

#include "facet/image.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <cstring>

#include "facet/asset_io.hpp"
#include "facet/error.hpp"

namespace facet {
namespace {

[[noreturn]] void undecodable(const std::string& why) { fail(ErrorCode::UndecodableImage, "image: " + why); }

GrayImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    undecodable(img.message);
  }
  img.format = PNG_FORMAT_GRAY;
  if (img.width == 0 || img.height == 0 || img.width > 16384 || img.height > 16384) {
    png_image_free(&img);
    undecodable("unsupported dimensions");
  }
  GrayImage out(static_cast<int>(img.width), static_cast<int>(img.height));
  if (!png_image_finish_read(&img, nullptr, out.pixels.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    undecodable(msg);
  }
  return out;
}

// Binary PNM header: magic, then width, height and (P5 only) maxval, with
// '#' comments, then a single whitespace byte.
GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  const bool bitmap = bytes[1] == '4';
  std::size_t pos = 2;
  auto next_int = [&]() -> long {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    long v = 0;
    std::size_t digits = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && digits < 9) {
      v = v * 10 + (bytes[pos] - '0');
      ++pos;
      ++digits;
    }
    if (digits == 0) undecodable("bad PNM header");
    return v;
  };
  const long w = next_int();
  const long h = next_int();
  const long maxval = bitmap ? 1 : next_int();
  if (w <= 0 || h <= 0 || w > 16384 || h > 16384 || maxval <= 0 || maxval > 255) undecodable("bad PNM header");
  ++pos;  // single whitespace after header
  GrayImage out(static_cast<int>(w), static_cast<int>(h));
  if (bitmap) {
    const std::size_t row_bytes = (static_cast<std::size_t>(w) + 7) / 8;
    if (pos > bytes.size() || bytes.size() - pos < row_bytes * h) undecodable("truncated PBM data");
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) {
        const std::uint8_t byte = bytes[pos + y * row_bytes + x / 8];
        const bool ink = (byte >> (7 - x % 8)) & 1;  // 1 = black in PBM
        out.at(static_cast<int>(x), static_cast<int>(y)) = ink ? 0 : 255;
      }
    }
  } else {
    const std::size_t n = static_cast<std::size_t>(w) * h;
    if (pos > bytes.size() || bytes.size() - pos < n) undecodable("truncated PGM data");
    for (std::size_t i = 0; i < n; ++i) out.pixels[i] = static_cast<std::uint8_t>(bytes[pos + i] * 255 / maxval);
  }
  return out;
}

}  // namespace

GrayImage decode_image(std::span<const std::uint8_t> bytes) {
  static constexpr std::array<std::uint8_t, 8> kPngSig = {0x89, 'P', 'N', 'G', 0x0D, 0x0A, 0x1A, 0x0A};
  if (bytes.size() >= 8 && std::equal(kPngSig.begin(), kPngSig.end(), bytes.begin())) return decode_png(bytes);
  if (bytes.size() >= 3 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '4')) return decode_pnm(bytes);
  undecodable("unrecognized format");
}

GrayImage read_image(const std::string& path) {
  std::vector<std::uint8_t> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const Error&) {
    undecodable("cannot read " + path);
  }
  return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const GrayImage& image) {
  png_image img;
  std::memset(&img, 0, sizeof img);
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::IoFailure, std::string("PNG encode: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, image.pixels.data(), 0, nullptr)) {
    fail(ErrorCode::IoFailure, std::string("PNG encode: ") + img.message);
  }
  out.resize(size);
  return out;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels.begin(), image.pixels.end());
  return out;
}

void write_image(const std::string& path, const GrayImage& image) {
  const bool pgm = path.size() >= 4 && path.compare(path.size() - 4, 4, ".pgm") == 0;
  write_file_bytes(path, pgm ? encode_pgm(image) : encode_png(image));
}

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (const std::size_t rest = bytes.size() - i; rest > 0) {
    std::uint32_t v = bytes[i] << 16;
    if (rest == 2) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += rest == 2 ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<std::uint8_t> base64_decode(std::string_view text) {
  std::array<int, 256> lookup;
  lookup.fill(-1);
  for (int i = 0; i < 64; ++i) lookup[static_cast<unsigned char>(kAlphabet[i])] = i;
  std::vector<std::uint8_t> out;
  out.reserve(text.size() / 4 * 3);
  std::uint32_t acc = 0;
  int bits = 0;
  for (char ch : text) {
    if (ch == '=') break;
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    const int v = lookup[static_cast<unsigned char>(ch)];
    if (v < 0) fail(ErrorCode::InvalidArgument, "invalid base64 character");
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<std::uint8_t>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace facet
