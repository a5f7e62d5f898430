// SPDX-License-Identifier: Apache-2.0
//
// 8-bit RGB raster and binary PPM (P6) I/O.
#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rgbd_size/error.hpp"

namespace rgbd {

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

class Image {
 public:
  Image() = default;
  Image(int width, int height, Rgb fill = {})
      : width_(width), height_(height), data_(static_cast<std::size_t>(width) * height, fill) {}

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  const Rgb& at(int x, int y) const { return data_[index(x, y)]; }
  Rgb& at(int x, int y) { return data_[index(x, y)]; }
  const std::vector<Rgb>& pixels() const noexcept { return data_; }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<Rgb> data_;
};

inline void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width() << ' ' << img.height() << "\n255\n";
  static_assert(sizeof(Rgb) == 3);
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(img.pixels().size() * sizeof(Rgb)));
}

/// Reads binary PPM with maxval 255; '#' comments are allowed in the header.
inline Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.filename().string());
  const std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string name = path.filename().string();

  std::size_t pos = 0;
  int line = 1;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ParseError, name + ":" + std::to_string(line) + ": " + what);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line;
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&] {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) fail("expected integer");
    long value = 0;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000) fail("header value too large");
      ++pos;
    }
    return static_cast<int>(value);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') fail("not a binary PPM (P6)");
  pos = 2;
  const int width = read_int();
  const int height = read_int();
  const int maxval = read_int();
  if (width <= 0 || height <= 0) fail("non-positive image size");
  if (maxval != 255) fail("maxval must be 255");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) fail("missing header terminator");
  ++pos;

  const std::size_t expected = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * 3;
  if (bytes.size() - pos != expected) {
    fail("expected " + std::to_string(expected) + " pixel bytes, found " + std::to_string(bytes.size() - pos));
  }
  Image img(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      auto& px = img.at(x, y);
      px.r = static_cast<std::uint8_t>(bytes[pos++]);
      px.g = static_cast<std::uint8_t>(bytes[pos++]);
      px.b = static_cast<std::uint8_t>(bytes[pos++]);
    }
  }
  return img;
}

}  // namespace rgbd
