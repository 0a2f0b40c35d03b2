#pragma once

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include <cmath>
#include <string>

#include "srdcf/error.hpp"
#include "srdcf/image.hpp"

namespace srdcf {

/// Reads a gray or colour image. Colour images become RGB, alpha is dropped.
inline Image read_image(const std::string& path) {
  const cv::Mat m = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (m.empty()) throw IngestionError("cannot read image " + path);
  if (m.depth() != CV_8U) throw IngestionError("unsupported pixel depth in " + path);
  const int ch = m.channels();
  if (ch != 1 && ch != 3 && ch != 4) throw IngestionError("unsupported channel count in " + path);
  Image img(m.cols, m.rows, ch == 1 ? 1 : 3);
  for (int y = 0; y < m.rows; ++y) {
    const unsigned char* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < m.cols; ++x) {
      if (ch == 1) {
        img.at(x, y) = row[x];
      } else {
        const unsigned char* px = row + static_cast<std::size_t>(x) * ch;
        img.at(x, y, 0) = px[2];
        img.at(x, y, 1) = px[1];
        img.at(x, y, 2) = px[0];
      }
    }
  }
  return img;
}

/// Writes an 8-bit image; the format follows the file extension.
inline void write_image(const std::string& path, const Image& img) {
  if (img.empty()) throw InvalidInput("write_image: empty image");
  cv::Mat m(img.height, img.width, img.channels == 1 ? CV_8UC1 : CV_8UC3);
  auto to8 = [](float v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 255.0f)));
  };
  for (int y = 0; y < img.height; ++y) {
    unsigned char* row = m.ptr<unsigned char>(y);
    for (int x = 0; x < img.width; ++x) {
      if (img.channels == 1) {
        row[x] = to8(img.at(x, y));
      } else {
        row[3 * x + 0] = to8(img.at(x, y, 2));
        row[3 * x + 1] = to8(img.at(x, y, 1));
        row[3 * x + 2] = to8(img.at(x, y, 0));
      }
    }
  }
  if (!cv::imwrite(path, m)) throw Error("cannot write image " + path);
}

}  // namespace srdcf
