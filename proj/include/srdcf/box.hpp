#pragma once

namespace srdcf {

/// Axis-aligned box, 0-indexed continuous pixel coordinates of the top-left corner.
struct Box {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  [[nodiscard]] double center_x() const { return x + 0.5 * width; }
  [[nodiscard]] double center_y() const { return y + 0.5 * height; }
  [[nodiscard]] double area() const { return width * height; }

  static Box from_center(double cx, double cy, double w, double h) {
    return {cx - 0.5 * w, cy - 0.5 * h, w, h};
  }

  bool operator==(const Box&) const = default;
};

}  // namespace srdcf
