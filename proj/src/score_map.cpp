#include "mpt/score_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mpt {

ScoreMap::Peak ScoreMap::peak() const {
  Peak p;
  p.value = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < rows(); ++y) {
    for (int x = 0; x < cols(); ++x) {
      const double v = values(y, x);
      if (std::isfinite(v) && v > p.value) {
        p.value = v;
        p.x = x;
        p.y = y;
      }
    }
  }
  if (!std::isfinite(p.value)) p.value = 0.0;
  return p;
}

ScoreMap ScoreMap::normalized() const {
  ScoreMap out;
  out.time = time;
  out.kind = kind;
  out.values.setZero(rows(), cols());

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int y = 0; y < rows(); ++y) {
    for (int x = 0; x < cols(); ++x) {
      const double v = values(y, x);
      if (!std::isfinite(v)) continue;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }

  if (!std::isfinite(hi) || hi - lo <= 0.0) {
    out.degenerate = true;
    out.raw_peak = std::isfinite(hi) ? hi : 0.0;
    return out;
  }

  const double scale = 1.0 / (hi - lo);
  for (int y = 0; y < rows(); ++y) {
    for (int x = 0; x < cols(); ++x) {
      const double v = values(y, x);
      out.values(y, x) = std::isfinite(v) ? (v - lo) * scale : 0.0;
    }
  }
  out.degenerate = degenerate;
  out.raw_peak = hi;
  return out;
}

double ScoreMap::sample(double x, double y) const {
  const int w = cols();
  const int h = rows();
  if (w == 0 || h == 0) return 0.0;
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  const int x0 = std::min(static_cast<int>(x), w - 2 >= 0 ? w - 2 : 0);
  const int y0 = std::min(static_cast<int>(y), h - 2 >= 0 ? h - 2 : 0);
  const int x1 = std::min(x0 + 1, w - 1);
  const int y1 = std::min(y0 + 1, h - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  return (1.0 - fy) * ((1.0 - fx) * values(y0, x0) + fx * values(y0, x1)) +
         fy * ((1.0 - fx) * values(y1, x0) + fx * values(y1, x1));
}

ScoreMap upsample_bilinear(const ScoreMap& map, int out_rows, int out_cols) {
  if (map.rows() < 2 || map.cols() < 2)
    throw std::invalid_argument("upsample_bilinear: lattice must be at least 2x2");
  if (out_rows < 2 || out_cols < 2)
    throw std::invalid_argument("upsample_bilinear: output must be at least 2x2");

  ScoreMap out;
  out.time = map.time;
  out.kind = map.kind;
  out.degenerate = map.degenerate;
  out.raw_peak = map.raw_peak;
  out.values.resize(out_rows, out_cols);

  const double sy = static_cast<double>(map.rows() - 1) / (out_rows - 1);
  const double sx = static_cast<double>(map.cols() - 1) / (out_cols - 1);
  for (int y = 0; y < out_rows; ++y) {
    const double gy = y * sy;
    for (int x = 0; x < out_cols; ++x) {
      out.values(y, x) = map.sample(x * sx, gy);
    }
  }
  return out;
}

}  // namespace mpt
