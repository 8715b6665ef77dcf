#pragma once

#include <Eigen/Dense>

namespace mpt {

enum class ChannelKind { audio, visual, fused };

/// Scalar likelihood map on a rectangular lattice. Rows run down the image
/// (y), columns across (x). Raw maps may contain -inf at masked-out cells;
/// normalized maps are in [0, 1].
struct ScoreMap {
  Eigen::MatrixXd values;
  int time = -1;
  ChannelKind kind = ChannelKind::audio;
  bool degenerate = false;  // constant or empty raw map
  double raw_peak = 0.0;    // peak value before normalization

  int rows() const { return static_cast<int>(values.rows()); }
  int cols() const { return static_cast<int>(values.cols()); }

  struct Peak {
    int x = 0;
    int y = 0;
    double value = 0.0;
  };

  /// Argmax over finite entries, first in row-major scan order on ties.
  Peak peak() const;

  /// Affine min-max rescale of the finite entries to [0, 1]; -inf cells map
  /// to 0. A constant (or all-masked) map becomes all zeros with the
  /// degenerate flag set. raw_peak keeps the pre-normalization maximum.
  ScoreMap normalized() const;

  /// Bilinear sample at fractional (x, y), clamped to the lattice.
  double sample(double x, double y) const;
};

/// Border-aligned bilinear upsample: input cell (i, j) lands exactly on
/// output pixel (i*(out_rows-1)/(rows-1), j*(out_cols-1)/(cols-1)).
ScoreMap upsample_bilinear(const ScoreMap& map, int out_rows, int out_cols);

}  // namespace mpt
