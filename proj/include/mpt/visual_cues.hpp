#pragma once

#include <optional>
#include <vector>

#include "mpt/common.hpp"
#include "mpt/score_map.hpp"

namespace mpt {

/// Grayscale video frame, intensities in [0, 1]. The occlusion mask is
/// ground-truth bookkeeping written by the simulator; cue extraction and
/// tracking never read it.
struct Frame {
  Eigen::MatrixXd pixels;  // H x W
  int index = 0;
  std::optional<BoolGrid> occlusion_mask;

  int rows() const { return static_cast<int>(pixels.rows()); }
  int cols() const { return static_cast<int>(pixels.cols()); }
};

/// Reference patches cut around the target in the first frame, one per scale.
struct TemplateSet {
  std::vector<Eigen::MatrixXd> patches;
  std::vector<double> scales;
  BBox origin;

  int size() const { return static_cast<int>(patches.size()); }
};

/// Center-anchored patches, one per scale; pixels outside the frame are
/// edge-replicated. Throws on a degenerate bbox or non-positive scale.
TemplateSet make_templates(const Frame& first_frame, const BBox& bbox,
                           const std::vector<double>& scales);

/// Zero-normalized cross-correlation of the template against every valid
/// position, edge-padded back to frame size. Raw values in [-1, 1].
/// A zero-variance template yields a flat map flagged degenerate.
ScoreMap response_map_raw(const Frame& frame, const Eigen::MatrixXd& tmpl);

/// response_map_raw followed by min-max normalization to [0, 1];
/// raw_peak keeps the best raw correlation.
ScoreMap response_map(const Frame& frame, const Eigen::MatrixXd& tmpl);

/// One normalized response map per template.
std::vector<ScoreMap> visual_cues(const Frame& frame, const TemplateSet& templates);

}  // namespace mpt
