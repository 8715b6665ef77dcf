#include "mpt/visual_cues.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpt {

namespace {

inline int clampi(int v, int lo, int hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

TemplateSet make_templates(const Frame& first_frame, const BBox& bbox,
                           const std::vector<double>& scales) {
  if (first_frame.rows() == 0 || first_frame.cols() == 0)
    throw std::invalid_argument("make_templates: empty frame");
  if (bbox.width < 1.0 || bbox.height < 1.0)
    throw std::invalid_argument("make_templates: degenerate bbox");
  if (bbox.cx < 0 || bbox.cx > first_frame.cols() - 1 || bbox.cy < 0 ||
      bbox.cy > first_frame.rows() - 1)
    throw std::invalid_argument("make_templates: bbox center outside frame");
  if (scales.empty())
    throw std::invalid_argument("make_templates: no scales given");

  TemplateSet set;
  set.origin = bbox;
  set.scales = scales;
  const int cx = static_cast<int>(std::llround(bbox.cx));
  const int cy = static_cast<int>(std::llround(bbox.cy));
  for (double s : scales) {
    if (!(s > 0.0)) throw std::invalid_argument("make_templates: scale must be positive");
    const int pw = std::max<int>(1, static_cast<int>(std::llround(bbox.width * s)));
    const int ph = std::max<int>(1, static_cast<int>(std::llround(bbox.height * s)));
    const int x0 = cx - pw / 2;
    const int y0 = cy - ph / 2;
    Eigen::MatrixXd patch(ph, pw);
    for (int r = 0; r < ph; ++r) {
      const int yy = clampi(y0 + r, 0, first_frame.rows() - 1);
      for (int c = 0; c < pw; ++c)
        patch(r, c) = first_frame.pixels(yy, clampi(x0 + c, 0, first_frame.cols() - 1));
    }
    set.patches.push_back(std::move(patch));
  }
  return set;
}

ScoreMap response_map_raw(const Frame& frame, const Eigen::MatrixXd& tmpl) {
  const int H = frame.rows();
  const int W = frame.cols();
  const int ph = static_cast<int>(tmpl.rows());
  const int pw = static_cast<int>(tmpl.cols());
  if (ph > H || pw > W)
    throw std::invalid_argument("response_map: template larger than frame");
  if (ph < 1 || pw < 1)
    throw std::invalid_argument("response_map: empty template");

  ScoreMap map;
  map.time = frame.index;
  map.kind = ChannelKind::visual;

  const double npix = static_cast<double>(ph) * pw;
  const Eigen::MatrixXd tz = tmpl.array() - tmpl.mean();
  const double tnorm = std::sqrt(tz.squaredNorm());
  if (tnorm < 1e-12) {
    map.values.setZero(H, W);
    map.degenerate = true;
    map.raw_peak = 0.0;
    return map;
  }

  // Window sums via summed-area tables; the correlation itself runs over
  // contiguous columns (Eigen stores column-major).
  Eigen::MatrixXd s1 = Eigen::MatrixXd::Zero(H + 1, W + 1);
  Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(H + 1, W + 1);
  for (int x = 0; x < W; ++x) {
    double c1 = 0.0, c2 = 0.0;
    for (int y = 0; y < H; ++y) {
      const double v = frame.pixels(y, x);
      c1 += v;
      c2 += v * v;
      s1(y + 1, x + 1) = s1(y + 1, x) + c1;
      s2(y + 1, x + 1) = s2(y + 1, x) + c2;
    }
  }
  auto rect = [&](const Eigen::MatrixXd& s, int y, int x) {
    return s(y + ph, x + pw) - s(y, x + pw) - s(y + ph, x) + s(y, x);
  };

  const int vh = H - ph + 1;
  const int vw = W - pw + 1;
  Eigen::MatrixXd valid(vh, vw);
  for (int x = 0; x < vw; ++x) {
    for (int y = 0; y < vh; ++y) {
      double num = 0.0;
      for (int c = 0; c < pw; ++c)
        num += tz.col(c).dot(frame.pixels.col(x + c).segment(y, ph));
      const double sum = rect(s1, y, x);
      const double var = rect(s2, y, x) - sum * sum / npix;
      valid(y, x) = var > 1e-12 ? num / (std::sqrt(var) * tnorm) : 0.0;
    }
  }

  // Edge-replicate the valid region to full frame size so audio and visual
  // maps share a lattice.
  const int oy = ph / 2;
  const int ox = pw / 2;
  map.values.resize(H, W);
  for (int y = 0; y < H; ++y) {
    const int yy = clampi(y - oy, 0, vh - 1);
    for (int x = 0; x < W; ++x)
      map.values(y, x) = valid(yy, clampi(x - ox, 0, vw - 1));
  }
  map.raw_peak = map.peak().value;
  return map;
}

ScoreMap response_map(const Frame& frame, const Eigen::MatrixXd& tmpl) {
  ScoreMap norm = response_map_raw(frame, tmpl).normalized();
  norm.kind = ChannelKind::visual;
  return norm;
}

std::vector<ScoreMap> visual_cues(const Frame& frame,
                                  const TemplateSet& templates) {
  if (templates.size() == 0)
    throw std::invalid_argument("visual_cues: empty template set");
  std::vector<ScoreMap> maps;
  maps.reserve(templates.size());
  for (const auto& patch : templates.patches) maps.push_back(response_map(frame, patch));
  return maps;
}

}  // namespace mpt
