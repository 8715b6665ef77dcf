#pragma once

#include <span>
#include <vector>

#include "mpt/common.hpp"
#include "mpt/perception.hpp"
#include "mpt/rng.hpp"
#include "mpt/score_map.hpp"

namespace mpt {

/// Weighted 2D image-position particles with their own generator state.
struct ParticleSet {
  Eigen::Matrix2Xd positions;  // column per particle, (x, y) pixels
  Eigen::VectorXd weights;
  Rng rng;

  int size() const { return static_cast<int>(positions.cols()); }
};

struct TrackerOptions {
  int num_particles = 100;
  double reset_fraction = 0.25;   // share of particles snapped to the map peak
  double sigma_x = -1.0;          // diffusion, pixels; <0 = 2% of frame diagonal
  double sigma_y = -1.0;
  double weight_floor = 1e-6;
  double resample_fraction = 0.5; // resample when ESS < fraction * N
};

struct TrackState {
  Vector2 estimate = Vector2::Zero();
  double peak_value = 0.0;   // fusion map maximum this frame
  double ess = 0.0;          // effective sample size
  bool uninformative = false;  // every particle hit the weight floor
  int frame = -1;
};

/// Particles drawn around the bbox center, sigma = diagonal/4, uniform
/// weights. Deterministic under seed.
ParticleSet init_particles(const BBox& bbox, int n, std::uint64_t seed);

/// One filter iteration against a fusion map: peak reset, diffusion,
/// map-valued reweighting, estimate, and systematic resampling when the
/// effective sample size drops below the configured fraction of N.
TrackState step(ParticleSet& particles, const ScoreMap& fusion,
                const TrackerOptions& options, int frame_index = -1);

/// Runs the filter over precomputed fusion maps.
std::vector<TrackState> track(std::span<const ScoreMap> fusion_maps,
                              const TrackerOptions& options, const BBox& init_bbox,
                              std::uint64_t seed);

/// Full pipeline recursion: attention scores and fusion map per stack, then
/// one filter step each.
std::vector<TrackState> track(std::span<const CueStack> stacks,
                              const PerceptionParams& params,
                              const TrackerOptions& options, const BBox& init_bbox,
                              std::uint64_t seed);

}  // namespace mpt
