#include "mpt/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mpt {

ParticleSet init_particles(const BBox& bbox, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("init_particles: need at least one particle");
  ParticleSet set;
  set.rng.reseed(seed);
  set.positions.resize(2, n);
  const double sigma = bbox.diagonal() / 4.0;
  for (int i = 0; i < n; ++i) {
    set.positions(0, i) = bbox.cx + sigma * set.rng.normal();
    set.positions(1, i) = bbox.cy + sigma * set.rng.normal();
  }
  set.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  return set;
}

namespace {

void systematic_resample(ParticleSet& particles) {
  const int n = particles.size();
  Eigen::VectorXd cumulative(n);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += particles.weights[i];
    cumulative[i] = acc;
  }
  cumulative[n - 1] = 1.0;  // guard against rounding

  Eigen::Matrix2Xd resampled(2, n);
  const double offset = particles.rng.uniform() / n;
  int j = 0;
  for (int i = 0; i < n; ++i) {
    const double u = offset + static_cast<double>(i) / n;
    while (cumulative[j] < u) ++j;
    resampled.col(i) = particles.positions.col(j);
  }
  particles.positions = std::move(resampled);
  particles.weights.setConstant(1.0 / n);
}

}  // namespace

TrackState step(ParticleSet& particles, const ScoreMap& fusion,
                const TrackerOptions& options, int frame_index) {
  if (particles.size() == 0) throw std::invalid_argument("step: empty particle set");
  if (fusion.rows() < 2 || fusion.cols() < 2)
    throw std::invalid_argument("step: fusion map too small");
  if (!fusion.values.allFinite())
    throw std::invalid_argument("step: fusion map must be finite");
  if (options.reset_fraction < 0.0 || options.reset_fraction > 1.0)
    throw std::invalid_argument("step: reset fraction outside [0, 1]");

  const int n = particles.size();
  const double width = fusion.cols() - 1;
  const double height = fusion.rows() - 1;
  const auto map_peak = fusion.peak();

  // 1. reset a group of particles to the global peak of the fusion map
  const int reset_count =
      static_cast<int>(std::ceil(options.reset_fraction * n - 1e-12));
  for (int i = 0; i < reset_count; ++i) {
    particles.positions(0, i) = map_peak.x;
    particles.positions(1, i) = map_peak.y;
  }

  // 2. diffuse
  const double frame_diag = std::hypot(width + 1, height + 1);
  const double sx = options.sigma_x > 0.0 ? options.sigma_x : 0.02 * frame_diag;
  const double sy = options.sigma_y > 0.0 ? options.sigma_y : 0.02 * frame_diag;
  for (int i = 0; i < n; ++i) {
    particles.positions(0, i) =
        std::clamp(particles.positions(0, i) + sx * particles.rng.normal(), 0.0, width);
    particles.positions(1, i) =
        std::clamp(particles.positions(1, i) + sy * particles.rng.normal(), 0.0, height);
  }

  // 3. new weight = fusion map value at the particle, floored
  bool any_above_floor = false;
  for (int i = 0; i < n; ++i) {
    const double v = fusion.sample(particles.positions(0, i), particles.positions(1, i));
    particles.weights[i] = std::max(v, options.weight_floor);
    any_above_floor |= v > options.weight_floor;
  }

  TrackState state;
  state.frame = frame_index;
  state.peak_value = map_peak.value;
  state.uninformative = !any_above_floor;
  if (state.uninformative) particles.weights.setConstant(1.0);

  // 4. normalize
  particles.weights /= particles.weights.sum();

  // 5. weighted-mean estimate
  state.estimate = particles.positions * particles.weights;

  // 6. systematic resampling on effective-sample-size collapse
  state.ess = 1.0 / particles.weights.squaredNorm();
  if (state.ess < options.resample_fraction * n) systematic_resample(particles);

  return state;
}

std::vector<TrackState> track(std::span<const ScoreMap> fusion_maps,
                              const TrackerOptions& options, const BBox& init_bbox,
                              std::uint64_t seed) {
  ParticleSet particles = init_particles(init_bbox, options.num_particles, seed);
  std::vector<TrackState> trajectory;
  trajectory.reserve(fusion_maps.size());
  int frame = 0;
  for (const auto& z : fusion_maps)
    trajectory.push_back(step(particles, z, options, frame++));
  return trajectory;
}

std::vector<TrackState> track(std::span<const CueStack> stacks,
                              const PerceptionParams& params,
                              const TrackerOptions& options, const BBox& init_bbox,
                              std::uint64_t seed) {
  ParticleSet particles = init_particles(init_bbox, options.num_particles, seed);
  std::vector<TrackState> trajectory;
  trajectory.reserve(stacks.size());
  int frame = 0;
  for (const auto& stack : stacks) {
    const Eigen::VectorXd alpha = attention_forward(stack, params);
    const ScoreMap z = fusion_map(stack, alpha);
    trajectory.push_back(step(particles, z, options, frame++));
  }
  return trajectory;
}

}  // namespace mpt
