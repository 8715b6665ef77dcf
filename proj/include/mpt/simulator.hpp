#pragma once

#include <limits>
#include <vector>

#include "mpt/geometry.hpp"
#include "mpt/visual_cues.hpp"

namespace mpt {

struct SpeechSegment {
  double start = 0.0;  // seconds
  double stop = 0.0;
};

/// Rectangular paint-over region in fractional image coordinates; the
/// default covers the middle third of the frame width, full height.
struct OcclusionSpec {
  bool enabled = false;
  double x0 = 1.0 / 3.0;
  double x1 = 2.0 / 3.0;
  double y0 = 0.0;
  double y1 = 1.0;
  double start = 0.0;
  double stop = std::numeric_limits<double>::infinity();
  double fill = 0.4;  // painted intensity
};

/// Everything needed to render one ground-truthed scene deterministically.
struct SceneConfig {
  RoomModel room;
  CameraModel cam;
  MicArrayConfig mics;

  std::vector<Vector3> waypoints;  // walked at constant speed, then hold
  double speed = 0.5;              // m/s
  std::vector<SpeechSegment> speech;
  double snr_db = std::numeric_limits<double>::infinity();
  OcclusionSpec occlusion;

  double duration = 8.0;        // seconds
  double frame_rate = 25.0;     // Hz
  double sample_rate = 16000.0; // Hz
  int target_width = 32;        // rendered target patch, pixels
  int target_height = 40;
  int distractors = 0;
  std::uint64_t seed = 1;

  void validate() const;
  int num_frames() const;
  int num_samples() const;
};

/// Per-frame ground truth.
struct SceneTruth {
  std::vector<Vector3> pos3d;
  std::vector<Vector2> pos2d;
  std::vector<std::uint8_t> speaking;
  std::vector<std::uint8_t> occluded;

  int frames() const { return static_cast<int>(pos3d.size()); }
  double occlusion_rate() const;  // percent of occluded frames
};

/// Source position at time t: waypoints walked at constant speed, holding
/// the last one.
Vector3 trajectory_position(const SceneConfig& cfg, double t);

bool is_speaking(const SceneConfig& cfg, double t);

/// Free-field rendering: band-limited noise bursts gated by the speech
/// pattern, delayed per mic by the exact fractional propagation delay with
/// 1/r gain, plus white noise at the configured SNR (inf = none).
std::vector<Eigen::VectorXd> synth_audio(const SceneConfig& cfg);

/// Frames with a textured target patch at the projected position, optional
/// distractor patches, and the occlusion schedule painted over. Throws when
/// the trajectory projects outside the image.
std::pair<std::vector<Frame>, SceneTruth> synth_frames(const SceneConfig& cfg);

struct Scene {
  SceneConfig config;
  std::vector<Eigen::VectorXd> audio;
  std::vector<Frame> frames;
  SceneTruth truth;
};

Scene generate_scene(const SceneConfig& cfg);

/// AV16.3-style default: paper room and image size, two circular 8-mic
/// table arrays (120 pairs), corner camera overlooking the walk area.
SceneConfig default_scene();

}  // namespace mpt
