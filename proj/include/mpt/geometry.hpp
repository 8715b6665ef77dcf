#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mpt/common.hpp"

namespace mpt {

/// Calibrated pinhole camera. World points map to the camera frame through
/// x_cam = rotation * x_world + translation; depth means camera-frame z
/// (distance along the optical axis, not the ray length).
struct CameraModel {
  Matrix3 intrinsics = Matrix3::Identity();
  Matrix3 rotation = Matrix3::Identity();
  Vector3 translation = Vector3::Zero();
  int image_height = 0;
  int image_width = 0;

  /// Throws std::invalid_argument when the calibration is inconsistent
  /// (non-orthonormal rotation, non-positive focals, principal point
  /// outside the image, singular intrinsics).
  void validate() const;

  Vector3 world_to_camera(const Vector3& p_world) const;
  double depth_of(const Vector3& p_world) const;

  /// Projects a world point; std::nullopt when the point is not in front of
  /// the camera. Pixel x runs along image width, y along height.
  std::optional<Vector2> try_project(const Vector3& p_world) const;

  /// Same as try_project but throws on points behind the camera.
  Vector2 project(const Vector3& p_world) const;

  bool in_bounds(const Vector2& px) const;
};

/// Camera posed at `eye` looking toward `target`, with `up` fixing the roll.
CameraModel look_at_camera(const Vector3& eye, const Vector3& target,
                           const Vector3& up, const Matrix3& intrinsics,
                           int image_height, int image_width);

/// Microphone geometry plus the set of pairs used by the coherence maps.
struct MicArrayConfig {
  std::vector<Vector3> mic_positions;
  std::vector<std::pair<int, int>> pairs;
  double speed_of_sound = 343.0;

  int num_mics() const { return static_cast<int>(mic_positions.size()); }
  int num_pairs() const { return static_cast<int>(pairs.size()); }
  void validate() const;

  /// Largest theoretical |TDOA| over all pairs (triangle inequality bound).
  double max_tdoa() const;
};

/// Horizontal circle of `count` mics around `center`.
std::vector<Vector3> circular_array(const Vector3& center, double radius,
                                    int count, double phase = 0.0);

/// All pairs within each block plus all cross-block pairs. Two 8-mic arrays
/// give 2*C(8,2) + 64 = 120 pairs.
std::vector<std::pair<int, int>> two_array_pairs(int count_a, int count_b);

std::vector<std::pair<int, int>> all_pairs(int count);

/// Room extent with a working surface; grid candidates below the table or
/// outside the walls are rejected.
struct RoomModel {
  Vector3 min_corner = Vector3::Zero();
  Vector3 max_corner = Vector3::Zero();
  double table_height = 0.0;

  void validate() const;
  bool contains(const Vector3& p) const;
};

/// Pixel lattice and its back-projections onto the candidate depth planes.
struct SampleGrid {
  int h = 0;  // vertical sample count
  int w = 0;  // horizontal sample count
  Eigen::MatrixXd px_x;  // h x w pixel coordinates
  Eigen::MatrixXd px_y;
  std::vector<Eigen::Matrix3Xd> points_3d;  // per depth, column index = i*w + j
  std::vector<BoolGrid> valid;              // per depth, h x w
  std::vector<double> depths;

  int num_depths() const { return static_cast<int>(depths.size()); }
  int cell(int i, int j) const { return i * w + j; }
};

/// Back-projects pixel coordinates to the world point at camera depth
/// `depth`. Inverse of CameraModel::project for points in front of the
/// camera.
Vector3 back_project(const Vector2& px, double depth, const CameraModel& cam);

/// Uniform h x w pixel lattice (inclusive image borders) back-projected to
/// every depth plane, masked by the room constraints. Throws when no depth
/// plane keeps a single valid point.
SampleGrid build_sample_grid(const CameraModel& cam, const RoomModel& room,
                             int h, int w, const std::vector<double>& depths);

/// Theoretical TDOA of point p for pair (i, k): (|p-m_i| - |p-m_k|)/c.
double tdoa(const Vector3& p, const std::pair<int, int>& pair,
            const MicArrayConfig& mics);

/// Evenly spaced depth values over [near, far], inclusive.
std::vector<double> uniform_depths(double near, double far, int count);

}  // namespace mpt
