#include "mpt/geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mpt {

namespace {
constexpr double kDepthEps = 1e-12;
}

void CameraModel::validate() const {
  if (image_height <= 0 || image_width <= 0)
    throw std::invalid_argument("CameraModel: image size must be positive");
  if (!(intrinsics(0, 0) > 0.0) || !(intrinsics(1, 1) > 0.0))
    throw std::invalid_argument("CameraModel: focal lengths must be positive");
  const double cx = intrinsics(0, 2);
  const double cy = intrinsics(1, 2);
  if (cx < 0.0 || cx > image_width - 1 || cy < 0.0 || cy > image_height - 1)
    throw std::invalid_argument("CameraModel: principal point outside image");
  if ((rotation.transpose() * rotation - Matrix3::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw std::invalid_argument("CameraModel: rotation is not orthonormal");
  if (std::abs(intrinsics.determinant()) < 1e-12)
    throw std::invalid_argument("CameraModel: intrinsics are not invertible");
}

Vector3 CameraModel::world_to_camera(const Vector3& p_world) const {
  return rotation * p_world + translation;
}

double CameraModel::depth_of(const Vector3& p_world) const {
  return world_to_camera(p_world).z();
}

std::optional<Vector2> CameraModel::try_project(const Vector3& p_world) const {
  const Vector3 pc = world_to_camera(p_world);
  if (pc.z() <= kDepthEps) return std::nullopt;
  const Vector3 uvw = intrinsics * pc;
  return Vector2(uvw.x() / uvw.z(), uvw.y() / uvw.z());
}

Vector2 CameraModel::project(const Vector3& p_world) const {
  const auto px = try_project(p_world);
  if (!px) throw std::invalid_argument("CameraModel::project: point behind camera");
  return *px;
}

bool CameraModel::in_bounds(const Vector2& px) const {
  return px.x() >= 0.0 && px.x() <= image_width - 1 && px.y() >= 0.0 &&
         px.y() <= image_height - 1;
}

CameraModel look_at_camera(const Vector3& eye, const Vector3& target,
                           const Vector3& up, const Matrix3& intrinsics,
                           int image_height, int image_width) {
  const Vector3 forward = (target - eye).normalized();
  Vector3 right = forward.cross(up);
  if (right.norm() < 1e-9)
    throw std::invalid_argument("look_at_camera: up parallel to view direction");
  right.normalize();
  const Vector3 down = forward.cross(right);  // image y grows downward

  CameraModel cam;
  cam.intrinsics = intrinsics;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.translation = -cam.rotation * eye;
  cam.image_height = image_height;
  cam.image_width = image_width;
  cam.validate();
  return cam;
}

void MicArrayConfig::validate() const {
  if (mic_positions.size() < 2)
    throw std::invalid_argument("MicArrayConfig: need at least two microphones");
  if (pairs.empty()) throw std::invalid_argument("MicArrayConfig: empty pair set");
  if (!(speed_of_sound > 0.0))
    throw std::invalid_argument("MicArrayConfig: speed of sound must be positive");
  const int n = num_mics();
  for (const auto& [i, k] : pairs) {
    if (i < 0 || i >= n || k < 0 || k >= n)
      throw std::invalid_argument("MicArrayConfig: pair references invalid mic index");
    if (i == k) throw std::invalid_argument("MicArrayConfig: degenerate pair (i,i)");
  }
}

double MicArrayConfig::max_tdoa() const {
  double m = 0.0;
  for (const auto& [i, k] : pairs)
    m = std::max(m, (mic_positions[i] - mic_positions[k]).norm());
  return m / speed_of_sound;
}

std::vector<Vector3> circular_array(const Vector3& center, double radius,
                                    int count, double phase) {
  std::vector<Vector3> mics;
  mics.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double angle = phase + 2.0 * M_PI * i / count;
    mics.emplace_back(center.x() + radius * std::cos(angle),
                      center.y() + radius * std::sin(angle), center.z());
  }
  return mics;
}

std::vector<std::pair<int, int>> two_array_pairs(int count_a, int count_b) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < count_a; ++i)
    for (int k = i + 1; k < count_a; ++k) pairs.emplace_back(i, k);
  for (int i = 0; i < count_b; ++i)
    for (int k = i + 1; k < count_b; ++k)
      pairs.emplace_back(count_a + i, count_a + k);
  for (int i = 0; i < count_a; ++i)
    for (int k = 0; k < count_b; ++k) pairs.emplace_back(i, count_a + k);
  return pairs;
}

std::vector<std::pair<int, int>> all_pairs(int count) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < count; ++i)
    for (int k = i + 1; k < count; ++k) pairs.emplace_back(i, k);
  return pairs;
}

void RoomModel::validate() const {
  if (!(max_corner.x() > min_corner.x()) || !(max_corner.y() > min_corner.y()) ||
      !(max_corner.z() > min_corner.z()))
    throw std::invalid_argument("RoomModel: degenerate extent");
  if (table_height < min_corner.z() || table_height >= max_corner.z())
    throw std::invalid_argument("RoomModel: table height outside vertical extent");
}

bool RoomModel::contains(const Vector3& p) const {
  return p.x() >= min_corner.x() && p.x() <= max_corner.x() &&
         p.y() >= min_corner.y() && p.y() <= max_corner.y() &&
         p.z() >= min_corner.z() && p.z() <= max_corner.z() &&
         p.z() >= table_height;
}

Vector3 back_project(const Vector2& px, double depth, const CameraModel& cam) {
  if (!(depth > 0.0))
    throw std::invalid_argument("back_project: depth must be positive");
  if (std::abs(cam.intrinsics.determinant()) < 1e-12)
    throw std::invalid_argument("back_project: intrinsics are not invertible");
  Vector3 ray = cam.intrinsics.partialPivLu().solve(Vector3(px.x(), px.y(), 1.0));
  if (std::abs(ray.z()) < kDepthEps)
    throw std::invalid_argument("back_project: degenerate viewing ray");
  const Vector3 p_cam = ray * (depth / ray.z());
  return cam.rotation.transpose() * (p_cam - cam.translation);
}

SampleGrid build_sample_grid(const CameraModel& cam, const RoomModel& room,
                             int h, int w, const std::vector<double>& depths) {
  if (h < 2 || w < 2)
    throw std::invalid_argument("build_sample_grid: need h,w >= 2");
  if (depths.empty())
    throw std::invalid_argument("build_sample_grid: empty depth set");
  for (std::size_t k = 0; k < depths.size(); ++k) {
    if (!(depths[k] > 0.0))
      throw std::invalid_argument("build_sample_grid: depths must be positive");
    if (k > 0 && !(depths[k] > depths[k - 1]))
      throw std::invalid_argument("build_sample_grid: depths must be strictly increasing");
  }

  SampleGrid grid;
  grid.h = h;
  grid.w = w;
  grid.depths = depths;
  grid.px_x.resize(h, w);
  grid.px_y.resize(h, w);
  for (int i = 0; i < h; ++i) {
    const double y = static_cast<double>(i) * (cam.image_height - 1) / (h - 1);
    for (int j = 0; j < w; ++j) {
      grid.px_x(i, j) = static_cast<double>(j) * (cam.image_width - 1) / (w - 1);
      grid.px_y(i, j) = y;
    }
  }

  bool any_valid = false;
  for (double depth : depths) {
    Eigen::Matrix3Xd pts(3, h * w);
    BoolGrid mask(h, w);
    for (int i = 0; i < h; ++i) {
      for (int j = 0; j < w; ++j) {
        const Vector3 p = back_project(
            Vector2(grid.px_x(i, j), grid.px_y(i, j)), depth, cam);
        pts.col(grid.cell(i, j)) = p;
        mask(i, j) = room.contains(p);
        any_valid |= mask(i, j);
      }
    }
    grid.points_3d.push_back(std::move(pts));
    grid.valid.push_back(std::move(mask));
  }
  if (!any_valid)
    throw std::invalid_argument(
        "build_sample_grid: every candidate point violates the room model");
  return grid;
}

double tdoa(const Vector3& p, const std::pair<int, int>& pair,
            const MicArrayConfig& mics) {
  const int n = mics.num_mics();
  if (pair.first < 0 || pair.first >= n || pair.second < 0 || pair.second >= n ||
      pair.first == pair.second)
    throw std::invalid_argument("tdoa: invalid mic pair");
  const double di = (p - mics.mic_positions[pair.first]).norm();
  const double dk = (p - mics.mic_positions[pair.second]).norm();
  return (di - dk) / mics.speed_of_sound;
}

std::vector<double> uniform_depths(double near, double far, int count) {
  if (!(near > 0.0) || !(far > near) || count < 1)
    throw std::invalid_argument("uniform_depths: need 0 < near < far, count >= 1");
  std::vector<double> depths(count);
  if (count == 1) {
    depths[0] = 0.5 * (near + far);
    return depths;
  }
  for (int k = 0; k < count; ++k)
    depths[k] = near + (far - near) * k / (count - 1);
  return depths;
}

}  // namespace mpt
