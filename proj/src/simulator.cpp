#include "mpt/simulator.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mpt/rng.hpp"

namespace mpt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// Smooth value-noise texture in [0,1]: seeded coarse lattices upsampled
// bilinearly and blended over a few octaves.
Eigen::MatrixXd value_noise(int rows, int cols, int base_cells, int octaves,
                            Rng& rng) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
  double amplitude = 1.0;
  double total = 0.0;
  for (int o = 0; o < octaves; ++o) {
    const int ch = std::min(rows, base_cells << o);
    const int cw = std::min(cols, base_cells << o);
    Eigen::MatrixXd lattice(ch + 1, cw + 1);
    for (int i = 0; i <= ch; ++i)
      for (int j = 0; j <= cw; ++j) lattice(i, j) = rng.uniform();
    for (int y = 0; y < rows; ++y) {
      const double gy = static_cast<double>(y) * ch / rows;
      const int iy = static_cast<int>(gy);
      const double fy = gy - iy;
      for (int x = 0; x < cols; ++x) {
        const double gx = static_cast<double>(x) * cw / cols;
        const int ix = static_cast<int>(gx);
        const double fx = gx - ix;
        const double v =
            (1 - fy) * ((1 - fx) * lattice(iy, ix) + fx * lattice(iy, ix + 1)) +
            fy * ((1 - fx) * lattice(iy + 1, ix) + fx * lattice(iy + 1, ix + 1));
        out(y, x) += amplitude * v;
      }
    }
    total += amplitude;
    amplitude *= 0.5;
  }
  return out / total;
}

// Band-limited noise with a mild low-frequency tilt, synthesized in the
// frequency domain so the out-of-band bins are exactly zero.
Eigen::VectorXd bandlimited_burst(int length, double fs, Rng& rng) {
  const int n = next_pow2(std::max(length, 2));
  const double f_lo = 100.0;
  const double f_hi = std::min(7000.0, 0.45 * fs);
  Eigen::VectorXcd spec = Eigen::VectorXcd::Zero(n);
  for (int f = 1; f < n / 2; ++f) {
    const double freq = f * fs / n;
    if (freq < f_lo || freq > f_hi) continue;
    const double mag = 1.0 / std::sqrt(freq);
    const double phase = kTwoPi * rng.uniform();
    spec[f] = std::polar(mag, phase);
    spec[n - f] = std::conj(spec[f]);
  }
  Eigen::FFT<double> fft;
  Eigen::VectorXcd time(n);
  fft.inv(time, spec);
  Eigen::VectorXd burst = time.real().head(length);
  const double rms = std::sqrt(burst.squaredNorm() / length);
  if (rms > 0.0) burst *= 0.3 / rms;
  return burst;
}

}  // namespace

void SceneConfig::validate() const {
  room.validate();
  cam.validate();
  mics.validate();
  if (waypoints.empty())
    throw std::invalid_argument("SceneConfig: need at least one waypoint");
  for (const auto& w : waypoints)
    if (!room.contains(w))
      throw std::invalid_argument("SceneConfig: waypoint outside room or below table");
  if (!(speed >= 0.0)) throw std::invalid_argument("SceneConfig: negative speed");
  if (!(duration > 0.0) || !(frame_rate > 0.0) || !(sample_rate > 0.0))
    throw std::invalid_argument("SceneConfig: bad duration or rates");
  for (const auto& seg : speech)
    if (!(seg.stop > seg.start) || seg.start < 0.0)
      throw std::invalid_argument("SceneConfig: bad speech segment");
  if (target_width < 4 || target_height < 4)
    throw std::invalid_argument("SceneConfig: target patch too small");
}

int SceneConfig::num_frames() const {
  return static_cast<int>(std::llround(duration * frame_rate));
}

int SceneConfig::num_samples() const {
  return static_cast<int>(std::llround(duration * sample_rate));
}

double SceneTruth::occlusion_rate() const {
  if (occluded.empty()) return 0.0;
  double count = 0;
  for (auto f : occluded) count += f ? 1 : 0;
  return 100.0 * count / occluded.size();
}

Vector3 trajectory_position(const SceneConfig& cfg, double t) {
  if (cfg.waypoints.size() == 1 || cfg.speed <= 0.0) return cfg.waypoints.front();
  double distance = std::max(0.0, t) * cfg.speed;
  for (std::size_t i = 0; i + 1 < cfg.waypoints.size(); ++i) {
    const Vector3& a = cfg.waypoints[i];
    const Vector3& b = cfg.waypoints[i + 1];
    const double leg = (b - a).norm();
    if (distance <= leg) {
      if (leg < 1e-12) return a;
      return a + (distance / leg) * (b - a);
    }
    distance -= leg;
  }
  return cfg.waypoints.back();
}

bool is_speaking(const SceneConfig& cfg, double t) {
  for (const auto& seg : cfg.speech)
    if (t >= seg.start && t < seg.stop) return true;
  return false;
}

std::vector<Eigen::VectorXd> synth_audio(const SceneConfig& cfg) {
  cfg.validate();
  const int n = cfg.num_samples();
  const double fs = cfg.sample_rate;
  const int num_mics = cfg.mics.num_mics();

  // Gated source signal with raised-cosine segment edges.
  Eigen::VectorXd source = Eigen::VectorXd::Zero(n);
  int segment_index = 0;
  for (const auto& seg : cfg.speech) {
    const int s0 = std::clamp<int>(static_cast<int>(std::llround(seg.start * fs)), 0, n);
    const int s1 = std::clamp<int>(static_cast<int>(std::llround(seg.stop * fs)), 0, n);
    if (s1 <= s0) continue;
    Rng rng(Rng::derive(cfg.seed, 0x100 + segment_index++));
    Eigen::VectorXd burst = bandlimited_burst(s1 - s0, fs, rng);
    const int ramp = std::min<int>(static_cast<int>(0.01 * fs), (s1 - s0) / 2);
    for (int i = 0; i < ramp; ++i) {
      const double g = 0.5 - 0.5 * std::cos(M_PI * (i + 1) / (ramp + 1));
      burst[i] *= g;
      burst[s1 - s0 - 1 - i] *= g;
    }
    source.segment(s0, s1 - s0) += burst;
  }

  std::vector<Eigen::VectorXd> streams(num_mics, Eigen::VectorXd::Zero(n));

  // Overlap-add rendering: Hann blocks at half overlap reconstruct the
  // signal exactly; each block is delayed in the frequency domain by the
  // exact fractional propagation delay for the block-center position.
  const int block = 512;
  const int hop = block / 2;
  double max_dist = 0.0;
  for (const auto& mic : cfg.mics.mic_positions)
    for (const auto& corner : {cfg.room.min_corner, cfg.room.max_corner})
      max_dist = std::max(max_dist, (corner - mic).norm());
  const int max_delay = static_cast<int>(std::ceil(max_dist / cfg.mics.speed_of_sound * fs)) + 1;
  const int padded = next_pow2(block + max_delay + 8);

  Eigen::VectorXd window(block);
  for (int i = 0; i < block; ++i)
    window[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / block);  // periodic, COLA at hop

  Eigen::FFT<double> fft;
  Eigen::VectorXd buf = Eigen::VectorXd::Zero(padded);
  Eigen::VectorXcd spec(padded), shifted(padded), time(padded);

  for (int start = -hop; start < n; start += hop) {
    const int lo = std::max(start, 0);
    const int hi = std::min(start + block, n);
    if (hi <= lo) continue;
    bool silent = true;
    for (int i = lo; i < hi && silent; ++i) silent = source[i] == 0.0;
    if (silent) continue;

    buf.setZero();
    for (int i = lo; i < hi; ++i) buf[i - start] = source[i] * window[i - start];
    fft.fwd(spec, buf);

    const double t_center = (start + 0.5 * block) / fs;
    const Vector3 p = trajectory_position(cfg, t_center);
    for (int m = 0; m < num_mics; ++m) {
      const double dist = (p - cfg.mics.mic_positions[m]).norm();
      const double delay = dist / cfg.mics.speed_of_sound * fs;  // samples
      const double gain = 1.0 / std::max(dist, 0.1);
      for (int f = 0; f <= padded / 2; ++f) {
        const double phase = -kTwoPi * f * delay / padded;
        shifted[f] = spec[f] * std::polar(gain, phase);
        if (f > 0 && f < padded / 2) shifted[padded - f] = std::conj(shifted[f]);
      }
      shifted[padded / 2] = std::complex<double>(shifted[padded / 2].real() *
                                                     std::cos(M_PI * delay) * 1.0,
                                                 0.0);
      fft.inv(time, shifted);
      auto& stream = streams[m];
      const int out_lo = std::max(0, start);
      const int out_hi = std::min(n, start + padded);
      for (int i = out_lo; i < out_hi; ++i) stream[i] += time[i - start].real();
    }
  }

  // White noise at the configured SNR, measured against the mean rendered
  // power over speech-active samples.
  if (std::isfinite(cfg.snr_db)) {
    double power = 0.0;
    std::int64_t active = 0;
    for (int i = 0; i < n; ++i) {
      if (!is_speaking(cfg, i / fs)) continue;
      ++active;
      for (int m = 0; m < num_mics; ++m) power += streams[m][i] * streams[m][i];
    }
    if (active > 0) {
      power /= static_cast<double>(active) * num_mics;
      const double sigma = std::sqrt(power) * std::pow(10.0, -cfg.snr_db / 20.0);
      for (int m = 0; m < num_mics; ++m) {
        Rng rng(Rng::derive(cfg.seed, 0x200 + m));
        for (int i = 0; i < n; ++i) streams[m][i] += sigma * rng.normal();
      }
    }
  }
  return streams;
}

std::pair<std::vector<Frame>, SceneTruth> synth_frames(const SceneConfig& cfg) {
  cfg.validate();
  const int H = cfg.cam.image_height;
  const int W = cfg.cam.image_width;
  const int num_frames = cfg.num_frames();

  Rng bg_rng(Rng::derive(cfg.seed, 0x300));
  const Eigen::MatrixXd background =
      0.2 + 0.35 * value_noise(H, W, 6, 3, bg_rng).array();

  Rng target_rng(Rng::derive(cfg.seed, 0x301));
  Eigen::MatrixXd pattern =
      value_noise(cfg.target_height, cfg.target_width, 3, 3, target_rng);
  // Stretch contrast and overlay a coarse checker so the patch stays
  // distinctive against the low-contrast background.
  for (int y = 0; y < pattern.rows(); ++y)
    for (int x = 0; x < pattern.cols(); ++x) {
      const bool cell = ((x / 8) + (y / 8)) % 2 == 0;
      pattern(y, x) = std::clamp(0.55 * pattern(y, x) + (cell ? 0.45 : 0.0), 0.0, 1.0);
    }

  std::vector<Eigen::MatrixXd> distractor_patches;
  std::vector<Vector2> distractor_pos;
  Rng distractor_rng(Rng::derive(cfg.seed, 0x302));
  for (int d = 0; d < cfg.distractors; ++d) {
    distractor_patches.push_back(
        value_noise(cfg.target_height, cfg.target_width, 3, 3, distractor_rng));
    distractor_pos.emplace_back(
        distractor_rng.uniform(cfg.target_width, W - 1.0 - cfg.target_width),
        distractor_rng.uniform(cfg.target_height, H - 1.0 - cfg.target_height));
  }

  const int ox_lo = static_cast<int>(std::floor(cfg.occlusion.x0 * W));
  const int ox_hi = static_cast<int>(std::ceil(cfg.occlusion.x1 * W));
  const int oy_lo = static_cast<int>(std::floor(cfg.occlusion.y0 * H));
  const int oy_hi = static_cast<int>(std::ceil(cfg.occlusion.y1 * H));

  auto draw_patch = [&](Eigen::MatrixXd& img, const Eigen::MatrixXd& patch,
                        const Vector2& center) {
    const double x0 = center.x() - 0.5 * (patch.cols() - 1);
    const double y0 = center.y() - 0.5 * (patch.rows() - 1);
    const int px_lo = std::max(0, static_cast<int>(std::ceil(x0)));
    const int px_hi = std::min(W - 1, static_cast<int>(std::floor(x0 + patch.cols() - 1)));
    const int py_lo = std::max(0, static_cast<int>(std::ceil(y0)));
    const int py_hi = std::min(H - 1, static_cast<int>(std::floor(y0 + patch.rows() - 1)));
    for (int y = py_lo; y <= py_hi; ++y) {
      const double sy = y - y0;
      const int iy = std::min(static_cast<int>(sy), static_cast<int>(patch.rows()) - 2);
      const double fy = sy - iy;
      for (int x = px_lo; x <= px_hi; ++x) {
        const double sx = x - x0;
        const int ix = std::min(static_cast<int>(sx), static_cast<int>(patch.cols()) - 2);
        const double fx = sx - ix;
        img(y, x) = (1 - fy) * ((1 - fx) * patch(iy, ix) + fx * patch(iy, ix + 1)) +
                    fy * ((1 - fx) * patch(iy + 1, ix) + fx * patch(iy + 1, ix + 1));
      }
    }
  };

  std::vector<Frame> frames;
  frames.reserve(num_frames);
  SceneTruth truth;
  truth.pos3d.reserve(num_frames);

  for (int f = 0; f < num_frames; ++f) {
    const double t = f / cfg.frame_rate;
    const Vector3 p3 = trajectory_position(cfg, t);
    const auto p2 = cfg.cam.try_project(p3);
    if (!p2 || !cfg.cam.in_bounds(*p2))
      throw std::invalid_argument(
          "synth_frames: trajectory leaves the camera view at frame " +
          std::to_string(f));

    Frame frame;
    frame.index = f;
    frame.pixels = background;
    for (std::size_t d = 0; d < distractor_patches.size(); ++d)
      draw_patch(frame.pixels, distractor_patches[d], distractor_pos[d]);
    draw_patch(frame.pixels, pattern, *p2);

    const bool occ_active = cfg.occlusion.enabled && t >= cfg.occlusion.start &&
                            t < cfg.occlusion.stop;
    bool occluded = false;
    if (occ_active) {
      for (int y = oy_lo; y < oy_hi; ++y)
        for (int x = ox_lo; x < ox_hi; ++x) frame.pixels(y, x) = cfg.occlusion.fill;
      occluded = p2->x() >= ox_lo && p2->x() < ox_hi && p2->y() >= oy_lo &&
                 p2->y() < oy_hi;
      BoolGrid mask = BoolGrid::Constant(H, W, false);
      mask.block(oy_lo, ox_lo, oy_hi - oy_lo, ox_hi - ox_lo).setConstant(true);
      frame.occlusion_mask = std::move(mask);
    }

    truth.pos3d.push_back(p3);
    truth.pos2d.push_back(*p2);
    truth.speaking.push_back(is_speaking(cfg, t) ? 1 : 0);
    truth.occluded.push_back(occluded ? 1 : 0);
    frames.push_back(std::move(frame));
  }
  return {std::move(frames), std::move(truth)};
}

Scene generate_scene(const SceneConfig& cfg) {
  Scene scene;
  scene.config = cfg;
  scene.audio = synth_audio(cfg);
  auto [frames, truth] = synth_frames(cfg);
  scene.frames = std::move(frames);
  scene.truth = std::move(truth);
  return scene;
}

SceneConfig default_scene() {
  SceneConfig cfg;
  cfg.room.min_corner = Vector3(0.0, 0.0, 0.0);
  cfg.room.max_corner = Vector3(3.6, 8.2, 2.4);
  cfg.room.table_height = 0.8;

  Matrix3 K;
  K << 420.0, 0.0, 180.0, 0.0, 420.0, 144.0, 0.0, 0.0, 1.0;
  cfg.cam = look_at_camera(Vector3(0.25, 0.3, 2.1), Vector3(2.2, 4.6, 1.35),
                           Vector3(0, 0, 1), K, 288, 360);

  const Vector3 table_a(1.5, 3.2, 0.8);
  const Vector3 table_b(2.1, 3.8, 0.8);
  auto mics = circular_array(table_a, 0.1, 8);
  const auto arr_b = circular_array(table_b, 0.1, 8, M_PI / 8);
  mics.insert(mics.end(), arr_b.begin(), arr_b.end());
  cfg.mics.mic_positions = std::move(mics);
  cfg.mics.pairs = two_array_pairs(8, 8);
  cfg.mics.speed_of_sound = 343.0;

  cfg.waypoints = {Vector3(1.2, 5.2, 1.45), Vector3(2.6, 5.6, 1.45),
                   Vector3(2.9, 4.6, 1.45), Vector3(1.4, 4.4, 1.45),
                   Vector3(1.1, 5.4, 1.45)};
  cfg.speed = 0.5;
  cfg.speech = {{0.2, 2.2}, {2.8, 4.6}, {5.0, 6.4}, {6.8, 7.9}};
  cfg.snr_db = 10.0;
  cfg.duration = 8.0;
  cfg.seed = 1;
  return cfg;
}

}  // namespace mpt
