#pragma once

#include <complex>
#include <map>
#include <vector>

#include "mpt/geometry.hpp"
#include "mpt/score_map.hpp"

namespace mpt {

enum class WindowType { hamming, hann, rectangular };

/// Windowed short-time frames for every microphone channel.
struct AudioFrameSet {
  std::vector<Eigen::MatrixXd> frames;  // per mic: frame_len x num_frames
  int frame_len = 0;
  int hop = 0;
  double sample_rate = 0.0;

  int num_mics() const { return static_cast<int>(frames.size()); }
  int num_frames() const {
    return frames.empty() ? 0 : static_cast<int>(frames[0].cols());
  }
  /// Center time of frame t in seconds.
  double frame_time(int t) const {
    return (t * hop + 0.5 * frame_len) / sample_rate;
  }
  /// Frame whose center is nearest to the given time, clamped to range.
  int frame_at_time(double seconds) const;
};

/// Slices equal-length channel signals into half-overlapping windowed
/// frames. frame count = floor((len - frame_len)/hop) + 1.
AudioFrameSet frame_signal(const std::vector<Eigen::VectorXd>& signals,
                           double sample_rate, double frame_ms = 40.0,
                           double hop_fraction = 0.5,
                           WindowType window = WindowType::hamming);

/// Phase-transform-whitened cross-power spectrum of one frame pair.
/// Each bin of the cross spectrum is normalized to unit magnitude, with
/// |X_i X_k*| floored at `floor` so silent bins stay silent.
struct PhatSpectrum {
  Eigen::VectorXcd bins;  // full fft_size spectrum, conjugate symmetric
  int fft_size = 0;
  double sample_rate = 0.0;
  bool zero_energy = false;  // a frame had no energy; coherence is 0 everywhere

  /// Exact coherence at an arbitrary (fractional) lag in seconds,
  /// r(tau) = (1/N) sum_f bins[f] e^{j 2 pi f tau fs / N}. Always in [-1, 1].
  double at(double lag_seconds) const;
};

PhatSpectrum phat_cross_spectrum(const Eigen::VectorXd& frame_i,
                                 const Eigen::VectorXd& frame_k,
                                 double sample_rate, double floor = 1e-12);

/// GCC-PHAT coherence of two frames at one lag (exact evaluation).
/// Precondition: |lag| <= frame_len / sample_rate.
double gcc_phat(const Eigen::VectorXd& frame_i, const Eigen::VectorXd& frame_k,
                double lag_seconds, double sample_rate);

/// Coherence sampled on an oversampled lag grid (spacing 1/(oversample*fs)),
/// with linear interpolation in between. Grid values are exact band-limited
/// evaluations; only the interpolation between them is approximate.
struct LagTable {
  Eigen::VectorXd corr;
  double lag_min = 0.0;   // seconds
  double lag_step = 0.0;  // seconds
  bool zero_energy = false;

  double at(double lag_seconds) const;
};

/// max_lag bounds the table extent (seconds); pass the array's max TDOA.
LagTable phat_lag_table(const PhatSpectrum& spectrum, int oversample,
                        double max_lag);

struct GcfOptions {
  int oversample = 4;        // lag grid refinement for table evaluation
  double phat_floor = 1e-12; // cross-power magnitude floor
  bool exact_lags = false;   // evaluate every grid point exactly (slow; tests)
};

/// Depth-selected coherence maps over a trailing window: the m2 best maps
/// within [t-m1, t], in time order.
struct StgcfCues {
  std::vector<ScoreMap> maps;      // raw h x w maps, sorted by source time
  std::vector<int> source_times;   // audio frame indices
  std::vector<double> peak_values; // raw sGCF peak per map
  std::vector<int> depth_indices;  // selected depth plane per map

  int size() const { return static_cast<int>(maps.size()); }
};

struct SgcfResult {
  ScoreMap map;
  int k_max = 0;
  double peak_value = 0.0;
};

/// Caches per-frame sGCF results so a sliding stGCF window does not
/// recompute them. Single-writer; use one cache per sequence.
using SgcfCache = std::map<int, SgcfResult>;

/// Steered-coherence map machinery over a fixed grid and mic set. TDOAs for
/// every (depth, cell, pair) are precomputed at construction. Immutable
/// afterwards; all evaluation methods are const and thread-safe.
class GcfEngine {
 public:
  GcfEngine(SampleGrid grid, MicArrayConfig mics, GcfOptions options = {});

  struct FrameCoherence {
    std::vector<LagTable> pair_tables;      // empty in exact mode
    std::vector<PhatSpectrum> pair_spectra; // kept for exact evaluation
    bool zero_energy = false;
    int t = -1;
  };

  FrameCoherence coherence(const AudioFrameSet& frames, int t) const;

  /// Average pair coherence at each valid grid cell of one depth plane.
  /// Masked cells hold -inf; a fully masked plane is flagged degenerate.
  ScoreMap gcf_map(const FrameCoherence& coh, int depth_index) const;
  ScoreMap gcf_map(const AudioFrameSet& frames, int t, int depth_index) const;

  /// GCF map of the depth plane with the largest peak; ties pick the
  /// smaller depth index.
  SgcfResult sgcf_map(const AudioFrameSet& frames, int t) const;

  /// The m2 frames with the largest sGCF peaks among [t-m1, t], in time
  /// order. The window truncates at the sequence start; if fewer than m2
  /// frames exist the best one is duplicated to fill.
  StgcfCues stgcf(const AudioFrameSet& frames, int t, int m1, int m2,
                  SgcfCache* cache = nullptr) const;

  const SampleGrid& grid() const { return grid_; }
  const MicArrayConfig& mics() const { return mics_; }
  const GcfOptions& options() const { return options_; }

 private:
  SampleGrid grid_;
  MicArrayConfig mics_;
  GcfOptions options_;
  std::vector<Eigen::MatrixXd> tdoa_;  // per depth: num_pairs x (h*w), seconds
  double max_lag_ = 0.0;
};

/// Normalizes the stGCF maps and resamples them onto the full image
/// lattice, ready for stacking with the visual channels.
std::vector<ScoreMap> stgcf_channels(const StgcfCues& cues, int image_height,
                                     int image_width);

}  // namespace mpt
