#include "mpt/audio_cues.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace mpt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

int next_pow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

// One FFT plan cache per thread; Eigen::FFT keeps per-size plans internally
// but is not safe to share across threads.
Eigen::FFT<double>& thread_fft() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}

Eigen::VectorXd make_window(WindowType type, int n) {
  Eigen::VectorXd w(n);
  switch (type) {
    case WindowType::hamming:
      for (int i = 0; i < n; ++i)
        w[i] = 0.54 - 0.46 * std::cos(kTwoPi * i / (n - 1));
      break;
    case WindowType::hann:
      for (int i = 0; i < n; ++i)
        w[i] = 0.5 - 0.5 * std::cos(kTwoPi * i / (n - 1));
      break;
    case WindowType::rectangular:
      w.setOnes();
      break;
  }
  return w;
}

}  // namespace

int AudioFrameSet::frame_at_time(double seconds) const {
  if (num_frames() == 0) return 0;
  const double idx = (seconds * sample_rate - 0.5 * frame_len) / hop;
  const int t = static_cast<int>(std::llround(idx));
  return std::clamp(t, 0, num_frames() - 1);
}

AudioFrameSet frame_signal(const std::vector<Eigen::VectorXd>& signals,
                           double sample_rate, double frame_ms,
                           double hop_fraction, WindowType window) {
  if (signals.empty()) throw std::invalid_argument("frame_signal: no channels");
  if (!(sample_rate > 0.0))
    throw std::invalid_argument("frame_signal: sample rate must be positive");
  if (!(frame_ms > 0.0) || !(hop_fraction > 0.0) || hop_fraction > 1.0)
    throw std::invalid_argument("frame_signal: bad frame/hop specification");

  const auto len = signals[0].size();
  for (const auto& s : signals)
    if (s.size() != len)
      throw std::invalid_argument("frame_signal: channels differ in length");

  const int frame_len = static_cast<int>(std::llround(frame_ms * 1e-3 * sample_rate));
  if (frame_len < 2 || len < frame_len)
    throw std::invalid_argument("frame_signal: signal shorter than one frame");
  const int hop = std::max<int>(1, static_cast<int>(std::llround(frame_len * hop_fraction)));
  const int num_frames = static_cast<int>((len - frame_len) / hop) + 1;

  const Eigen::VectorXd w = make_window(window, frame_len);

  AudioFrameSet out;
  out.frame_len = frame_len;
  out.hop = hop;
  out.sample_rate = sample_rate;
  out.frames.reserve(signals.size());
  for (const auto& s : signals) {
    Eigen::MatrixXd f(frame_len, num_frames);
    for (int t = 0; t < num_frames; ++t)
      f.col(t) = s.segment(t * hop, frame_len).cwiseProduct(w);
    out.frames.push_back(std::move(f));
  }
  return out;
}

double PhatSpectrum::at(double lag_seconds) const {
  if (zero_energy || fft_size == 0) return 0.0;
  const double shift = lag_seconds * sample_rate;  // fractional samples
  const int n = fft_size;
  const int half = n / 2;
  // Real inverse transform using conjugate symmetry of the whitened bins.
  double acc = bins[0].real();
  for (int f = 1; f < half; ++f) {
    const double phase = kTwoPi * f * shift / n;
    acc += 2.0 * (bins[f].real() * std::cos(phase) - bins[f].imag() * std::sin(phase));
  }
  const double phase_half = M_PI * shift;  // = 2*pi*(n/2)*shift/n
  acc += bins[half].real() * std::cos(phase_half) -
         bins[half].imag() * std::sin(phase_half);
  return acc / n;
}

PhatSpectrum phat_cross_spectrum(const Eigen::VectorXd& frame_i,
                                 const Eigen::VectorXd& frame_k,
                                 double sample_rate, double floor) {
  if (frame_i.size() != frame_k.size())
    throw std::invalid_argument("phat_cross_spectrum: frame length mismatch");
  if (frame_i.size() < 2)
    throw std::invalid_argument("phat_cross_spectrum: frames too short");

  const int len = static_cast<int>(frame_i.size());
  const int n = next_pow2(2 * len);

  PhatSpectrum out;
  out.fft_size = n;
  out.sample_rate = sample_rate;
  out.bins.setZero(n);

  if (frame_i.squaredNorm() < 1e-30 || frame_k.squaredNorm() < 1e-30) {
    out.zero_energy = true;
    return out;
  }

  Eigen::VectorXd pad_i = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd pad_k = Eigen::VectorXd::Zero(n);
  pad_i.head(len) = frame_i;
  pad_k.head(len) = frame_k;

  auto& fft = thread_fft();
  Eigen::VectorXcd spec_i(n), spec_k(n);
  fft.fwd(spec_i, pad_i);
  fft.fwd(spec_k, pad_k);

  for (int f = 0; f < n; ++f) {
    const std::complex<double> cross = spec_i[f] * std::conj(spec_k[f]);
    out.bins[f] = cross / std::max(std::abs(cross), floor);
  }
  return out;
}

double gcc_phat(const Eigen::VectorXd& frame_i, const Eigen::VectorXd& frame_k,
                double lag_seconds, double sample_rate) {
  if (!(sample_rate > 0.0))
    throw std::invalid_argument("gcc_phat: sample rate must be positive");
  const double max_lag = frame_i.size() / sample_rate;
  if (std::abs(lag_seconds) > max_lag)
    throw std::invalid_argument("gcc_phat: lag outside one frame length");
  return phat_cross_spectrum(frame_i, frame_k, sample_rate).at(lag_seconds);
}

double LagTable::at(double lag_seconds) const {
  if (zero_energy || corr.size() == 0) return 0.0;
  const double u = (lag_seconds - lag_min) / lag_step;
  if (u <= 0.0) return corr[0];
  const int last = static_cast<int>(corr.size()) - 1;
  if (u >= last) return corr[last];
  const int i0 = static_cast<int>(u);
  const double f = u - i0;
  return (1.0 - f) * corr[i0] + f * corr[i0 + 1];
}

LagTable phat_lag_table(const PhatSpectrum& spectrum, int oversample,
                        double max_lag) {
  if (oversample < 1)
    throw std::invalid_argument("phat_lag_table: oversample must be >= 1");

  const int n = spectrum.fft_size;
  const int m = n * oversample;
  const int half = n / 2;

  LagTable table;
  table.lag_step = 1.0 / (oversample * spectrum.sample_rate);
  const int wing = std::min<int>(
      m / 2 - 1,
      static_cast<int>(std::ceil(max_lag / table.lag_step)) + 2 * oversample);
  table.lag_min = -wing * table.lag_step;
  table.zero_energy = spectrum.zero_energy;
  if (spectrum.zero_energy) {
    table.corr.setZero(2 * wing + 1);
    return table;
  }

  // Zero-pad in frequency: identical spectrum, finer lag sampling. The
  // Nyquist bin is split so the padded spectrum stays conjugate symmetric.
  Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(m);
  padded[0] = spectrum.bins[0];
  for (int f = 1; f < half; ++f) {
    padded[f] = spectrum.bins[f];
    padded[m - f] = spectrum.bins[n - f];
  }
  if (m == n) {
    padded[half] = spectrum.bins[half];
  } else {
    padded[half] = 0.5 * spectrum.bins[half];
    padded[m - half] = 0.5 * std::conj(spectrum.bins[half]);
  }

  Eigen::VectorXcd lag_domain(m);
  thread_fft().inv(lag_domain, padded);

  // inv() scales by 1/m; rescale so values match (1/n) * sum_f bins e^{...}.
  table.corr.resize(2 * wing + 1);
  for (int i = -wing; i <= wing; ++i) {
    const int idx = (i % m + m) % m;
    table.corr[i + wing] = lag_domain[idx].real() * oversample;
  }
  return table;
}

GcfEngine::GcfEngine(SampleGrid grid, MicArrayConfig mics, GcfOptions options)
    : grid_(std::move(grid)), mics_(std::move(mics)), options_(options) {
  mics_.validate();
  if (grid_.num_depths() == 0)
    throw std::invalid_argument("GcfEngine: grid has no depth planes");
  max_lag_ = mics_.max_tdoa();

  const int cells = grid_.h * grid_.w;
  const int pairs = mics_.num_pairs();
  tdoa_.reserve(grid_.num_depths());
  for (int k = 0; k < grid_.num_depths(); ++k) {
    Eigen::MatrixXd tau(pairs, cells);
    for (int c = 0; c < cells; ++c) {
      const Vector3 p = grid_.points_3d[k].col(c);
      for (int m = 0; m < pairs; ++m) tau(m, c) = tdoa(p, mics_.pairs[m], mics_);
    }
    tdoa_.push_back(std::move(tau));
  }
}

GcfEngine::FrameCoherence GcfEngine::coherence(const AudioFrameSet& frames,
                                               int t) const {
  if (t < 0 || t >= frames.num_frames())
    throw std::invalid_argument("GcfEngine: frame index out of range");
  if (frames.num_mics() != mics_.num_mics())
    throw std::invalid_argument("GcfEngine: frame set channel count mismatch");

  FrameCoherence coh;
  coh.t = t;
  coh.zero_energy = true;
  const int pairs = mics_.num_pairs();
  coh.pair_spectra.reserve(pairs);
  if (!options_.exact_lags) coh.pair_tables.reserve(pairs);

  for (int m = 0; m < pairs; ++m) {
    const auto& [i, k] = mics_.pairs[m];
    PhatSpectrum spec =
        phat_cross_spectrum(frames.frames[i].col(t), frames.frames[k].col(t),
                            frames.sample_rate, options_.phat_floor);
    coh.zero_energy &= spec.zero_energy;
    if (!options_.exact_lags)
      coh.pair_tables.push_back(phat_lag_table(spec, options_.oversample, max_lag_));
    coh.pair_spectra.push_back(std::move(spec));
  }
  return coh;
}

ScoreMap GcfEngine::gcf_map(const FrameCoherence& coh, int depth_index) const {
  if (depth_index < 0 || depth_index >= grid_.num_depths())
    throw std::invalid_argument("gcf_map: depth index out of range");

  const int pairs = mics_.num_pairs();
  const auto& tau = tdoa_[depth_index];
  const auto& mask = grid_.valid[depth_index];
  const double inv_m = 1.0 / pairs;
  const double neg_inf = -std::numeric_limits<double>::infinity();

  ScoreMap map;
  map.time = coh.t;
  map.kind = ChannelKind::audio;
  map.values.resize(grid_.h, grid_.w);

  bool any_valid = false;
  for (int i = 0; i < grid_.h; ++i) {
    for (int j = 0; j < grid_.w; ++j) {
      if (!mask(i, j)) {
        map.values(i, j) = neg_inf;
        continue;
      }
      any_valid = true;
      const int c = grid_.cell(i, j);
      double acc = 0.0;
      if (options_.exact_lags) {
        for (int m = 0; m < pairs; ++m)
          acc += coh.pair_spectra[m].at(tau(m, c));
      } else {
        for (int m = 0; m < pairs; ++m) acc += coh.pair_tables[m].at(tau(m, c));
      }
      map.values(i, j) = acc * inv_m;
    }
  }
  map.degenerate = !any_valid;
  map.raw_peak = map.peak().value;
  return map;
}

ScoreMap GcfEngine::gcf_map(const AudioFrameSet& frames, int t,
                            int depth_index) const {
  return gcf_map(coherence(frames, t), depth_index);
}

SgcfResult GcfEngine::sgcf_map(const AudioFrameSet& frames, int t) const {
  const FrameCoherence coh = coherence(frames, t);

  SgcfResult best;
  bool found = false;
  for (int k = 0; k < grid_.num_depths(); ++k) {
    ScoreMap map = gcf_map(coh, k);
    if (map.degenerate) continue;  // fully masked plane
    const double peak = map.peak().value;
    if (!found || peak > best.peak_value) {
      best.map = std::move(map);
      best.k_max = k;
      best.peak_value = peak;
      found = true;
    }
  }
  if (!found)
    throw std::runtime_error("sgcf_map: every depth plane is empty");
  return best;
}

StgcfCues GcfEngine::stgcf(const AudioFrameSet& frames, int t, int m1, int m2,
                           SgcfCache* cache) const {
  if (t < 0 || t >= frames.num_frames())
    throw std::invalid_argument("stgcf: frame index out of range");
  if (m1 < 0 || m2 < 1) throw std::invalid_argument("stgcf: need m1 >= 0, m2 >= 1");

  const int t0 = std::max(0, t - m1);
  struct Entry {
    int t;
    const SgcfResult* res;
  };
  std::vector<SgcfResult> scratch;
  scratch.reserve(t - t0 + 1);
  std::vector<Entry> entries;
  for (int tt = t0; tt <= t; ++tt) {
    const SgcfResult* res = nullptr;
    if (cache) {
      auto it = cache->find(tt);
      if (it == cache->end())
        it = cache->emplace(tt, sgcf_map(frames, tt)).first;
      res = &it->second;
    } else {
      scratch.push_back(sgcf_map(frames, tt));
      res = &scratch.back();
    }
    entries.push_back({tt, res});
  }

  // Rank by peak value; ties keep the earlier frame first.
  std::vector<int> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return entries[a].res->peak_value > entries[b].res->peak_value;
  });

  std::vector<int> selected(order.begin(),
                            order.begin() + std::min<std::size_t>(m2, order.size()));
  while (static_cast<int>(selected.size()) < m2) selected.push_back(order[0]);
  std::sort(selected.begin(), selected.end(),
            [&](int a, int b) { return entries[a].t < entries[b].t; });

  StgcfCues cues;
  for (int idx : selected) {
    cues.maps.push_back(entries[idx].res->map);
    cues.source_times.push_back(entries[idx].t);
    cues.peak_values.push_back(entries[idx].res->peak_value);
    cues.depth_indices.push_back(entries[idx].res->k_max);
  }
  return cues;
}

std::vector<ScoreMap> stgcf_channels(const StgcfCues& cues, int image_height,
                                     int image_width) {
  std::vector<ScoreMap> channels;
  channels.reserve(cues.maps.size());
  for (const auto& map : cues.maps) {
    ScoreMap up = upsample_bilinear(map.normalized(), image_height, image_width);
    up.kind = ChannelKind::audio;
    channels.push_back(std::move(up));
  }
  return channels;
}

}  // namespace mpt
