#include "mpt/perception.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mpt/rng.hpp"

namespace mpt {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_stack(const CueStack& stack) {
  if (stack.num_channels() == 0)
    throw std::invalid_argument("CueStack: no channels");
  if (stack.audio_channels < 0 || stack.audio_channels > stack.num_channels())
    throw std::invalid_argument("CueStack: bad audio channel count");
}

}  // namespace

CueStack stack_channels(std::vector<ScoreMap> audio, std::vector<ScoreMap> visual,
                        int time) {
  CueStack stack;
  stack.audio_channels = static_cast<int>(audio.size());
  stack.time = time;
  stack.channels = std::move(audio);
  for (auto& v : visual) stack.channels.push_back(std::move(v));
  if (stack.channels.empty())
    throw std::invalid_argument("stack_channels: no channels");

  const int rows = stack.channels[0].rows();
  const int cols = stack.channels[0].cols();
  for (const auto& ch : stack.channels)
    if (ch.rows() != rows || ch.cols() != cols)
      throw std::invalid_argument("stack_channels: channel lattice mismatch");

  stack.peaks.reserve(stack.channels.size());
  for (const auto& ch : stack.channels) stack.peaks.push_back(ch.peak());
  return stack;
}

CueStack stack_cues(const StgcfCues& audio, const std::vector<ScoreMap>& visual,
                    int image_height, int image_width) {
  for (const auto& v : visual)
    if (v.rows() != image_height || v.cols() != image_width)
      throw std::invalid_argument("stack_cues: visual map lattice mismatch");
  int time = visual.empty() ? -1 : visual[0].time;
  if (!audio.source_times.empty() && time < 0) time = audio.source_times.back();
  return stack_channels(stgcf_channels(audio, image_height, image_width), visual,
                        time);
}

ChannelDescriptors pool_descriptors(const CueStack& stack) {
  check_stack(stack);
  const int c = stack.num_channels();
  ChannelDescriptors d;
  d.avg.resize(c);
  d.max.resize(c);
  for (int i = 0; i < c; ++i) {
    d.avg[i] = stack.channels[i].values.mean();
    d.max[i] = stack.channels[i].values.maxCoeff();
  }
  return d;
}

void PerceptionParams::validate() const {
  if (w1.rows() == 0 || w1.cols() == 0)
    throw std::invalid_argument("PerceptionParams: empty weights");
  if (b1.size() != w1.rows() || w2.rows() != w1.cols() ||
      w2.cols() != w1.rows() || b2.size() != w2.rows())
    throw std::invalid_argument("PerceptionParams: inconsistent shapes");
  if (!w1.allFinite() || !b1.allFinite() || !w2.allFinite() || !b2.allFinite())
    throw std::invalid_argument("PerceptionParams: non-finite parameters");
}

PerceptionParams PerceptionParams::init(int channels, int reduction,
                                        std::uint64_t seed) {
  if (channels < 1 || reduction < 1)
    throw std::invalid_argument("PerceptionParams: bad dimensions");
  const int hidden = std::max(1, channels / reduction);
  Rng rng(seed);
  PerceptionParams p;
  p.w1.resize(hidden, channels);
  p.b1.resize(hidden);
  p.w2.resize(channels, hidden);
  p.b2.resize(channels);
  auto fill = [&](auto& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
      m.data()[i] = rng.uniform(-0.1, 0.1);
  };
  fill(p.w1);
  fill(p.b1);
  fill(p.w2);
  fill(p.b2);
  return p;
}

namespace {

struct ForwardState {
  Eigen::VectorXd pre_a, pre_m;  // hidden pre-activations per branch
  Eigen::VectorXd hid_a, hid_m;
  Eigen::VectorXd scores;        // pre-sigmoid
  Eigen::VectorXd alpha;
};

ForwardState forward(const ChannelDescriptors& desc, const PerceptionParams& p) {
  ForwardState s;
  s.pre_a = p.w1 * desc.avg + p.b1;
  s.pre_m = p.w1 * desc.max + p.b1;
  s.hid_a = s.pre_a.cwiseMax(0.0);
  s.hid_m = s.pre_m.cwiseMax(0.0);
  s.scores = p.w2 * (s.hid_a + s.hid_m) + 2.0 * p.b2;
  s.alpha = s.scores.unaryExpr([](double v) { return sigmoid(v); });
  return s;
}

}  // namespace

Eigen::VectorXd attention_forward(const ChannelDescriptors& desc,
                                  const PerceptionParams& params) {
  params.validate();
  if (desc.avg.size() != params.channels() || desc.max.size() != params.channels())
    throw std::invalid_argument("attention_forward: descriptor size mismatch");
  if (!desc.avg.allFinite() || !desc.max.allFinite())
    throw std::invalid_argument("attention_forward: non-finite descriptors");
  return forward(desc, params).alpha;
}

Eigen::VectorXd attention_forward(const CueStack& stack,
                                  const PerceptionParams& params) {
  return attention_forward(pool_descriptors(stack), params);
}

double spatial_factor(const CueStack& stack, int channel) {
  check_stack(stack);
  if (channel < 0 || channel >= stack.num_channels())
    throw std::invalid_argument("spatial_factor: channel out of range");
  const int da = stack.audio_channels;
  const int dv = stack.visual_channels();
  const auto& peak = stack.peaks[channel];

  double audio_sum = 0.0;
  for (int j = 0; j < da; ++j) audio_sum += stack.channels[j].values(peak.y, peak.x);
  double visual_sum = 0.0;
  for (int k = 0; k < dv; ++k)
    visual_sum += stack.channels[da + k].values(peak.y, peak.x);

  const double audio_mean = da > 0 ? audio_sum / da : 0.0;
  const double visual_mean = dv > 0 ? visual_sum / dv : 0.0;
  return 0.5 * (audio_mean + visual_mean);
}

double temporal_factor(std::span<const CueStack> sequence, int t, int channel,
                       int half_window) {
  if (sequence.empty()) throw std::invalid_argument("temporal_factor: empty sequence");
  if (t < 0 || t >= static_cast<int>(sequence.size()))
    throw std::invalid_argument("temporal_factor: index out of range");
  if (half_window < 0)
    throw std::invalid_argument("temporal_factor: negative window");
  const CueStack& at_t = sequence[t];
  if (channel < 0 || channel >= at_t.num_channels())
    throw std::invalid_argument("temporal_factor: channel out of range");

  const auto& peak = at_t.peaks[channel];
  const int q0 = std::max(0, t - half_window);
  const int q1 = std::min(static_cast<int>(sequence.size()) - 1, t + half_window);
  double acc = 0.0;
  for (int q = q0; q <= q1; ++q)
    acc += sequence[q].channels[channel].values(peak.y, peak.x);
  return acc / (q1 - q0 + 1);
}

PerceptionLabel make_labels(std::span<const CueStack> sequence, int t,
                            int half_window) {
  if (sequence.empty()) throw std::invalid_argument("make_labels: empty sequence");
  const int c = sequence[t].num_channels();
  PerceptionLabel out;
  out.spatial.resize(c);
  out.temporal.resize(c);
  out.label.resize(c);
  for (int i = 0; i < c; ++i) {
    out.spatial[i] = spatial_factor(sequence[t], i);
    out.temporal[i] = temporal_factor(sequence, t, i, half_window);
    out.label[i] = out.spatial[i] * out.temporal[i];
  }
  return out;
}

double perception_loss(const TrainSample& sample, const PerceptionParams& params,
                       ParamGrads* grads) {
  const ForwardState s = forward(sample.desc, params);
  const Eigen::VectorXd diff = s.alpha - sample.label;
  const double loss = diff.squaredNorm();
  if (!grads) return loss;

  // dL/dscore = 2 (alpha - l) * alpha * (1 - alpha)
  const Eigen::VectorXd g =
      2.0 * diff.array() * s.alpha.array() * (1.0 - s.alpha.array());

  grads->w2 = g * (s.hid_a + s.hid_m).transpose();
  grads->b2 = 2.0 * g;

  const Eigen::VectorXd back = params.w2.transpose() * g;
  const Eigen::VectorXd da =
      (s.pre_a.array() > 0.0).select(back, Eigen::VectorXd::Zero(back.size()));
  const Eigen::VectorXd dm =
      (s.pre_m.array() > 0.0).select(back, Eigen::VectorXd::Zero(back.size()));

  grads->w1 = da * sample.desc.avg.transpose() + dm * sample.desc.max.transpose();
  grads->b1 = da + dm;
  return loss;
}

namespace {

double dataset_loss(const std::vector<TrainSample>& samples,
                    const PerceptionParams& params) {
  double acc = 0.0;
  for (const auto& s : samples) acc += perception_loss(s, params);
  return acc / samples.size();
}

}  // namespace

TrainResult train(const std::vector<TrainSample>& samples,
                  const TrainOptions& options) {
  if (samples.empty()) throw std::invalid_argument("train: empty dataset");
  if (options.epochs < 1 || options.batch_size < 1 || !(options.learning_rate > 0.0))
    throw std::invalid_argument("train: bad hyperparameters");

  const int channels = static_cast<int>(samples[0].label.size());
  for (const auto& s : samples)
    if (s.label.size() != channels || s.desc.avg.size() != channels ||
        s.desc.max.size() != channels)
      throw std::invalid_argument("train: inconsistent sample dimensions");

  TrainResult result;
  result.params = PerceptionParams::init(channels, options.reduction, options.seed);
  result.epoch_loss.push_back(dataset_loss(samples, result.params));

  Rng shuffle_rng(Rng::derive(options.seed, 0x5u));
  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);

  ParamGrads grads, batch_grads;
  const int n = static_cast<int>(samples.size());
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    // Fisher-Yates with the deterministic stream
    for (int i = n - 1; i > 0; --i)
      std::swap(order[i], order[static_cast<int>(shuffle_rng.below(i + 1))]);

    for (int start = 0; start < n; start += options.batch_size) {
      const int count = std::min(options.batch_size, n - start);
      batch_grads.w1.setZero(result.params.w1.rows(), result.params.w1.cols());
      batch_grads.b1.setZero(result.params.b1.size());
      batch_grads.w2.setZero(result.params.w2.rows(), result.params.w2.cols());
      batch_grads.b2.setZero(result.params.b2.size());
      for (int b = 0; b < count; ++b) {
        perception_loss(samples[order[start + b]], result.params, &grads);
        batch_grads.w1 += grads.w1;
        batch_grads.b1 += grads.b1;
        batch_grads.w2 += grads.w2;
        batch_grads.b2 += grads.b2;
      }
      const double scale = options.learning_rate / count;
      result.params.w1 -= scale * batch_grads.w1;
      result.params.b1 -= scale * batch_grads.b1;
      result.params.w2 -= scale * batch_grads.w2;
      result.params.b2 -= scale * batch_grads.b2;
    }
    result.epoch_loss.push_back(dataset_loss(samples, result.params));
  }
  return result;
}

ScoreMap fusion_map(const CueStack& stack, const Eigen::VectorXd& alpha) {
  check_stack(stack);
  if (alpha.size() != stack.num_channels())
    throw std::invalid_argument("fusion_map: score count mismatch");

  ScoreMap z;
  z.time = stack.time;
  z.kind = ChannelKind::fused;
  z.values.setZero(stack.rows(), stack.cols());
  for (int i = 0; i < stack.num_channels(); ++i)
    z.values += alpha[i] * stack.channels[i].values;
  z.values /= static_cast<double>(stack.num_channels());
  z.raw_peak = z.peak().value;
  return z;
}

}  // namespace mpt
