#pragma once

#include <span>
#include <vector>

#include "mpt/audio_cues.hpp"
#include "mpt/score_map.hpp"

namespace mpt {

/// Stacked multi-channel observation for one time step: audio channels
/// first, then visual, all normalized on the same image lattice.
struct CueStack {
  std::vector<ScoreMap> channels;
  std::vector<ScoreMap::Peak> peaks;  // cached per channel
  int audio_channels = 0;
  int time = -1;

  int num_channels() const { return static_cast<int>(channels.size()); }
  int visual_channels() const { return num_channels() - audio_channels; }
  int rows() const { return channels.empty() ? 0 : channels[0].rows(); }
  int cols() const { return channels.empty() ? 0 : channels[0].cols(); }
};

/// Normalizes and resamples the stGCF maps onto the visual lattice and
/// stacks both modalities, audio first. All inputs must share the lattice
/// after resampling; peaks are recomputed.
CueStack stack_cues(const StgcfCues& audio, const std::vector<ScoreMap>& visual,
                    int image_height, int image_width);

/// Stacks already-normalized channels living on a common lattice.
CueStack stack_channels(std::vector<ScoreMap> audio, std::vector<ScoreMap> visual,
                        int time);

/// Per-channel spatial average and max pool descriptors.
struct ChannelDescriptors {
  Eigen::VectorXd avg;
  Eigen::VectorXd max;
};

ChannelDescriptors pool_descriptors(const CueStack& stack);

/// Weights of the channel-attention scorer: a shared two-layer net
/// (channels -> channels/reduction -> channels, rectifier hidden, sigmoid
/// output) applied to the average-pool and max-pool descriptors and summed.
struct PerceptionParams {
  Eigen::MatrixXd w1;  // hidden x channels
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // channels x hidden
  Eigen::VectorXd b2;  // channels

  int channels() const { return static_cast<int>(w1.cols()); }
  int hidden() const { return static_cast<int>(w1.rows()); }
  void validate() const;

  /// Uniform [-0.1, 0.1] initialization, hidden = max(1, channels/reduction).
  static PerceptionParams init(int channels, int reduction, std::uint64_t seed);
};

/// Per-channel reliability scores, each in (0, 1).
Eigen::VectorXd attention_forward(const ChannelDescriptors& desc,
                                  const PerceptionParams& params);
Eigen::VectorXd attention_forward(const CueStack& stack,
                                  const PerceptionParams& params);

/// Cross-modal agreement at channel i's peak: mean of the audio maps plus
/// mean of the visual maps, sampled at that peak, averaged.
double spatial_factor(const CueStack& stack, int channel);

/// Same agreement averaged over stacks [t-n, t+n], sampled at frame t's
/// peak of channel i. The window clips at sequence ends and renormalizes
/// by the frames actually present.
double temporal_factor(std::span<const CueStack> sequence, int t, int channel,
                       int half_window);

struct PerceptionLabel {
  Eigen::VectorXd spatial;   // l^s
  Eigen::VectorXd temporal;  // l^t
  Eigen::VectorXd label;     // l = l^s * l^t
};

PerceptionLabel make_labels(std::span<const CueStack> sequence, int t,
                            int half_window);

struct TrainSample {
  ChannelDescriptors desc;
  Eigen::VectorXd label;
};

struct ParamGrads {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
};

/// Squared-error loss sum_i (alpha_i - l_i)^2 for one sample; fills
/// analytic parameter gradients when grads is non-null.
double perception_loss(const TrainSample& sample, const PerceptionParams& params,
                       ParamGrads* grads = nullptr);

struct TrainOptions {
  int epochs = 20;
  int batch_size = 16;
  double learning_rate = 0.01;
  int reduction = 2;
  std::uint64_t seed = 7;
};

struct TrainResult {
  PerceptionParams params;
  /// Full-dataset mean loss; entry 0 before training, one entry per epoch after.
  std::vector<double> epoch_loss;
};

/// Plain mini-batch gradient descent on the mean squared error between the
/// attention scores and the self-supervised labels.
TrainResult train(const std::vector<TrainSample>& samples, const TrainOptions& options);

/// Z = (1/C) * sum_i alpha_i V_i, computed pointwise.
ScoreMap fusion_map(const CueStack& stack, const Eigen::VectorXd& alpha);

}  // namespace mpt
