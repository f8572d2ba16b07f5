#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "mafrg/core/error.hpp"
#include "mafrg/generators/baselines.hpp"

namespace mafrg::gen {

namespace {

double unit_open(std::uint64_t bits) noexcept {
  return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
}

std::vector<FrameMatrix> copies(const FrameMatrix& m, int n) {
  return std::vector<FrameMatrix>(static_cast<std::size_t>(n), m);
}

template <typename Get>
MeanSeqBaseline mean_seq_impl(std::size_t n, Get get) {
  if (n == 0) throw ArgumentError("b_mean_seq: empty training set");
  const std::size_t frames = get(0).length();
  std::vector<double> acc(frames * kNumChannels, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& seq = get(i);
    if (seq.length() != frames || seq.frames.cols() != kNumChannels) {
      std::ostringstream os;
      os << "b_mean_seq: training reaction " << seq.clip_id << " is " << seq.length() << "x" << seq.frames.cols()
         << ", expected " << frames << "x" << kNumChannels;
      throw ValidationError(os.str());
    }
    const auto d = seq.frames.data();
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += d[k];
  }
  std::vector<float> mean(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) mean[k] = static_cast<float>(acc[k] / static_cast<double>(n));
  return MeanSeqBaseline(FrameMatrix(frames, kNumChannels, std::move(mean)));
}

template <typename Get>
MeanFrBaseline mean_fr_impl(std::size_t n, Get get) {
  if (n == 0) throw ArgumentError("b_mean_fr: empty training set");
  std::vector<double> acc(kNumChannels, 0.0);
  std::size_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& seq = get(i);
    if (seq.frames.cols() != kNumChannels) {
      throw ValidationError("b_mean_fr: training reaction " + seq.clip_id + " has " +
                            std::to_string(seq.frames.cols()) + " channels");
    }
    for (std::size_t t = 0; t < seq.length(); ++t) {
      const auto r = seq.frames.row(t);
      for (std::size_t c = 0; c < kNumChannels; ++c) acc[c] += r[c];
    }
    total += seq.length();
  }
  if (total == 0) throw ArgumentError("b_mean_fr: training reactions contain no frames");
  std::vector<float> mean(kNumChannels);
  for (std::size_t c = 0; c < kNumChannels; ++c) mean[c] = static_cast<float>(acc[c] / static_cast<double>(total));
  return MeanFrBaseline(std::move(mean));
}

}  // namespace

float RandomBaseline::cell(std::uint64_t seed, std::size_t candidate, std::size_t frame,
                           std::size_t channel) const noexcept {
  const std::uint64_t key = counter_hash(seed, candidate);
  const std::uint64_t idx = static_cast<std::uint64_t>(frame) * kNumChannels + channel;
  if (dist_ == RandomDistribution::Uniform) {
    const double u = static_cast<double>(counter_hash(key, idx) >> 11) * 0x1.0p-53;
    return static_cast<float>(u);
  }
  const double u1 = unit_open(counter_hash(key, 2 * idx));
  const double u2 = unit_open(counter_hash(key, 2 * idx + 1));
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  const double v = 0.5 + z * std::sqrt(1.0 / 12.0);
  return static_cast<float>(std::clamp(v, 0.0, 1.0));
}

void RandomBaseline::fill(FrameMatrix& out, std::size_t first_frame, std::uint64_t seed,
                          std::size_t candidate) const {
  for (std::size_t r = 0; r < out.rows(); ++r) {
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) = cell(seed, candidate, first_frame + r, c);
  }
}

std::vector<FrameMatrix> RandomBaseline::generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) {
  std::vector<FrameMatrix> out;
  for (int i = 0; i < m; ++i) {
    FrameMatrix f(speaker.length(), kNumChannels);
    fill(f, 0, seed, static_cast<std::size_t>(i));
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FrameMatrix> RandomBaseline::step(const OnlineStepInput& in, int m, std::uint64_t seed) {
  std::vector<FrameMatrix> out;
  for (int i = 0; i < m; ++i) {
    FrameMatrix f(in.block_size(), kNumChannels);
    fill(f, in.block_begin, seed, static_cast<std::size_t>(i));
    out.push_back(std::move(f));
  }
  return out;
}

std::vector<FrameMatrix> MimeBaseline::generate(const SpeakerBehaviour& speaker, int m, std::uint64_t) {
  return copies(speaker.facial.frames, m);
}

std::vector<FrameMatrix> MimeBaseline::step(const OnlineStepInput& in, int m, std::uint64_t) {
  return copies(in.speaker_facial.slice_rows(in.block_begin, in.gamma + 1), m);
}

MeanSeqBaseline::MeanSeqBaseline(FrameMatrix mean_sequence) : template_(std::move(mean_sequence)) {
  if (template_.rows() == 0 || template_.cols() != kNumChannels) {
    throw ArgumentError("mean sequence template must be T x 25 with T >= 1");
  }
}

std::vector<FrameMatrix> MeanSeqBaseline::generate(const SpeakerBehaviour& speaker, int m, std::uint64_t) {
  if (speaker.length() != template_.rows()) {
    throw ValidationError("B_MeanSeq template has " + std::to_string(template_.rows()) + " frames, speaker " +
                          speaker.clip_id + " has " + std::to_string(speaker.length()));
  }
  return copies(template_, m);
}

std::vector<FrameMatrix> MeanSeqBaseline::step(const OnlineStepInput& in, int m, std::uint64_t) {
  if (in.gamma >= template_.rows()) {
    throw ValidationError("B_MeanSeq template has " + std::to_string(template_.rows()) +
                          " frames, online step reached frame " + std::to_string(in.gamma));
  }
  return copies(template_.slice_rows(in.block_begin, in.gamma + 1), m);
}

MeanFrBaseline::MeanFrBaseline(std::vector<float> mean_frame) : frame_(std::move(mean_frame)) {
  if (frame_.size() != kNumChannels) throw ArgumentError("mean frame must have 25 channels");
}

FrameMatrix MeanFrBaseline::repeated(std::size_t frames) const {
  FrameMatrix f(frames, kNumChannels);
  for (std::size_t t = 0; t < frames; ++t) std::copy(frame_.begin(), frame_.end(), f.row(t).begin());
  return f;
}

std::vector<FrameMatrix> MeanFrBaseline::generate(const SpeakerBehaviour& speaker, int m, std::uint64_t) {
  return copies(repeated(speaker.length()), m);
}

std::vector<FrameMatrix> MeanFrBaseline::step(const OnlineStepInput& in, int m, std::uint64_t) {
  return copies(repeated(in.block_size()), m);
}

MeanSeqBaseline b_mean_seq(std::span<const ReactionSequence> train) {
  return mean_seq_impl(train.size(), [&](std::size_t i) -> const ReactionSequence& { return train[i]; });
}

MeanSeqBaseline b_mean_seq(std::span<const ReactionSequence* const> train) {
  return mean_seq_impl(train.size(), [&](std::size_t i) -> const ReactionSequence& { return *train[i]; });
}

MeanFrBaseline b_mean_fr(std::span<const ReactionSequence> train) {
  return mean_fr_impl(train.size(), [&](std::size_t i) -> const ReactionSequence& { return train[i]; });
}

MeanFrBaseline b_mean_fr(std::span<const ReactionSequence* const> train) {
  return mean_fr_impl(train.size(), [&](std::size_t i) -> const ReactionSequence& { return *train[i]; });
}

GenerationSet b_random(const SpeakerBehaviour& speaker, int m, std::uint64_t seed, RandomDistribution dist) {
  RandomBaseline gen(dist);
  return run_offline(gen, speaker, m, seed);
}

GenerationSet b_mime(const SpeakerBehaviour& speaker, int m) {
  MimeBaseline gen;
  return run_offline(gen, speaker, m, 0);
}

}  // namespace mafrg::gen
