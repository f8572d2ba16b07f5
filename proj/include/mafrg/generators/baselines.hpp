#pragma once

#include <span>
#include <vector>

#include "mafrg/generators/generator.hpp"

namespace mafrg::gen {

enum class RandomDistribution {
  Uniform,   // every cell iid U[0,1]
  Gaussian,  // mean 0.5, variance 1/12, clamped to [0,1]
};

/// Independent random cells drawn from a counter-based stream keyed by
/// (seed, candidate, frame, channel), so online and offline agree exactly.
class RandomBaseline final : public Generator {
 public:
  explicit RandomBaseline(RandomDistribution dist = RandomDistribution::Uniform) : dist_(dist) {}
  std::string name() const override { return "B_Random"; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) override;
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t seed) override;

  float cell(std::uint64_t seed, std::size_t candidate, std::size_t frame, std::size_t channel) const noexcept;

 private:
  void fill(FrameMatrix& out, std::size_t first_frame, std::uint64_t seed, std::size_t candidate) const;
  RandomDistribution dist_;
};

/// Copies the speaker's own facial attributes.
class MimeBaseline final : public Generator {
 public:
  std::string name() const override { return "B_Mime"; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) override;
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t seed) override;
};

/// Emits a fixed T x 25 template (frame-by-frame mean of the training reactions).
class MeanSeqBaseline final : public Generator {
 public:
  explicit MeanSeqBaseline(FrameMatrix mean_sequence);
  std::string name() const override { return "B_MeanSeq"; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) override;
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t seed) override;
  const FrameMatrix& mean_sequence() const noexcept { return template_; }

 private:
  FrameMatrix template_;
};

/// Emits one global mean frame repeated over time.
class MeanFrBaseline final : public Generator {
 public:
  explicit MeanFrBaseline(std::vector<float> mean_frame);
  std::string name() const override { return "B_MeanFr"; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) override;
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t seed) override;
  const std::vector<float>& mean_frame() const noexcept { return frame_; }

 private:
  FrameMatrix repeated(std::size_t frames) const;
  std::vector<float> frame_;
};

/// Frame-by-frame average across training reactions (all of equal length).
MeanSeqBaseline b_mean_seq(std::span<const ReactionSequence> train);
MeanSeqBaseline b_mean_seq(std::span<const ReactionSequence* const> train);

/// Average over every frame of every training reaction.
MeanFrBaseline b_mean_fr(std::span<const ReactionSequence> train);
MeanFrBaseline b_mean_fr(std::span<const ReactionSequence* const> train);

GenerationSet b_random(const SpeakerBehaviour& speaker, int m, std::uint64_t seed,
                       RandomDistribution dist = RandomDistribution::Uniform);
GenerationSet b_mime(const SpeakerBehaviour& speaker, int m);

}  // namespace mafrg::gen
