#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mafrg/core/types.hpp"
#include "mafrg/seqmetrics.hpp"

namespace mafrg::eval {

enum class FrechetFeatures {
  AttributeFrames,  // pooled 25-dim frames
  External,         // precomputed N x D feature matrices read from disk
};

enum class DvsPairing {
  ByCandidateIndex,  // m-th candidate of one input vs m-th of another
  AllCrossPairs,     // every candidate of one input vs every candidate of another
};

/// Binary-format feature matrices used when frechet_features == External.
struct ExternalFeatureFiles {
  std::filesystem::path generated;
  std::filesystem::path reference;
};

struct MetricConfig {
  std::size_t max_lag = 49;
  seqmetrics::DtwConfig dtw{.band_radius = seqmetrics::kDefaultBandRadius};
  FrechetFeatures frechet_features = FrechetFeatures::AttributeFrames;
  std::optional<ExternalFeatureFiles> external_features;
  /// When set, generated AU channels are thresholded before scoring.
  std::optional<double> au_binarize_threshold;
  /// Drop the assignment's own GT from the FRCorr neighbour set when others exist.
  bool gt_excludes_self_for_corr = false;
  DvsPairing dvs_pairing = DvsPairing::ByCandidateIndex;
};

/// Lookup from assignment id to the recorded listener reaction. Non-owning.
class ReactionStore {
 public:
  void add(const std::string& id, const ReactionSequence& seq) { refs_[id] = &seq; }
  const ReactionSequence& at(const std::string& id) const;
  bool contains(const std::string& id) const { return refs_.contains(id); }
  std::size_t size() const { return refs_.size(); }

  static ReactionStore from_assignments(std::span<const SpeakerListenerAssignment> assignments);

 private:
  std::unordered_map<std::string, const ReactionSequence*> refs_;
};

/// Mean over candidates of the minimum DTW cost to any appropriate reaction.
double fr_dist(const GenerationSet& gen, const AppropriatenessMap& map, const ReactionStore& gt,
               const MetricConfig& cfg = {});

/// Mean over candidates of the maximum, over appropriate reactions, of the
/// per-channel CCC summed across the 25 channels.
double fr_corr(const GenerationSet& gen, const AppropriatenessMap& map, const ReactionStore& gt,
               const MetricConfig& cfg = {});

/// Mean pairwise MSE between the candidates of one set; 0 for a single candidate.
double fr_div(const GenerationSet& gen);

/// Mean temporal (population) variance over sets, candidates and channels.
double fr_var(std::span<const GenerationSet> gens);

/// Mean pairwise MSE between generations for different speaker inputs.
double fr_dvs(std::span<const GenerationSet> gens, DvsPairing pairing = DvsPairing::ByCandidateIndex,
              std::size_t workers = 1);

/// Mean over candidates and channels of the TLCC offset against the speaker's facial channel.
double fr_syn(const GenerationSet& gen, const SpeakerBehaviour& speaker, const MetricConfig& cfg = {});

/// Gaussian Frechet distance between generated and reference feature distributions.
double fr_rea(std::span<const GenerationSet> gens, std::span<const ReactionSequence> reference,
              const MetricConfig& cfg = {}, std::size_t workers = 1);

/// Same, with the reference pool given by pointer (avoids copying sequences).
double fr_rea(std::span<const GenerationSet> gens, std::span<const ReactionSequence* const> reference,
              const MetricConfig& cfg = {}, std::size_t workers = 1);

/// AU channels mapped to {0,1} by `value >= threshold`; other channels unchanged.
ReactionSequence binarize_aus(const ReactionSequence& seq, double threshold);

/// Per-candidate appropriateness detail shared by fr_dist/fr_corr and the batch engine.
struct AppropriatenessScores {
  double fr_dist = 0.0;
  double fr_corr = 0.0;
  std::string best_neighbor_id;  // highest mean channel-sum CCC across candidates
};

enum class AppropriatenessParts { Both, DistOnly, CorrOnly };

AppropriatenessScores score_appropriateness(const GenerationSet& gen, const AppropriatenessMap& map,
                                            const ReactionStore& gt, const MetricConfig& cfg,
                                            AppropriatenessParts parts = AppropriatenessParts::Both);

}  // namespace mafrg::eval
