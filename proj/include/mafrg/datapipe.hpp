#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mafrg/core/types.hpp"
#include "mafrg/seqmetrics.hpp"

namespace mafrg::data {

/// One recorded dyadic conversation before segmentation.
struct SessionRecord {
  std::string session_id;
  std::string subject_a;
  std::string subject_b;
  std::string language;
  Corpus corpus = Corpus::Synthetic;
  FrameMatrix a_facial;
  FrameMatrix b_facial;
  std::optional<FrameMatrix> a_audio;
  std::optional<FrameMatrix> b_audio;
  int fps = kStandardFps;

  std::size_t frames() const noexcept { return a_facial.rows(); }
};

/// Throws ValidationError on unequal stream lengths, wrong widths, fps != 25
/// or a subject paired with itself.
void check_session(const SessionRecord& session);

std::string window_pair_id(std::string_view session_id, std::size_t window_index);

/// Consecutive non-overlapping windows starting at frame 0; the trailing
/// remainder is dropped. Sessions shorter than one window give no clips.
std::vector<ClipPair> segment_session(const SessionRecord& session, std::size_t window = kStandardFrames);

/// Session-level manifest (one record per session) to SessionRecords.
std::vector<SessionRecord> load_sessions(const std::filesystem::path& root, const DatasetManifest& sessions);

struct WrittenClips {
  DatasetManifest manifest;
  std::size_t dropped_frames = 0;
};

/// Segments every session of a session-level manifest and writes the clips
/// under `out_dir/clips`. Sessions are processed in parallel; output order is
/// session order then window index.
WrittenClips segment_manifest(const std::filesystem::path& session_root, const DatasetManifest& sessions,
                              const std::filesystem::path& out_dir, std::size_t window = kStandardFrames,
                              std::size_t workers = 1);

// ---------------------------------------------------------------------------
// Splitting

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  std::array<double, 3> as_array() const { return {train, val, test}; }
};

/// The unit the planner sees: who took part, in which language, how many clips.
struct SessionSummary {
  std::string session_id;
  std::string subject_a;
  std::string subject_b;
  std::string language;
  std::size_t clips = 0;
};

/// Sessions of a clip-level manifest, in first-appearance order.
std::vector<SessionSummary> summarize_sessions(const DatasetManifest& manifest);

struct SplitPlan {
  std::map<std::string, Split> subjects;
  std::map<std::string, Split> sessions;
  std::array<std::size_t, 3> clip_counts{};  // train, val, test
  std::array<std::map<std::string, std::size_t>, 3> languages;
  std::vector<std::string> warnings;

  Split subject_split(const std::string& subject) const;
};

/// Subjects linked through shared sessions form one unit. Units are placed
/// greedily (largest first, ties shuffled by `seed`) to minimize squared
/// deviation from the target clip ratios, with language-share deviation as a
/// secondary term.
SplitPlan plan_split(std::span<const SessionSummary> sessions, const SplitRatios& ratios, std::uint64_t seed);

/// Sets every clip's split from the plan. Throws ValidationError for unplanned sessions.
void apply_split(DatasetManifest& manifest, const SplitPlan& plan);

// ---------------------------------------------------------------------------
// Appropriateness

enum class SimilarityMetric { CccSum, Dtw };

std::string_view to_string(SimilarityMetric metric);
SimilarityMetric parse_similarity_metric(std::string_view text);

inline constexpr double kDefaultCccThreshold = 20.0;

struct MapBuildOptions {
  SimilarityMetric metric = SimilarityMetric::CccSum;
  double threshold = kDefaultCccThreshold;  // CccSum: >= threshold; Dtw: <= threshold
  seqmetrics::DtwConfig dtw{.band_radius = seqmetrics::kDefaultBandRadius};
};

/// Similarity between two speaker facial sequences under the chosen metric.
/// Returns std::nullopt when the sequences cannot be compared (length mismatch
/// beyond the band, or unequal lengths for CCC).
std::optional<double> speaker_similarity(const ReactionSequence& a, const ReactionSequence& b,
                                         const MapBuildOptions& opts);

/// Reflexive, symmetric map over the given assignments: two assignments whose
/// speakers are similar list each other.
AppropriatenessMap build_appropriateness_map(std::span<const SpeakerListenerAssignment> assignments,
                                             const MapBuildOptions& opts = {});

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthSpec {
  std::size_t sessions = 10;
  std::size_t clips_per_session = 1;
  std::size_t frames = kStandardFrames;  // window length
  std::size_t remainder_frames = 0;      // extra frames per session, dropped by segmentation
  std::size_t listener_lag = 5;          // listener trails the participant it responds to
  double noise = 0.02;
  std::size_t duplicates = 0;     // last sessions reuse the A stream of the first ones
  std::size_t subject_pool = 0;   // 0: two fresh subjects per session
  std::size_t audio_dim = 0;
  std::vector<std::string> languages{"English", "French", "German"};
  std::uint64_t seed = 0;
};

/// Builds the sessions in memory.
std::vector<SessionRecord> synth_sessions(const SynthSpec& spec);

/// Writes sessions under `out_dir/sessions` plus `out_dir/sessions.jsonl`.
/// Returns the session-level manifest.
DatasetManifest synth_dataset(const SynthSpec& spec, const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Statistics

double clip_hours(std::size_t clips, double seconds_per_clip = 30.0);

struct StatsCell {
  std::size_t clips = 0;
  double hours = 0.0;
};

struct ManifestStats {
  double seconds_per_clip = 30.0;
  std::map<Split, std::map<std::string, StatsCell>> by_corpus;
  std::map<Split, std::map<std::string, StatsCell>> by_language;
  std::map<Split, StatsCell> totals;

  /// Markdown tables, one block per split: corpus counts then language counts.
  std::string render() const;
};

/// Counts for train/val/test are always present (zeros when empty).
ManifestStats manifest_stats(const DatasetManifest& manifest);

}  // namespace mafrg::data
