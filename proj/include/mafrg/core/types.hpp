#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mafrg/core/frame_matrix.hpp"
#include "mafrg/core/schema.hpp"

namespace mafrg {

/// A T x 25 facial attribute time series.
struct ReactionSequence {
  std::string clip_id;
  FrameMatrix frames;
  int fps = kStandardFps;

  std::size_t length() const noexcept { return frames.rows(); }
  friend bool operator==(const ReactionSequence&, const ReactionSequence&) = default;
};

/// One participant's behaviour within a clip: facial attributes plus optional audio descriptors.
struct SpeakerBehaviour {
  std::string clip_id;
  ReactionSequence facial;
  std::optional<FrameMatrix> audio;

  std::size_t length() const noexcept { return facial.length(); }
};

enum class Corpus { NoXi, UDIVA, RECOLA, Synthetic };

std::string_view to_string(Corpus corpus);
Corpus parse_corpus(std::string_view text);

struct Participant {
  std::string subject_id;
  SpeakerBehaviour behaviour;
};

/// One 30 s dyadic segment. Either participant can act as speaker.
struct ClipPair {
  std::string pair_id;
  Participant a;
  Participant b;
  Corpus source_corpus = Corpus::Synthetic;
  std::string language;
  std::string session_id;
};

/// Throws ValidationError when the two participants share a subject or differ in length.
void check_clip_pair(const ClipPair& pair);

enum class Role { A, B };

/// One orientation of a ClipPair: who speaks, and the recorded listener reaction.
struct SpeakerListenerAssignment {
  std::string pair_id;
  Role speaker_role = Role::A;
  SpeakerBehaviour speaker;
  ReactionSequence listener_gt;

  std::string id() const;
};

std::string assignment_id(std::string_view pair_id, Role role);

/// Both orientations of every pair, ordered by pair_id then role A before B.
/// Throws ValidationError on duplicate pair ids.
std::vector<SpeakerListenerAssignment> enumerate_assignments(std::span<const ClipPair> pairs);

/// For each assignment id, the sorted set of assignment ids whose GT listener
/// reaction is appropriate for that assignment's speaker behaviour.
class AppropriatenessMap {
 public:
  using Entries = std::map<std::string, std::vector<std::string>>;

  AppropriatenessMap() = default;
  explicit AppropriatenessMap(Entries entries);

  /// Adds `appropriate` to the set of `id` (kept sorted and unique).
  void add(const std::string& id, const std::string& appropriate);

  const std::vector<std::string>* find(const std::string& id) const;
  const std::vector<std::string>& at(const std::string& id) const;
  const Entries& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

  /// Self-inclusion and referential integrity against the given id universe.
  /// Returns a list of human-readable problems; empty when consistent.
  std::vector<std::string> check(std::span<const std::string> known_ids) const;

  friend bool operator==(const AppropriatenessMap&, const AppropriatenessMap&) = default;

 private:
  Entries entries_;
};

enum class GenerationMode { Offline, Online };

std::string_view to_string(GenerationMode mode);
GenerationMode parse_generation_mode(std::string_view text);

inline constexpr int kDefaultCandidates = 10;

/// The M candidate reactions one generator produced for one assignment.
struct GenerationSet {
  std::string assignment_id;
  std::vector<ReactionSequence> candidates;
  GenerationMode mode = GenerationMode::Offline;
  std::string generator_name;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return candidates.size(); }
};

enum class Split { Train, Val, Test, Unassigned };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

/// Manifest record for one clip pair; file paths are relative to the manifest directory.
struct ClipRecord {
  std::string pair_id;
  std::string session_id;
  std::string subject_a;
  std::string subject_b;
  Corpus corpus = Corpus::Synthetic;
  std::string language;
  Split split = Split::Unassigned;
  std::string a_facial;
  std::string b_facial;
  std::optional<std::string> a_audio;
  std::optional<std::string> b_audio;
  std::size_t frames = kStandardFrames;

  friend bool operator==(const ClipRecord&, const ClipRecord&) = default;
};

struct DatasetManifest {
  int fps = kStandardFps;
  std::size_t clip_frames = kStandardFrames;
  std::size_t audio_dim = 0;
  std::vector<ClipRecord> clips;

  std::vector<const ClipRecord*> in_split(Split split) const;

  /// Subjects appearing in more than one split, with the offending splits.
  std::vector<std::string> subject_leaks() const;

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

}  // namespace mafrg
