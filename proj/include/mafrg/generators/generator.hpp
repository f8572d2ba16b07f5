#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mafrg/core/types.hpp"

namespace mafrg::gen {

inline constexpr std::size_t kDefaultWindow = 50;

struct GeneratorContract {
  std::string name;
  GenerationMode mode = GenerationMode::Offline;
  int candidates = kDefaultCandidates;
  std::size_t window = kDefaultWindow;  // frames emitted per online step
  std::uint64_t seed = 0;
  bool warmup_zeros = false;  // online: emit zeros for [0, window) instead of calling the generator
};

/// What a generator sees during one online step. Speaker data stops at frame
/// `gamma`; the step must emit exactly frames [block_begin, gamma].
struct OnlineStepInput {
  std::size_t gamma = 0;
  std::size_t block_begin = 0;
  FrameMatrix speaker_facial;                // rows [0, gamma]
  std::optional<FrameMatrix> speaker_audio;  // rows [0, gamma]
  std::vector<FrameMatrix> emitted;          // per candidate, rows [0, block_begin)

  std::size_t block_size() const noexcept { return gamma + 1 - block_begin; }
};

/// A facial reaction generator. One instance is driven by one worker at a time.
class Generator {
 public:
  virtual ~Generator() = default;

  virtual std::string name() const = 0;

  /// Offline: the whole speaker clip is visible. Returns `m` T x 25 candidates.
  virtual std::vector<FrameMatrix> generate(const SpeakerBehaviour& speaker, int m, std::uint64_t seed) = 0;

  /// Online: returns `m` blocks of in.block_size() x 25 frames.
  virtual std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t seed) = 0;
};

GenerationSet run_offline(Generator& gen, const SpeakerBehaviour& speaker, int m, std::uint64_t seed);

/// Drives `gen` window by window. A step that emits frames past its gamma
/// raises CausalityViolation; any other shape error raises ValidationError.
GenerationSet run_online(Generator& gen, const SpeakerBehaviour& speaker, const GeneratorContract& contract);

/// Dispatches on contract.mode.
GenerationSet run(Generator& gen, const SpeakerBehaviour& speaker, const GeneratorContract& contract);

struct GuardFailure {
  std::size_t trial = 0;
  std::size_t gamma = 0;
  std::size_t candidate = 0;
  std::size_t frame = 0;
  std::size_t channel = 0;
};

struct GuardReport {
  std::size_t trials = 0;
  std::optional<GuardFailure> failure;

  bool passed() const noexcept { return !failure.has_value(); }
  std::string describe() const;
};

/// Re-runs offline generation with speaker frames after a random cut gamma
/// replaced by noise; output frames <= gamma must stay bit-identical.
GuardReport causal_guard_check(Generator& gen, const SpeakerBehaviour& speaker, int m, std::uint64_t seed,
                               std::size_t trials);

/// Stable per-assignment seed derived from a run seed and an identifier.
std::uint64_t derive_seed(std::uint64_t base, std::string_view id);

/// Counter-based hash: the same (seed, counter) always yields the same bits.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) noexcept;

}  // namespace mafrg::gen
