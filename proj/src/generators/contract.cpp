#include <algorithm>
#include <bit>
#include <sstream>

#include "mafrg/core/error.hpp"
#include "mafrg/core/validate.hpp"
#include "mafrg/generators/generator.hpp"

namespace mafrg::gen {

namespace {

void check_speaker(const SpeakerBehaviour& speaker) {
  require_valid(speaker.facial, ValidationOptions{.expected_frames = std::nullopt});
  if (speaker.audio && speaker.audio->rows() != speaker.length()) {
    std::ostringstream os;
    os << "speaker " << speaker.clip_id << ": audio has " << speaker.audio->rows() << " frames, facial has "
       << speaker.length();
    throw ValidationError(os.str());
  }
}

void check_m(int m) {
  if (m < 1) throw ArgumentError("candidate count must be >= 1, got " + std::to_string(m));
}

void check_shapes(const Generator& gen, const std::vector<FrameMatrix>& out, int m, std::size_t frames,
                  std::string_view what) {
  if (out.size() != static_cast<std::size_t>(m)) {
    std::ostringstream os;
    os << gen.name() << ": " << what << " returned " << out.size() << " candidates, expected " << m;
    throw ValidationError(os.str());
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].rows() != frames || out[i].cols() != kNumChannels) {
      std::ostringstream os;
      os << gen.name() << ": " << what << " candidate " << i << " is " << out[i].rows() << "x" << out[i].cols()
         << ", expected " << frames << "x" << kNumChannels;
      throw ValidationError(os.str());
    }
  }
}

GenerationSet assemble(const Generator& gen, const SpeakerBehaviour& speaker, std::vector<FrameMatrix> out,
                       GenerationMode mode, std::uint64_t seed) {
  GenerationSet set;
  set.assignment_id = speaker.clip_id;
  set.mode = mode;
  set.generator_name = gen.name();
  set.seed = seed;
  set.candidates.reserve(out.size());
  const ValidationOptions opts{.expected_frames = speaker.length()};
  for (std::size_t i = 0; i < out.size(); ++i) {
    ReactionSequence seq{speaker.clip_id + "#" + std::to_string(i), std::move(out[i]), speaker.facial.fps};
    auto report = validate_sequence(seq, opts);
    if (!report.ok()) throw ValidationError(gen.name() + ": candidate " + std::to_string(i) + ": " + report.summary(3));
    set.candidates.push_back(std::move(seq));
  }
  return set;
}

std::uint64_t splitmix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double unit(std::uint64_t bits) noexcept { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

}  // namespace

std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) noexcept {
  return splitmix(splitmix(seed) ^ splitmix(counter + 0x632BE59BD9B4E019ull));
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view id) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return counter_hash(base, h);
}

GenerationSet run_offline(Generator& gen, const SpeakerBehaviour& speaker, int m, std::uint64_t seed) {
  check_m(m);
  check_speaker(speaker);
  auto out = gen.generate(speaker, m, seed);
  check_shapes(gen, out, m, speaker.length(), "offline generation");
  return assemble(gen, speaker, std::move(out), GenerationMode::Offline, seed);
}

GenerationSet run_online(Generator& gen, const SpeakerBehaviour& speaker, const GeneratorContract& contract) {
  const int m = contract.candidates;
  check_m(m);
  check_speaker(speaker);
  const std::size_t frames = speaker.length();
  const std::size_t w = contract.window;
  if (w < 1 || w > frames) {
    throw ArgumentError("online window must be in [1, " + std::to_string(frames) + "], got " + std::to_string(w));
  }

  std::vector<FrameMatrix> out(static_cast<std::size_t>(m), FrameMatrix(frames, kNumChannels));
  for (std::size_t begin = 0; begin < frames; begin += w) {
    const std::size_t end = std::min(frames, begin + w);
    if (contract.warmup_zeros && begin == 0) continue;

    OnlineStepInput in;
    in.block_begin = begin;
    in.gamma = end - 1;
    in.speaker_facial = speaker.facial.frames.slice_rows(0, end);
    if (speaker.audio) in.speaker_audio = speaker.audio->slice_rows(0, end);
    in.emitted.reserve(out.size());
    for (const auto& c : out) in.emitted.push_back(c.slice_rows(0, begin));

    auto blocks = gen.step(in, m, contract.seed);
    if (blocks.size() != out.size()) {
      std::ostringstream os;
      os << gen.name() << ": online step at gamma " << in.gamma << " returned " << blocks.size()
         << " candidates, expected " << m;
      throw ValidationError(os.str());
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      if (b.rows() > end - begin) {
        std::ostringstream os;
        os << gen.name() << ": online step at gamma " << in.gamma << " emitted " << b.rows()
           << " frames for candidate " << i << "; only frames " << begin << ".." << in.gamma
           << " may be emitted";
        throw CausalityViolation(os.str());
      }
      if (b.rows() != end - begin || b.cols() != kNumChannels) {
        std::ostringstream os;
        os << gen.name() << ": online step at gamma " << in.gamma << " candidate " << i << " is " << b.rows()
           << "x" << b.cols() << ", expected " << (end - begin) << "x" << kNumChannels;
        throw ValidationError(os.str());
      }
      std::copy(b.data().begin(), b.data().end(), out[i].row(begin).data());
    }
  }
  return assemble(gen, speaker, std::move(out), GenerationMode::Online, contract.seed);
}

GenerationSet run(Generator& gen, const SpeakerBehaviour& speaker, const GeneratorContract& contract) {
  if (contract.mode == GenerationMode::Online) return run_online(gen, speaker, contract);
  return run_offline(gen, speaker, contract.candidates, contract.seed);
}

std::string GuardReport::describe() const {
  std::ostringstream os;
  if (!failure) {
    os << "causal guard passed (" << trials << " trials)";
    return os.str();
  }
  const auto& f = *failure;
  os << "causal guard failed: trial " << f.trial << ", gamma " << f.gamma << ", candidate " << f.candidate
     << ", frame " << f.frame << ", channel " << f.channel << " (" << ChannelSchema::name(f.channel) << ")";
  return os.str();
}

GuardReport causal_guard_check(Generator& gen, const SpeakerBehaviour& speaker, int m, std::uint64_t seed,
                               std::size_t trials) {
  if (trials < 1) throw ArgumentError("causal guard needs at least one trial");
  const auto reference = run_offline(gen, speaker, m, seed);
  const std::size_t frames = speaker.length();

  GuardReport report;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    report.trials = trial + 1;
    const std::uint64_t key = counter_hash(seed ^ 0xA5A5A5A5A5A5A5A5ull, trial);
    const std::size_t gamma = frames < 2 ? 0 : static_cast<std::size_t>(key % (frames - 1));

    SpeakerBehaviour noisy = speaker;
    auto& f = noisy.facial.frames;
    for (std::size_t t = gamma + 1; t < frames; ++t) {
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        const double lo = ChannelSchema::lower_bound(c);
        const double hi = ChannelSchema::upper_bound(c);
        const double u = unit(counter_hash(key, t * kNumChannels + c));
        f(t, c) = static_cast<float>(std::clamp(lo + u * (hi - lo), lo, hi));
      }
    }
    if (noisy.audio) {
      auto& a = *noisy.audio;
      for (std::size_t t = gamma + 1; t < frames; ++t) {
        for (std::size_t c = 0; c < a.cols(); ++c) {
          a(t, c) = static_cast<float>(4.0 * unit(counter_hash(~key, t * a.cols() + c)) - 2.0);
        }
      }
    }

    const auto probe = run_offline(gen, noisy, m, seed);
    for (std::size_t t = 0; t <= gamma; ++t) {
      for (std::size_t i = 0; i < reference.candidates.size(); ++i) {
        const auto r = reference.candidates[i].frames.row(t);
        const auto p = probe.candidates[i].frames.row(t);
        for (std::size_t c = 0; c < kNumChannels; ++c) {
          if (std::bit_cast<std::uint32_t>(r[c]) != std::bit_cast<std::uint32_t>(p[c])) {
            report.failure = GuardFailure{trial, gamma, i, t, c};
            return report;
          }
        }
      }
    }
  }
  return report;
}

}  // namespace mafrg::gen
