#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "mafrg/core/error.hpp"
#include "mafrg/core/io.hpp"
#include "mafrg/datapipe.hpp"

namespace mafrg::data {

namespace fs = std::filesystem;

namespace {

double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double symmetric(std::mt19937_64& rng) { return 2.0 * unit(rng) - 1.0; }

std::string numbered(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%03zu", prefix, i);
  return buf;
}

/// Latent 25-channel signal in [0.05, 0.95]: two sinusoids, a reflecting walk and white jitter.
std::vector<double> latent(std::mt19937_64& rng, std::size_t frames) {
  std::vector<double> s(frames * kNumChannels);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    const double p1 = 60.0 + 190.0 * unit(rng);
    const double p2 = 17.0 + 40.0 * unit(rng);
    const double f1 = 2.0 * std::numbers::pi * unit(rng);
    const double f2 = 2.0 * std::numbers::pi * unit(rng);
    double walk = 0.0;
    for (std::size_t t = 0; t < frames; ++t) {
      walk += 0.02 * symmetric(rng);
      if (walk > 0.1) walk = 0.2 - walk;
      if (walk < -0.1) walk = -0.2 - walk;
      const double td = static_cast<double>(t);
      s[t * kNumChannels + c] = 0.5 + 0.18 * std::sin(2.0 * std::numbers::pi * td / p1 + f1) +
                                0.1 * std::sin(2.0 * std::numbers::pi * td / p2 + f2) + walk +
                                0.07 * symmetric(rng);
    }
  }
  return s;
}

FrameMatrix observe(const std::vector<double>& s, std::size_t offset, std::size_t frames, double noise,
                    std::mt19937_64& rng) {
  FrameMatrix m(frames, kNumChannels);
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      double v = std::clamp(s[(t + offset) * kNumChannels + c] + noise * symmetric(rng), 0.0, 1.0);
      if (ChannelSchema::lower_bound(c) < 0.0) v = 2.0 * v - 1.0;
      m(t, c) = static_cast<float>(v);
    }
  }
  return m;
}

FrameMatrix audio_from(const FrameMatrix& facial, std::size_t dim, std::mt19937_64& rng) {
  FrameMatrix a(facial.rows(), dim);
  for (std::size_t t = 0; t < facial.rows(); ++t)
    for (std::size_t d = 0; d < dim; ++d)
      a(t, d) = static_cast<float>(4.0 * facial(t, d % kNumChannels) + 0.1 * symmetric(rng));
  return a;
}

}  // namespace

std::vector<SessionRecord> synth_sessions(const SynthSpec& spec) {
  if (spec.sessions < 1 || spec.clips_per_session < 1 || spec.frames < 2) {
    throw ArgumentError("synthetic dataset needs >= 1 session, >= 1 clip per session and >= 2 frames per clip");
  }
  if (spec.duplicates > spec.sessions / 2) throw ArgumentError("at most half of the sessions can be duplicates");
  if (spec.subject_pool == 1) throw ArgumentError("subject pool must be 0 or >= 2");
  if (spec.languages.empty()) throw ArgumentError("synthetic dataset needs at least one language");
  if (!(spec.noise >= 0.0)) throw ArgumentError("noise must be >= 0");

  const std::size_t frames = spec.frames * spec.clips_per_session + spec.remainder_frames;
  const std::size_t lag = spec.listener_lag;
  std::vector<std::vector<double>> latents(spec.sessions);
  std::vector<FrameMatrix> a_streams(spec.sessions);
  std::vector<SessionRecord> out;
  out.reserve(spec.sessions);
  const std::size_t first_dup = spec.sessions - spec.duplicates;

  for (std::size_t i = 0; i < spec.sessions; ++i) {
    std::mt19937_64 rng(spec.seed * 0x9E3779B97F4A7C15ull + i + 1);
    SessionRecord s;
    s.session_id = numbered("syn", i);
    s.language = spec.languages[i % spec.languages.size()];
    s.corpus = Corpus::Synthetic;
    if (spec.subject_pool == 0) {
      s.subject_a = numbered("sub", 2 * i);
      s.subject_b = numbered("sub", 2 * i + 1);
    } else {
      s.subject_a = numbered("sub", (2 * i) % spec.subject_pool);
      s.subject_b = numbered("sub", (2 * i + 1) % spec.subject_pool);
    }

    if (i >= first_dup) {
      const std::size_t src = i - first_dup;
      latents[i] = latents[src];
      a_streams[i] = a_streams[src];
    } else {
      latents[i] = latent(rng, frames + lag);
      a_streams[i] = observe(latents[i], lag, frames, spec.noise, rng);
    }
    s.a_facial = a_streams[i];
    s.b_facial = observe(latents[i], 0, frames, spec.noise, rng);
    if (spec.audio_dim > 0) {
      s.a_audio = audio_from(s.a_facial, spec.audio_dim, rng);
      s.b_audio = audio_from(s.b_facial, spec.audio_dim, rng);
    }
    check_session(s);
    out.push_back(std::move(s));
  }
  return out;
}

DatasetManifest synth_dataset(const SynthSpec& spec, const fs::path& out_dir) {
  const auto sessions = synth_sessions(spec);
  fs::create_directories(out_dir / "sessions");
  DatasetManifest m;
  m.clip_frames = spec.frames;
  m.audio_dim = spec.audio_dim;
  for (const auto& s : sessions) {
    ClipRecord r;
    r.pair_id = s.session_id;
    r.session_id = s.session_id;
    r.subject_a = s.subject_a;
    r.subject_b = s.subject_b;
    r.corpus = s.corpus;
    r.language = s.language;
    r.frames = s.frames();
    r.a_facial = "sessions/" + s.session_id + "_a.mfrg";
    r.b_facial = "sessions/" + s.session_id + "_b.mfrg";
    io::write_matrix_binary(out_dir / r.a_facial, s.a_facial);
    io::write_matrix_binary(out_dir / r.b_facial, s.b_facial);
    if (s.a_audio) {
      r.a_audio = "sessions/" + s.session_id + "_a_audio.mfrg";
      r.b_audio = "sessions/" + s.session_id + "_b_audio.mfrg";
      io::write_matrix_binary(out_dir / *r.a_audio, *s.a_audio);
      io::write_matrix_binary(out_dir / *r.b_audio, *s.b_audio);
    }
    m.clips.push_back(std::move(r));
  }
  io::write_manifest(out_dir / "sessions.jsonl", m);
  return m;
}

}  // namespace mafrg::data
