#include "doctest.h"

#include <filesystem>
#include <random>

#include "mafrg/core/error.hpp"
#include "mafrg/core/validate.hpp"
#include "mafrg/eval/metrics.hpp"
#include "mafrg/generators/baselines.hpp"
#include "mafrg/generators/subprocess.hpp"
#include "test_support.hpp"

using namespace mafrg;
using namespace mafrg::gen;
namespace ts = testing_support;

namespace {

SpeakerBehaviour make_speaker(std::mt19937_64& rng, std::size_t frames, std::string id = "s_A",
                              std::size_t audio_dim = 0) {
  SpeakerBehaviour s;
  s.clip_id = id;
  s.facial = {id, FrameMatrix(frames, kNumChannels), kStandardFps};
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    auto w = ts::random_walk(rng, frames);
    for (std::size_t t = 0; t < frames; ++t) s.facial.frames(t, c) = static_cast<float>(w[t]);
  }
  if (audio_dim > 0) s.audio = ts::random_matrix(rng, frames, audio_dim, -3.0, 3.0);
  return s;
}

bool same_candidates(const GenerationSet& a, const GenerationSet& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!(a.candidates[i].frames == b.candidates[i].frames)) return false;
  return true;
}

/// Offline output is the speaker reversed in time; its online step peeks ahead.
class ReverseGenerator final : public Generator {
 public:
  std::string name() const override { return "reverse"; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& s, int m, std::uint64_t) override {
    const auto& f = s.facial.frames;
    FrameMatrix r(f.rows(), f.cols());
    for (std::size_t t = 0; t < f.rows(); ++t)
      for (std::size_t c = 0; c < f.cols(); ++c) r(t, c) = f(f.rows() - 1 - t, c);
    return std::vector<FrameMatrix>(static_cast<std::size_t>(m), r);
  }
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t) override {
    return std::vector<FrameMatrix>(static_cast<std::size_t>(m), FrameMatrix(in.block_size() + 1, kNumChannels));
  }
};

/// Records what each online step could see.
class ProbeGenerator final : public Generator {
 public:
  std::vector<std::size_t> seen_rows, gammas, emitted_rows;
  std::string name() const override { return "probe"; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& s, int m, std::uint64_t) override {
    return std::vector<FrameMatrix>(static_cast<std::size_t>(m), FrameMatrix(s.length(), kNumChannels, 0.5f));
  }
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t) override {
    seen_rows.push_back(in.speaker_facial.rows());
    gammas.push_back(in.gamma);
    emitted_rows.push_back(in.emitted.empty() ? 0 : in.emitted[0].rows());
    return std::vector<FrameMatrix>(static_cast<std::size_t>(m), FrameMatrix(in.block_size(), kNumChannels, 0.5f));
  }
};

class WrongShapeGenerator final : public Generator {
 public:
  std::string name() const override { return "wrong"; }
  std::vector<FrameMatrix> generate(const SpeakerBehaviour& s, int m, std::uint64_t) override {
    return std::vector<FrameMatrix>(static_cast<std::size_t>(m), FrameMatrix(s.length(), 24));
  }
  std::vector<FrameMatrix> step(const OnlineStepInput& in, int m, std::uint64_t) override {
    return std::vector<FrameMatrix>(static_cast<std::size_t>(m), FrameMatrix(in.block_size() - 1, kNumChannels));
  }
};

GeneratorContract online(int m, std::size_t w, std::uint64_t seed = 0) {
  GeneratorContract c;
  c.mode = GenerationMode::Online;
  c.candidates = m;
  c.window = w;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("B_Mime copies the speaker offline and online") {
  std::mt19937_64 rng(1);
  auto s = make_speaker(rng, 120);
  auto set = b_mime(s, 10);
  REQUIRE(set.size() == 10);
  for (const auto& c : set.candidates) CHECK(c.frames == s.facial.frames);
  CHECK(eval::fr_div(set) == 0.0);

  MimeBaseline mime;
  CHECK(same_candidates(run_online(mime, s, online(10, 50)), set));
  CHECK(same_candidates(run_online(mime, s, online(10, 7)), set));
  CHECK(causal_guard_check(mime, s, 10, 3, 20).passed());
}

TEST_CASE("mean baselines") {
  std::vector<ReactionSequence> train{ts::constant_reaction(30, 0.2f, "a"), ts::constant_reaction(30, 0.4f, "b")};
  auto seq = b_mean_seq(train);
  auto fr = b_mean_fr(train);
  std::mt19937_64 rng(2);
  auto s = make_speaker(rng, 30);

  for (Generator* g : std::initializer_list<Generator*>{&seq, &fr}) {
    auto off = run_offline(*g, s, 10, 0);
    for (const auto& c : off.candidates)
      for (float v : c.frames.data()) CHECK(v == 0.3f);
    CHECK(eval::fr_div(off) == 0.0);
    CHECK(same_candidates(run_online(*g, s, online(10, 7)), off));
    CHECK(causal_guard_check(*g, s, 10, 5, 20).passed());
  }

  SUBCASE("single training sequence is reproduced") {
    auto r = ts::random_reaction(rng, 30);
    std::vector<ReactionSequence> one{r};
    auto g = b_mean_seq(one);
    CHECK(g.mean_sequence() == r.frames);
    auto out = run_offline(g, s, 2, 0);
    CHECK(out.candidates[1].frames == r.frames);
  }
  SUBCASE("frame-wise template differs from the global frame") {
    FrameMatrix ramp(4, kNumChannels);
    for (std::size_t t = 0; t < 4; ++t)
      for (std::size_t c = 0; c < kNumChannels; ++c) ramp(t, c) = 0.25f * static_cast<float>(t);
    std::vector<ReactionSequence> one{{"r", ramp, kStandardFps}};
    CHECK(b_mean_seq(one).mean_sequence()(3, 0) == 0.75f);
    CHECK(b_mean_fr(one).mean_frame()[0] == doctest::Approx(0.375));
  }
  SUBCASE("zero dataset diversity and MeanFr zero variance") {
    auto s2 = make_speaker(rng, 30, "s_B");
    std::vector<GenerationSet> sets{run_offline(seq, s, 10, 0), run_offline(seq, s2, 10, 0)};
    CHECK(eval::fr_dvs(sets) == 0.0);
    std::vector<GenerationSet> frs{run_offline(fr, s, 10, 0), run_offline(fr, s2, 10, 0)};
    CHECK(eval::fr_var(frs) == 0.0);
    CHECK(eval::fr_dvs(frs) == 0.0);
  }
  SUBCASE("errors") {
    std::vector<ReactionSequence> none;
    CHECK_THROWS_AS(b_mean_seq(none), ArgumentError);
    CHECK_THROWS_AS(b_mean_fr(none), ArgumentError);
    std::vector<ReactionSequence> ragged{ts::constant_reaction(30, 0.2f), ts::constant_reaction(31, 0.2f)};
    CHECK_THROWS_AS(b_mean_seq(ragged), ValidationError);
    CHECK_NOTHROW(b_mean_fr(ragged));
    auto short_speaker = make_speaker(rng, 29);
    CHECK_THROWS_AS(run_offline(seq, short_speaker, 1, 0), ValidationError);
  }
}

TEST_CASE("B_Random is deterministic and uniform") {
  std::mt19937_64 rng(3);
  auto s = make_speaker(rng, 750);
  auto a = b_random(s, 10, 42);
  auto b = b_random(s, 10, 42);
  auto c = b_random(s, 10, 43);
  CHECK(same_candidates(a, b));
  CHECK_FALSE(same_candidates(a, c));
  for (const auto& cand : a.candidates) CHECK(validate_sequence(cand).ok());

  RandomBaseline gen;
  CHECK(same_candidates(run_online(gen, s, online(10, 50, 42)), a));
  CHECK(causal_guard_check(gen, s, 10, 42, 10).passed());

  // Candidates differ from each other and across channels.
  CHECK(a.candidates[0].frames(0, 0) != a.candidates[1].frames(0, 0));

  std::vector<GenerationSet> sets;
  for (int i = 0; i < 20; ++i) {
    auto sp = make_speaker(rng, 750, "c" + std::to_string(i));
    sets.push_back(b_random(sp, 10, derive_seed(7, sp.clip_id)));
  }
  const double var = eval::fr_var(sets);
  CHECK(std::abs(var - 1.0 / 12.0) < 0.003);
  double div = 0.0;
  for (const auto& set : sets) div += eval::fr_div(set);
  div /= static_cast<double>(sets.size());
  CHECK(std::abs(div - 1.0 / 6.0) < 0.005);

  std::vector<GenerationSet> other;
  for (int i = 0; i < 20; ++i) {
    auto sp = make_speaker(rng, 750, "c" + std::to_string(i));
    other.push_back(b_random(sp, 10, derive_seed(8, sp.clip_id)));
  }
  CHECK(std::abs(eval::fr_var(other) - var) < 0.003);
}

TEST_CASE("B_Random gaussian mode stays in range with mean 0.5") {
  std::mt19937_64 rng(4);
  auto s = make_speaker(rng, 400);
  auto set = b_random(s, 10, 9, RandomDistribution::Gaussian);
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& c : set.candidates) {
    CHECK(validate_sequence(c, {.expected_frames = 400}).ok());
    for (float v : c.frames.data()) {
      sum += v;
      ++n;
    }
  }
  CHECK(sum / static_cast<double>(n) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("online contract") {
  std::mt19937_64 rng(5);
  auto s = make_speaker(rng, 23, "s_A", 4);

  SUBCASE("steps never see speaker frames past gamma") {
    ProbeGenerator probe;
    run_online(probe, s, online(3, 5));
    CHECK(probe.gammas == std::vector<std::size_t>{4, 9, 14, 19, 22});
    CHECK(probe.seen_rows == std::vector<std::size_t>{5, 10, 15, 20, 23});
    CHECK(probe.emitted_rows == std::vector<std::size_t>{0, 5, 10, 15, 20});
  }
  SUBCASE("warmup zeros skip the first window") {
    ProbeGenerator probe;
    auto c = online(2, 10);
    c.warmup_zeros = true;
    auto set = run_online(probe, s, c);
    CHECK(probe.gammas == std::vector<std::size_t>{19, 22});
    CHECK(set.candidates[0].frames(9, 3) == 0.0f);
    CHECK(set.candidates[0].frames(10, 3) == 0.5f);
  }
  SUBCASE("lookahead raises a causality violation") {
    ReverseGenerator rev;
    CHECK_THROWS_AS(run_online(rev, s, online(2, 5)), CausalityViolation);
  }
  SUBCASE("shape errors") {
    WrongShapeGenerator wrong;
    CHECK_THROWS_AS(run_online(wrong, s, online(2, 5)), ValidationError);
    CHECK_THROWS_AS(run_offline(wrong, s, 2, 0), ValidationError);
  }
  SUBCASE("window and candidate bounds") {
    MimeBaseline mime;
    CHECK_THROWS_AS(run_online(mime, s, online(2, 0)), ArgumentError);
    CHECK_THROWS_AS(run_online(mime, s, online(2, 24)), ArgumentError);
    CHECK_NOTHROW(run_online(mime, s, online(2, 23)));
    CHECK_NOTHROW(run_online(mime, s, online(2, 1)));
    CHECK_THROWS_AS(run_offline(mime, s, 0, 0), ArgumentError);
  }
  SUBCASE("dispatch") {
    MimeBaseline mime;
    auto c = online(1, 5);
    CHECK(run(mime, s, c).mode == GenerationMode::Online);
    c.mode = GenerationMode::Offline;
    CHECK(run(mime, s, c).mode == GenerationMode::Offline);
  }
}

TEST_CASE("causal guard flags a time-reversing generator") {
  std::mt19937_64 rng(6);
  auto s = make_speaker(rng, 60, "s_A", 3);
  ReverseGenerator rev;
  auto report = causal_guard_check(rev, s, 2, 1, 10);
  REQUIRE_FALSE(report.passed());
  CHECK(report.failure->trial == 0);
  CHECK(report.failure->frame <= report.failure->gamma);
  CHECK(report.describe().find("failed") != std::string::npos);
  CHECK_THROWS_AS(causal_guard_check(rev, s, 2, 1, 0), ArgumentError);

  MimeBaseline mime;
  auto ok = causal_guard_check(mime, s, 2, 1, 7);
  CHECK(ok.passed());
  CHECK(ok.trials == 7);
}

TEST_CASE("derive_seed") {
  CHECK(derive_seed(1, "a_A") == derive_seed(1, "a_A"));
  CHECK(derive_seed(1, "a_A") != derive_seed(1, "a_B"));
  CHECK(derive_seed(1, "a_A") != derive_seed(2, "a_A"));
}

TEST_CASE("request records round-trip") {
  const auto dir = std::filesystem::temp_directory_path() / "mafrg_req_test";
  std::filesystem::create_directories(dir);
  GenerationRequest r;
  r.mode = GenerationMode::Online;
  r.candidates = 3;
  r.seed = 0xFFFFFFFFFFFFFFFFull;
  r.frames = 20;
  r.block_begin = 15;
  r.gamma_schedule = {19};
  r.speaker_facial = dir / "speaker.mfrg";
  r.speaker_audio = dir / "audio.mfrg";
  r.previous = {dir / "p0.mfrg", dir / "p1.mfrg", dir / "p2.mfrg"};
  r.output_dir = dir / "out";
  write_request(dir / "request.json", r);
  auto back = read_request(dir / "request.json");
  CHECK(back.mode == r.mode);
  CHECK(back.seed == r.seed);
  CHECK(back.gamma_schedule == r.gamma_schedule);
  CHECK(back.previous == r.previous);
  CHECK(back.speaker_audio == r.speaker_audio);
  CHECK(back.output_dir == r.output_dir);
  CHECK(back.expected_rows() == 5);
  std::filesystem::remove_all(dir);
}

TEST_CASE("subprocess generators") {
  std::mt19937_64 rng(7);
  auto s = make_speaker(rng, 20, "s_A", 2);
  auto opts = [](std::string mode) {
    SubprocessOptions o;
    o.command = {FAKE_GENERATOR, std::move(mode)};
    o.name = "fake";
    o.timeout = std::chrono::seconds(20);
    return o;
  };

  SUBCASE("offline and online match the in-process baseline") {
    SubprocessGenerator ext(opts("mime"));
    auto off = run_offline(ext, s, 3, 0);
    CHECK(same_candidates(off, b_mime(s, 3)));
    CHECK(same_candidates(run_online(ext, s, online(3, 5)), off));

    SubprocessGenerator rnd(opts("random"));
    RandomBaseline local;
    CHECK(same_candidates(run_online(rnd, s, online(2, 8, 11)), run_offline(local, s, 2, 11)));
  }
  SUBCASE("time-reversing external generator fails the guard") {
    SubprocessGenerator ext(opts("reverse"));
    CHECK_FALSE(causal_guard_check(ext, s, 1, 0, 3).passed());
  }
  SUBCASE("crash") {
    SubprocessGenerator ext(opts("crash"));
    try {
      run_offline(ext, s, 1, 0);
      FAIL("expected a crash");
    } catch (const GeneratorCrash& e) {
      const std::string msg = e.what();
      CHECK(msg.find("status 3") != std::string::npos);
      CHECK(msg.find("model weights not found") != std::string::npos);
    }
  }
  SUBCASE("timeout") {
    auto o = opts("sleep");
    o.timeout = std::chrono::milliseconds(300);
    SubprocessGenerator ext(o);
    const auto t0 = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(run_offline(ext, s, 1, 0), GeneratorTimeout);
    CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(10));
  }
  SUBCASE("missing outputs") {
    SubprocessGenerator ext(opts("silent"));
    CHECK_THROWS_AS(run_offline(ext, s, 1, 0), ValidationError);
  }
  SUBCASE("missing executable") {
    SubprocessOptions o;
    o.command = {"/nonexistent/generator"};
    SubprocessGenerator ext(o);
    CHECK_THROWS_AS(run_offline(ext, s, 1, 0), GeneratorCrash);
  }
}
