#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "mafrg/core/error.hpp"
#include "mafrg/eval/engine.hpp"
#include "test_support.hpp"

using namespace mafrg;
using namespace mafrg::eval;
namespace ts = testing_support;
using doctest::Approx;

namespace {

MetricConfig full_matrix_config() {
  MetricConfig cfg;
  cfg.dtw.band_radius.reset();
  return cfg;
}

GenerationSet make_set(std::string id, std::vector<ReactionSequence> cands) {
  GenerationSet g;
  g.assignment_id = std::move(id);
  g.candidates = std::move(cands);
  return g;
}

// Dataset of `pairs` random clip pairs with smooth, non-degenerate channels.
std::vector<SpeakerListenerAssignment> random_assignments(std::mt19937_64& rng, std::size_t pairs,
                                                          std::size_t frames) {
  std::vector<ClipPair> cps;
  for (std::size_t p = 0; p < pairs; ++p) {
    ClipPair cp;
    cp.pair_id = "p" + std::to_string(p);
    cp.a.subject_id = cp.pair_id + "a";
    cp.b.subject_id = cp.pair_id + "b";
    for (auto* part : {&cp.a, &cp.b}) {
      FrameMatrix m(frames, kNumChannels);
      for (std::size_t c = 0; c < kNumChannels; ++c) {
        auto walk = ts::random_walk(rng, frames);
        for (std::size_t t = 0; t < frames; ++t) m(t, c) = static_cast<float>(walk[t]);
      }
      part->behaviour.facial = {cp.pair_id, std::move(m), kStandardFps};
    }
    cps.push_back(std::move(cp));
  }
  return enumerate_assignments(cps);
}

AppropriatenessMap self_map(std::span<const SpeakerListenerAssignment> as) {
  AppropriatenessMap map;
  for (const auto& a : as) map.add(a.id(), a.id());
  return map;
}

}  // namespace

TEST_CASE("fr_dist and fr_corr on exact matches") {
  std::mt19937_64 rng(20);
  auto as = random_assignments(rng, 3, 30);
  auto store = ReactionStore::from_assignments(as);
  auto map = self_map(as);
  map.add(as[0].id(), as[2].id());

  // Every candidate equals some appropriate reaction -> distance 0, channel-sum CCC 25.
  auto g = make_set(as[0].id(), {as[0].listener_gt, as[2].listener_gt});
  CHECK(fr_dist(g, map, store) == 0.0);
  CHECK(fr_corr(g, map, store) == Approx(25.0).epsilon(1e-12));
  CHECK(fr_dist(make_set(as[1].id(), {as[1].listener_gt}), map, store, full_matrix_config()) == 0.0);

  auto missing = make_set("nope", {as[0].listener_gt});
  CHECK_THROWS_AS(fr_dist(missing, map, store), ValidationError);
  auto short_cand = make_set(as[0].id(), {ts::random_reaction(rng, 29)});
  CHECK_THROWS_AS(fr_dist(short_cand, map, store), ValidationError);
}

TEST_CASE("fr_corr constant candidate against constant neighbours is 0") {
  std::vector<SpeakerListenerAssignment> as(2);
  as[0].pair_id = "p";
  as[0].speaker_role = Role::A;
  as[0].listener_gt = ts::constant_reaction(10, 0.2f);
  as[1].pair_id = "p";
  as[1].speaker_role = Role::B;
  as[1].listener_gt = ts::constant_reaction(10, 0.7f);
  auto store = ReactionStore::from_assignments(as);
  AppropriatenessMap map({{"p_A", {"p_A", "p_B"}}});
  CHECK(fr_corr(make_set("p_A", {ts::constant_reaction(10, 0.5f)}), map, store) == 0.0);
}

TEST_CASE("fr_dist / fr_corr match nested-loop oracles") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t frames = trial < 5 ? 3 : 1 + rng() % 10;
    std::vector<SpeakerListenerAssignment> as(3);
    for (std::size_t k = 0; k < 3; ++k) {
      as[k].pair_id = "p" + std::to_string(k);
      as[k].listener_gt = ts::random_reaction(rng, frames);
    }
    auto store = ReactionStore::from_assignments(as);
    AppropriatenessMap map({{"p0_A", {"p0_A", "p1_A", "p2_A"}}});
    auto g = make_set("p0_A", {ts::random_reaction(rng, frames), ts::random_reaction(rng, frames)});

    // Oracle: exhaustive-path DTW, minimised per candidate, averaged.
    double dist = 0;
    for (const auto& c : g.candidates) {
      double best = 1e300;
      for (const auto& a : as)
        best = std::min(best, oracle::brute_force_dtw(ts::to_oracle(c.frames), ts::to_oracle(a.listener_gt.frames)));
      dist += best / 2;
    }
    CHECK(fr_dist(g, map, store, full_matrix_config()) == Approx(dist).epsilon(1e-10));

    if (frames < 2) continue;
    double corr = 0;
    for (const auto& c : g.candidates) {
      double best = -1e300;
      for (const auto& a : as) {
        double s = 0;
        for (std::size_t ch = 0; ch < kNumChannels; ++ch)
          s += oracle::direct_ccc(c.frames.column(ch), a.listener_gt.frames.column(ch));
        best = std::max(best, s);
      }
      corr += best / 2;
    }
    CHECK(fr_corr(g, map, store) == Approx(corr).epsilon(1e-8));
  }
}

TEST_CASE("fr_corr random T=20, set size 3 against oracle") {
  std::mt19937_64 rng(22);
  std::vector<SpeakerListenerAssignment> as(3);
  for (std::size_t k = 0; k < 3; ++k) {
    as[k].pair_id = "q" + std::to_string(k);
    as[k].listener_gt = ts::random_reaction(rng, 20);
  }
  auto store = ReactionStore::from_assignments(as);
  AppropriatenessMap map({{"q1_A", {"q0_A", "q1_A", "q2_A"}}});
  auto g = make_set("q1_A", {ts::random_reaction(rng, 20), ts::random_reaction(rng, 20), ts::random_reaction(rng, 20)});
  double corr = 0;
  for (const auto& c : g.candidates) {
    double best = -1e300;
    for (const auto& a : as) {
      double s = 0;
      for (std::size_t ch = 0; ch < kNumChannels; ++ch)
        s += oracle::direct_ccc(c.frames.column(ch), a.listener_gt.frames.column(ch));
      best = std::max(best, s);
    }
    corr += best / 3;
  }
  CHECK(fr_corr(g, map, store) == Approx(corr).epsilon(1e-9));
  CHECK(fr_corr(g, map, store) <= 25.0);
}

TEST_CASE("gt_excludes_self_for_corr") {
  std::mt19937_64 rng(23);
  auto as = random_assignments(rng, 2, 40);
  auto store = ReactionStore::from_assignments(as);
  AppropriatenessMap map({{as[0].id(), {as[0].id(), as[1].id()}}});
  auto g = make_set(as[0].id(), {as[0].listener_gt});
  MetricConfig cfg;
  CHECK(fr_corr(g, map, store, cfg) == Approx(25.0));
  cfg.gt_excludes_self_for_corr = true;
  CHECK(fr_corr(g, map, store, cfg) < 25.0);
  CHECK(fr_dist(g, map, store, cfg) == 0.0);
}

TEST_CASE("fr_div") {
  std::mt19937_64 rng(24);
  auto base = ts::random_reaction(rng, 50);
  CHECK(fr_div(make_set("x", {base, base, base})) == 0.0);
  CHECK(fr_div(make_set("x", {base})) == 0.0);

  auto shifted = base;
  for (auto& v : shifted.frames.data()) v = std::clamp(v, 0.0f, 0.8f);
  auto plus = shifted;
  for (auto& v : plus.frames.data()) v += 0.1f;
  CHECK(fr_div(make_set("x", {shifted, plus})) == Approx(0.01).epsilon(1e-6));

  CHECK_THROWS_AS(fr_div(make_set("x", {base, ts::random_reaction(rng, 49)})), ValidationError);

  // Permutation invariance.
  auto a = ts::random_reaction(rng, 30), b = ts::random_reaction(rng, 30), c = ts::random_reaction(rng, 30);
  CHECK(fr_div(make_set("x", {a, b, c})) == Approx(fr_div(make_set("x", {c, a, b}))).epsilon(1e-14));
  // Oracle: pairwise MSE mean.
  const double expected = (oracle::mse(ts::to_oracle(a.frames), ts::to_oracle(b.frames)) +
                           oracle::mse(ts::to_oracle(a.frames), ts::to_oracle(c.frames)) +
                           oracle::mse(ts::to_oracle(b.frames), ts::to_oracle(c.frames))) / 3;
  CHECK(fr_div(make_set("x", {a, b, c})) == Approx(expected).epsilon(1e-12));
}

TEST_CASE("fr_var") {
  std::vector<GenerationSet> frame_constant{make_set("x", {ts::constant_reaction(100, 0.3f)})};
  CHECK(fr_var(frame_constant) == 0.0);

  auto alt = ts::constant_reaction(100, 0.0f);
  for (std::size_t t = 0; t < 100; ++t) alt.frames(t, 4) = static_cast<float>(t % 2);
  std::vector<GenerationSet> one{make_set("x", {alt})};
  CHECK(fr_var(one) == Approx(0.01).epsilon(1e-14));
  CHECK_THROWS_AS(fr_var(std::span<const GenerationSet>{}), ArgumentError);
}

TEST_CASE("fr_dvs") {
  std::vector<GenerationSet> same{make_set("a", {ts::constant_reaction(10, 0.4f)}),
                                  make_set("b", {ts::constant_reaction(10, 0.4f)}),
                                  make_set("c", {ts::constant_reaction(10, 0.4f)})};
  CHECK(fr_dvs(same) == 0.0);

  std::vector<GenerationSet> two{make_set("a", {ts::constant_reaction(10, 0.0f)}),
                                 make_set("b", {ts::constant_reaction(10, 0.2f)})};
  CHECK(fr_dvs(two) == Approx(0.04).epsilon(1e-6));

  std::vector<GenerationSet> uneven{make_set("a", {ts::constant_reaction(10, 0.0f)}),
                                    make_set("b", {ts::constant_reaction(10, 0.2f), ts::constant_reaction(10, 0.2f)})};
  CHECK_THROWS_AS(fr_dvs(uneven), ValidationError);
  CHECK_THROWS_AS(fr_dvs(std::span(two.data(), 1)), ArgumentError);

  std::mt19937_64 rng(25);
  std::vector<GenerationSet> gens;
  for (int i = 0; i < 7; ++i)
    gens.push_back(make_set("g" + std::to_string(i), {ts::random_reaction(rng, 20), ts::random_reaction(rng, 20)}));
  const double seq = fr_dvs(gens);
  CHECK(fr_dvs(gens, DvsPairing::ByCandidateIndex, 4) == seq);
  auto shuffled = gens;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(fr_dvs(shuffled) == Approx(seq).epsilon(1e-13));
  CHECK(fr_dvs(gens, DvsPairing::AllCrossPairs) > 0.0);
}

TEST_CASE("fr_syn") {
  std::mt19937_64 rng(26);
  const std::size_t frames = 300;
  SpeakerBehaviour speaker;
  speaker.facial = ts::constant_reaction(frames, 0.0f);
  for (std::size_t c = 0; c < kNumChannels; ++c) {
    auto walk = ts::random_walk(rng, frames + 10);
    for (std::size_t t = 0; t < frames; ++t) speaker.facial.frames(t, c) = static_cast<float>(walk[t + 10]);
  }
  MetricConfig cfg;
  CHECK(fr_syn(make_set("s", {ts::constant_reaction(frames, 0.5f)}), speaker, cfg) == 49.0);
  CHECK(fr_syn(make_set("s", {speaker.facial}), speaker, cfg) == 0.0);

  auto lagged = speaker.facial;
  for (std::size_t t = 0; t < frames; ++t)
    for (std::size_t c = 0; c < kNumChannels; ++c)
      lagged.frames(t, c) = t >= 5 ? speaker.facial.frames(t - 5, c) : static_cast<float>(ts::unit(rng));
  CHECK(fr_syn(make_set("s", {lagged, lagged}), speaker, cfg) == 5.0);

  cfg.max_lag = frames;
  CHECK_THROWS_AS(fr_syn(make_set("s", {lagged}), speaker, cfg), ArgumentError);
}

TEST_CASE("fr_rea") {
  std::mt19937_64 rng(27);
  std::vector<ReactionSequence> ref{ts::random_reaction(rng, 60), ts::random_reaction(rng, 60)};
  std::vector<GenerationSet> gens{make_set("a", {ref[0]}), make_set("b", {ref[1]})};
  CHECK(std::abs(fr_rea(gens, ref)) < 1e-9);

  // Shift every channel by 0.1 -> identical covariance, mean term 25 * 0.01.
  std::vector<ReactionSequence> low;
  for (auto r : ref) {
    for (auto& v : r.frames.data()) v = v * 0.5f;
    low.push_back(r);
  }
  std::vector<GenerationSet> shifted;
  for (const auto& r : low) {
    auto s = r;
    for (auto& v : s.frames.data()) v += 0.1f;
    shifted.push_back(make_set("s", {s}));
  }
  CHECK(fr_rea(shifted, low) == Approx(0.25).epsilon(1e-4));
  CHECK(fr_rea(shifted, low, {}, 3) == fr_rea(shifted, low, {}, 1));

  std::vector<ReactionSequence> one_frame{ts::random_reaction(rng, 1)};
  std::vector<GenerationSet> g1{make_set("a", {ts::random_reaction(rng, 1)})};
  CHECK_THROWS_AS(fr_rea(g1, one_frame), ArgumentError);
}

TEST_CASE("binarize_aus") {
  auto seq = ts::constant_reaction(4, 0.5f);
  auto out = binarize_aus(seq, 0.5);
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t c = 0; c < kNumAus; ++c) CHECK(out.frames(t, c) == 1.0f);
    for (std::size_t c = kNumAus; c < kNumChannels; ++c) CHECK(out.frames(t, c) == 0.5f);
  }
  CHECK(binarize_aus(out, 0.5) == out);
  auto two = ts::constant_reaction(2, 0.0f);
  two.frames(0, 0) = 0.2f;
  two.frames(1, 0) = 0.7f;
  auto b = binarize_aus(two, 0.5);
  CHECK(b.frames(0, 0) == 0.0f);
  CHECK(b.frames(1, 0) == 1.0f);
  CHECK_THROWS_AS(binarize_aus(two, 1.0), ArgumentError);
}

TEST_CASE("evaluate_submission") {
  std::mt19937_64 rng(28);
  auto as = random_assignments(rng, 5, 120);
  auto map = self_map(as);
  MetricConfig cfg;
  cfg.max_lag = 20;

  SUBCASE("GT as its own submission") {
    std::map<std::string, GenerationSet> gens;
    for (const auto& a : as) gens[a.id()] = make_set(a.id(), {a.listener_gt});
    auto res = evaluate_submission(as, map, gens, cfg, {.workers = 1, .method_name = "GT"});
    CHECK(res.row.fr_dist == 0.0);
    CHECK(res.row.fr_div == 0.0);
    CHECK(res.row.fr_corr == Approx(25.0));
    CHECK(format_metric("FRDist", res.row.fr_dist) == "0.00");
    CHECK(format_metric("FRDiv", res.row.fr_div) == "0.0000");
    CHECK(res.row.fr_rea.value() < 1e-9);
    REQUIRE(res.clips.size() == 10);
    CHECK(res.clips[3].best_neighbor_id == as[3].id());
  }

  SUBCASE("constant submission has zero diversity") {
    std::map<std::string, GenerationSet> gens;
    for (const auto& a : as) gens[a.id()] = make_set(a.id(), std::vector(3, ts::constant_reaction(120, 0.4f)));
    auto res = evaluate_submission(as, map, gens, cfg);
    CHECK(res.row.fr_div == 0.0);
    CHECK(res.row.fr_var == 0.0);
    CHECK(res.row.fr_dvs == 0.0);
    CHECK(res.row.fr_syn == 20.0);
  }

  SUBCASE("parallel matches sequential bit for bit, and a direct loop") {
    std::map<std::string, GenerationSet> gens;
    for (const auto& a : as) {
      std::vector<ReactionSequence> c;
      for (int m = 0; m < 4; ++m) c.push_back(ts::random_reaction(rng, 120));
      gens[a.id()] = make_set(a.id(), c);
    }
    auto seq = evaluate_submission(as, map, gens, cfg, {.workers = 1});
    auto par = evaluate_submission(as, map, gens, cfg, {.workers = 8});
    std::ostringstream a, b, c, d;
    write_leaderboard_csv(a, std::span(&seq.row, 1));
    write_leaderboard_csv(b, std::span(&par.row, 1));
    write_clip_scores_csv(c, seq.clips);
    write_clip_scores_csv(d, par.clips);
    CHECK(a.str() == b.str());
    CHECK(c.str() == d.str());
    CHECK(seq.row.fr_dvs.value() == par.row.fr_dvs.value());
    CHECK(seq.row.fr_rea.value() == par.row.fr_rea.value());

    auto store = ReactionStore::from_assignments(as);
    double dist = 0, div = 0;
    std::vector<GenerationSet> ordered;
    for (const auto& x : as) {
      dist += fr_dist(gens[x.id()], map, store, cfg);
      div += fr_div(gens[x.id()]);
      ordered.push_back(gens[x.id()]);
    }
    CHECK(seq.row.fr_dist == Approx(dist / 10).epsilon(1e-12));
    CHECK(seq.row.fr_div == Approx(div / 10).epsilon(1e-12));
    CHECK(seq.row.fr_var == Approx(fr_var(ordered)).epsilon(1e-12));
  }

  SUBCASE("missing generation lists the ids") {
    std::map<std::string, GenerationSet> gens;
    for (std::size_t i = 0; i + 2 < as.size(); ++i) gens[as[i].id()] = make_set(as[i].id(), {as[i].listener_gt});
    try {
      evaluate_submission(as, map, gens, cfg);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(as[8].id()) != std::string::npos);
      CHECK(msg.find(as[9].id()) != std::string::npos);
    }
  }

  SUBCASE("invalid candidate is reported") {
    std::map<std::string, GenerationSet> gens;
    for (const auto& a : as) gens[a.id()] = make_set(a.id(), {a.listener_gt});
    gens[as[0].id()].candidates[0].frames(3, 0) = 2.0f;
    CHECK_THROWS_AS(evaluate_submission(as, map, gens, cfg), ValidationError);
  }

  SUBCASE("binarization changes scoring of AU channels") {
    std::map<std::string, GenerationSet> gens;
    for (const auto& a : as) gens[a.id()] = make_set(a.id(), {a.listener_gt});
    auto bin_cfg = cfg;
    bin_cfg.au_binarize_threshold = 0.5;
    auto res = evaluate_submission(as, map, gens, bin_cfg);
    CHECK(res.row.fr_dist > 0.0);
  }
}

TEST_CASE("leaderboard formatting round-trip") {
  std::vector<LeaderboardRow> rows{{"B_Random", 0.0412, 229.371, 0.16667, 0.08333, 0.16671, std::nullopt, 46.649},
                                   {"GT", 8.42, 0.0, 0.0, 0.0666, 0.2251, 44.31, 48.52}};
  std::stringstream csv;
  write_leaderboard_csv(csv, rows);
  CHECK(csv.str() ==
        "method,FRCorr,FRDist,FRDiv,FRVar,FRDvs,FRRea,FRSyn\n"
        "B_Random,0.04,229.37,0.1667,0.0833,0.1667,-,46.65\n"
        "GT,8.42,0.00,0.0000,0.0666,0.2251,44.31,48.52\n");
  auto back = read_leaderboard_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK_FALSE(back[0].fr_rea);
  CHECK(back[1].fr_rea == Approx(44.31));

  std::stringstream md;
  write_leaderboard_markdown(md, rows);
  CHECK(md.str().find("| B_Random | 0.04 | 229.37 | 0.1667 | 0.0833 | 0.1667 | - | 46.65 |") != std::string::npos);

  std::stringstream bad("method,FRC,FRD\n");
  CHECK_THROWS_AS(read_leaderboard_csv(bad), FormatError);
  CHECK(format_metric("FRSyn", -0.001) == "0.00");
}

TEST_CASE("parallel_for propagates the lowest-index exception") {
  std::vector<int> hits(100, 0);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_THROWS_WITH(parallel_for(10, 3,
                                 [](std::size_t i) {
                                   if (i >= 2) throw std::runtime_error("boom " + std::to_string(i));
                                 }),
                    doctest::Contains("boom"));
}
