#include <algorithm>
#include <fstream>
#include <functional>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "commands.hpp"
#include "mafrg/cli.hpp"
#include "mafrg/core/error.hpp"
#include "mafrg/core/io.hpp"
#include "mafrg/datapipe.hpp"
#include "mafrg/eval/engine.hpp"
#include "mafrg/generators/baselines.hpp"
#include "mafrg/generators/subprocess.hpp"

namespace mafrg::cli {

namespace fs = std::filesystem;

namespace {

struct Dataset {
  fs::path root;
  DatasetManifest manifest;
  std::vector<ClipPair> pairs;
  std::vector<SpeakerListenerAssignment> assignments;
};

fs::path root_of(const fs::path& manifest) {
  const auto parent = manifest.parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

Dataset load_split(const std::string& manifest_path, const std::string& split) {
  Dataset ds;
  ds.root = root_of(manifest_path);
  ds.manifest = io::read_manifest(manifest_path);
  std::vector<const ClipRecord*> recs;
  if (split == "all") {
    for (const auto& c : ds.manifest.clips) recs.push_back(&c);
  } else {
    recs = ds.manifest.in_split(parse_split(split));
  }
  ds.pairs = io::load_clip_pairs(ds.root, recs);
  for (const auto& p : ds.pairs) {
    if (p.a.behaviour.length() != ds.manifest.clip_frames) {
      throw ValidationError("clip " + p.pair_id + " has " + std::to_string(p.a.behaviour.length()) +
                            " frames, manifest declares " + std::to_string(ds.manifest.clip_frames));
    }
  }
  ds.assignments = enumerate_assignments(ds.pairs);
  return ds;
}

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

gen::RandomDistribution distribution_of(const Settings& s) {
  return s.distribution == "gaussian" ? gen::RandomDistribution::Gaussian : gen::RandomDistribution::Uniform;
}

using Factory = std::function<std::unique_ptr<gen::Generator>()>;

/// Builds a generator factory; each worker constructs its own instance.
Factory make_factory(const Settings& s, std::string& name) {
  const std::string& b = s.baseline;
  if (b == "b_random") {
    name = "B_Random";
    const auto dist = distribution_of(s);
    return [dist] { return std::make_unique<gen::RandomBaseline>(dist); };
  }
  if (b == "b_mime") {
    name = "B_Mime";
    return [] { return std::make_unique<gen::MimeBaseline>(); };
  }
  if (b == "b_mean_seq" || b == "b_mean_fr") {
    const auto train = load_split(s.manifest, "train");
    std::vector<const ReactionSequence*> reactions;
    for (const auto& a : train.assignments) reactions.push_back(&a.listener_gt);
    if (reactions.empty()) throw ValidationError("the train split is empty; mean baselines need training reactions");
    if (b == "b_mean_seq") {
      name = "B_MeanSeq";
      auto proto = gen::b_mean_seq(reactions);
      return [proto] { return std::make_unique<gen::MeanSeqBaseline>(proto); };
    }
    name = "B_MeanFr";
    auto proto = gen::b_mean_fr(reactions);
    return [proto] { return std::make_unique<gen::MeanFrBaseline>(proto); };
  }
  if (b == "external") {
    if (s.generator_cmd.empty()) throw ArgumentError("--baseline external needs --generator-cmd");
    gen::SubprocessOptions opts;
    opts.command = split_words(s.generator_cmd);
    opts.name = s.method.empty() ? "external" : s.method;
    opts.timeout = std::chrono::milliseconds(s.timeout_ms);
    name = opts.name;
    return [opts] { return std::make_unique<gen::SubprocessGenerator>(opts); };
  }
  throw ArgumentError("unknown baseline '" + b + "' (expected b_random, b_mime, b_mean_seq, b_mean_fr, gt or external)");
}

Factory resolve_factory(const Settings& s, std::string& name) {
  if (s.baseline.empty() && !s.generator_cmd.empty()) {
    Settings copy = s;
    copy.baseline = "external";
    return make_factory(copy, name);
  }
  if (s.baseline.empty()) throw ArgumentError("choose a generator with --baseline or --generator-cmd");
  return make_factory(s, name);
}

gen::GeneratorContract contract_of(const Settings& s, const std::string& name) {
  gen::GeneratorContract c;
  c.name = name;
  c.mode = parse_generation_mode(s.mode);
  c.candidates = s.candidates;
  c.window = s.online_window;
  c.seed = s.seed;
  c.warmup_zeros = s.warmup_zeros;
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << text;
}

}  // namespace

int cmd_synth(const Settings& s, std::ostream& out, std::ostream&) {
  data::SynthSpec spec;
  spec.sessions = s.sessions;
  spec.clips_per_session = s.clips_per_session;
  spec.frames = s.frames;
  spec.remainder_frames = s.remainder;
  spec.listener_lag = s.lag;
  spec.noise = s.noise;
  spec.duplicates = s.duplicates;
  spec.subject_pool = s.subject_pool;
  spec.audio_dim = s.audio_dim;
  spec.languages = s.languages;
  spec.seed = s.seed;
  const auto m = data::synth_dataset(spec, s.out);
  out << "wrote " << m.clips.size() << " sessions to " << (fs::path(s.out) / "sessions.jsonl").string() << '\n';
  return kExitOk;
}

int cmd_segment(const Settings& s, std::ostream& out, std::ostream&) {
  const auto sessions = io::read_manifest(s.manifest);
  const auto written = data::segment_manifest(root_of(s.manifest), sessions, s.out, s.window, s.workers);
  const auto path = fs::path(s.out) / "manifest.jsonl";
  io::write_manifest(path, written.manifest);
  out << "segmented " << sessions.clips.size() << " sessions into " << written.manifest.clips.size()
      << " clips (" << written.dropped_frames << " trailing frames dropped); manifest " << path.string() << '\n';
  return kExitOk;
}

int cmd_split(const Settings& s, std::ostream& out, std::ostream& err) {
  if (s.ratios.size() != 3) throw ArgumentError("--ratios needs three values");
  auto manifest = io::read_manifest(s.manifest);
  const auto summary = data::summarize_sessions(manifest);
  const auto plan = data::plan_split(summary, {s.ratios[0], s.ratios[1], s.ratios[2]}, s.seed);
  data::apply_split(manifest, plan);
  const auto leaks = manifest.subject_leaks();
  if (!leaks.empty()) throw ValidationError("split leaks subjects: " + leaks.front());
  for (const auto& w : plan.warnings) err << "warning: " << w << '\n';
  const std::string path = s.out.empty() ? s.manifest : s.out;
  const fs::path old_root = fs::absolute(root_of(s.manifest));
  const fs::path new_root = fs::absolute(root_of(path));
  if (old_root.lexically_normal() != new_root.lexically_normal()) {
    auto move = [&](std::string& p) { p = (old_root / p).lexically_normal().lexically_relative(new_root).generic_string(); };
    for (auto& c : manifest.clips) {
      move(c.a_facial);
      move(c.b_facial);
      if (c.a_audio) move(*c.a_audio);
      if (c.b_audio) move(*c.b_audio);
    }
  }
  io::write_manifest(path, manifest);
  out << "train " << plan.clip_counts[0] << ", val " << plan.clip_counts[1] << ", test " << plan.clip_counts[2]
      << " clips; " << plan.subjects.size() << " subjects; manifest " << path << '\n';
  return kExitOk;
}

int cmd_map(const Settings& s, std::ostream& out, std::ostream&) {
  const auto ds = load_split(s.manifest, s.split);
  data::MapBuildOptions opts;
  opts.metric = data::parse_similarity_metric(s.metric);
  if (s.threshold_set) {
    opts.threshold = s.threshold;
  } else if (opts.metric == data::SimilarityMetric::Dtw) {
    throw ArgumentError("--metric dtw needs --threshold");
  }
  opts.dtw.band_radius = s.no_band ? std::nullopt : std::optional<std::size_t>(s.band_radius);
  const auto map = data::build_appropriateness_map(ds.assignments, opts);
  io::write_map(fs::path(s.out), map);
  std::size_t total = 0;
  for (const auto& [id, set] : map.entries()) total += set.size();
  out << "map with " << map.size() << " entries, " << total << " appropriate links, written to " << s.out << '\n';
  return kExitOk;
}

int cmd_stats(const Settings& s, std::ostream& out, std::ostream&) {
  const auto text = data::manifest_stats(io::read_manifest(s.manifest)).render();
  out << text;
  if (!s.out.empty()) write_text(s.out, text);
  return kExitOk;
}

int cmd_generate(const Settings& s, std::ostream& out, std::ostream&) {
  const auto ds = load_split(s.manifest, s.split);
  std::vector<GenerationSet> sets(ds.assignments.size());
  SubmissionInfo info;
  info.seed = s.seed;
  info.split = s.split;
  info.mode = parse_generation_mode(s.mode);

  if (s.baseline == "gt") {
    info.generator = s.method.empty() ? "GT" : s.method;
    info.candidates = 1;
    for (std::size_t i = 0; i < sets.size(); ++i) {
      const auto& a = ds.assignments[i];
      sets[i] = GenerationSet{a.id(), {a.listener_gt}, info.mode, info.generator, s.seed};
    }
  } else {
    std::string name;
    const auto factory = resolve_factory(s, name);
    if (!s.method.empty()) name = s.method;
    info.generator = name;
    info.candidates = s.candidates;
    const auto base = contract_of(s, name);
    eval::parallel_for(sets.size(), s.workers, [&](std::size_t i) {
      const auto& a = ds.assignments[i];
      auto g = factory();
      auto contract = base;
      contract.seed = gen::derive_seed(s.seed, a.id());
      sets[i] = gen::run(*g, a.speaker, contract);
      sets[i].assignment_id = a.id();
      sets[i].generator_name = name;
    });
  }
  write_submission(s.out, info, sets);
  out << "wrote " << sets.size() << " generation sets (" << info.generator << ", " << to_string(info.mode)
      << ", M=" << info.candidates << ") to " << s.out << '\n';
  return kExitOk;
}

int cmd_evaluate(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto ds = load_split(s.manifest, s.split);
  const auto map = io::read_map(fs::path(s.map));
  auto sub = read_submission(s.submission, ds.manifest.clip_frames);
  if (!sub.problems.empty()) {
    for (const auto& p : sub.problems) err << "invalid candidate: " << p << '\n';
    err << sub.problems.size() << " invalid file(s) in " << s.submission << '\n';
    return kExitData;
  }

  eval::MetricConfig cfg;
  cfg.max_lag = s.max_lag;
  cfg.dtw.band_radius = s.no_band ? std::nullopt : std::optional<std::size_t>(s.band_radius);
  if (s.binarize_set) cfg.au_binarize_threshold = s.binarize_aus;
  cfg.gt_excludes_self_for_corr = s.gt_excludes_self;
  cfg.dvs_pairing = s.dvs_pairing == "all" ? eval::DvsPairing::AllCrossPairs : eval::DvsPairing::ByCandidateIndex;
  if (!s.features_generated.empty() || !s.features_reference.empty()) {
    if (s.features_generated.empty() || s.features_reference.empty()) {
      throw ArgumentError("--features-generated and --features-reference go together");
    }
    cfg.frechet_features = eval::FrechetFeatures::External;
    cfg.external_features = eval::ExternalFeatureFiles{s.features_generated, s.features_reference};
  }

  eval::EngineOptions opts;
  opts.workers = s.workers;
  opts.method_name = s.method.empty() ? sub.info.generator : s.method;
  const auto result = eval::evaluate_submission(ds.assignments, map, sub.sets, cfg, opts);

  const fs::path dir = s.out.empty() ? fs::path(s.submission) / "eval" : fs::path(s.out);
  fs::create_directories(dir);
  const std::vector<eval::LeaderboardRow> rows{result.row};
  std::ostringstream csv, md, clips;
  eval::write_leaderboard_csv(csv, rows);
  eval::write_leaderboard_markdown(md, rows);
  eval::write_clip_scores_csv(clips, result.clips);
  write_text(dir / "leaderboard.csv", csv.str());
  write_text(dir / "leaderboard.md", md.str());
  write_text(dir / "clip_scores.csv", clips.str());
  out << md.str();
  return kExitOk;
}

int cmd_report(const Settings& s, std::ostream& out, std::ostream&) {
  std::vector<eval::LeaderboardRow> rows;
  for (const auto& path : s.inputs) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open leaderboard " + path);
    try {
      for (auto& r : eval::read_leaderboard_csv(in)) rows.push_back(std::move(r));
    } catch (const FormatError& e) {
      throw FormatError(path + ": " + e.what());
    }
  }
  rows = order_rows(std::move(rows));
  const fs::path dir(s.out);
  fs::create_directories(dir);
  std::ostringstream md;
  eval::write_leaderboard_markdown(md, rows);
  write_text(dir / "leaderboard.md", md.str());
  std::size_t charts = 0;
  for (const char* metric : eval::kLeaderboardColumns) {
    const auto svg = bar_chart_svg(metric, rows);
    const auto path = dir / (std::string(metric) + ".svg");
    if (svg) {
      write_text(path, *svg);
      ++charts;
    } else {
      std::error_code ec;
      fs::remove(path, ec);
    }
  }
  out << md.str();
  out << "wrote leaderboard.md and " << charts << " charts to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_guard(const Settings& s, std::ostream& out, std::ostream& err) {
  const auto ds = load_split(s.manifest, s.split);
  if (ds.assignments.empty()) throw ValidationError("split " + s.split + " has no clips");
  std::string name;
  const auto factory = resolve_factory(s, name);

  std::vector<std::size_t> order(ds.assignments.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gen::derive_seed(s.seed, ds.assignments[a].id()) < gen::derive_seed(s.seed, ds.assignments[b].id());
  });
  order.resize(std::min(order.size(), std::max<std::size_t>(s.clips, 1)));

  const auto contract = contract_of(s, name);
  auto g = factory();
  for (std::size_t i : order) {
    const auto& a = ds.assignments[i];
    const auto seed = gen::derive_seed(s.seed, a.id());
    const auto report = gen::causal_guard_check(*g, a.speaker, s.candidates, seed, s.trials);
    if (!report.passed()) {
      out << "FAIL " << a.id() << ": " << report.describe() << '\n';
      err << "causality violation: " << name << " output depends on future speaker frames\n";
      return kExitGuard;
    }
    if (contract.mode == GenerationMode::Online) {
      auto c = contract;
      c.seed = seed;
      gen::run_online(*g, a.speaker, c);
    }
    out << "PASS " << a.id() << ": " << report.describe() << '\n';
  }
  out << name << " passed the causal guard on " << order.size() << " clips\n";
  return kExitOk;
}

int cmd_worker(const Settings& s, std::ostream&, std::ostream&) {
  std::unique_ptr<gen::Generator> g;
  if (s.baseline == "b_random") {
    g = std::make_unique<gen::RandomBaseline>(distribution_of(s));
  } else if (s.baseline == "b_mime") {
    g = std::make_unique<gen::MimeBaseline>();
  } else if (s.baseline == "b_mean_seq" || s.baseline == "b_mean_fr") {
    if (s.template_path.empty()) throw ArgumentError(s.baseline + " worker needs --template");
    auto t = io::read_matrix_binary(s.template_path);
    if (s.baseline == "b_mean_seq") {
      g = std::make_unique<gen::MeanSeqBaseline>(std::move(t));
    } else {
      if (t.rows() < 1) throw ValidationError("empty template");
      auto row = t.row(0);
      g = std::make_unique<gen::MeanFrBaseline>(std::vector<float>(row.begin(), row.end()));
    }
  } else {
    throw ArgumentError("worker supports b_random, b_mime, b_mean_seq and b_mean_fr");
  }
  gen::serve_request(*g, s.request);
  return kExitOk;
}

}  // namespace mafrg::cli
