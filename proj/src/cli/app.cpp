#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mafrg/cli.hpp"
#include "mafrg/core/error.hpp"

namespace mafrg::cli {

namespace {

struct Built {
  CLI::Option* binarize = nullptr;
  CLI::Option* threshold = nullptr;
};

Built build(CLI::App& app, Settings& s) {
  Built b;
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--config", s.config, "INI/TOML file with option defaults (env: MAFRG_CONFIG)");

  auto manifest = [&](CLI::App* c, bool required = true) {
    auto* o = c->add_option("--manifest", s.manifest, "Dataset manifest (JSON Lines)");
    if (required) o->required();
  };
  auto split = [&](CLI::App* c, bool allow_all) {
    std::vector<std::string> choices{"train", "val", "test"};
    if (allow_all) choices.push_back("all");
    c->add_option("--split", s.split, "Split to use")->check(CLI::IsMember(choices))->capture_default_str();
  };
  auto seed = [&](CLI::App* c) { c->add_option("--seed", s.seed, "Random seed")->capture_default_str(); };
  auto workers = [&](CLI::App* c) {
    c->add_option("--workers", s.workers, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  };
  auto band = [&](CLI::App* c) {
    c->add_option("--band-radius", s.band_radius, "Sakoe-Chiba band radius for DTW")->capture_default_str();
    c->add_flag("--no-band", s.no_band, "Unconstrained DTW");
  };
  auto generator = [&](CLI::App* c) {
    c->add_option("--baseline", s.baseline, "b_random, b_mime, b_mean_seq, b_mean_fr, gt or external");
    c->add_option("--generator-cmd", s.generator_cmd, "External generator command (whitespace separated)");
    c->add_option("--candidates", s.candidates, "Candidates per input (M)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    c->add_option("--mode", s.mode, "offline or online")
        ->check(CLI::IsMember({"offline", "online"}))
        ->capture_default_str();
    c->add_option("--window", s.online_window, "Frames per online step")->capture_default_str();
    c->add_flag("--warmup-zeros", s.warmup_zeros, "Online: emit zeros for the first window");
    c->add_option("--distribution", s.distribution, "b_random sampler")
        ->check(CLI::IsMember({"uniform", "gaussian"}))
        ->capture_default_str();
    c->add_option("--timeout-ms", s.timeout_ms, "External generator time limit per call")->capture_default_str();
  };

  auto* synth = app.add_subcommand("synth", "Write a synthetic session-level dataset");
  synth->add_option("--out", s.out, "Output directory")->required();
  synth->add_option("--sessions", s.sessions, "Number of sessions")->capture_default_str();
  synth->add_option("--clips-per-session", s.clips_per_session, "Windows per session")->capture_default_str();
  synth->add_option("--frames", s.frames, "Frames per window")->capture_default_str();
  synth->add_option("--remainder", s.remainder, "Extra frames per session")->capture_default_str();
  synth->add_option("--lag", s.lag, "Listener lag in frames")->capture_default_str();
  synth->add_option("--noise", s.noise, "Observation noise amplitude")->capture_default_str();
  synth->add_option("--duplicates", s.duplicates, "Sessions that reuse an earlier A stream")->capture_default_str();
  synth->add_option("--subject-pool", s.subject_pool, "Subjects shared across sessions (0: unique)")
      ->capture_default_str();
  synth->add_option("--audio-dim", s.audio_dim, "Audio descriptor width")->capture_default_str();
  synth->add_option("--languages", s.languages, "Languages to rotate through")->delimiter(',');
  seed(synth);

  auto* segment = app.add_subcommand("segment", "Cut sessions into fixed-length clip pairs");
  manifest(segment);
  segment->add_option("--out", s.out, "Output directory")->required();
  segment->add_option("--window", s.window, "Frames per clip")->capture_default_str();
  workers(segment);

  auto* splitc = app.add_subcommand("split", "Subject-independent train/val/test assignment");
  manifest(splitc);
  splitc->add_option("--ratios", s.ratios, "train,val,test ratios")->delimiter(',')->expected(3);
  splitc->add_option("--out", s.out, "Output manifest (default: overwrite input)");
  seed(splitc);

  auto* mapc = app.add_subcommand("map", "Build an appropriateness map");
  manifest(mapc);
  split(mapc, true);
  mapc->add_option("--out", s.out, "Output map file")->required();
  mapc->add_option("--metric", s.metric, "ccc or dtw")->check(CLI::IsMember({"ccc", "dtw"}))->capture_default_str();
  b.threshold = mapc->add_option("--threshold", s.threshold, "Similarity threshold (ccc default 20)");
  band(mapc);

  auto* stats = app.add_subcommand("stats", "Clip counts and hours per split, corpus and language");
  manifest(stats);
  stats->add_option("--out", s.out, "Also write the tables to this file");

  auto* gen = app.add_subcommand("generate", "Write a submission directory");
  manifest(gen);
  split(gen, false);
  gen->add_option("--out", s.out, "Submission directory")->required();
  generator(gen);
  seed(gen);
  workers(gen);
  gen->add_option("--method", s.method, "Generator name recorded in the submission");

  auto* ev = app.add_subcommand("evaluate", "Score a submission");
  manifest(ev);
  split(ev, false);
  ev->add_option("--map", s.map, "Appropriateness map")->required();
  ev->add_option("--submission", s.submission, "Submission directory")->required();
  ev->add_option("--out", s.out, "Output directory (default: <submission>/eval)");
  workers(ev);
  ev->add_option("--max-lag", s.max_lag, "TLCC lag window for FRSyn")->capture_default_str();
  band(ev);
  b.binarize = ev->add_option("--binarize-aus", s.binarize_aus, "Threshold generated AU channels")
                   ->check(CLI::Range(0.0, 1.0));
  ev->add_flag("--gt-excludes-self", s.gt_excludes_self, "Drop own GT from the FRCorr set when others exist");
  ev->add_option("--dvs-pairing", s.dvs_pairing, "index or all")
      ->check(CLI::IsMember({"index", "all"}))
      ->capture_default_str();
  ev->add_option("--features-generated", s.features_generated, "FRRea: generated feature matrix");
  ev->add_option("--features-reference", s.features_reference, "FRRea: reference feature matrix");
  ev->add_option("--method", s.method, "Row label (default: generator in submission.json)");

  auto* rep = app.add_subcommand("report", "Merge leaderboards into Markdown and SVG charts");
  rep->add_option("inputs", s.inputs, "Leaderboard CSV files")->required();
  rep->add_option("--out", s.out, "Output directory")->required();

  auto* guard = app.add_subcommand("guard", "Check a generator for use of future speaker frames");
  manifest(guard);
  split(guard, false);
  generator(guard);
  seed(guard);
  guard->add_option("--clips", s.clips, "Clips to sample")->capture_default_str();
  guard->add_option("--trials", s.trials, "Cut points per clip")->check(CLI::PositiveNumber)->capture_default_str();

  auto* worker = app.add_subcommand("worker", "Serve one generator request with a built-in baseline");
  worker->add_option("request", s.request, "Request record")->required();
  worker->add_option("--baseline", s.baseline, "b_random, b_mime, b_mean_seq or b_mean_fr")->required();
  worker->add_option("--template", s.template_path, "Mean template for b_mean_seq/b_mean_fr");
  worker->add_option("--distribution", s.distribution, "b_random sampler")
      ->check(CLI::IsMember({"uniform", "gaussian"}));
  return b;
}

std::string env_key(const std::string& lname) {
  std::string key = "MAFRG_";
  for (char c : lname) key += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return key;
}

std::string normalize(std::string name) {
  std::replace(name.begin(), name.end(), '_', '-');
  std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
  return name;
}

/// Arguments for options the command line left unset, taken from the
/// environment first, then from the config file.
std::vector<std::string> fallback_args(const CLI::App& sub, const std::vector<CLI::ConfigItem>& config) {
  std::vector<std::string> extra;
  for (const CLI::Option* opt : sub.get_options()) {
    if (opt->get_lnames().empty() || opt->count() > 0) continue;
    const std::string& lname = opt->get_lnames().front();
    if (lname == "help") continue;
    if (const char* env = std::getenv(env_key(lname).c_str())) {
      extra.push_back("--" + lname + "=" + env);
      continue;
    }
    const CLI::ConfigItem* global = nullptr;
    const CLI::ConfigItem* scoped = nullptr;
    for (const auto& item : config) {
      if (normalize(item.name) != lname) continue;
      const bool is_global = item.parents.empty() || (item.parents.size() == 1 && item.parents[0] == "default");
      if (is_global) global = &item;
      if (item.parents.size() == 1 && item.parents[0] == sub.get_name()) scoped = &item;
    }
    const CLI::ConfigItem* item = scoped ? scoped : global;
    if (!item) continue;
    for (const auto& v : item->inputs) extra.push_back("--" + lname + "=" + v);
  }
  return extra;
}

int parse(CLI::App& app, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  return -1;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  // First pass: learn the subcommand and which options the command line set.
  Settings first;
  CLI::App app1{"Multiple appropriate facial reaction generation toolkit", "mafrg"};
  build(app1, first);
  if (int rc = parse(app1, args, out, err); rc >= 0) return rc;
  const CLI::App* sub = app1.get_subcommands().front();

  std::string config_path = first.config;
  if (config_path.empty())
    if (const char* env = std::getenv("MAFRG_CONFIG")) config_path = env;
  std::vector<CLI::ConfigItem> config;
  if (!config_path.empty()) {
    if (!std::filesystem::exists(config_path)) {
      err << "error: config file " << config_path << " not found\n";
      return kExitUsage;
    }
    try {
      config = CLI::ConfigINI().from_file(config_path);
    } catch (const CLI::Error& e) {
      err << "error: config file " << config_path << ": " << e.what() << '\n';
      return kExitUsage;
    }
  }

  std::vector<std::string> full = args;
  const auto extra = fallback_args(*sub, config);
  full.insert(full.end(), extra.begin(), extra.end());

  Settings s;
  CLI::App app{"Multiple appropriate facial reaction generation toolkit", "mafrg"};
  const Built built = build(app, s);
  if (int rc = parse(app, full, out, err); rc >= 0) return rc;
  s.binarize_set = built.binarize->count() > 0;
  s.threshold_set = built.threshold->count() > 0;

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "synth") return cmd_synth(s, out, err);
    if (name == "segment") return cmd_segment(s, out, err);
    if (name == "split") return cmd_split(s, out, err);
    if (name == "map") return cmd_map(s, out, err);
    if (name == "stats") return cmd_stats(s, out, err);
    if (name == "generate") return cmd_generate(s, out, err);
    if (name == "evaluate") return cmd_evaluate(s, out, err);
    if (name == "report") return cmd_report(s, out, err);
    if (name == "guard") return cmd_guard(s, out, err);
    if (name == "worker") return cmd_worker(s, out, err);
  } catch (const ArgumentError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CausalityViolation& e) {
    err << "causality violation: " << e.what() << '\n';
    return kExitGuard;
  } catch (const GeneratorTimeout& e) {
    err << "generator timed out: " << e.what() << '\n';
    return kExitData;
  } catch (const GeneratorCrash& e) {
    err << "generator crashed: " << e.what() << '\n';
    return kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
  err << "error: unknown command " << name << '\n';
  return kExitUsage;
}

}  // namespace mafrg::cli
