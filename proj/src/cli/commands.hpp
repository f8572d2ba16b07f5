#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace mafrg::cli {

struct Settings {
  std::string config;

  std::string manifest;
  std::string map;
  std::string submission;
  std::string out;
  std::string split = "val";
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  // metric overrides
  std::size_t max_lag = 49;
  std::size_t band_radius = 75;
  bool no_band = false;
  double binarize_aus = 0.5;
  bool binarize_set = false;
  bool gt_excludes_self = false;
  std::string dvs_pairing = "index";
  std::string features_generated;
  std::string features_reference;
  std::string method;

  // synth
  std::size_t sessions = 20;
  std::size_t clips_per_session = 1;
  std::size_t frames = 750;
  std::size_t remainder = 0;
  std::size_t lag = 5;
  double noise = 0.02;
  std::size_t duplicates = 0;
  std::size_t subject_pool = 0;
  std::size_t audio_dim = 0;
  std::vector<std::string> languages{"English", "French", "German"};

  // segment
  std::size_t window = 750;

  // split
  std::vector<double> ratios{0.6, 0.2, 0.2};

  // map
  std::string metric = "ccc";
  double threshold = 0.0;
  bool threshold_set = false;

  // generate / guard / worker
  std::string baseline;
  std::string generator_cmd;
  int candidates = 10;
  std::string mode = "offline";
  std::size_t online_window = 50;
  bool warmup_zeros = false;
  std::string distribution = "uniform";
  std::int64_t timeout_ms = 600000;
  std::size_t clips = 5;
  std::size_t trials = 50;
  std::string template_path;
  std::string request;

  // report
  std::vector<std::string> inputs;
};

int cmd_synth(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_segment(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_split(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_map(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_stats(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_generate(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_evaluate(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_report(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_guard(const Settings& s, std::ostream& out, std::ostream& err);
int cmd_worker(const Settings& s, std::ostream& out, std::ostream& err);

}  // namespace mafrg::cli
