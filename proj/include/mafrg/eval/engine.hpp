#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mafrg/eval/metrics.hpp"

namespace mafrg::eval {

struct ClipScores {
  std::string assignment_id;
  double fr_dist = 0.0;
  double fr_corr = 0.0;
  double fr_div = 0.0;
  double fr_var = 0.0;
  double fr_syn = 0.0;
  std::string best_neighbor_id;
};

/// One leaderboard line, in the column order of the published result tables.
struct LeaderboardRow {
  std::string method;
  double fr_corr = 0.0;
  double fr_dist = 0.0;
  double fr_div = 0.0;
  double fr_var = 0.0;
  std::optional<double> fr_dvs;
  std::optional<double> fr_rea;
  double fr_syn = 0.0;
};

struct EvaluationResult {
  LeaderboardRow row;
  std::vector<ClipScores> clips;  // in assignment order
};

struct EngineOptions {
  std::size_t workers = 1;
  std::string method_name = "submission";
};

/// Runs fn(i) for i in [0, n) on `workers` threads. Exceptions are rethrown
/// (the one from the lowest index) after all workers stop.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn);

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double v) noexcept;
  double value() const noexcept { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Scores every assignment's GenerationSet and aggregates a leaderboard row.
/// Results do not depend on `opts.workers`. Throws ValidationError listing any
/// assignment without a GenerationSet, or any malformed candidate.
EvaluationResult evaluate_submission(std::span<const SpeakerListenerAssignment> assignments,
                                     const AppropriatenessMap& map,
                                     const std::map<std::string, GenerationSet>& gens,
                                     const MetricConfig& cfg, const EngineOptions& opts = {});

// Leaderboard files. Columns: method,FRCorr,FRDist,FRDiv,FRVar,FRDvs,FRRea,FRSyn.
inline constexpr const char* kLeaderboardColumns[] = {"FRCorr", "FRDist", "FRDiv", "FRVar",
                                                      "FRDvs",  "FRRea",  "FRSyn"};

std::string format_metric(std::string_view column, std::optional<double> value);
void write_leaderboard_csv(std::ostream& out, std::span<const LeaderboardRow> rows);
void write_leaderboard_markdown(std::ostream& out, std::span<const LeaderboardRow> rows);
std::vector<LeaderboardRow> read_leaderboard_csv(std::istream& in);
void write_clip_scores_csv(std::ostream& out, std::span<const ClipScores> clips);

}  // namespace mafrg::eval
