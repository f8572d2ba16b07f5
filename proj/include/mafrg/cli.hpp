#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mafrg/core/types.hpp"
#include "mafrg/eval/engine.hpp"

namespace mafrg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitGuard = 3,
};

/// Entry point shared by the executable and the tests. `args[0]` is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// ---------------------------------------------------------------------------
// Submission directories: `<dir>/submission.json` plus `<dir>/<assignment_id>/cand_XX.mfrg`.

struct SubmissionInfo {
  std::string generator;
  GenerationMode mode = GenerationMode::Offline;
  std::uint64_t seed = 0;
  int candidates = kDefaultCandidates;
  std::string split;
};

std::filesystem::path candidate_path(const std::filesystem::path& dir, const std::string& assignment_id,
                                     std::size_t index);

void write_submission(const std::filesystem::path& dir, const SubmissionInfo& info,
                      std::span<const GenerationSet> sets);

struct LoadedSubmission {
  SubmissionInfo info;
  std::map<std::string, GenerationSet> sets;
  std::vector<std::string> problems;  // one diagnostic per bad file
};

/// Reads every assignment directory. Unreadable or invalid candidate files are
/// reported in `problems` with their path instead of throwing.
LoadedSubmission read_submission(const std::filesystem::path& dir, std::optional<std::size_t> expected_frames);

// ---------------------------------------------------------------------------
// Reporting

/// Naive rows first (GT, B_Random, B_Mime, B_MeanSeq, B_MeanFr), then the
/// remaining methods in input order.
std::vector<eval::LeaderboardRow> order_rows(std::vector<eval::LeaderboardRow> rows);

/// One bar per method; std::nullopt when the metric is absent for every row.
std::optional<std::string> bar_chart_svg(std::string_view metric, std::span<const eval::LeaderboardRow> rows);

}  // namespace mafrg::cli
