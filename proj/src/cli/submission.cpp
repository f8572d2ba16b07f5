#include <algorithm>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

#include "mafrg/cli.hpp"
#include "mafrg/core/error.hpp"
#include "mafrg/core/io.hpp"
#include "mafrg/core/validate.hpp"

namespace mafrg::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path candidate_path(const fs::path& dir, const std::string& assignment_id, std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "cand_%02zu.mfrg", index);
  return dir / assignment_id / buf;
}

void write_submission(const fs::path& dir, const SubmissionInfo& info, std::span<const GenerationSet> sets) {
  fs::create_directories(dir);
  for (const auto& set : sets) {
    if (set.assignment_id.empty() || set.assignment_id.find('/') != std::string::npos) {
      throw ValidationError("invalid assignment id '" + set.assignment_id + "'");
    }
    fs::create_directories(dir / set.assignment_id);
    for (std::size_t i = 0; i < set.size(); ++i) {
      io::write_matrix_binary(candidate_path(dir, set.assignment_id, i), set.candidates[i].frames);
    }
  }
  json j = {{"generator", info.generator},
            {"mode", std::string(to_string(info.mode))},
            {"seed", info.seed},
            {"candidates", info.candidates},
            {"split", info.split},
            {"assignments", sets.size()}};
  std::ofstream out(dir / "submission.json");
  if (!out) throw Error("cannot write " + (dir / "submission.json").string());
  out << j.dump(2) << '\n';
}

LoadedSubmission read_submission(const fs::path& dir, std::optional<std::size_t> expected_frames) {
  if (!fs::is_directory(dir)) throw ValidationError("submission directory " + dir.string() + " does not exist");
  LoadedSubmission sub;
  const auto meta = dir / "submission.json";
  if (fs::exists(meta)) {
    std::ifstream in(meta);
    try {
      const json j = json::parse(in);
      sub.info.generator = j.value("generator", std::string{"submission"});
      sub.info.mode = parse_generation_mode(j.value("mode", std::string{"offline"}));
      sub.info.seed = j.value("seed", std::uint64_t{0});
      sub.info.candidates = j.value("candidates", kDefaultCandidates);
      sub.info.split = j.value("split", std::string{});
    } catch (const json::exception& e) {
      throw FormatError(meta.string() + ": " + e.what());
    }
  } else {
    sub.info.generator = dir.filename().string();
  }

  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());

  const ValidationOptions opts{.expected_frames = expected_frames};
  for (const auto& d : dirs) {
    const std::string id = d.filename().string();
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(d))
      if (e.is_regular_file() && e.path().extension() == ".mfrg") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
      sub.problems.push_back(d.string() + ": no candidate files");
      continue;
    }
    GenerationSet set;
    set.assignment_id = id;
    set.mode = sub.info.mode;
    set.generator_name = sub.info.generator;
    set.seed = sub.info.seed;
    bool ok = true;
    for (std::size_t i = 0; i < files.size(); ++i) {
      try {
        ReactionSequence seq{id + "#" + std::to_string(i), io::read_matrix_binary(files[i]), kStandardFps};
        const auto report = validate_sequence(seq, opts);
        if (!report.ok()) {
          sub.problems.push_back(files[i].string() + ": " + report.summary(3));
          ok = false;
          continue;
        }
        set.candidates.push_back(std::move(seq));
      } catch (const Error& e) {
        sub.problems.push_back(files[i].string() + ": " + e.what());
        ok = false;
      }
    }
    if (ok) sub.sets.emplace(id, std::move(set));
  }
  return sub;
}

}  // namespace mafrg::cli
