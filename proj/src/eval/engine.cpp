#include "mafrg/eval/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "mafrg/core/error.hpp"
#include "mafrg/core/validate.hpp"

namespace mafrg::eval {

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::clamp<std::size_t>(workers, 1, n);
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto work = [&] {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };

  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

void CompensatedSum::add(double v) noexcept {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v))
    carry_ += (sum_ - t) + v;
  else
    carry_ += (v - t) + sum_;
  sum_ = t;
}

namespace {

std::string join(const std::vector<std::string>& items, std::size_t limit = 50) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  if (items.size() > limit) out += ", ... (" + std::to_string(items.size()) + " total)";
  return out;
}

}  // namespace

EvaluationResult evaluate_submission(std::span<const SpeakerListenerAssignment> assignments,
                                     const AppropriatenessMap& map,
                                     const std::map<std::string, GenerationSet>& gens,
                                     const MetricConfig& cfg, const EngineOptions& opts) {
  if (assignments.empty()) throw ArgumentError("evaluate_submission: no assignments to evaluate");

  std::vector<std::string> missing;
  for (const auto& a : assignments)
    if (!gens.contains(a.id())) missing.push_back(a.id());
  if (!missing.empty())
    throw ValidationError("missing GenerationSet for " + std::to_string(missing.size()) +
                          " assignment(s): " + join(missing));

  // Ordered working copy; binarization applies to generated candidates only.
  std::vector<GenerationSet> ordered;
  ordered.reserve(assignments.size());
  std::vector<std::string> problems;
  for (const auto& a : assignments) {
    GenerationSet g = gens.at(a.id());
    if (g.candidates.empty()) problems.push_back(a.id() + ": no candidates");
    for (std::size_t m = 0; m < g.candidates.size(); ++m) {
      auto report = validate_sequence(g.candidates[m], {.expected_frames = a.speaker.length()});
      if (!report.ok()) problems.push_back(a.id() + " candidate " + std::to_string(m) + ": " + report.summary(3));
      if (cfg.au_binarize_threshold) g.candidates[m] = binarize_aus(g.candidates[m], *cfg.au_binarize_threshold);
    }
    ordered.push_back(std::move(g));
  }
  if (!problems.empty()) throw ValidationError("invalid submission: " + join(problems, 20));

  std::vector<std::string> ids;
  for (const auto& a : assignments) ids.push_back(a.id());
  for (const auto& id : ids)
    if (!map.find(id)) problems.push_back("no appropriateness entry for " + id);
  if (!problems.empty()) throw ValidationError(join(problems, 20));

  const ReactionStore store = ReactionStore::from_assignments(assignments);

  EvaluationResult result;
  result.clips.resize(assignments.size());
  parallel_for(assignments.size(), opts.workers, [&](std::size_t i) {
    const auto& gen = ordered[i];
    auto app = score_appropriateness(gen, map, store, cfg);
    ClipScores s;
    s.assignment_id = gen.assignment_id.empty() ? assignments[i].id() : gen.assignment_id;
    s.fr_dist = app.fr_dist;
    s.fr_corr = app.fr_corr;
    s.best_neighbor_id = std::move(app.best_neighbor_id);
    s.fr_div = fr_div(gen);
    s.fr_var = fr_var(std::span(&gen, 1));
    s.fr_syn = fr_syn(gen, assignments[i].speaker, cfg);
    result.clips[i] = std::move(s);
  });

  CompensatedSum corr, dist, div, var, syn;
  for (const auto& c : result.clips) {
    corr.add(c.fr_corr);
    dist.add(c.fr_dist);
    div.add(c.fr_div);
    var.add(c.fr_var);
    syn.add(c.fr_syn);
  }
  const double n = static_cast<double>(result.clips.size());
  auto& row = result.row;
  row.method = opts.method_name;
  row.fr_corr = corr.value() / n;
  row.fr_dist = dist.value() / n;
  row.fr_div = div.value() / n;
  row.fr_var = var.value() / n;
  row.fr_syn = syn.value() / n;
  if (ordered.size() >= 2) row.fr_dvs = fr_dvs(ordered, cfg.dvs_pairing, opts.workers);

  // Reference pool for realism: every real reaction deemed appropriate for some evaluated input.
  std::set<std::string> reference_ids;
  for (const auto& id : ids)
    for (const auto& ref : map.at(id)) reference_ids.insert(ref);
  std::vector<const ReactionSequence*> reference;
  for (const auto& id : reference_ids) reference.push_back(&store.at(id));
  row.fr_rea = fr_rea(ordered, std::span<const ReactionSequence* const>(reference), cfg, opts.workers);
  return result;
}

std::string format_metric(std::string_view column, std::optional<double> value) {
  if (!value) return "-";
  const bool diversity = column == "FRDiv" || column == "FRVar" || column == "FRDvs";
  char buf[64];
  double v = *value;
  if (v == 0.0) v = 0.0;  // no "-0.00"
  std::snprintf(buf, sizeof buf, diversity ? "%.4f" : "%.2f", v);
  std::string s(buf);
  if (s == "-0.00" || s == "-0.0000") s.erase(0, 1);
  return s;
}

namespace {

std::vector<std::optional<double>> row_values(const LeaderboardRow& r) {
  return {r.fr_corr, r.fr_dist, r.fr_div, r.fr_var, r.fr_dvs, r.fr_rea, r.fr_syn};
}

void check_method_name(const std::string& name) {
  if (name.find_first_of(",|\n") != std::string::npos)
    throw ArgumentError("method name '" + name + "' must not contain ',', '|' or newlines");
}

}  // namespace

void write_leaderboard_csv(std::ostream& out, std::span<const LeaderboardRow> rows) {
  out << "method";
  for (const char* col : kLeaderboardColumns) out << ',' << col;
  out << '\n';
  for (const auto& r : rows) {
    check_method_name(r.method);
    out << r.method;
    const auto values = row_values(r);
    for (std::size_t i = 0; i < values.size(); ++i) out << ',' << format_metric(kLeaderboardColumns[i], values[i]);
    out << '\n';
  }
}

void write_leaderboard_markdown(std::ostream& out, std::span<const LeaderboardRow> rows) {
  out << "| Method |";
  for (const char* col : kLeaderboardColumns) out << ' ' << col << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < std::size(kLeaderboardColumns); ++i) out << "---:|";
  out << '\n';
  for (const auto& r : rows) {
    check_method_name(r.method);
    out << "| " << r.method << " |";
    const auto values = row_values(r);
    for (std::size_t i = 0; i < values.size(); ++i)
      out << ' ' << format_metric(kLeaderboardColumns[i], values[i]) << " |";
    out << '\n';
  }
}

std::vector<LeaderboardRow> read_leaderboard_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty leaderboard file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string expected = "method";
  for (const char* col : kLeaderboardColumns) expected += std::string(",") + col;
  if (line != expected) throw FormatError("leaderboard columns differ: got '" + line + "'");

  std::vector<LeaderboardRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 1 + std::size(kLeaderboardColumns))
      throw FormatError("leaderboard row has " + std::to_string(fields.size()) + " fields: '" + line + "'");
    std::vector<std::optional<double>> v;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i] == "-") {
        v.emplace_back();
        continue;
      }
      std::size_t used = 0;
      double d = 0;
      try {
        d = std::stod(fields[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != fields[i].size()) throw FormatError("bad number '" + fields[i] + "' in leaderboard");
      v.emplace_back(d);
    }
    for (std::size_t i : {0u, 1u, 2u, 3u, 6u})
      if (!v[i]) throw FormatError(std::string("column ") + kLeaderboardColumns[i] + " may not be '-'");
    rows.push_back({fields[0], *v[0], *v[1], *v[2], *v[3], v[4], v[5], *v[6]});
  }
  return rows;
}

void write_clip_scores_csv(std::ostream& out, std::span<const ClipScores> clips) {
  out << "assignment_id,FRDist,FRCorr,FRDiv,FRVar,FRSyn,best_neighbor_id\n";
  char buf[256];
  for (const auto& c : clips) {
    std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.10g,%.10g,%.10g", c.fr_dist, c.fr_corr, c.fr_div,
                  c.fr_var, c.fr_syn);
    out << c.assignment_id << ',' << buf << ',' << c.best_neighbor_id << '\n';
  }
}

}  // namespace mafrg::eval
