#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include "mafrg/core/error.hpp"
#include "mafrg/datapipe.hpp"

namespace mafrg::data {

namespace {

constexpr double kLanguageWeight = 0.1;
constexpr std::array<Split, 3> kSplits{Split::Train, Split::Val, Split::Test};

class UnionFind {
 public:
  std::size_t id(const std::string& name) {
    auto [it, inserted] = index_.try_emplace(name, parent_.size());
    if (inserted) parent_.push_back(parent_.size());
    return it->second;
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::size_t> parent_;
};

struct Group {
  std::vector<std::size_t> sessions;
  std::set<std::string> subjects;
  std::map<std::string, std::size_t> languages;
  std::size_t clips = 0;
};

}  // namespace

std::vector<SessionSummary> summarize_sessions(const DatasetManifest& manifest) {
  std::vector<SessionSummary> out;
  std::unordered_map<std::string, std::size_t> at;
  for (const auto& c : manifest.clips) {
    const std::string& sid = c.session_id.empty() ? c.pair_id : c.session_id;
    auto [it, inserted] = at.try_emplace(sid, out.size());
    if (inserted) out.push_back({sid, c.subject_a, c.subject_b, c.language, 0});
    auto& s = out[it->second];
    if (s.subject_a != c.subject_a || s.subject_b != c.subject_b) {
      throw ValidationError("session " + sid + " lists different subjects across its clips");
    }
    ++s.clips;
  }
  return out;
}

Split SplitPlan::subject_split(const std::string& subject) const {
  auto it = subjects.find(subject);
  if (it == subjects.end()) throw ValidationError("subject " + subject + " is not in the split plan");
  return it->second;
}

SplitPlan plan_split(std::span<const SessionSummary> sessions, const SplitRatios& ratios, std::uint64_t seed) {
  const auto r = ratios.as_array();
  for (double v : r)
    if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("split ratios must be non-negative");
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw ArgumentError("split ratios must sum to 1");

  UnionFind uf;
  for (const auto& s : sessions) uf.unite(uf.id(s.subject_a), uf.id(s.subject_b));

  // Groups in first-appearance order of their root.
  std::map<std::size_t, std::size_t> group_of_root;
  std::vector<Group> groups;
  std::map<std::string, std::size_t> global_lang;
  std::size_t total = 0;
  for (std::size_t i = 0; i < sessions.size(); ++i) {
    const auto& s = sessions[i];
    const std::size_t root = uf.find(uf.id(s.subject_a));
    auto [it, inserted] = group_of_root.try_emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    auto& g = groups[it->second];
    g.sessions.push_back(i);
    g.subjects.insert(s.subject_a);
    g.subjects.insert(s.subject_b);
    g.languages[s.language] += s.clips;
    g.clips += s.clips;
    global_lang[s.language] += s.clips;
    total += s.clips;
  }

  std::vector<std::size_t> order(groups.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return groups[a].clips > groups[b].clips; });

  SplitPlan plan;
  const double n = static_cast<double>(std::max<std::size_t>(total, 1));
  const double capacity = *std::max_element(r.begin(), r.end()) * n;

  auto cost = [&](const std::array<std::size_t, 3>& counts,
                  const std::array<std::map<std::string, std::size_t>, 3>& langs) {
    double ratio_dev = 0.0;
    double lang_dev = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      const double d = (static_cast<double>(counts[k]) - r[k] * n) / n;
      ratio_dev += d * d;
      if (counts[k] == 0) continue;
      const double ck = static_cast<double>(counts[k]);
      double dev = 0.0;
      for (const auto& [lang, g] : global_lang) {
        auto it = langs[k].find(lang);
        const double share = it == langs[k].end() ? 0.0 : static_cast<double>(it->second) / ck;
        const double e = share - static_cast<double>(g) / n;
        dev += e * e;
      }
      lang_dev += dev * ck / n;
    }
    return ratio_dev + kLanguageWeight * lang_dev;
  };

  for (std::size_t gi : order) {
    const auto& g = groups[gi];
    std::size_t best = 0;
    if (static_cast<double>(g.clips) > capacity) {
      std::ostringstream os;
      os << "subject group {";
      bool first = true;
      for (const auto& s : g.subjects) {
        os << (first ? "" : ",") << s;
        first = false;
      }
      os << "} has " << g.clips << " clips, more than the largest split target (" << capacity
         << "); placed in train";
      plan.warnings.push_back(os.str());
    } else {
      double best_cost = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < 3; ++k) {
        if (r[k] <= 0.0) continue;
        auto counts = plan.clip_counts;
        auto langs = plan.languages;
        counts[k] += g.clips;
        for (const auto& [lang, c] : g.languages) langs[k][lang] += c;
        const double c = cost(counts, langs);
        if (c < best_cost) {
          best_cost = c;
          best = k;
        }
      }
    }
    plan.clip_counts[best] += g.clips;
    for (const auto& [lang, c] : g.languages) plan.languages[best][lang] += c;
    for (const auto& s : g.subjects) plan.subjects[s] = kSplits[best];
    for (std::size_t si : g.sessions) plan.sessions[sessions[si].session_id] = kSplits[best];
  }
  return plan;
}

void apply_split(DatasetManifest& manifest, const SplitPlan& plan) {
  for (auto& c : manifest.clips) {
    const std::string& sid = c.session_id.empty() ? c.pair_id : c.session_id;
    auto it = plan.sessions.find(sid);
    if (it == plan.sessions.end()) throw ValidationError("session " + sid + " is not in the split plan");
    c.split = it->second;
  }
}

}  // namespace mafrg::data
