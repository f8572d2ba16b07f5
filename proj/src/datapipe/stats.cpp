#include <cstdio>
#include <sstream>

#include "mafrg/datapipe.hpp"

namespace mafrg::data {

namespace {

std::string hours_text(double h) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", h);
  return buf;
}

void table(std::ostringstream& os, const char* label, const std::map<std::string, StatsCell>& rows,
           const StatsCell& total) {
  os << "| " << label << " | Clips | Hours |\n|---|---:|---:|\n";
  for (const auto& [name, cell] : rows) os << "| " << name << " | " << cell.clips << " | " << hours_text(cell.hours) << " |\n";
  os << "| Total | " << total.clips << " | " << hours_text(total.hours) << " |\n";
}

}  // namespace

double clip_hours(std::size_t clips, double seconds_per_clip) {
  return static_cast<double>(clips) * seconds_per_clip / 3600.0;
}

ManifestStats manifest_stats(const DatasetManifest& manifest) {
  ManifestStats st;
  st.seconds_per_clip = static_cast<double>(manifest.clip_frames) / static_cast<double>(manifest.fps);
  for (Split s : {Split::Train, Split::Val, Split::Test}) st.totals[s] = {};
  for (const auto& c : manifest.clips) {
    st.by_corpus[c.split][std::string(to_string(c.corpus))].clips++;
    st.by_language[c.split][c.language.empty() ? "unknown" : c.language].clips++;
    st.totals[c.split].clips++;
  }
  auto fill = [&](StatsCell& cell) { cell.hours = clip_hours(cell.clips, st.seconds_per_clip); };
  for (auto& [split, rows] : st.by_corpus)
    for (auto& [name, cell] : rows) fill(cell);
  for (auto& [split, rows] : st.by_language)
    for (auto& [name, cell] : rows) fill(cell);
  for (auto& [split, cell] : st.totals) fill(cell);
  return st;
}

std::string ManifestStats::render() const {
  std::ostringstream os;
  bool first = true;
  for (const auto& [split, total] : totals) {
    if (!first) os << '\n';
    first = false;
    os << "## " << to_string(split) << "\n\n";
    static const std::map<std::string, StatsCell> none;
    auto corpus = by_corpus.find(split);
    table(os, "Corpus", corpus == by_corpus.end() ? none : corpus->second, total);
    os << '\n';
    auto lang = by_language.find(split);
    table(os, "Language", lang == by_language.end() ? none : lang->second, total);
  }
  return os.str();
}

}  // namespace mafrg::data
