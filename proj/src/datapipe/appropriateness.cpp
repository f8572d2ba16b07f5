#include <cmath>
#include <set>

#include "mafrg/core/error.hpp"
#include "mafrg/datapipe.hpp"

namespace mafrg::data {

namespace {

using Columns = std::vector<std::vector<double>>;

Columns columns_of(const FrameMatrix& m) {
  Columns cols(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) cols[c] = m.column(c);
  return cols;
}

double ccc_sum(const Columns& a, const Columns& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) s += seqmetrics::ccc(a[c], b[c]);
  return s;
}

void check_options(const MapBuildOptions& opts) {
  if (!std::isfinite(opts.threshold)) throw ArgumentError("similarity threshold must be finite");
  if (opts.metric == SimilarityMetric::Dtw && opts.threshold < 0.0) {
    throw ArgumentError("DTW similarity threshold must be >= 0");
  }
}

}  // namespace

std::string_view to_string(SimilarityMetric metric) {
  return metric == SimilarityMetric::CccSum ? "ccc" : "dtw";
}

SimilarityMetric parse_similarity_metric(std::string_view text) {
  if (text == "ccc" || text == "ccc_sum") return SimilarityMetric::CccSum;
  if (text == "dtw") return SimilarityMetric::Dtw;
  throw ArgumentError("unknown similarity metric '" + std::string(text) + "' (expected ccc or dtw)");
}

std::optional<double> speaker_similarity(const ReactionSequence& a, const ReactionSequence& b,
                                         const MapBuildOptions& opts) {
  if (opts.metric == SimilarityMetric::CccSum) {
    if (a.length() != b.length() || a.length() < 2) return std::nullopt;
    return ccc_sum(columns_of(a.frames), columns_of(b.frames));
  }
  const std::size_t ta = a.length();
  const std::size_t tb = b.length();
  const std::size_t gap = ta > tb ? ta - tb : tb - ta;
  if (opts.dtw.band_radius && gap > *opts.dtw.band_radius) return std::nullopt;
  return seqmetrics::dtw(a.frames, b.frames, opts.dtw);
}

AppropriatenessMap build_appropriateness_map(std::span<const SpeakerListenerAssignment> assignments,
                                             const MapBuildOptions& opts) {
  check_options(opts);
  const std::size_t n = assignments.size();
  std::vector<std::string> ids(n);
  std::set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = assignments[i].id();
    if (!seen.insert(ids[i]).second) throw ValidationError("duplicate assignment id " + ids[i]);
  }

  AppropriatenessMap map;
  for (const auto& id : ids) map.add(id, id);

  if (opts.metric == SimilarityMetric::CccSum) {
    std::vector<Columns> cols(n);
    for (std::size_t i = 0; i < n; ++i) cols[i] = columns_of(assignments[i].speaker.facial.frames);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const auto& a = assignments[i].speaker.facial;
        const auto& b = assignments[j].speaker.facial;
        if (a.length() != b.length() || a.length() < 2) continue;
        if (ccc_sum(cols[i], cols[j]) >= opts.threshold) {
          map.add(ids[i], ids[j]);
          map.add(ids[j], ids[i]);
        }
      }
    }
    return map;
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto d = speaker_similarity(assignments[i].speaker.facial, assignments[j].speaker.facial, opts);
      if (d && *d <= opts.threshold) {
        map.add(ids[i], ids[j]);
        map.add(ids[j], ids[i]);
      }
    }
  }
  return map;
}

}  // namespace mafrg::data
