#include "mafrg/eval/metrics.hpp"

#include <algorithm>
#include <limits>

#include "mafrg/core/error.hpp"
#include "mafrg/core/io.hpp"
#include "mafrg/eval/engine.hpp"

namespace mafrg::eval {

namespace {

using seqmetrics::ccc;

std::vector<double> as_double(const FrameMatrix& m) { return {m.data().begin(), m.data().end()}; }

std::vector<std::vector<double>> columns_of(const FrameMatrix& m) {
  std::vector<std::vector<double>> cols(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) cols[c] = m.column(c);
  return cols;
}

void require_same_shape(const FrameMatrix& a, const FrameMatrix& b, std::string_view what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ValidationError(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
}

double mean_squared_difference(const FrameMatrix& a, const FrameMatrix& b) {
  const auto da = a.data();
  const auto db = b.data();
  double s = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = static_cast<double>(da[i]) - static_cast<double>(db[i]);
    s += d * d;
  }
  return s / static_cast<double>(da.size());
}

double temporal_variance_mean(const FrameMatrix& m) {
  const std::size_t rows = m.rows(), cols = m.cols();
  std::vector<double> mean(cols, 0.0);
  for (std::size_t t = 0; t < rows; ++t)
    for (std::size_t c = 0; c < cols; ++c) mean[c] += m(t, c);
  for (auto& v : mean) v /= static_cast<double>(rows);
  std::vector<double> ss(cols, 0.0);
  for (std::size_t t = 0; t < rows; ++t)
    for (std::size_t c = 0; c < cols; ++c) {
      const double d = m(t, c) - mean[c];
      ss[c] += d * d;
    }
  double total = 0.0;
  for (double v : ss) total += v / static_cast<double>(rows);
  return total / static_cast<double>(cols);
}

struct Neighbour {
  std::string id;
  const FrameMatrix* frames;
  std::vector<double> flat;
  std::vector<std::vector<double>> columns;
};

std::vector<Neighbour> load_neighbours(const std::vector<std::string>& ids, const ReactionStore& gt) {
  std::vector<Neighbour> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto& seq = gt.at(id);
    out.push_back({id, &seq.frames, as_double(seq.frames), columns_of(seq.frames)});
  }
  return out;
}

}  // namespace

const ReactionSequence& ReactionStore::at(const std::string& id) const {
  auto it = refs_.find(id);
  if (it == refs_.end()) throw ValidationError("no real reaction stored for '" + id + "'");
  return *it->second;
}

ReactionStore ReactionStore::from_assignments(std::span<const SpeakerListenerAssignment> assignments) {
  ReactionStore store;
  for (const auto& a : assignments) store.add(a.id(), a.listener_gt);
  return store;
}

AppropriatenessScores score_appropriateness(const GenerationSet& gen, const AppropriatenessMap& map,
                                            const ReactionStore& gt, const MetricConfig& cfg,
                                            AppropriatenessParts parts) {
  const bool want_dist = parts != AppropriatenessParts::CorrOnly;
  const bool want_corr = parts != AppropriatenessParts::DistOnly;
  if (gen.candidates.empty()) throw ValidationError(gen.assignment_id + ": no candidates");
  const auto& ids = map.at(gen.assignment_id);
  if (ids.empty()) throw ValidationError(gen.assignment_id + ": empty appropriate set");
  const auto neighbours = load_neighbours(ids, gt);

  // FRCorr may exclude the assignment's own reaction when others are available.
  std::vector<bool> corr_eligible(neighbours.size(), true);
  if (cfg.gt_excludes_self_for_corr && neighbours.size() > 1)
    for (std::size_t k = 0; k < neighbours.size(); ++k)
      corr_eligible[k] = neighbours[k].id != gen.assignment_id;

  CompensatedSum dist_sum, corr_sum;
  std::vector<CompensatedSum> per_neighbour_corr(neighbours.size());
  for (const auto& cand : gen.candidates) {
    const auto flat = as_double(cand.frames);
    const auto cols = want_corr ? columns_of(cand.frames) : std::vector<std::vector<double>>{};
    double best_dist = std::numeric_limits<double>::infinity();
    double best_corr = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < neighbours.size(); ++k) {
      const auto& nb = neighbours[k];
      if (nb.frames->rows() != cand.frames.rows() || nb.frames->cols() != cand.frames.cols())
        throw ValidationError(gen.assignment_id + ": candidate is " +
                              std::to_string(cand.frames.rows()) + " frames but reaction '" + nb.id +
                              "' is " + std::to_string(nb.frames->rows()));
      if (want_dist)
        best_dist = std::min(best_dist, seqmetrics::dtw(flat, cand.frames.rows(), nb.flat,
                                                        nb.frames->rows(), cand.frames.cols(), cfg.dtw));
      if (!want_corr) continue;
      double corr = 0.0;
      for (std::size_t c = 0; c < cols.size(); ++c) corr += ccc(cols[c], nb.columns[c]);
      per_neighbour_corr[k].add(corr);
      if (corr_eligible[k]) best_corr = std::max(best_corr, corr);
    }
    dist_sum.add(best_dist);
    corr_sum.add(best_corr);
  }

  AppropriatenessScores out;
  const double m = static_cast<double>(gen.candidates.size());
  if (want_dist) out.fr_dist = dist_sum.value() / m;
  if (want_corr) out.fr_corr = corr_sum.value() / m;
  std::size_t best = 0;
  for (std::size_t k = 1; k < neighbours.size(); ++k)
    if (per_neighbour_corr[k].value() > per_neighbour_corr[best].value()) best = k;
  out.best_neighbor_id = neighbours[best].id;
  return out;
}

double fr_dist(const GenerationSet& gen, const AppropriatenessMap& map, const ReactionStore& gt,
               const MetricConfig& cfg) {
  return score_appropriateness(gen, map, gt, cfg, AppropriatenessParts::DistOnly).fr_dist;
}

double fr_corr(const GenerationSet& gen, const AppropriatenessMap& map, const ReactionStore& gt,
               const MetricConfig& cfg) {
  return score_appropriateness(gen, map, gt, cfg, AppropriatenessParts::CorrOnly).fr_corr;
}

double fr_div(const GenerationSet& gen) {
  const auto& cands = gen.candidates;
  if (cands.empty()) throw ValidationError(gen.assignment_id + ": no candidates");
  for (const auto& c : cands) require_same_shape(cands[0].frames, c.frames, "fr_div");
  if (cands.size() == 1) return 0.0;
  CompensatedSum sum;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < cands.size(); ++i)
    for (std::size_t j = i + 1; j < cands.size(); ++j, ++pairs)
      sum.add(mean_squared_difference(cands[i].frames, cands[j].frames));
  return sum.value() / static_cast<double>(pairs);
}

double fr_var(std::span<const GenerationSet> gens) {
  if (gens.empty()) throw ArgumentError("fr_var: no generation sets");
  CompensatedSum total;
  for (const auto& g : gens) {
    if (g.candidates.empty()) throw ValidationError(g.assignment_id + ": no candidates");
    CompensatedSum per_set;
    for (const auto& c : g.candidates) {
      if (c.frames.rows() == 0) throw ValidationError(g.assignment_id + ": empty candidate");
      per_set.add(temporal_variance_mean(c.frames));
    }
    total.add(per_set.value() / static_cast<double>(g.candidates.size()));
  }
  return total.value() / static_cast<double>(gens.size());
}

double fr_dvs(std::span<const GenerationSet> gens, DvsPairing pairing, std::size_t workers) {
  if (gens.size() < 2) throw ArgumentError("fr_dvs: need at least 2 generation sets");
  const std::size_t m = gens[0].candidates.size();
  if (m == 0) throw ValidationError(gens[0].assignment_id + ": no candidates");
  const FrameMatrix& ref = gens[0].candidates[0].frames;
  for (const auto& g : gens) {
    if (g.candidates.size() != m)
      throw ValidationError("fr_dvs: " + g.assignment_id + " has " + std::to_string(g.candidates.size()) +
                            " candidates, expected " + std::to_string(m));
    for (const auto& c : g.candidates) require_same_shape(ref, c.frames, "fr_dvs");
  }

  // Row sums over j > i, combined in index order so the result is independent of `workers`.
  const std::size_t n = gens.size();
  std::vector<double> row_sums(n, 0.0);
  parallel_for(n, workers, [&](std::size_t i) {
    CompensatedSum row;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (pairing == DvsPairing::ByCandidateIndex) {
        for (std::size_t k = 0; k < m; ++k)
          row.add(mean_squared_difference(gens[i].candidates[k].frames, gens[j].candidates[k].frames));
      } else {
        for (std::size_t k = 0; k < m; ++k)
          for (std::size_t l = 0; l < m; ++l)
            row.add(mean_squared_difference(gens[i].candidates[k].frames, gens[j].candidates[l].frames));
      }
    }
    row_sums[i] = row.value();
  });
  CompensatedSum total;
  for (double v : row_sums) total.add(v);
  const double per_pair = pairing == DvsPairing::ByCandidateIndex ? static_cast<double>(m)
                                                                  : static_cast<double>(m * m);
  return total.value() / (per_pair * static_cast<double>(n * (n - 1) / 2));
}

double fr_syn(const GenerationSet& gen, const SpeakerBehaviour& speaker, const MetricConfig& cfg) {
  const auto& facial = speaker.facial.frames;
  if (cfg.max_lag >= facial.rows())
    throw ArgumentError("fr_syn: max_lag " + std::to_string(cfg.max_lag) + " must be below T = " +
                        std::to_string(facial.rows()));
  if (gen.candidates.empty()) throw ValidationError(gen.assignment_id + ": no candidates");
  const auto speaker_cols = columns_of(facial);
  CompensatedSum sum;
  for (const auto& cand : gen.candidates) {
    require_same_shape(facial, cand.frames, "fr_syn");
    for (std::size_t c = 0; c < facial.cols(); ++c)
      sum.add(static_cast<double>(
          seqmetrics::tlcc_offset(speaker_cols[c], cand.frames.column(c), cfg.max_lag)));
  }
  return sum.value() / static_cast<double>(gen.candidates.size() * facial.cols());
}

namespace {

// Deterministic pooled Gaussian over all frames of `seqs`; per-sequence partial
// moments are computed in parallel and reduced in index order.
seqmetrics::GaussianSummary pooled_frames_gaussian(std::span<const FrameMatrix* const> seqs,
                                                   std::size_t workers) {
  if (seqs.empty()) throw ArgumentError("fr_rea: empty pool");
  const Eigen::Index dim = static_cast<Eigen::Index>(seqs[0]->cols());
  std::size_t count = 0;
  for (const auto* s : seqs) {
    if (static_cast<Eigen::Index>(s->cols()) != dim) throw ValidationError("fr_rea: channel mismatch in pool");
    count += s->rows();
  }
  if (count < 2) throw ArgumentError("fr_rea: need at least 2 samples per pool, got " + std::to_string(count));

  using RowMajor = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  auto view = [dim](const FrameMatrix* s) {
    return Eigen::Map<const RowMajor>(s->data().data(), static_cast<Eigen::Index>(s->rows()), dim);
  };

  std::vector<Eigen::VectorXd> sums(seqs.size());
  parallel_for(seqs.size(), workers, [&](std::size_t i) {
    sums[i] = view(seqs[i]).cast<double>().colwise().sum().transpose();
  });
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  for (const auto& s : sums) mean += s;
  mean /= static_cast<double>(count);

  std::vector<Eigen::MatrixXd> scatters(seqs.size());
  parallel_for(seqs.size(), workers, [&](std::size_t i) {
    Eigen::MatrixXd centered = view(seqs[i]).cast<double>().rowwise() - mean.transpose();
    scatters[i] = centered.transpose() * centered;
  });
  Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& s : scatters) scatter += s;
  return seqmetrics::gaussian_from_moments(mean, scatter, count);
}

seqmetrics::GaussianSummary external_gaussian(const std::filesystem::path& path) {
  const FrameMatrix m = io::read_matrix_binary(path);
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c)
      samples(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
  return seqmetrics::fit_gaussian(samples);
}

}  // namespace

double fr_rea(std::span<const GenerationSet> gens, std::span<const ReactionSequence* const> reference,
              const MetricConfig& cfg, std::size_t workers) {
  if (cfg.frechet_features == FrechetFeatures::External) {
    if (!cfg.external_features) throw ArgumentError("fr_rea: external features selected but no files given");
    return seqmetrics::frechet_distance(external_gaussian(cfg.external_features->generated),
                                        external_gaussian(cfg.external_features->reference));
  }
  std::vector<const FrameMatrix*> generated, real;
  for (const auto& g : gens)
    for (const auto& c : g.candidates) generated.push_back(&c.frames);
  for (const auto* r : reference) real.push_back(&r->frames);
  if (generated.empty() || real.empty()) throw ArgumentError("fr_rea: both pools must be non-empty");
  return seqmetrics::frechet_distance(pooled_frames_gaussian(generated, workers),
                                      pooled_frames_gaussian(real, workers));
}

double fr_rea(std::span<const GenerationSet> gens, std::span<const ReactionSequence> reference,
              const MetricConfig& cfg, std::size_t workers) {
  std::vector<const ReactionSequence*> refs;
  refs.reserve(reference.size());
  for (const auto& r : reference) refs.push_back(&r);
  return fr_rea(gens, std::span<const ReactionSequence* const>(refs), cfg, workers);
}

ReactionSequence binarize_aus(const ReactionSequence& seq, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw ArgumentError("binarize_aus: threshold must lie in (0,1)");
  ReactionSequence out = seq;
  const std::size_t aus = std::min(kNumAus, out.frames.cols());
  for (std::size_t t = 0; t < out.frames.rows(); ++t)
    for (std::size_t c = 0; c < aus; ++c) out.frames(t, c) = out.frames(t, c) >= threshold ? 1.0f : 0.0f;
  return out;
}

}  // namespace mafrg::eval
