#include "mafrg/core/validate.hpp"

#include <cmath>
#include <sstream>

#include "mafrg/core/error.hpp"

namespace mafrg {

std::string ValidationReport::summary(std::size_t max_items) const {
  std::ostringstream out;
  out << violations.size() << " violation(s)";
  std::size_t shown = 0;
  for (const auto& v : violations) {
    if (shown++ == max_items) {
      out << "; ...";
      break;
    }
    out << "; " << v.message;
  }
  return out.str();
}

ValidationReport validate_sequence(const ReactionSequence& seq, const ValidationOptions& opts) {
  ValidationReport report;
  const auto& m = seq.frames;

  if (m.cols() != kNumChannels) {
    report.violations.push_back({ViolationKind::Shape, std::nullopt, std::nullopt,
                                 "expected " + std::to_string(kNumChannels) + " channels, got " +
                                     std::to_string(m.cols())});
    return report;
  }
  if (m.rows() == 0) {
    report.violations.push_back({ViolationKind::Shape, std::nullopt, std::nullopt,
                                 "sequence has no frames"});
  } else if (opts.expected_frames && m.rows() != *opts.expected_frames) {
    report.violations.push_back({ViolationKind::Shape, std::nullopt, std::nullopt,
                                 "expected " + std::to_string(*opts.expected_frames) +
                                     " frames, got " + std::to_string(m.rows())});
  }

  for (std::size_t t = 0; t < m.rows(); ++t) {
    for (std::size_t c = 0; c < kNumChannels; ++c) {
      const float v = m(t, c);
      const std::string where =
          "frame " + std::to_string(t) + ", channel " + std::string(ChannelSchema::name(c));
      if (!std::isfinite(v)) {
        report.violations.push_back({ViolationKind::NonFinite, t, c, "non-finite value at " + where});
      } else if (v < ChannelSchema::lower_bound(c) || v > ChannelSchema::upper_bound(c)) {
        std::ostringstream msg;
        msg << "value " << v << " outside [" << ChannelSchema::lower_bound(c) << ","
            << ChannelSchema::upper_bound(c) << "] at " << where;
        report.violations.push_back({ViolationKind::Range, t, c, msg.str()});
      }
    }
  }
  return report;
}

void require_valid(const ReactionSequence& seq, const ValidationOptions& opts) {
  auto report = validate_sequence(seq, opts);
  if (!report.ok())
    throw ValidationError((seq.clip_id.empty() ? std::string("sequence") : seq.clip_id) + ": " +
                          report.summary());
}

}  // namespace mafrg
