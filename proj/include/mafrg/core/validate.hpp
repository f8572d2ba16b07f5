#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mafrg/core/types.hpp"

namespace mafrg {

enum class ViolationKind { Shape, Range, NonFinite };

struct Violation {
  ViolationKind kind;
  std::optional<std::size_t> frame;
  std::optional<std::size_t> channel;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }
  std::string summary(std::size_t max_items = 10) const;
};

struct ValidationOptions {
  /// Required frame count; std::nullopt accepts any T >= 1 (synthetic mode).
  std::optional<std::size_t> expected_frames = kStandardFrames;
};

/// Checks shape, per-channel range and finiteness. Never throws.
ValidationReport validate_sequence(const ReactionSequence& seq, const ValidationOptions& opts = {});

/// Throws ValidationError carrying the report summary when `seq` is invalid.
void require_valid(const ReactionSequence& seq, const ValidationOptions& opts = {});

}  // namespace mafrg
