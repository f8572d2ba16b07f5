#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace mafrg {

inline constexpr std::size_t kNumAus = 15;
inline constexpr std::size_t kNumExpressions = 8;
inline constexpr std::size_t kNumAffect = 2;
inline constexpr std::size_t kNumChannels = kNumAus + kNumExpressions + kNumAffect;

inline constexpr int kStandardFps = 25;
inline constexpr std::size_t kStandardClipSeconds = 30;
inline constexpr std::size_t kStandardFrames = kStandardClipSeconds * kStandardFps;  // 750

enum class ChannelKind { ActionUnit, Expression, Affect };

/// Fixed 25-channel facial attribute layout: AUs, then expressions, then valence/arousal.
struct ChannelSchema {
  static constexpr std::array<std::string_view, kNumAus> au_names{
      "AU1", "AU2", "AU4", "AU6", "AU7", "AU9", "AU10", "AU12",
      "AU14", "AU15", "AU17", "AU23", "AU24", "AU25", "AU26"};
  static constexpr std::array<std::string_view, kNumExpressions> expression_names{
      "Neutral", "Happy", "Sad", "Surprise", "Fear", "Disgust", "Anger", "Contempt"};
  static constexpr std::array<std::string_view, kNumAffect> affect_names{"valence", "arousal"};

  static constexpr std::size_t valence_index = kNumAus + kNumExpressions;
  static constexpr std::size_t arousal_index = valence_index + 1;

  static constexpr std::string_view name(std::size_t channel) {
    if (channel < kNumAus) return au_names[channel];
    if (channel < kNumAus + kNumExpressions) return expression_names[channel - kNumAus];
    return affect_names[channel - kNumAus - kNumExpressions];
  }

  static constexpr ChannelKind kind(std::size_t channel) {
    if (channel < kNumAus) return ChannelKind::ActionUnit;
    if (channel < kNumAus + kNumExpressions) return ChannelKind::Expression;
    return ChannelKind::Affect;
  }

  static constexpr double lower_bound(std::size_t channel) {
    return kind(channel) == ChannelKind::Affect ? -1.0 : 0.0;
  }
  static constexpr double upper_bound(std::size_t) { return 1.0; }

  static std::optional<std::size_t> index_of(std::string_view name) {
    for (std::size_t c = 0; c < kNumChannels; ++c)
      if (ChannelSchema::name(c) == name) return c;
    return std::nullopt;
  }
};

}  // namespace mafrg
