/**
 * @file metrics.hpp
 * @brief Nine per-melody metrics over quantized melodies.
 *
 * All metrics are computed per note (not per step) and are deterministic:
 * entropy and scale statistics accumulate integer counts and sort before any
 * floating-point summation, so values are exactly invariant under pitch
 * transposition, which only permutes the underlying count multisets.
 *
 * A metric whose precondition fails (too few notes or bars) throws
 * StatsError from the direct call and is recorded as absent by
 * metricReport().
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "melotok/errors.hpp"
#include "melotok/melody.hpp"

namespace melotok {

enum MetricId {
  kMai,  // mean absolute interval between consecutive notes, semitones
  kHP,   // pitch entropy, bits
  kHPC,  // pitch class entropy, bits
  kSC,   // scale consistency: best in-scale rate over all roots and modes
  kMSD,  // standard deviation of the twelve major-scale rates
  kMD,   // mean note duration, beats
  kHD,   // duration entropy, bits
  kGC,   // groove consistency between adjacent bars
  kEBR,  // fraction of beats in which nothing sounds
  kMetricCount,
};

constexpr std::array<const char*, kMetricCount> kMetricNames = {
    "mai", "h_p", "h_pc", "sc", "msd", "md", "h_d", "gc", "ebr"};

/// Interval patterns in semitones from the root.
constexpr std::array<int, 7> kMajorScale = {0, 2, 4, 5, 7, 9, 11};
constexpr std::array<int, 7> kNaturalMinorScale = {0, 2, 3, 5, 7, 8, 10};
constexpr std::array<int, 7> kHarmonicMinorScale = {0, 2, 3, 5, 7, 8, 11};

namespace detail {

/// Shannon entropy in bits from integer counts. Counts are sorted first so
/// the result does not depend on their order of arrival.
inline double entropyBits(std::vector<std::int64_t> counts) {
  std::int64_t n = 0;
  for (std::int64_t c : counts) n += c;
  if (n <= 0) throw StatsError("entropy of an empty distribution");
  std::sort(counts.begin(), counts.end());
  double h = 0.0;
  for (std::int64_t c : counts) {
    if (c > 0) {
      h += (static_cast<double>(c) / static_cast<double>(n)) *
           std::log2(static_cast<double>(n) / static_cast<double>(c));
    }
  }
  return h;
}

template <typename Key, typename Fn>
std::vector<std::int64_t> noteCounts(const QuantizedMelody& q, Fn key_of) {
  std::map<Key, std::int64_t> counts;
  for (const QuantizedNote& note : q.notes) ++counts[key_of(note)];
  std::vector<std::int64_t> out;
  out.reserve(counts.size());
  for (const auto& [key, count] : counts) out.push_back(count);
  return out;
}

inline std::array<std::int64_t, 12> pitchClassCounts(const QuantizedMelody& q) {
  std::array<std::int64_t, 12> counts{};
  for (const QuantizedNote& note : q.notes) ++counts[note.pitch % 12];
  return counts;
}

/// Notes whose pitch class lies in `scale` rooted at `root`.
template <std::size_t N>
std::int64_t inScaleCount(const std::array<std::int64_t, 12>& class_counts,
                          int root, const std::array<int, N>& scale) {
  std::int64_t count = 0;
  for (int step : scale) count += class_counts[(root + step) % 12];
  return count;
}

inline void requireNotes(const QuantizedMelody& q, std::size_t minimum,
                         const char* metric) {
  if (q.notes.size() < minimum) {
    throw StatsError(std::string(metric) + " needs at least " +
                     std::to_string(minimum) + " notes, melody '" + q.id +
                     "' has " + std::to_string(q.notes.size()));
  }
}

}  // namespace detail

/// Mean absolute pitch interval between consecutive notes, in semitones.
inline double meanAbsoluteInterval(const QuantizedMelody& q) {
  detail::requireNotes(q, 2, "mai");
  std::int64_t sum = 0;
  for (std::size_t i = 1; i < q.notes.size(); ++i) {
    sum += std::abs(q.notes[i].pitch - q.notes[i - 1].pitch);
  }
  return static_cast<double>(sum) / static_cast<double>(q.notes.size() - 1);
}

inline double pitchEntropy(const QuantizedMelody& q) {
  detail::requireNotes(q, 1, "h_p");
  return detail::entropyBits(detail::noteCounts<int>(
      q, [](const QuantizedNote& n) { return n.pitch; }));
}

inline double pitchClassEntropy(const QuantizedMelody& q) {
  detail::requireNotes(q, 1, "h_pc");
  return detail::entropyBits(detail::noteCounts<int>(
      q, [](const QuantizedNote& n) { return n.pitch % 12; }));
}

inline double durationEntropy(const QuantizedMelody& q) {
  detail::requireNotes(q, 1, "h_d");
  return detail::entropyBits(detail::noteCounts<int>(
      q, [](const QuantizedNote& n) { return n.duration; }));
}

/// Highest fraction of notes contained in one diatonic scale, maximized over
/// all twelve roots in major and natural minor (optionally harmonic minor).
inline double scaleConsistency(const QuantizedMelody& q,
                               bool include_harmonic_minor = false) {
  detail::requireNotes(q, 1, "sc");
  const auto class_counts = detail::pitchClassCounts(q);
  std::int64_t best = 0;
  for (int root = 0; root < 12; ++root) {
    best = std::max(best,
                    detail::inScaleCount(class_counts, root, kMajorScale));
    best = std::max(
        best, detail::inScaleCount(class_counts, root, kNaturalMinorScale));
    if (include_harmonic_minor) {
      best = std::max(
          best, detail::inScaleCount(class_counts, root, kHarmonicMinorScale));
    }
  }
  return static_cast<double>(best) / static_cast<double>(q.notes.size());
}

/// Population standard deviation of the twelve major-scale rates. Uses the
/// integer identity var = (12*sum(k^2) - sum(k)^2) / (12n)^2 so a flat rate
/// profile yields exactly zero.
inline double majorScaleRateDeviation(const QuantizedMelody& q) {
  detail::requireNotes(q, 1, "msd");
  const auto class_counts = detail::pitchClassCounts(q);
  std::int64_t sum = 0;
  std::int64_t sum_sq = 0;
  for (int root = 0; root < 12; ++root) {
    const std::int64_t k = detail::inScaleCount(class_counts, root, kMajorScale);
    sum += k;
    sum_sq += k * k;
  }
  const std::int64_t spread = 12 * sum_sq - sum * sum;  // >= 0 exactly
  return std::sqrt(static_cast<double>(spread)) /
         (12.0 * static_cast<double>(q.notes.size()));
}

/// Mean note duration in beats.
inline double meanDuration(const QuantizedMelody& q) {
  detail::requireNotes(q, 1, "md");
  std::int64_t steps = 0;
  for (const QuantizedNote& note : q.notes) steps += note.duration;
  return static_cast<double>(steps) /
         (static_cast<double>(q.notes.size()) * static_cast<double>(q.dr));
}

/// Mean similarity of adjacent bars' onset patterns: 1 - hamming / bar.
inline double grooveConsistency(const QuantizedMelody& q) {
  const int bar = q.barSteps();
  const int bars = q.bars();
  if (bars < 2) {
    throw StatsError("gc needs at least 2 bars, melody '" + q.id + "' has " +
                     std::to_string(bars));
  }
  std::vector<char> onsets(static_cast<std::size_t>(q.total_steps), 0);
  for (const QuantizedNote& note : q.notes) {
    if (note.onset >= 0 && note.onset < q.total_steps) onsets[note.onset] = 1;
  }
  std::int64_t same = 0;
  for (int b = 0; b + 1 < bars; ++b) {
    for (int s = 0; s < bar; ++s) {
      same += onsets[b * bar + s] == onsets[(b + 1) * bar + s] ? 1 : 0;
    }
  }
  return static_cast<double>(same) /
         (static_cast<double>(bars - 1) * static_cast<double>(bar));
}

/// Fraction of beats during which no note sounds.
inline double emptyBeatRate(const QuantizedMelody& q) {
  const int beats = q.dr > 0 ? q.total_steps / q.dr : 0;
  if (beats <= 0) {
    throw StatsError("ebr needs at least one beat, melody '" + q.id +
                     "' spans none");
  }
  std::vector<char> sounding(static_cast<std::size_t>(beats), 0);
  for (const QuantizedNote& note : q.notes) {
    const int first = std::max(0, note.onset / q.dr);
    const int last =
        std::min(beats - 1, (note.onset + note.duration - 1) / q.dr);
    for (int b = first; b <= last; ++b) sounding[b] = 1;
  }
  std::int64_t empty = 0;
  for (char s : sounding) empty += s ? 0 : 1;
  return static_cast<double>(empty) / static_cast<double>(beats);
}

/// One melody's metric values; metrics whose preconditions fail stay absent.
struct MetricReport {
  std::string id;
  std::array<std::optional<double>, kMetricCount> values;
};

inline MetricReport metricReport(const QuantizedMelody& q,
                                 bool include_harmonic_minor = false) {
  MetricReport report;
  report.id = q.id;
  const std::size_t n = q.notes.size();
  if (n >= 2) report.values[kMai] = meanAbsoluteInterval(q);
  if (n >= 1) {
    report.values[kHP] = pitchEntropy(q);
    report.values[kHPC] = pitchClassEntropy(q);
    report.values[kSC] = scaleConsistency(q, include_harmonic_minor);
    report.values[kMSD] = majorScaleRateDeviation(q);
    report.values[kMD] = meanDuration(q);
    report.values[kHD] = durationEntropy(q);
  }
  if (q.bars() >= 2) report.values[kGC] = grooveConsistency(q);
  if (q.dr > 0 && q.total_steps / q.dr > 0) report.values[kEBR] = emptyBeatRate(q);
  return report;
}

}  // namespace melotok
