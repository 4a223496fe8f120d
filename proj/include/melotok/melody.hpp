/**
 * @file melody.hpp
 * @brief Monophonic melody model: tick-level notes, validation, grid
 *        quantization and transposition.
 *
 * A Melody stores notes in MIDI ticks at a given ticks-per-quarter-note
 * resolution. quantize() converts it to a QuantizedMelody whose notes live on
 * a step grid of `dr` steps per beat (so a 4/4 bar spans 4 * dr steps).
 */

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "melotok/errors.hpp"

namespace melotok {

constexpr int kMinPitch = 0;
constexpr int kMaxPitch = 127;

/// One note in ticks. Duration must stay positive for a melody to be valid.
struct Note {
  std::int64_t onset = 0;
  std::int64_t duration = 0;
  int pitch = 0;

  bool operator==(const Note&) const = default;
};

/// A monophonic melody in ticks. `meter` is carried metadata from the source
/// corpus; it plays no role in timing.
struct Melody {
  std::string id;
  int tpqn = 480;
  std::optional<std::string> meter;
  std::vector<Note> notes;

  bool operator==(const Melody&) const = default;
};

/// One note on the step grid.
struct QuantizedNote {
  int onset = 0;
  int duration = 0;
  int pitch = 0;

  bool operator==(const QuantizedNote&) const = default;
};

/// A melody on a step grid with `dr` steps per beat. total_steps is always a
/// whole number of 4-beat bars. `id` is a carrier label, not content.
struct QuantizedMelody {
  std::string id;
  int dr = 4;
  std::vector<QuantizedNote> notes;
  int total_steps = 0;

  int barSteps() const { return 4 * dr; }
  int bars() const { return dr > 0 ? total_steps / (4 * dr) : 0; }

  /// Content equality; the id label is deliberately ignored.
  bool operator==(const QuantizedMelody& other) const {
    return dr == other.dr && total_steps == other.total_steps &&
           notes == other.notes;
  }
};

/// A broken melody rule. `note_index` is npos for melody-level rules.
struct RuleViolation {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t note_index = npos;
  std::string rule;
};

/// Checks tpqn, note ranges, onset ordering and monophony. Returns every
/// violation found; an empty result means the melody is valid.
inline std::vector<RuleViolation> validate(const Melody& melody) {
  std::vector<RuleViolation> violations;
  if (melody.tpqn <= 0) {
    violations.push_back({RuleViolation::npos, "tpqn"});
  }
  for (std::size_t i = 0; i < melody.notes.size(); ++i) {
    const Note& note = melody.notes[i];
    if (note.onset < 0) {
      violations.push_back({i, "onset"});
    }
    if (note.duration <= 0) {
      violations.push_back({i, "duration"});
    }
    if (note.pitch < kMinPitch || note.pitch > kMaxPitch) {
      violations.push_back({i, "pitch"});
    }
    if (i > 0) {
      const Note& prev = melody.notes[i - 1];
      if (note.onset < prev.onset) {
        violations.push_back({i, "order"});
      } else if (prev.onset + prev.duration > note.onset) {
        violations.push_back({i, "overlap"});
      }
    }
  }
  return violations;
}

inline bool isValid(const Melody& melody) { return validate(melody).empty(); }

namespace detail {

/// Truncates every note that overlaps its successor at the successor's onset
/// and drops notes whose duration became non-positive. Notes must already be
/// sorted by onset.
template <typename NoteT>
void enforceMonophonyInPlace(std::vector<NoteT>& notes) {
  for (std::size_t i = 0; i + 1 < notes.size(); ++i) {
    if (notes[i].onset + notes[i].duration > notes[i + 1].onset) {
      notes[i].duration = notes[i + 1].onset - notes[i].onset;
    }
  }
  std::erase_if(notes, [](const NoteT& n) { return n.duration <= 0; });
}

/// Rounds num / den to the nearest integer, halves rounding up.
/// Both arguments must be non-negative and den positive.
inline std::int64_t roundHalfUp(std::int64_t num, std::int64_t den) {
  return (2 * num + den) / (2 * den);
}

}  // namespace detail

/// Resolves overlaps so at most one note sounds at any time. Earlier notes
/// are truncated at the next onset rather than deleted, which preserves the
/// onset pattern; notes squeezed to nothing are dropped.
inline Melody enforceMonophony(Melody melody) {
  detail::enforceMonophonyInPlace(melody.notes);
  return melody;
}

/// Shifts every pitch by `semitones`. Throws RangeError if any shifted pitch
/// leaves the MIDI range; callers decide how to handle that.
inline Melody transposed(const Melody& melody, int semitones) {
  Melody out = melody;
  for (Note& note : out.notes) {
    note.pitch += semitones;
    if (note.pitch < kMinPitch || note.pitch > kMaxPitch) {
      throw RangeError("pitch " + std::to_string(note.pitch) +
                       " out of range after transposing '" + melody.id +
                       "' by " + std::to_string(semitones));
    }
  }
  return out;
}

/// Snaps a melody to a grid of `dr` steps per beat. Onsets and offsets are
/// rounded to the nearest step independently (ties round up) and the note
/// duration is their difference, so short off-grid notes can survive rounding
/// even when tpqn is not a multiple of dr. Notes reduced to nothing are
/// dropped, monophony is re-enforced, and total_steps is the last offset
/// rounded up to a whole bar (at least one bar).
inline QuantizedMelody quantize(const Melody& melody, int dr) {
  if (dr <= 0) {
    throw ConfigError("dr must be positive, got " + std::to_string(dr));
  }
  if (melody.tpqn <= 0) {
    throw ConfigError("tpqn must be positive, got " +
                      std::to_string(melody.tpqn));
  }

  QuantizedMelody out;
  out.id = melody.id;
  out.dr = dr;
  for (const Note& note : melody.notes) {
    const std::int64_t onset_steps =
        detail::roundHalfUp(note.onset * dr, melody.tpqn);
    const std::int64_t offset_steps =
        detail::roundHalfUp((note.onset + note.duration) * dr, melody.tpqn);
    if (offset_steps - onset_steps <= 0) {
      continue;
    }
    out.notes.push_back({static_cast<int>(onset_steps),
                         static_cast<int>(offset_steps - onset_steps),
                         note.pitch});
  }
  detail::enforceMonophonyInPlace(out.notes);

  const int bar = out.barSteps();
  int last_offset = 0;
  if (!out.notes.empty()) {
    last_offset = out.notes.back().onset + out.notes.back().duration;
  }
  const int bars = std::max(1, static_cast<int>((last_offset + bar - 1) / bar));
  out.total_steps = bars * bar;
  return out;
}

}  // namespace melotok
