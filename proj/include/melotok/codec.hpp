/**
 * @file codec.hpp
 * @brief Melody <-> token sequence conversion and sequence validation.
 *
 * Encoding walks a quantized melody and emits, per note, its pitch tokens
 * followed by its duration tokens; every silent gap from step 0 up to the
 * last note offset becomes an explicit REST unit, so durations alone account
 * for all elapsed time. When the configuration has a grid (pr >= 1) the full
 * dense grid for every bar of total_steps is emitted as well. All tokens are
 * then stable-sorted by (step time, kind rank) with bar marks first, grid
 * positions second, pitch-bearing units third and durations last; duration
 * tokens inherit their note's onset time, which is why a long note's
 * durations can precede grid marks that lie inside the note.
 *
 * Decoding trusts only the note-based timing: PAD, BAR and POS tokens are
 * dropped and a running clock advances by the duration sum of each unit.
 */

#pragma once

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "melotok/errors.hpp"
#include "melotok/melody.hpp"
#include "melotok/vocabulary.hpp"

namespace melotok {

/// A token sequence together with the configuration that spells it.
struct TokenSequence {
  EncodingConfig config;
  std::vector<Token> tokens;

  bool operator==(const TokenSequence&) const = default;
};

/// Space-separated canonical spelling of a sequence.
inline std::string sequenceText(const TokenSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokenText(seq.tokens[i]);
  }
  return out;
}

namespace detail {

/// Sort rank of a token kind within one time step.
inline int kindRank(TokenKind kind) {
  switch (kind) {
    case TokenKind::kBar: return 0;
    case TokenKind::kGridPos: return 1;
    case TokenKind::kDuration: return 3;
    default: return 2;  // pitch-bearing units, including REST
  }
}

inline bool isUnitStart(TokenKind kind) {
  return kind == TokenKind::kPitch || kind == TokenKind::kPitchClass ||
         kind == TokenKind::kRest;
}

inline bool isGridKind(TokenKind kind) {
  return kind == TokenKind::kBar || kind == TokenKind::kGridPos;
}

inline void checkEncodable(const QuantizedMelody& q) {
  const int bar = q.barSteps();
  if (q.total_steps < 0 || q.total_steps % bar != 0) {
    throw RangeError("total_steps " + std::to_string(q.total_steps) +
                     " is not a whole number of " + std::to_string(bar) +
                     "-step bars");
  }
  int last_offset = 0;
  for (const QuantizedNote& note : q.notes) {
    if (note.duration <= 0 || note.onset < last_offset ||
        note.pitch < kMinPitch || note.pitch > kMaxPitch) {
      throw RangeError("melody '" + q.id + "' breaks quantized invariants");
    }
    last_offset = note.onset + note.duration;
  }
  if (last_offset > q.total_steps) {
    throw RangeError("melody '" + q.id + "' overruns its declared bars");
  }
}

}  // namespace detail

/// Encodes a quantized melody under the vocabulary's configuration.
/// The melody must use the same dr as the configuration.
inline TokenSequence encode(const QuantizedMelody& q, const Vocabulary& vocab) {
  const EncodingConfig& config = vocab.config();
  if (q.dr != config.dr) {
    throw ConfigError("melody dr " + std::to_string(q.dr) +
                      " does not match configured dr " +
                      std::to_string(config.dr));
  }
  detail::checkEncodable(q);

  struct Timed {
    int time;
    int rank;
    Token token;
  };
  std::vector<Timed> timed;

  const auto pushUnit = [&](int time, const std::vector<Token>& pitch_part,
                            int steps) {
    for (const Token& t : pitch_part) timed.push_back({time, 2, t});
    for (const Token& t : vocab.durationTokens(steps)) {
      timed.push_back({time, 3, t});
    }
  };

  int clock = 0;
  for (const QuantizedNote& note : q.notes) {
    if (note.onset > clock) {
      pushUnit(clock, {{TokenKind::kRest, 0}}, note.onset - clock);
    }
    pushUnit(note.onset, vocab.pitchTokens(note.pitch), note.duration);
    clock = note.onset + note.duration;
  }
  if (q.notes.empty() && q.total_steps > 0) {
    // An all-silent melody is one big rest; without it the duration clock
    // could not recover total_steps.
    pushUnit(0, {{TokenKind::kRest, 0}}, q.total_steps);
  }

  if (config.pr >= 1) {
    const int bar = config.barSteps();
    const int spacing = config.gridSpacing();
    for (int start = 0; start < q.total_steps; start += bar) {
      if (config.pr == 1) {
        timed.push_back({start, 0, {TokenKind::kBar, 0}});
      } else if (config.pc == PositionComplexity::kSingle) {
        timed.push_back({start, 0, {TokenKind::kBar, 0}});
        for (int k = 0; k < config.pr; ++k) {
          timed.push_back({start + k * spacing, 1, {TokenKind::kGridPos, -1}});
        }
      } else {
        for (int k = 0; k < config.pr; ++k) {
          timed.push_back({start + k * spacing, 1, {TokenKind::kGridPos, k}});
        }
      }
    }
  }

  std::stable_sort(timed.begin(), timed.end(),
                   [](const Timed& a, const Timed& b) {
                     return a.time != b.time ? a.time < b.time
                                             : a.rank < b.rank;
                   });

  TokenSequence seq;
  seq.config = config;
  seq.tokens.reserve(timed.size());
  for (const Timed& t : timed) seq.tokens.push_back(t.token);
  return seq;
}

/// Reconstructs the melody a sequence describes. Only note-based timing is
/// trusted: PAD and grid tokens are skipped, each pitch or rest unit must be
/// followed by at least one duration token, and consecutive duration tokens
/// extend the same unit. total_steps is the final clock rounded up to a
/// whole bar. Throws SequenceError on the first grammar break.
inline QuantizedMelody decode(const TokenSequence& seq,
                              const std::string& id = "") {
  seq.config.validate();

  QuantizedMelody out;
  out.id = id;
  out.dr = seq.config.dr;

  // Positions of the tokens the decoder actually reads.
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const TokenKind kind = seq.tokens[i].kind;
    if (kind != TokenKind::kPad && !detail::isGridKind(kind)) kept.push_back(i);
  }

  int clock = 0;
  std::size_t i = 0;
  while (i < kept.size()) {
    const Token& head = seq.tokens[kept[i]];
    const std::size_t head_index = kept[i];
    bool is_rest = false;
    int pitch = 0;
    switch (head.kind) {
      case TokenKind::kRest:
        is_rest = true;
        ++i;
        break;
      case TokenKind::kPitch:
        pitch = head.value;
        ++i;
        break;
      case TokenKind::kPitchClass: {
        if (i + 1 >= kept.size() ||
            seq.tokens[kept[i + 1]].kind != TokenKind::kOctave) {
          throw SequenceError(head_index,
                              "pitch class token not followed by an octave token");
        }
        pitch = head.value + 12 * seq.tokens[kept[i + 1]].value;
        if (pitch > kMaxPitch) {
          throw SequenceError(head_index, "pitch " + std::to_string(pitch) +
                                              " out of range");
        }
        i += 2;
        break;
      }
      case TokenKind::kOctave:
        throw SequenceError(head_index,
                            "octave token without a preceding pitch class");
      case TokenKind::kDuration:
        throw SequenceError(head_index,
                            "duration token without a preceding pitch unit");
      default:
        throw SequenceError(head_index, "unexpected token");
    }

    int steps = 0;
    while (i < kept.size() &&
           seq.tokens[kept[i]].kind == TokenKind::kDuration) {
      steps += seq.tokens[kept[i]].value;
      ++i;
    }
    if (steps <= 0) {
      throw SequenceError(head_index,
                          "pitch unit with no following duration token");
    }
    if (!is_rest) out.notes.push_back({clock, steps, pitch});
    clock += steps;
  }

  const int bar = out.barSteps();
  out.total_steps = (clock + bar - 1) / bar * bar;
  return out;
}

/// One problem found by validateSequence. `token_index` points into the
/// sequence, or npos when something expected is missing entirely.
struct SequenceIssue {
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t token_index = npos;
  std::string message;
};

/**
 * Collects every grammar break and, for grid configurations, every
 * disagreement between the grid tokens present and the dense grid that the
 * duration-accumulated clock calls for. The grid comparison is a minimal
 * edit alignment, so one dropped POS is reported once instead of cascading.
 * encode() output never produces issues.
 */
inline std::vector<SequenceIssue> validateSequence(const TokenSequence& seq) {
  seq.config.validate();
  std::vector<SequenceIssue> issues;

  // Grammar pass, mirroring decode() but collecting and recovering.
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    const TokenKind kind = seq.tokens[i].kind;
    if (kind != TokenKind::kPad && !detail::isGridKind(kind)) kept.push_back(i);
  }
  int clock = 0;
  std::size_t i = 0;
  while (i < kept.size()) {
    const Token& head = seq.tokens[kept[i]];
    const std::size_t head_index = kept[i];
    bool unit_ok = true;
    if (head.kind == TokenKind::kDuration) {
      issues.push_back({head_index, "duration token without a preceding pitch unit"});
      ++i;
      continue;
    }
    if (head.kind == TokenKind::kOctave) {
      issues.push_back({head_index, "octave token without a preceding pitch class"});
      ++i;
      continue;
    }
    if (head.kind == TokenKind::kPitchClass) {
      if (i + 1 < kept.size() &&
          seq.tokens[kept[i + 1]].kind == TokenKind::kOctave) {
        const int pitch = head.value + 12 * seq.tokens[kept[i + 1]].value;
        if (pitch > kMaxPitch) {
          issues.push_back({head_index, "pitch out of range"});
          unit_ok = false;
        }
        i += 2;
      } else {
        issues.push_back(
            {head_index, "pitch class token not followed by an octave token"});
        ++i;
        continue;
      }
    } else {
      ++i;  // kPitch or kRest
    }
    int steps = 0;
    while (i < kept.size() &&
           seq.tokens[kept[i]].kind == TokenKind::kDuration) {
      steps += seq.tokens[kept[i]].value;
      ++i;
    }
    if (steps <= 0) {
      issues.push_back({head_index, "pitch unit with no following duration token"});
    } else if (unit_ok) {
      clock += steps;
    }
  }

  if (seq.config.pr < 1) return issues;

  // Grid pass: align the grid tokens present against the dense grid implied
  // by the clock.
  const int bar = seq.config.barSteps();
  const int bars = clock > 0 ? (clock + bar - 1) / bar : 0;

  std::vector<std::size_t> actual;  // indices of grid tokens
  for (std::size_t k = 0; k < seq.tokens.size(); ++k) {
    if (detail::isGridKind(seq.tokens[k].kind)) actual.push_back(k);
  }
  std::vector<Token> expected;
  for (int b = 0; b < bars; ++b) {
    if (seq.config.pr == 1) {
      expected.push_back({TokenKind::kBar, 0});
    } else if (seq.config.pc == PositionComplexity::kSingle) {
      expected.push_back({TokenKind::kBar, 0});
      for (int k = 0; k < seq.config.pr; ++k) {
        expected.push_back({TokenKind::kGridPos, -1});
      }
    } else {
      for (int k = 0; k < seq.config.pr; ++k) {
        expected.push_back({TokenKind::kGridPos, k});
      }
    }
  }

  const std::size_t n = actual.size();
  const std::size_t m = expected.size();
  if (n * m > std::size_t{4000000}) {
    // Too large for a full alignment; report the aggregate disagreement.
    if (n != m) {
      issues.push_back({SequenceIssue::npos,
                        "grid token count " + std::to_string(n) +
                            " disagrees with the " + std::to_string(m) +
                            " tokens of a dense " + std::to_string(bars) +
                            "-bar grid"});
    }
    return issues;
  }

  // Levenshtein alignment, then backtrace to name each edit.
  std::vector<std::vector<int>> dp(m + 1, std::vector<int>(n + 1, 0));
  for (std::size_t e = 0; e <= m; ++e) dp[e][0] = static_cast<int>(e);
  for (std::size_t a = 0; a <= n; ++a) dp[0][a] = static_cast<int>(a);
  for (std::size_t e = 1; e <= m; ++e) {
    for (std::size_t a = 1; a <= n; ++a) {
      const bool match = expected[e - 1] == seq.tokens[actual[a - 1]];
      dp[e][a] = std::min({dp[e - 1][a - 1] + (match ? 0 : 1),
                           dp[e - 1][a] + 1, dp[e][a - 1] + 1});
    }
  }
  std::size_t e = m;
  std::size_t a = n;
  std::vector<SequenceIssue> grid_issues;
  while (e > 0 || a > 0) {
    if (e > 0 && a > 0 &&
        dp[e][a] == dp[e - 1][a - 1] +
                        (expected[e - 1] == seq.tokens[actual[a - 1]] ? 0 : 1)) {
      if (!(expected[e - 1] == seq.tokens[actual[a - 1]])) {
        grid_issues.push_back({actual[a - 1],
                               "grid token '" +
                                   tokenText(seq.tokens[actual[a - 1]]) +
                                   "' where '" + tokenText(expected[e - 1]) +
                                   "' was expected"});
      }
      --e;
      --a;
    } else if (a > 0 && dp[e][a] == dp[e][a - 1] + 1) {
      grid_issues.push_back({actual[a - 1],
                             "grid token '" +
                                 tokenText(seq.tokens[actual[a - 1]]) +
                                 "' does not belong to the dense grid"});
      --a;
    } else {
      grid_issues.push_back({SequenceIssue::npos,
                             "missing grid token '" +
                                 tokenText(expected[e - 1]) + "'"});
      --e;
    }
  }
  issues.insert(issues.end(), grid_issues.rbegin(), grid_issues.rend());
  return issues;
}

}  // namespace melotok
