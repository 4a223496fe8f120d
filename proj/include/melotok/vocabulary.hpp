/**
 * @file vocabulary.hpp
 * @brief Encoding configuration and the token vocabulary it induces.
 *
 * An EncodingConfig picks four knobs: how pitch is spelled (absolute number
 * or pitch class plus octave), how the bar grid is spelled (a shared POS
 * marker, indexed POS0..POSn markers, or none), how many grid positions a bar
 * carries (pr) and how many steps one beat carries (dr). The Vocabulary
 * enumerates every legal token for a config and assigns stable integer ids:
 * PAD is always id 0, followed by the grid tokens, the pitch family and the
 * duration tokens.
 */

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "melotok/errors.hpp"
#include "melotok/melody.hpp"

namespace melotok {

enum class PitchMode { kNumber, kClassOctave };

enum class PositionComplexity { kSingle, kMultiple, kUndefined };

/// Legal values for pr; 0 disables the grid, 1 keeps only bar marks.
constexpr std::array<int, 9> kPositionResolutions = {0, 1, 4, 8, 12, 16, 32, 48, 64};

/// Legal values for dr (steps per beat).
constexpr std::array<int, 4> kDurationResolutions = {4, 8, 12, 16};

struct EncodingConfig {
  PitchMode pitch = PitchMode::kNumber;
  PositionComplexity pc = PositionComplexity::kSingle;
  int pr = 16;
  int dr = 4;

  bool operator==(const EncodingConfig&) const = default;

  int barSteps() const { return 4 * dr; }

  /// Steps between adjacent grid positions; only meaningful for pr >= 1.
  int gridSpacing() const { return barSteps() / pr; }

  /// Throws ConfigError unless all four knobs are mutually consistent.
  void validate() const {
    bool dr_ok = false;
    for (int v : kDurationResolutions) dr_ok = dr_ok || v == dr;
    if (!dr_ok) {
      throw ConfigError("dr must be one of 4, 8, 12, 16; got " +
                        std::to_string(dr));
    }
    bool pr_ok = false;
    for (int v : kPositionResolutions) pr_ok = pr_ok || v == pr;
    if (!pr_ok) {
      throw ConfigError("pr must be one of 0, 1, 4, 8, 12, 16, 32, 48, 64; got " +
                        std::to_string(pr));
    }
    if (pr > 4 * dr) {
      throw ConfigError("pr " + std::to_string(pr) + " exceeds the " +
                        std::to_string(4 * dr) + " steps of a bar at dr " +
                        std::to_string(dr));
    }
    if (pr > 1 && (4 * dr) % pr != 0) {
      throw ConfigError("pr " + std::to_string(pr) +
                        " does not divide the bar of " + std::to_string(4 * dr) +
                        " steps");
    }
    if ((pc == PositionComplexity::kUndefined) != (pr <= 1)) {
      throw ConfigError(
          "position complexity must be undefined exactly when pr <= 1");
    }
  }
};

inline const char* pitchModeName(PitchMode mode) {
  return mode == PitchMode::kNumber ? "number" : "class-octave";
}

inline const char* positionComplexityName(PositionComplexity pc) {
  switch (pc) {
    case PositionComplexity::kSingle: return "single";
    case PositionComplexity::kMultiple: return "multiple";
    default: return "undefined";
  }
}

inline PitchMode parsePitchMode(const std::string& text) {
  if (text == "number") return PitchMode::kNumber;
  if (text == "class-octave") return PitchMode::kClassOctave;
  throw ConfigError("unknown pitch mode '" + text + "'");
}

inline PositionComplexity parsePositionComplexity(const std::string& text) {
  if (text == "single") return PositionComplexity::kSingle;
  if (text == "multiple") return PositionComplexity::kMultiple;
  if (text == "undefined") return PositionComplexity::kUndefined;
  throw ConfigError("unknown position complexity '" + text + "'");
}

enum class TokenKind : std::uint8_t {
  kPad,
  kBar,
  kGridPos,
  kPitch,
  kPitchClass,
  kOctave,
  kRest,
  kDuration,
};

/// One vocabulary entry. `value` carries the kind-specific payload: grid
/// index (-1 for the shared POS marker), MIDI pitch, pitch class, octave or
/// duration steps; it is 0 for PAD, BAR and REST.
struct Token {
  TokenKind kind = TokenKind::kPad;
  int value = 0;

  bool operator==(const Token&) const = default;
};

/// Flat pitch class spellings, index 0 = C.
constexpr std::array<const char*, 12> kPitchClassNames = {
    "C", "Db", "D", "Eb", "E", "F", "Gb", "G", "Ab", "A", "Bb", "B"};

constexpr int kOctaveCount = kMaxPitch / 12 + 1;  // o0..o10

/// Canonical spelling of a token, independent of any vocabulary.
inline std::string tokenText(const Token& token) {
  switch (token.kind) {
    case TokenKind::kPad: return "PAD";
    case TokenKind::kBar: return "BAR";
    case TokenKind::kGridPos:
      return token.value < 0 ? "POS" : "POS" + std::to_string(token.value);
    case TokenKind::kPitch: return "p" + std::to_string(token.value);
    case TokenKind::kPitchClass: return kPitchClassNames.at(token.value);
    case TokenKind::kOctave: return "o" + std::to_string(token.value);
    case TokenKind::kRest: return "REST";
    case TokenKind::kDuration: return "d" + std::to_string(token.value);
  }
  throw LookupError("unspellable token kind");
}

/// Parses a canonical spelling. Throws LookupError for anything that is not
/// the exact spelling of some token (of any configuration).
inline Token tokenFromText(const std::string& text) {
  const auto parsed = [&]() -> Token {
    if (text == "PAD") return {TokenKind::kPad, 0};
    if (text == "BAR") return {TokenKind::kBar, 0};
    if (text == "REST") return {TokenKind::kRest, 0};
    if (text == "POS") return {TokenKind::kGridPos, -1};
    for (int c = 0; c < 12; ++c) {
      if (text == kPitchClassNames[c]) return {TokenKind::kPitchClass, c};
    }
    if (text.size() >= 2) {
      TokenKind kind;
      std::size_t digits_at = 1;
      switch (text[0]) {
        case 'p': kind = TokenKind::kPitch; break;
        case 'o': kind = TokenKind::kOctave; break;
        case 'd': kind = TokenKind::kDuration; break;
        case 'P': kind = TokenKind::kGridPos; digits_at = 3; break;
        default: throw LookupError("unknown token '" + text + "'");
      }
      int value = 0;
      for (std::size_t i = digits_at; i < text.size(); ++i) {
        if (text[i] < '0' || text[i] > '9' || i - digits_at >= 4) {
          throw LookupError("unknown token '" + text + "'");
        }
        value = value * 10 + (text[i] - '0');
      }
      if (text.size() == digits_at) {
        throw LookupError("unknown token '" + text + "'");
      }
      return {kind, value};
    }
    throw LookupError("unknown token '" + text + "'");
  }();
  // Reject non-canonical spellings such as "p007" and payloads no
  // configuration can produce.
  const auto inRange = [&]() {
    switch (parsed.kind) {
      case TokenKind::kPitch: return parsed.value <= kMaxPitch;
      case TokenKind::kOctave: return parsed.value < kOctaveCount;
      case TokenKind::kDuration:
        return parsed.value >= 1 && parsed.value <= 4 * 16;
      case TokenKind::kGridPos: return parsed.value < 64;
      default: return true;
    }
  };
  if (tokenText(parsed) != text || !inRange()) {
    throw LookupError("unknown token '" + text + "'");
  }
  return parsed;
}

/**
 * The closed token set of one configuration, with a stable id order:
 * PAD, grid tokens, pitch family, durations. Sizes come out as
 * 1 + grid + (129 | 24) + 4 * dr, where grid is 0, 1, 2 or pr depending on
 * the position settings.
 */
class Vocabulary {
 public:
  static constexpr int kPadId = 0;

  explicit Vocabulary(const EncodingConfig& config) : config_(config) {
    config.validate();
    add({TokenKind::kPad, 0});
    if (config.pr == 1) {
      add({TokenKind::kBar, 0});
    } else if (config.pr > 1) {
      if (config.pc == PositionComplexity::kSingle) {
        add({TokenKind::kBar, 0});
        add({TokenKind::kGridPos, -1});
      } else {
        for (int k = 0; k < config.pr; ++k) add({TokenKind::kGridPos, k});
      }
    }
    if (config.pitch == PitchMode::kNumber) {
      for (int p = kMinPitch; p <= kMaxPitch; ++p) add({TokenKind::kPitch, p});
    } else {
      for (int c = 0; c < 12; ++c) add({TokenKind::kPitchClass, c});
      for (int o = 0; o < kOctaveCount; ++o) add({TokenKind::kOctave, o});
    }
    add({TokenKind::kRest, 0});
    for (int s = 1; s <= config.barSteps(); ++s) add({TokenKind::kDuration, s});
  }

  const EncodingConfig& config() const { return config_; }

  int size() const { return static_cast<int>(tokens_.size()); }

  const Token& tokenAt(int id) const {
    if (id < 0 || id >= size()) {
      throw RangeError("token id " + std::to_string(id) +
                       " outside vocabulary of size " + std::to_string(size()));
    }
    return tokens_[static_cast<std::size_t>(id)];
  }

  const std::string& textAt(int id) const {
    tokenAt(id);
    return texts_[static_cast<std::size_t>(id)];
  }

  bool contains(const std::string& text) const { return ids_.count(text) > 0; }

  int idOf(const std::string& text) const {
    const auto it = ids_.find(text);
    if (it == ids_.end()) {
      throw LookupError("token '" + text + "' is not in this vocabulary");
    }
    return it->second;
  }

  int idOf(const Token& token) const { return idOf(tokenText(token)); }

  /// Tokens spelling one pitch: [p<n>] or [class, octave].
  std::vector<Token> pitchTokens(int pitch) const {
    if (pitch < kMinPitch || pitch > kMaxPitch) {
      throw RangeError("pitch " + std::to_string(pitch) + " out of range");
    }
    if (config_.pitch == PitchMode::kNumber) {
      return {{TokenKind::kPitch, pitch}};
    }
    return {{TokenKind::kPitchClass, pitch % 12},
            {TokenKind::kOctave, pitch / 12}};
  }

  /// Greedy split of a step count into duration tokens: whole-bar tokens
  /// while more than a bar remains, then one token for the remainder.
  std::vector<Token> durationTokens(int steps) const {
    if (steps < 1) {
      throw RangeError("duration of " + std::to_string(steps) + " steps");
    }
    const int bar = config_.barSteps();
    std::vector<Token> out;
    while (steps > bar) {
      out.push_back({TokenKind::kDuration, bar});
      steps -= bar;
    }
    out.push_back({TokenKind::kDuration, steps});
    return out;
  }

 private:
  void add(const Token& token) {
    tokens_.push_back(token);
    texts_.push_back(tokenText(token));
    ids_.emplace(texts_.back(), size() - 1);
  }

  EncodingConfig config_;
  std::vector<Token> tokens_;
  std::vector<std::string> texts_;
  std::unordered_map<std::string, int> ids_;
};

}  // namespace melotok
