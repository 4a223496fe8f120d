#pragma once

// Corpus handling: melody files in JSON-lines form, meter filtering,
// deterministic train/test splitting, per-epoch transposition augmentation
// and token-file persistence.
//
// Melody file format, one record per line:
//   {"id":"song1","tpqn":480,"meter":"4/4","notes":[[0,480,62],[480,240,64]]}
// `meter` is optional; notes are [onset_ticks, duration_ticks, pitch].

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "melotok/codec.hpp"
#include "melotok/errors.hpp"
#include "melotok/melody.hpp"
#include "melotok/vocabulary.hpp"

namespace melotok {

struct Corpus {
  std::vector<Melody> melodies;
  std::string provenance;
};

/// A skipped input line: `line` is 1-based.
struct Diagnostic {
  std::size_t line = 0;
  std::string message;
};

struct LoadResult {
  Corpus corpus;
  std::vector<Diagnostic> diagnostics;
};

namespace detail {

inline std::string readFileBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

inline void writeFileAtomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error("failed while writing " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp + " to " + path);
}

inline std::string jsonQuote(const std::string& text) {
  return nlohmann::json(text).dump();
}

// Parses one melody record. Returns the failure message, or nothing on
// success.
inline std::optional<std::string> parseMelodyLine(const std::string& line,
                                                  Melody* out) {
  const nlohmann::json record =
      nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (record.is_discarded()) return "invalid JSON";
  if (!record.is_object()) return "record is not a JSON object";
  if (!record.contains("id") || !record["id"].is_string()) {
    return "missing or non-string field 'id'";
  }
  if (!record.contains("tpqn") || !record["tpqn"].is_number_integer()) {
    return "missing or non-integer field 'tpqn'";
  }
  Melody melody;
  melody.id = record["id"].get<std::string>();
  melody.tpqn = record["tpqn"].get<int>();
  if (record.contains("meter") && !record["meter"].is_null()) {
    if (!record["meter"].is_string()) return "field 'meter' is not a string";
    melody.meter = record["meter"].get<std::string>();
  }
  if (!record.contains("notes") || !record["notes"].is_array()) {
    return "missing or non-array field 'notes'";
  }
  for (const nlohmann::json& entry : record["notes"]) {
    if (!entry.is_array() || entry.size() != 3 ||
        !entry[0].is_number_integer() || !entry[1].is_number_integer() ||
        !entry[2].is_number_integer()) {
      return "each note must be [onset, duration, pitch] with integer fields";
    }
    Note note;
    note.onset = entry[0].get<std::int64_t>();
    note.duration = entry[1].get<std::int64_t>();
    note.pitch = entry[2].get<int>();
    melody.notes.push_back(note);
  }
  const std::vector<RuleViolation> violations = validate(melody);
  if (!violations.empty()) {
    std::string msg = "melody '" + melody.id + "' breaks rule '" +
                      violations.front().rule + "'";
    if (violations.front().note_index != RuleViolation::npos) {
      msg += " at note " + std::to_string(violations.front().note_index);
    }
    return msg;
  }
  *out = std::move(melody);
  return std::nullopt;
}

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  return hash;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Loads a melody file. Unreadable files throw; bad records are skipped and
/// reported per line, including records that reuse an earlier id.
inline LoadResult loadMelodies(const std::string& path) {
  const std::string bytes = detail::readFileBytes(path);
  LoadResult result;
  result.corpus.provenance = path;
  std::set<std::string> seen_ids;
  std::istringstream stream(bytes);
  std::string line;
  for (std::size_t line_no = 1; std::getline(stream, line); ++line_no) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Melody melody;
    if (const auto failure = detail::parseMelodyLine(line, &melody)) {
      result.diagnostics.push_back({line_no, *failure});
      continue;
    }
    if (!seen_ids.insert(melody.id).second) {
      result.diagnostics.push_back({line_no, "duplicate id '" + melody.id + "'"});
      continue;
    }
    result.corpus.melodies.push_back(std::move(melody));
  }
  return result;
}

inline void saveMelodies(const Corpus& corpus, const std::string& path) {
  std::string content;
  for (const Melody& melody : corpus.melodies) {
    content += "{\"id\":" + detail::jsonQuote(melody.id);
    content += ",\"tpqn\":" + std::to_string(melody.tpqn);
    if (melody.meter) content += ",\"meter\":" + detail::jsonQuote(*melody.meter);
    content += ",\"notes\":[";
    for (std::size_t i = 0; i < melody.notes.size(); ++i) {
      const Note& note = melody.notes[i];
      if (i > 0) content += ',';
      content += '[' + std::to_string(note.onset) + ',' +
                 std::to_string(note.duration) + ',' +
                 std::to_string(note.pitch) + ']';
    }
    content += "]}\n";
  }
  detail::writeFileAtomic(path, content);
}

/// Keeps melodies compatible with 4-beat bars. Only declared meters can
/// disqualify a melody, and only when `bar_check` is on; melodies without
/// meter metadata always pass.
inline Corpus filterFourFour(const Corpus& corpus, bool bar_check) {
  Corpus kept;
  kept.provenance = corpus.provenance;
  for (const Melody& melody : corpus.melodies) {
    if (bar_check && melody.meter && *melody.meter != "4/4") continue;
    kept.melodies.push_back(melody);
  }
  return kept;
}

struct SplitSpec {
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Corpus train;
  Corpus test;
};

/// Deterministic split: melodies are ordered by id, shuffled by a seeded
/// Fisher-Yates pass and cut at floor(n * train_fraction). Sorting first
/// makes the outcome independent of the input file order.
inline SplitResult splitCorpus(const Corpus& corpus, const SplitSpec& spec) {
  if (corpus.melodies.empty()) throw ConfigError("cannot split an empty corpus");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw ConfigError("train fraction must lie in (0,1)");
  }
  std::vector<std::size_t> order(corpus.melodies.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.melodies[a].id < corpus.melodies[b].id;
  });
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const std::size_t j = rng() % (i + 1);
    std::swap(order[i], order[j]);
  }
  const auto train_size = static_cast<std::size_t>(std::floor(
      static_cast<double>(order.size()) * spec.train_fraction));
  SplitResult split;
  split.train.provenance = corpus.provenance;
  split.test.provenance = corpus.provenance;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < train_size ? split.train : split.test)
        .melodies.push_back(corpus.melodies[order[i]]);
  }
  return split;
}

/// Transposes every melody by an integer drawn uniformly from [low, high].
/// Each melody gets its own generator derived from (seed, id), so results do
/// not depend on corpus order. Draws that would push a pitch outside the
/// pitch range are redrawn up to 13 times, after which the melody is kept
/// unshifted.
inline Corpus augmentEpoch(const Corpus& corpus, std::uint64_t seed,
                           int low = -6, int high = 6) {
  if (low > high) throw ConfigError("transposition range is empty");
  Corpus augmented;
  augmented.provenance = corpus.provenance;
  for (const Melody& melody : corpus.melodies) {
    std::mt19937_64 rng(detail::splitmix64(seed ^ detail::fnv1a64(melody.id)));
    const auto span = static_cast<std::uint64_t>(high - low) + 1;
    int shift = 0;
    for (int attempt = 0; attempt < 13; ++attempt) {
      const int candidate = low + static_cast<int>(rng() % span);
      const bool fits = std::all_of(
          melody.notes.begin(), melody.notes.end(), [&](const Note& note) {
            return note.pitch + candidate >= kMinPitch &&
                   note.pitch + candidate <= kMaxPitch;
          });
      if (fits) {
        shift = candidate;
        break;
      }
    }
    augmented.melodies.push_back(transposed(melody, shift));
  }
  return augmented;
}

struct EncodedCorpus {
  EncodingConfig config;
  std::vector<std::string> ids;
  std::vector<TokenSequence> sequences;
};

/// Quantizes and encodes every melody under one configuration.
inline EncodedCorpus encodeCorpus(const Corpus& corpus,
                                  const EncodingConfig& config) {
  config.validate();
  const Vocabulary vocab(config);
  EncodedCorpus encoded;
  encoded.config = config;
  for (const Melody& melody : corpus.melodies) {
    encoded.ids.push_back(melody.id);
    encoded.sequences.push_back(encode(quantize(melody, config.dr), vocab));
  }
  return encoded;
}

/// Token file: one sequence per line, tokens separated by single spaces.
inline void saveTokenFile(const std::vector<TokenSequence>& sequences,
                          const std::string& path) {
  std::string content;
  for (const TokenSequence& seq : sequences) {
    content += sequenceText(seq);
    content += '\n';
  }
  detail::writeFileAtomic(path, content);
}

struct TokenFileResult {
  std::vector<TokenSequence> sequences;
  std::vector<std::size_t> lines;
  std::vector<Diagnostic> diagnostics;
};

/// Reads a token file, checking every token against the configuration's
/// vocabulary. Lines with unknown tokens are skipped and reported.
inline TokenFileResult loadTokenFile(const std::string& path,
                                     const EncodingConfig& config) {
  config.validate();
  const Vocabulary vocab(config);
  const std::string bytes = detail::readFileBytes(path);
  TokenFileResult result;
  std::istringstream stream(bytes);
  std::string line;
  for (std::size_t line_no = 1; std::getline(stream, line); ++line_no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    TokenSequence seq;
    seq.config = config;
    std::istringstream words(line);
    std::string word;
    bool ok = true;
    while (words >> word) {
      if (!vocab.contains(word)) {
        result.diagnostics.push_back(
            {line_no, "unknown token '" + word + "' under this configuration"});
        ok = false;
        break;
      }
      seq.tokens.push_back(vocab.tokenAt(vocab.idOf(word)));
    }
    if (ok) {
      result.sequences.push_back(std::move(seq));
      result.lines.push_back(line_no);
    }
  }
  return result;
}

/// Id file: one melody id per line, aligned with the token file.
inline void saveIdFile(const std::vector<std::string>& ids,
                       const std::string& path) {
  std::string content;
  for (const std::string& id : ids) {
    content += id;
    content += '\n';
  }
  detail::writeFileAtomic(path, content);
}

inline std::vector<std::string> loadIdFile(const std::string& path) {
  const std::string bytes = detail::readFileBytes(path);
  std::vector<std::string> ids;
  std::istringstream stream(bytes);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

/// Longest prefix of at most `max_len` tokens that ends on a unit boundary:
/// never between a pitch class and its octave, never between a pitch unit
/// and its duration tokens, and never inside a run of duration tokens that
/// extend one note.
inline TokenSequence truncateTokens(const TokenSequence& seq,
                                    std::size_t max_len) {
  if (max_len < 1) throw ConfigError("maximum length must be at least 1");
  if (seq.tokens.size() <= max_len) return seq;

  enum class State { kClosed, kAwaitOctave, kAwaitDuration, kInDurations };
  State state = State::kClosed;
  std::size_t best = 0;
  for (std::size_t i = 0; i < max_len; ++i) {
    switch (seq.tokens[i].kind) {
      case TokenKind::kPitch:
      case TokenKind::kRest:
        state = State::kAwaitDuration;
        break;
      case TokenKind::kPitchClass:
        state = State::kAwaitOctave;
        break;
      case TokenKind::kOctave:
        state = State::kAwaitDuration;
        break;
      case TokenKind::kDuration:
        state = State::kInDurations;
        break;
      default:
        if (state == State::kInDurations) state = State::kClosed;
        break;
    }
    if (state == State::kAwaitOctave || state == State::kAwaitDuration) continue;
    if (state == State::kInDurations &&
        seq.tokens[i + 1].kind == TokenKind::kDuration) {
      continue;
    }
    best = i + 1;
  }
  TokenSequence prefix;
  prefix.config = seq.config;
  prefix.tokens.assign(seq.tokens.begin(),
                       seq.tokens.begin() + static_cast<std::ptrdiff_t>(best));
  return prefix;
}

}  // namespace melotok
