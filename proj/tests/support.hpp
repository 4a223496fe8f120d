// Shared builders for tests: deterministic random melodies and corpora.

#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <gtest/gtest.h>

#include "melotok/melody.hpp"
#include "melotok/vocabulary.hpp"

namespace melotok {
namespace testing {

// Per-test scratch directory, removed on teardown.
class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("melotok_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }

  void TearDown() override {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }

  std::string pathTo(const std::string& name) const {
    return (dir_ / name).string();
  }

  void writeFile(const std::string& name, const std::string& content) const {
    std::ofstream out(pathTo(name), std::ios::binary);
    out << content;
  }

  std::string readFile(const std::string& name) const {
    std::ifstream in(pathTo(name), std::ios::binary);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return std::move(buffer).str();
  }

 private:
  std::filesystem::path dir_;
};

// The 48 configurations exercised throughout the suite: both pitch spellings, every dr,
// and per dr the gridless, bar-only, coarse and finest grids in both
// position styles.
inline std::vector<EncodingConfig> configurationGrid() {
  std::vector<EncodingConfig> grid;
  for (PitchMode pitch : {PitchMode::kNumber, PitchMode::kClassOctave}) {
    for (int dr : kDurationResolutions) {
      for (auto [pc, pr] : std::vector<std::pair<PositionComplexity, int>>{
               {PositionComplexity::kUndefined, 0},
               {PositionComplexity::kUndefined, 1},
               {PositionComplexity::kSingle, 4},
               {PositionComplexity::kSingle, 4 * dr},
               {PositionComplexity::kMultiple, 4},
               {PositionComplexity::kMultiple, 4 * dr}}) {
        EncodingConfig c;
        c.pitch = pitch;
        c.pc = pc;
        c.pr = pr;
        c.dr = dr;
        c.validate();
        grid.push_back(c);
      }
    }
  }
  return grid;
}

// Random tick-level melody; pitches stay in [low_pitch, high_pitch] so tests
// can transpose by +-6 without leaving the MIDI range.
inline Melody randomMelody(std::mt19937_64& rng, int max_notes = 24,
                           int tpqn = 480, int low_pitch = 30,
                           int high_pitch = 96) {
  Melody m;
  m.id = "random";
  m.tpqn = tpqn;
  const int note_count = static_cast<int>(rng() % (max_notes + 1));
  std::int64_t clock = 0;
  for (int i = 0; i < note_count; ++i) {
    clock += static_cast<std::int64_t>(rng() % (tpqn * 2));  // gap, often 0
    if (rng() % 2 == 0) {
      // Occasionally pull the onset back to create an overlap.
      clock -= static_cast<std::int64_t>(rng() % (tpqn / 2 + 1));
      if (clock < 0) clock = 0;
    }
    Note note;
    note.onset = clock;
    note.duration = 1 + static_cast<std::int64_t>(rng() % (tpqn * 2));
    note.pitch =
        low_pitch + static_cast<int>(rng() % (high_pitch - low_pitch + 1));
    m.notes.push_back(note);
    clock = note.onset;  // next onset measured from here
    clock += 1 + rng() % (tpqn * 2);
  }
  std::stable_sort(m.notes.begin(), m.notes.end(),
                   [](const Note& a, const Note& b) { return a.onset < b.onset; });
  return m;
}

// Random quantized melody that satisfies every QuantizedMelody invariant and
// matches what quantize() can produce: monophonic sorted notes and
// total_steps equal to the last offset rounded up to a whole bar.
inline QuantizedMelody randomQuantized(std::mt19937_64& rng, int dr,
                                       int max_notes = 24, int low_pitch = 30,
                                       int high_pitch = 96,
                                       bool allow_empty = true) {
  QuantizedMelody q;
  q.id = "random";
  q.dr = dr;
  const int bar = 4 * dr;
  int note_count = static_cast<int>(rng() % (max_notes + 1));
  if (!allow_empty && note_count == 0) note_count = 1;
  int clock = 0;
  for (int i = 0; i < note_count; ++i) {
    clock += static_cast<int>(rng() % bar);  // gap, often 0
    QuantizedNote note;
    note.onset = clock;
    note.duration = 1 + static_cast<int>(rng() % (2 * bar));
    note.pitch =
        low_pitch + static_cast<int>(rng() % (high_pitch - low_pitch + 1));
    q.notes.push_back(note);
    clock = note.onset + note.duration;
  }
  const int last_offset = clock;
  q.total_steps = std::max(1, (last_offset + bar - 1) / bar) * bar;
  return q;
}

}  // namespace testing
}  // namespace melotok
