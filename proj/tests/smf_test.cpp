// Tests for the Standard MIDI File importer. Every fixture is a byte stream
// assembled by hand from the published file format, so the importer is
// checked against the format itself rather than against its own output.

#include "melotok/smf.hpp"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"

namespace melotok {
namespace {

std::string be32(std::uint32_t v) {
  std::string out(4, '\0');
  for (int i = 3; i >= 0; --i) {
    out[i] = static_cast<char>(v & 0xFF);
    v >>= 8;
  }
  return out;
}

std::string be16(std::uint32_t v) {
  std::string out(2, '\0');
  out[0] = static_cast<char>((v >> 8) & 0xFF);
  out[1] = static_cast<char>(v & 0xFF);
  return out;
}

std::string vlq(std::uint32_t v) {
  std::string out(1, static_cast<char>(v & 0x7F));
  while ((v >>= 7) != 0) {
    out.insert(out.begin(), static_cast<char>(0x80 | (v & 0x7F)));
  }
  return out;
}

std::string bytes(std::initializer_list<int> values) {
  std::string out;
  for (int v : values) out.push_back(static_cast<char>(v));
  return out;
}

std::string header(int format, int ntrks, int division) {
  return "MThd" + be32(6) + be16(format) + be16(ntrks) + be16(division);
}

std::string track(const std::string& events) {
  return "MTrk" + be32(static_cast<std::uint32_t>(events.size())) + events;
}

const std::string kEndOfTrack = bytes({0x00, 0xFF, 0x2F, 0x00});

// Note-on at tick 0, note-off 480 ticks later, 480 ticks per quarter.
std::string minimalFile(int pitch = 60) {
  const std::string events = vlq(0) + bytes({0x90, pitch, 0x40}) +
                             vlq(480) + bytes({0x80, pitch, 0x00}) +
                             kEndOfTrack;
  return header(0, 1, 480) + track(events);
}

using SmfTest = testing::TempDir;

TEST_F(SmfTest, ParsesAMinimalSingleNoteFile) {
  writeFile("mini.mid", minimalFile(60));
  const Corpus corpus = importMidi(pathTo("mini.mid"));
  ASSERT_EQ(corpus.melodies.size(), 1u);
  const Melody& melody = corpus.melodies[0];
  EXPECT_EQ(melody.id, "mini.track0");
  EXPECT_EQ(melody.tpqn, 480);
  EXPECT_FALSE(melody.meter.has_value());
  ASSERT_EQ(melody.notes.size(), 1u);
  EXPECT_EQ(melody.notes[0], (Note{0, 480, 60}));
}

TEST_F(SmfTest, VelocityZeroNoteOnClosesTheNote) {
  const std::string events = vlq(0) + bytes({0x90, 60, 0x40}) +
                             vlq(480) + bytes({0x90, 60, 0x00}) +
                             kEndOfTrack;
  writeFile("vz.mid", header(0, 1, 480) + track(events));
  const Corpus corpus = importMidi(pathTo("vz.mid"));
  ASSERT_EQ(corpus.melodies.size(), 1u);
  ASSERT_EQ(corpus.melodies[0].notes.size(), 1u);
  EXPECT_EQ(corpus.melodies[0].notes[0], (Note{0, 480, 60}));
}

TEST_F(SmfTest, HonoursRunningStatus) {
  // After the first note-on, every event reuses its status byte.
  const std::string events = vlq(0) + bytes({0x90, 60, 0x40}) +
                             vlq(240) + bytes({60, 0x00}) +
                             vlq(0) + bytes({62, 0x40}) +
                             vlq(240) + bytes({62, 0x00}) +
                             kEndOfTrack;
  writeFile("rs.mid", header(0, 1, 480) + track(events));
  const Corpus corpus = importMidi(pathTo("rs.mid"));
  ASSERT_EQ(corpus.melodies.size(), 1u);
  const std::vector<Note> expected = {{0, 240, 60}, {240, 240, 62}};
  EXPECT_EQ(corpus.melodies[0].notes, expected);
}

TEST_F(SmfTest, DataByteWithoutStatusFails) {
  const std::string events = vlq(0) + bytes({60, 0x40}) + kEndOfTrack;
  writeFile("nors.mid", header(0, 1, 480) + track(events));
  EXPECT_THROW(importMidi(pathTo("nors.mid")), ParseError);
}

TEST_F(SmfTest, ChordsCollapseToTheLastNoteOn) {
  const std::string events = vlq(0) + bytes({0x90, 60, 0x40}) +
                             vlq(0) + bytes({0x90, 64, 0x40}) +
                             vlq(480) + bytes({0x80, 60, 0x40}) +
                             vlq(0) + bytes({0x80, 64, 0x40}) +
                             kEndOfTrack;
  writeFile("chord.mid", header(0, 1, 480) + track(events));
  const Corpus corpus = importMidi(pathTo("chord.mid"));
  ASSERT_EQ(corpus.melodies.size(), 1u);
  ASSERT_EQ(corpus.melodies[0].notes.size(), 1u);
  EXPECT_EQ(corpus.melodies[0].notes[0], (Note{0, 480, 64}));
}

TEST_F(SmfTest, SamePitchOverlapsMatchFirstInFirstOut) {
  const std::string events = vlq(0) + bytes({0x90, 60, 0x40}) +
                             vlq(240) + bytes({0x90, 60, 0x40}) +
                             vlq(240) + bytes({0x80, 60, 0x40}) +
                             vlq(240) + bytes({0x80, 60, 0x40}) +
                             kEndOfTrack;
  writeFile("fifo.mid", header(0, 1, 480) + track(events));
  const Corpus corpus = importMidi(pathTo("fifo.mid"));
  ASSERT_EQ(corpus.melodies.size(), 1u);
  const std::vector<Note> expected = {{0, 240, 60}, {240, 480, 60}};
  EXPECT_EQ(corpus.melodies[0].notes, expected);
}

TEST_F(SmfTest, SkipsMetaSysexAndOtherChannelMessages) {
  const std::string events =
      vlq(0) + bytes({0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20}) +
      vlq(0) + bytes({0xFF, 0x01, 0x05}) + "hello" +
      vlq(0) + bytes({0xC0, 0x05}) +
      vlq(0) + bytes({0xB0, 0x07, 0x64}) +
      vlq(0) + bytes({0xF0, 0x02, 0x01, 0xF7}) +
      vlq(0) + bytes({0x90, 72, 0x40}) +
      vlq(0) + bytes({0xE0, 0x00, 0x40}) +
      vlq(960) + bytes({0x80, 72, 0x00}) +
      kEndOfTrack;
  writeFile("mixed.mid", header(0, 1, 480) + track(events));
  const Corpus corpus = importMidi(pathTo("mixed.mid"));
  ASSERT_EQ(corpus.melodies.size(), 1u);
  ASSERT_EQ(corpus.melodies[0].notes.size(), 1u);
  EXPECT_EQ(corpus.melodies[0].notes[0], (Note{0, 960, 72}));
}

TEST_F(SmfTest, FormatOneNamesMelodiesByTrackIndex) {
  const std::string tempo_only =
      vlq(0) + bytes({0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20}) + kEndOfTrack;
  const std::string notes60 = vlq(0) + bytes({0x90, 60, 0x40}) +
                              vlq(480) + bytes({0x80, 60, 0x00}) +
                              kEndOfTrack;
  const std::string notes67 = vlq(0) + bytes({0x90, 67, 0x40}) +
                              vlq(240) + bytes({0x80, 67, 0x00}) +
                              kEndOfTrack;
  writeFile("multi.mid", header(1, 3, 96) + track(tempo_only) +
                             track(notes60) + track(notes67));
  const Corpus corpus = importMidi(pathTo("multi.mid"));
  ASSERT_EQ(corpus.melodies.size(), 2u);
  EXPECT_EQ(corpus.melodies[0].id, "multi.track1");
  EXPECT_EQ(corpus.melodies[1].id, "multi.track2");
  EXPECT_EQ(corpus.melodies[0].tpqn, 96);
  EXPECT_EQ(corpus.melodies[1].notes[0], (Note{0, 240, 67}));
}

TEST_F(SmfTest, DropsUnmatchedAndZeroLengthNotes) {
  const std::string events = vlq(0) + bytes({0x80, 60, 0x40}) +
                             vlq(0) + bytes({0x90, 62, 0x40}) +
                             vlq(0) + bytes({0x80, 62, 0x40}) +
                             vlq(0) + bytes({0x90, 64, 0x40}) +
                             kEndOfTrack;
  writeFile("odd.mid", header(0, 1, 480) + track(events));
  const Corpus corpus = importMidi(pathTo("odd.mid"));
  EXPECT_TRUE(corpus.melodies.empty());
}

TEST_F(SmfTest, BadMagicFailsAtByteZero) {
  writeFile("bad.mid", "RIFF" + be32(6) + be16(0) + be16(1) + be16(480));
  try {
    importMidi(pathTo("bad.mid"));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
    EXPECT_NE(std::string(e.what()).find("at byte 0"), std::string::npos);
  }
}

TEST_F(SmfTest, TruncatedFileFailsWithoutPartialCorpus) {
  const std::string whole = minimalFile(60);
  writeFile("cut.mid", whole.substr(0, whole.size() - 3));
  try {
    importMidi(pathTo("cut.mid"));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("at byte"), std::string::npos);
  }
  writeFile("cut2.mid", whole.substr(0, 10));
  EXPECT_THROW(importMidi(pathTo("cut2.mid")), ParseError);
}

TEST_F(SmfTest, RejectsSmpteDivisionAndUnknownFormats) {
  writeFile("smpte.mid",
            "MThd" + be32(6) + be16(0) + be16(1) + bytes({0xE7, 0x28}));
  try {
    importMidi(pathTo("smpte.mid"));
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("SMPTE"), std::string::npos);
  }
  writeFile("fmt2.mid", header(2, 1, 480));
  EXPECT_THROW(importMidi(pathTo("fmt2.mid")), ParseError);
}

TEST_F(SmfTest, AcceptsLongerHeaderChunks) {
  const std::string events = vlq(0) + bytes({0x90, 60, 0x40}) +
                             vlq(480) + bytes({0x80, 60, 0x00}) +
                             kEndOfTrack;
  const std::string long_header =
      "MThd" + be32(8) + be16(0) + be16(1) + be16(480) + bytes({0x00, 0x00});
  writeFile("pad.mid", long_header + track(events));
  const Corpus corpus = importMidi(pathTo("pad.mid"));
  ASSERT_EQ(corpus.melodies.size(), 1u);
  EXPECT_EQ(corpus.melodies[0].notes[0], (Note{0, 480, 60}));
}

TEST_F(SmfTest, ImportFeedsTheMelodyPipeline) {
  writeFile("pipe.mid", minimalFile(72));
  const Corpus corpus = importMidi(pathTo("pipe.mid"));
  saveMelodies(corpus, pathTo("pipe.jsonl"));
  const LoadResult loaded = loadMelodies(pathTo("pipe.jsonl"));
  EXPECT_TRUE(loaded.diagnostics.empty());
  EXPECT_EQ(loaded.corpus.melodies, corpus.melodies);
  const QuantizedMelody q = quantize(corpus.melodies[0], 4);
  EXPECT_EQ(q.notes.size(), 1u);
  EXPECT_EQ(q.notes[0], (QuantizedNote{0, 4, 72}));
}

}  // namespace
}  // namespace melotok
