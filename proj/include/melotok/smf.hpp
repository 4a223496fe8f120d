#pragma once

// Standard MIDI File import. Only the note stream is used: each MTrk chunk
// that contains notes becomes one monophonic melody named after the file and
// track index; meta events, system exclusive data and non-note channel
// messages are skipped. The time division must be in ticks per quarter note.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "melotok/corpus.hpp"
#include "melotok/errors.hpp"
#include "melotok/melody.hpp"

namespace melotok {
namespace detail {

class SmfReader {
 public:
  explicit SmfReader(const std::string& bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  std::size_t size() const { return bytes_.size(); }

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }

  std::uint32_t u16be() {
    need(2);
    const auto hi = static_cast<std::uint8_t>(bytes_[pos_]);
    const auto lo = static_cast<std::uint8_t>(bytes_[pos_ + 1]);
    pos_ += 2;
    return (static_cast<std::uint32_t>(hi) << 8) | lo;
  }

  std::uint32_t u32be() {
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) value = (value << 8) | u8();
    return value;
  }

  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  std::uint32_t vlq() {
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i) {
      const std::uint8_t byte = u8();
      value = (value << 7) | (byte & 0x7Fu);
      if ((byte & 0x80u) == 0) return value;
    }
    throw ParseError(pos_, "variable-length quantity longer than 4 bytes");
  }

  void expectMagic(const char* magic, const char* what) {
    const std::size_t at = pos_;
    need(4);
    if (bytes_.compare(at, 4, magic) != 0) {
      throw ParseError(at, std::string("expected ") + what);
    }
    pos_ += 4;
  }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw ParseError(bytes_.size(), "unexpected end of file");
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses a format 0 or format 1 Standard MIDI File into a corpus with one
/// melody per note-bearing track. A note-on with velocity zero closes the
/// note like a note-off; notes left open at the end of a track are dropped,
/// as are notes that would get a non-positive duration. Overlaps are then
/// resolved the usual way, by truncating earlier notes at the next onset.
inline Corpus importMidi(const std::string& path) {
  const std::string bytes = detail::readFileBytes(path);
  detail::SmfReader reader(bytes);

  reader.expectMagic("MThd", "an MThd header");
  const std::uint32_t header_len = reader.u32be();
  if (header_len < 6) {
    throw ParseError(reader.pos() - 4, "header chunk shorter than 6 bytes");
  }
  const std::uint32_t format = reader.u16be();
  if (format > 1) {
    throw ParseError(reader.pos() - 2,
                     "unsupported file format " + std::to_string(format));
  }
  const std::uint32_t track_count = reader.u16be();
  const std::uint32_t division = reader.u16be();
  if (division & 0x8000u) {
    throw ParseError(reader.pos() - 2, "SMPTE time division is not supported");
  }
  if (division == 0) {
    throw ParseError(reader.pos() - 2, "zero ticks per quarter note");
  }
  reader.skip(header_len - 6);

  const std::string stem = std::filesystem::path(path).stem().string();
  Corpus corpus;
  corpus.provenance = path;

  for (std::uint32_t track = 0; track < track_count; ++track) {
    reader.expectMagic("MTrk", "an MTrk track");
    const std::uint32_t track_len = reader.u32be();
    const std::size_t end = reader.pos() + track_len;
    if (end > reader.size()) {
      throw ParseError(reader.pos() - 4, "track length overruns the file");
    }

    std::vector<Note> notes;
    std::map<int, std::vector<std::int64_t>> open;
    const auto closeNote = [&](int pitch, std::int64_t tick) {
      const auto it = open.find(pitch);
      if (it == open.end() || it->second.empty()) return;
      const std::int64_t onset = it->second.front();
      it->second.erase(it->second.begin());
      if (tick > onset) notes.push_back({onset, tick - onset, pitch});
    };

    std::int64_t tick = 0;
    std::uint8_t running = 0;
    while (reader.pos() < end) {
      tick += reader.vlq();
      const std::size_t event_at = reader.pos();
      const std::uint8_t lead = reader.u8();
      std::uint8_t status = lead;
      bool lead_is_data = false;
      if ((lead & 0x80u) == 0) {
        if (running == 0) {
          throw ParseError(event_at, "data byte without a status byte");
        }
        status = running;
        lead_is_data = true;
      }

      if (status == 0xFF) {
        reader.u8();
        reader.skip(reader.vlq());
        running = 0;
        continue;
      }
      if (status == 0xF0 || status == 0xF7) {
        reader.skip(reader.vlq());
        running = 0;
        continue;
      }
      if (status >= 0xF0) {
        throw ParseError(event_at, "unsupported status byte in track");
      }

      running = status;
      const auto nextData = [&]() -> std::uint8_t {
        if (lead_is_data) {
          lead_is_data = false;
          return lead;
        }
        return reader.u8();
      };
      switch (status >> 4) {
        case 0x8: {
          const int pitch = nextData() & 0x7F;
          nextData();
          closeNote(pitch, tick);
          break;
        }
        case 0x9: {
          const int pitch = nextData() & 0x7F;
          const std::uint8_t velocity = nextData();
          if (velocity == 0) {
            closeNote(pitch, tick);
          } else {
            open[pitch].push_back(tick);
          }
          break;
        }
        case 0xA:
        case 0xB:
        case 0xE:
          nextData();
          nextData();
          break;
        case 0xC:
        case 0xD:
          nextData();
          break;
      }
    }
    if (reader.pos() != end) {
      throw ParseError(end, "event runs past the track boundary");
    }

    if (notes.empty()) continue;
    Melody melody;
    melody.id = stem + ".track" + std::to_string(track);
    melody.tpqn = static_cast<int>(division);
    melody.notes = std::move(notes);
    std::stable_sort(melody.notes.begin(), melody.notes.end(),
                     [](const Note& a, const Note& b) { return a.onset < b.onset; });
    corpus.melodies.push_back(enforceMonophony(std::move(melody)));
  }

  return corpus;
}

}  // namespace melotok
