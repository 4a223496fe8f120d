#pragma once

// Command implementations behind the command-line tool. Each command is a
// plain function over an options struct plus output streams, so the same
// code paths are exercised by the test suite and by the `melotok` binary.
//
// Conventions shared by every command:
//   - tables are tab-delimited UTF-8 with a header row (or space-aligned
//     when `aligned` is set),
//   - data goes to `--out` (written atomically) or the output stream,
//     everything else goes to the error stream,
//   - the exit code is 0 iff no record was skipped.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "melotok/codec.hpp"
#include "melotok/corpus.hpp"
#include "melotok/errors.hpp"
#include "melotok/melody.hpp"
#include "melotok/metrics.hpp"
#include "melotok/smf.hpp"
#include "melotok/stats.hpp"
#include "melotok/vocabulary.hpp"

namespace melotok {

/// Shortest round-trippable decimal form, e.g. 0.5 -> "0.5", 1/3 -> twelve
/// significant digits. Keeps table output byte-stable across runs.
inline std::string formatDouble(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.12g", value);
  return buffer;
}

/// Encoding flags as they arrive from the command line. `resolve` turns the
/// spellings into a validated EncodingConfig; when the caller never set
/// `--pc` and the grid has at most one slot per bar, position complexity
/// falls back to `undefined` (the only legal choice there).
struct ConfigFlags {
  std::string pitch = "number";
  std::string pc = "single";
  bool pc_set = false;
  int pr = 16;
  int dr = 4;

  EncodingConfig resolve() const {
    EncodingConfig config;
    config.pitch = parsePitchMode(pitch);
    config.pc = parsePositionComplexity(pc);
    config.pr = pr;
    config.dr = dr;
    if (!pc_set && pr <= 1) config.pc = PositionComplexity::kUndefined;
    config.validate();
    return config;
  }
};

namespace detail {

class TableBuilder {
 public:
  explicit TableBuilder(std::vector<std::string> header) {
    rows_.push_back(std::move(header));
  }

  void addRow(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::size_t dataRows() const { return rows_.size() - 1; }

  std::string render(bool aligned) const {
    return aligned ? renderAligned() : renderTsv();
  }

 private:
  std::string renderTsv() const {
    std::string text;
    for (const std::vector<std::string>& row : rows_) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) text += '\t';
        text += row[i];
      }
      text += '\n';
    }
    return text;
  }

  std::string renderAligned() const {
    std::vector<std::size_t> widths;
    for (const std::vector<std::string>& row : rows_) {
      if (widths.size() < row.size()) widths.resize(row.size(), 0);
      for (std::size_t i = 0; i < row.size(); ++i)
        widths[i] = std::max(widths[i], row[i].size());
    }
    std::string text;
    for (const std::vector<std::string>& row : rows_) {
      std::string line;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) line += "  ";
        line += row[i];
        if (i + 1 < row.size())
          line += std::string(widths[i] - row[i].size(), ' ');
      }
      while (!line.empty() && line.back() == ' ') line.pop_back();
      text += line;
      text += '\n';
    }
    return text;
  }

  std::vector<std::vector<std::string>> rows_;
};

inline void emitTable(const TableBuilder& table, bool aligned,
                      const std::string& out_path, std::ostream& out) {
  const std::string text = table.render(aligned);
  if (out_path.empty())
    out << text;
  else
    writeFileAtomic(out_path, text);
}

inline void emitDiagnostics(const std::string& path,
                            const std::vector<Diagnostic>& diagnostics,
                            std::ostream& err) {
  for (const Diagnostic& d : diagnostics)
    err << path << ":" << d.line << ": " << d.message << '\n';
}

inline std::vector<std::string> splitTabs(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

inline bool looksLikeSmf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string_view(magic, 4) == "MThd";
}

}  // namespace detail

/// Melodies quantized for analysis, from either a melody file or a token
/// file. Token input decodes line by line; sequences that fail to decode
/// become diagnostics instead of melodies.
struct QuantizedInput {
  std::vector<std::string> ids;
  std::vector<QuantizedMelody> melodies;
  std::vector<Diagnostic> diagnostics;
};

inline QuantizedInput loadQuantizedInput(const std::string& path,
                                         const EncodingConfig& config,
                                         bool from_tokens) {
  QuantizedInput input;
  if (from_tokens) {
    TokenFileResult loaded = loadTokenFile(path, config);
    input.diagnostics = std::move(loaded.diagnostics);
    for (std::size_t i = 0; i < loaded.sequences.size(); ++i) {
      const std::string id = "m" + std::to_string(loaded.lines[i]);
      try {
        input.melodies.push_back(decode(loaded.sequences[i], id));
        input.ids.push_back(id);
      } catch (const SequenceError& e) {
        input.diagnostics.push_back({loaded.lines[i], e.what()});
      }
    }
    std::stable_sort(input.diagnostics.begin(), input.diagnostics.end(),
                     [](const Diagnostic& a, const Diagnostic& b) {
                       return a.line < b.line;
                     });
  } else {
    LoadResult loaded = loadMelodies(path);
    input.diagnostics = std::move(loaded.diagnostics);
    for (const Melody& melody : loaded.corpus.melodies) {
      input.ids.push_back(melody.id);
      input.melodies.push_back(quantize(melody, config.dr));
    }
  }
  return input;
}

struct VocabOptions {
  EncodingConfig config;
  bool aligned = false;
  std::string out;
};

/// Lists every token id and spelling for one configuration.
inline int cmdVocab(const VocabOptions& opts, std::ostream& out) {
  const Vocabulary vocab(opts.config);
  detail::TableBuilder table({"id", "token"});
  for (int id = 0; id < vocab.size(); ++id)
    table.addRow({std::to_string(id), vocab.textAt(id)});
  detail::emitTable(table, opts.aligned, opts.out, out);
  return 0;
}

struct PrepareOptions {
  std::string input;
  std::string out_dir;
  double train_fraction = 0.9;
  std::uint64_t seed = 0;
  bool meter_filter = true;
};

/// Reads a melody file (or a standard MIDI file), drops melodies declared in
/// another meter, splits the survivors and writes `train.jsonl`,
/// `test.jsonl` and a `config.json` echo of the invocation into `out_dir`.
/// Stage counts go to `out`.
inline int cmdPrepare(const PrepareOptions& opts, std::ostream& out,
                      std::ostream& err) {
  Corpus corpus;
  std::size_t skipped = 0;
  if (detail::looksLikeSmf(opts.input)) {
    corpus = importMidi(opts.input);
  } else {
    LoadResult loaded = loadMelodies(opts.input);
    detail::emitDiagnostics(opts.input, loaded.diagnostics, err);
    skipped = loaded.diagnostics.size();
    corpus = std::move(loaded.corpus);
  }
  const std::size_t loaded_count = corpus.melodies.size();

  const Corpus filtered = filterFourFour(corpus, opts.meter_filter);
  const SplitResult split =
      splitCorpus(filtered, {opts.train_fraction, opts.seed});

  std::filesystem::create_directories(opts.out_dir);
  const std::filesystem::path dir(opts.out_dir);
  saveMelodies(split.train, (dir / "train.jsonl").string());
  saveMelodies(split.test, (dir / "test.jsonl").string());

  std::string config_json = "{\"command\":\"prepare\"";
  config_json += ",\"input\":" + detail::jsonQuote(opts.input);
  config_json += ",\"train_fraction\":" + formatDouble(opts.train_fraction);
  config_json += ",\"seed\":" + std::to_string(opts.seed);
  config_json +=
      std::string(",\"meter_filter\":") + (opts.meter_filter ? "true" : "false");
  config_json += "}\n";
  detail::writeFileAtomic((dir / "config.json").string(), config_json);

  detail::TableBuilder counts({"stage", "count"});
  counts.addRow({"loaded", std::to_string(loaded_count)});
  counts.addRow({"skipped", std::to_string(skipped)});
  counts.addRow({"kept", std::to_string(filtered.melodies.size())});
  counts.addRow({"train", std::to_string(split.train.melodies.size())});
  counts.addRow({"test", std::to_string(split.test.melodies.size())});
  out << counts.render(false);
  return skipped == 0 ? 0 : 1;
}

struct EncodeOptions {
  std::string input;
  std::string tokens_out;
  std::string ids_out;
  std::size_t max_len = 0;
  EncodingConfig config;
};

/// Encodes a melody file into a token file plus an aligned id file.
/// `max_len` of 0 means no truncation.
inline int cmdEncode(const EncodeOptions& opts, std::ostream& err) {
  LoadResult loaded = loadMelodies(opts.input);
  detail::emitDiagnostics(opts.input, loaded.diagnostics, err);

  EncodedCorpus encoded = encodeCorpus(loaded.corpus, opts.config);
  if (opts.max_len > 0)
    for (TokenSequence& seq : encoded.sequences)
      seq = truncateTokens(seq, opts.max_len);

  saveTokenFile(encoded.sequences, opts.tokens_out);
  const std::string ids_path =
      opts.ids_out.empty() ? opts.tokens_out + ".ids" : opts.ids_out;
  saveIdFile(encoded.ids, ids_path);

  err << "encoded " << encoded.sequences.size() << " melodies, skipped "
      << loaded.diagnostics.size() << '\n';
  return loaded.diagnostics.empty() ? 0 : 1;
}

struct DecodeOptions {
  std::string input;
  std::string out;
  EncodingConfig config;
};

/// Decodes a token file back into a melody file. Decoded melodies are named
/// `m<line>` after their input line and written at one tick per step (tpqn
/// equal to the duration resolution).
inline int cmdDecode(const DecodeOptions& opts, std::ostream& err) {
  const QuantizedInput input =
      loadQuantizedInput(opts.input, opts.config, true);
  detail::emitDiagnostics(opts.input, input.diagnostics, err);

  Corpus corpus;
  for (const QuantizedMelody& q : input.melodies) {
    Melody melody;
    melody.id = q.id;
    melody.tpqn = q.dr;
    for (const QuantizedNote& note : q.notes)
      melody.notes.push_back({note.onset, note.duration, note.pitch});
    corpus.melodies.push_back(std::move(melody));
  }
  saveMelodies(corpus, opts.out);

  err << "decoded " << corpus.melodies.size() << " melodies, skipped "
      << input.diagnostics.size() << '\n';
  return input.diagnostics.empty() ? 0 : 1;
}

struct MetricsOptions {
  std::string input;
  std::string out;
  bool from_tokens = false;
  bool harmonic_minor = false;
  bool aligned = false;
  EncodingConfig config;
};

/// Emits one row of the nine melody metrics per input melody. Undefined
/// metrics are left as empty cells and counted in a summary on the error
/// stream.
inline int cmdMetrics(const MetricsOptions& opts, std::ostream& out,
                      std::ostream& err) {
  const QuantizedInput input =
      loadQuantizedInput(opts.input, opts.config, opts.from_tokens);
  detail::emitDiagnostics(opts.input, input.diagnostics, err);

  std::vector<std::string> header = {"id"};
  for (const char* name : kMetricNames) header.push_back(name);
  detail::TableBuilder table(std::move(header));

  std::size_t empty_cells = 0;
  for (std::size_t i = 0; i < input.melodies.size(); ++i) {
    const MetricReport report =
        metricReport(input.melodies[i], opts.harmonic_minor);
    std::vector<std::string> row = {input.ids[i]};
    for (const std::optional<double>& value : report.values) {
      if (value) {
        row.push_back(formatDouble(*value));
      } else {
        row.push_back("");
        ++empty_cells;
      }
    }
    table.addRow(std::move(row));
  }
  detail::emitTable(table, opts.aligned, opts.out, out);

  err << table.dataRows() << " melodies, " << empty_cells
      << " undefined metric values\n";
  return input.diagnostics.empty() ? 0 : 1;
}

struct CompareOptions {
  std::string model;
  std::string reference;
  std::string out;
  bool from_tokens = false;
  bool harmonic_minor = false;
  bool aligned = false;
  EncodingConfig config;
};

/// Compares the metric distributions of two melody sets: one row per metric
/// with the overlapping area and Wasserstein-1 distance plus the number of
/// defined values on each side. Metrics that cannot be compared stay blank
/// and are reported as warnings.
inline int cmdCompare(const CompareOptions& opts, std::ostream& out,
                      std::ostream& err) {
  const QuantizedInput model =
      loadQuantizedInput(opts.model, opts.config, opts.from_tokens);
  const QuantizedInput reference =
      loadQuantizedInput(opts.reference, opts.config, opts.from_tokens);
  detail::emitDiagnostics(opts.model, model.diagnostics, err);
  detail::emitDiagnostics(opts.reference, reference.diagnostics, err);

  std::vector<MetricReport> model_reports;
  for (const QuantizedMelody& q : model.melodies)
    model_reports.push_back(metricReport(q, opts.harmonic_minor));
  std::vector<MetricReport> reference_reports;
  for (const QuantizedMelody& q : reference.melodies)
    reference_reports.push_back(metricReport(q, opts.harmonic_minor));

  const std::vector<DistributionComparison> rows =
      compareSets(model_reports, reference_reports);

  detail::TableBuilder table({"metric", "oa", "w1", "n_model", "n_reference"});
  for (const DistributionComparison& row : rows) {
    table.addRow({kMetricNames[static_cast<int>(row.metric)],
                  row.oa ? formatDouble(*row.oa) : "",
                  row.w1 ? formatDouble(*row.w1) : "",
                  std::to_string(row.n_model),
                  std::to_string(row.n_reference)});
    if (!row.w1)
      err << "warning: " << kMetricNames[static_cast<int>(row.metric)]
          << " has fewer than 2 defined values on one side, skipped\n";
    else if (!row.oa)
      err << "warning: " << kMetricNames[static_cast<int>(row.metric)]
          << " is degenerate on one side, overlap left blank\n";
  }
  detail::emitTable(table, opts.aligned, opts.out, out);

  const bool clean =
      model.diagnostics.empty() && reference.diagnostics.empty();
  return clean ? 0 : 1;
}

struct TestOptions {
  std::vector<std::string> group_a;
  std::vector<std::string> group_b;
  std::string out;
  double alpha = 0.05;
  bool use_ttest = false;
  bool aligned = false;
};

namespace detail {

/// Reads the `oa` column of a comparison table back in, keyed by metric name.
inline std::vector<std::optional<double>> readOaColumn(
    const std::string& path) {
  const std::string bytes = readFileBytes(path);
  std::istringstream stream(bytes);
  std::string line;
  if (!std::getline(stream, line)) throw Error(path + ": empty table");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = splitTabs(line);
  std::size_t metric_col = header.size();
  std::size_t oa_col = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "metric") metric_col = i;
    if (header[i] == "oa") oa_col = i;
  }
  if (metric_col == header.size() || oa_col == header.size())
    throw Error(path + ": not a comparison table (no metric/oa columns)");

  std::vector<std::optional<double>> oa(kMetricCount);
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = splitTabs(line);
    if (cells.size() <= std::max(metric_col, oa_col))
      throw Error(path + ": short row in comparison table");
    for (int m = 0; m < kMetricCount; ++m) {
      if (cells[metric_col] != kMetricNames[m]) continue;
      if (!cells[oa_col].empty()) oa[m] = std::stod(cells[oa_col]);
      break;
    }
  }
  return oa;
}

}  // namespace detail

/// Runs a paired significance test per metric over the overlapping-area
/// columns of two equally long lists of comparison tables, then applies the
/// Holm step-down correction across the metrics that were testable. Metrics
/// with too few usable pairs are skipped with a warning.
inline int cmdTest(const TestOptions& opts, std::ostream& out,
                   std::ostream& err) {
  if (opts.group_a.size() != opts.group_b.size())
    throw ConfigError("the two groups need the same number of tables");
  if (opts.group_a.empty()) throw ConfigError("no comparison tables given");

  std::vector<std::vector<std::optional<double>>> a_tables;
  for (const std::string& path : opts.group_a)
    a_tables.push_back(detail::readOaColumn(path));
  std::vector<std::vector<std::optional<double>>> b_tables;
  for (const std::string& path : opts.group_b)
    b_tables.push_back(detail::readOaColumn(path));

  struct Tested {
    int metric;
    double statistic;
    double p_value;
    std::size_t pairs;
  };
  std::vector<Tested> tested;
  for (int m = 0; m < kMetricCount; ++m) {
    std::vector<double> a_values;
    std::vector<double> b_values;
    for (std::size_t i = 0; i < a_tables.size(); ++i) {
      if (a_tables[i][m] && b_tables[i][m]) {
        a_values.push_back(*a_tables[i][m]);
        b_values.push_back(*b_tables[i][m]);
      }
    }
    try {
      if (opts.use_ttest) {
        const TTestResult result = pairedTTest(a_values, b_values);
        tested.push_back(
            {m, result.statistic, result.p_value, a_values.size()});
      } else {
        const WilcoxonResult result = wilcoxonSignedRank(a_values, b_values);
        tested.push_back({m, result.statistic, result.p_value,
                          static_cast<std::size_t>(result.usable_pairs)});
      }
    } catch (const StatsError& e) {
      err << "warning: " << kMetricNames[m] << " skipped: " << e.what()
          << '\n';
    }
  }

  std::vector<double> p_values;
  for (const Tested& t : tested) p_values.push_back(t.p_value);
  const std::vector<HolmDecision> decisions =
      holmBonferroni(p_values, opts.alpha);

  detail::TableBuilder table(
      {"metric", "pairs", "statistic", "p", "adjusted_alpha", "rejected"});
  for (std::size_t i = 0; i < tested.size(); ++i) {
    table.addRow({kMetricNames[tested[i].metric],
                  std::to_string(tested[i].pairs),
                  formatDouble(tested[i].statistic),
                  formatDouble(tested[i].p_value),
                  formatDouble(decisions[i].adjusted_alpha),
                  decisions[i].rejected ? "true" : "false"});
  }
  detail::emitTable(table, opts.aligned, opts.out, out);
  return 0;
}

}  // namespace melotok
