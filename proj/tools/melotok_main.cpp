// Command-line front end: argument parsing only, the command logic lives in
// melotok/commands.hpp.

#include <cstddef>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "melotok/commands.hpp"
#include "melotok/errors.hpp"

namespace {

void addConfigFlags(CLI::App* cmd, melotok::ConfigFlags& flags) {
  cmd->add_option("--pitch", flags.pitch, "pitch spelling: number or class-octave")
      ->check(CLI::IsMember({"number", "class-octave"}));
  cmd->add_option("--pc", flags.pc,
                  "position complexity: single, multiple or undefined")
      ->check(CLI::IsMember({"single", "multiple", "undefined"}))
      ->each([&flags](const std::string&) { flags.pc_set = true; });
  cmd->add_option("--pr", flags.pr, "grid positions per bar");
  cmd->add_option("--dr", flags.dr, "duration steps per beat");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"configurable melody token encodings and evaluation"};
  app.require_subcommand(1);

  melotok::VocabOptions vocab_opts;
  melotok::ConfigFlags vocab_flags;
  CLI::App* vocab = app.add_subcommand("vocab", "list the token vocabulary");
  addConfigFlags(vocab, vocab_flags);
  vocab->add_flag("--table", vocab_opts.aligned, "align columns for reading");
  vocab->add_option("--out", vocab_opts.out, "write the table to this file");

  melotok::PrepareOptions prepare_opts;
  bool keep_other_meters = false;
  CLI::App* prepare = app.add_subcommand(
      "prepare", "load, filter and split a corpus into train/test files");
  prepare->add_option("input", prepare_opts.input, "melody file or MIDI file")
      ->required();
  prepare->add_option("--out-dir", prepare_opts.out_dir, "output directory")
      ->required();
  prepare->add_option("--train-fraction", prepare_opts.train_fraction,
                      "fraction of melodies for the training half");
  prepare->add_option("--seed", prepare_opts.seed, "shuffle seed");
  prepare->add_flag("--keep-other-meters", keep_other_meters,
                    "keep melodies declared in meters other than 4/4");

  melotok::EncodeOptions encode_opts;
  melotok::ConfigFlags encode_flags;
  CLI::App* encode =
      app.add_subcommand("encode", "encode a melody file into token lines");
  encode->add_option("input", encode_opts.input, "melody file")->required();
  encode->add_option("--out", encode_opts.tokens_out, "token file to write")
      ->required();
  encode->add_option("--ids", encode_opts.ids_out,
                     "id file to write (default: <out>.ids)");
  encode->add_option("--max-len", encode_opts.max_len,
                     "truncate each sequence to at most this many tokens");
  addConfigFlags(encode, encode_flags);

  melotok::DecodeOptions decode_opts;
  melotok::ConfigFlags decode_flags;
  CLI::App* decode =
      app.add_subcommand("decode", "decode a token file into a melody file");
  decode->add_option("input", decode_opts.input, "token file")->required();
  decode->add_option("--out", decode_opts.out, "melody file to write")
      ->required();
  addConfigFlags(decode, decode_flags);

  melotok::MetricsOptions metrics_opts;
  melotok::ConfigFlags metrics_flags;
  CLI::App* metrics = app.add_subcommand(
      "metrics", "report the nine melody metrics per melody");
  metrics->add_option("input", metrics_opts.input, "melody or token file")
      ->required();
  metrics->add_flag("--from-tokens", metrics_opts.from_tokens,
                    "treat the input as a token file");
  metrics->add_flag("--harmonic-minor", metrics_opts.harmonic_minor,
                    "include harmonic minor in scale consistency");
  metrics->add_flag("--table", metrics_opts.aligned,
                    "align columns for reading");
  metrics->add_option("--out", metrics_opts.out, "write the table to this file");
  addConfigFlags(metrics, metrics_flags);

  melotok::CompareOptions compare_opts;
  melotok::ConfigFlags compare_flags;
  CLI::App* compare = app.add_subcommand(
      "compare", "compare metric distributions of two melody sets");
  compare->add_option("model", compare_opts.model, "model melody or token file")
      ->required();
  compare->add_option("reference", compare_opts.reference,
                      "reference melody or token file")
      ->required();
  compare->add_flag("--from-tokens", compare_opts.from_tokens,
                    "treat both inputs as token files");
  compare->add_flag("--harmonic-minor", compare_opts.harmonic_minor,
                    "include harmonic minor in scale consistency");
  compare->add_flag("--table", compare_opts.aligned,
                    "align columns for reading");
  compare->add_option("--out", compare_opts.out, "write the table to this file");
  addConfigFlags(compare, compare_flags);

  melotok::TestOptions test_opts;
  CLI::App* test = app.add_subcommand(
      "test", "paired significance tests over comparison tables");
  test->add_option("-a,--group-a", test_opts.group_a,
                   "comparison tables for the first group")
      ->required();
  test->add_option("-b,--group-b", test_opts.group_b,
                   "comparison tables for the second group")
      ->required();
  test->add_option("--alpha", test_opts.alpha, "family-wise error rate");
  test->add_flag("--ttest", test_opts.use_ttest,
                 "use a paired t-test instead of the Wilcoxon test");
  test->add_flag("--table", test_opts.aligned, "align columns for reading");
  test->add_option("--out", test_opts.out, "write the table to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (vocab->parsed()) {
      vocab_opts.config = vocab_flags.resolve();
      return melotok::cmdVocab(vocab_opts, std::cout);
    }
    if (prepare->parsed()) {
      prepare_opts.meter_filter = !keep_other_meters;
      return melotok::cmdPrepare(prepare_opts, std::cout, std::cerr);
    }
    if (encode->parsed()) {
      encode_opts.config = encode_flags.resolve();
      return melotok::cmdEncode(encode_opts, std::cerr);
    }
    if (decode->parsed()) {
      decode_opts.config = decode_flags.resolve();
      return melotok::cmdDecode(decode_opts, std::cerr);
    }
    if (metrics->parsed()) {
      metrics_opts.config = metrics_flags.resolve();
      return melotok::cmdMetrics(metrics_opts, std::cout, std::cerr);
    }
    if (compare->parsed()) {
      compare_opts.config = compare_flags.resolve();
      return melotok::cmdCompare(compare_opts, std::cout, std::cerr);
    }
    if (test->parsed()) {
      return melotok::cmdTest(test_opts, std::cout, std::cerr);
    }
  } catch (const melotok::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
