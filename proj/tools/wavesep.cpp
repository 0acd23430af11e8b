// Command-line entry point: synth-data, train, separate, evaluate, grad-check.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "wavesep/data/manifest.hpp"
#include "wavesep/data/synth.hpp"
#include "wavesep/data/track_dir.hpp"
#include "wavesep/dsp/wav_io.hpp"
#include "wavesep/error.hpp"
#include "wavesep/infer/separate.hpp"
#include "wavesep/metrics/evaluate.hpp"
#include "wavesep/train/trainer.hpp"
#include "wavesep/util/memory.hpp"
#include "wavesep/verify/suite.hpp"

namespace fs = std::filesystem;
using namespace wavesep;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitIo = 3;

struct SynthArgs {
  fs::path out;
  std::size_t tracks = 20;
  double duration = 30.0;
  int sample_rate = 8000;
  std::uint64_t seed = 0;
  std::optional<std::size_t> valid;
  std::optional<std::size_t> test;
  bool mono = false;
  std::string encoding = "float32";
};

int run_synth(const SynthArgs& a) {
  std::vector<data::Split> splits;
  if (a.valid || a.test) {
    const std::size_t valid = a.valid.value_or(0), test = a.test.value_or(0);
    if (valid + test >= a.tracks) throw std::invalid_argument("--valid plus --test must leave training tracks");
    splits = data::assign_splits(a.tracks, a.tracks - valid - test, valid);
  } else {
    splits = data::default_splits(a.tracks);
  }
  auto entries = data::synthetic_entries(splits, a.duration, a.sample_rate, a.seed);
  const auto encoding = a.encoding == "pcm16" ? dsp::WavEncoding::pcm16 : dsp::WavEncoding::float32;
  for (auto& e : entries) {
    const fs::path rel = fs::path(data::split_name(e.split)) / e.id;
    data::SourceSet set = data::synth_track(*e.seed, e.duration_seconds, e.sample_rate, !a.mono);
    data::save_track_dir(set, a.out / rel, encoding);
    e.path = rel;
  }
  data::DatasetManifest(entries, a.out).save(a.out / "manifest.txt");
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& e : entries) ++counts[static_cast<int>(e.split)];
  std::printf("wrote %zu tracks to %s (train %zu, valid %zu, test %zu)\n", entries.size(), a.out.string().c_str(),
              counts[0], counts[1], counts[2]);
  return kExitOk;
}

struct TrainArgs {
  fs::path config;
  bool resume = false;
  int threads = 1;
  bool quiet = false;
};

int run_train(const TrainArgs& a) {
  const train::TrainConfig config = train::TrainConfig::load(a.config);
  train::TrainOptions options;
  options.resume = a.resume;
  options.threads = a.threads;
  options.progress = a.quiet ? nullptr : &std::cout;
  const auto result = train::train(config, options);
  std::printf("best epoch %d, valid L1 %.6g; checkpoint %s\n", result.best_epoch, result.best_valid_l1,
              (config.checkpoint_dir / "best").string().c_str());
  return kExitOk;
}

struct SeparateArgs {
  fs::path model;
  fs::path input;
  fs::path out;
  infer::SeparateOptions options;
};

int run_separate(const SeparateArgs& a) {
  for (const auto& p : infer::separate_file(a.model, a.input, a.out, a.options)) std::printf("%s\n", p.string().c_str());
  return kExitOk;
}

struct EvaluateArgs {
  fs::path estimates;
  fs::path references;
  fs::path out;
  std::optional<fs::path> summary;
  bool baseline = false;
  metrics::EvalOptions options;
  int threads = 1;
};

int run_evaluate(const EvaluateArgs& a) {
  if (!a.baseline && a.estimates.empty()) throw std::invalid_argument("--estimates is required unless --baseline is set");
  const metrics::EvalReport report = a.baseline
                                         ? metrics::evaluate_mixture_baseline(a.references, a.options, a.threads)
                                         : metrics::evaluate_directories(a.estimates, a.references, a.options, a.threads);
  metrics::write_report_csv(report, a.out);
  const std::string summary = metrics::report_summary(report);
  if (a.summary) {
    std::FILE* f = std::fopen(a.summary->string().c_str(), "w");
    if (!f || std::fputs(summary.c_str(), f) < 0) throw IoError("cannot write " + a.summary->string());
    std::fclose(f);
  }
  std::cout << summary;
  return kExitOk;
}

struct GradArgs {
  std::vector<std::string> ops;
  std::string model;
  bool adjoint = false;
  bool list = false;
  std::uint64_t seed = 7;
};

int run_grad_check(const GradArgs& a) {
  if (a.list) {
    for (const auto& n : verify::grad_op_names()) std::printf("%s\n", n.c_str());
    return kExitOk;
  }
  std::vector<verify::CheckOutcome> outcomes;
  const bool everything = a.ops.empty() && a.model.empty() && !a.adjoint;
  if (everything) {
    outcomes = verify::grad_check_ops(a.seed);
  } else {
    for (const auto& op : a.ops) outcomes.push_back(verify::grad_check_op(op, a.seed));
  }
  if (everything || a.model == "desk" || a.model == "demucs") {
    outcomes.push_back(verify::grad_check_model(verify::grad_check_demucs(), a.seed));
  }
  if (everything || a.model == "desk" || a.model == "convtasnet") {
    outcomes.push_back(verify::grad_check_model(verify::grad_check_convtasnet(), a.seed));
  }
  if (everything || a.adjoint) {
    for (auto& o : verify::adjoint_checks()) outcomes.push_back(std::move(o));
  }
  std::cout << verify::format_table(outcomes);
  for (const auto& o : outcomes) {
    if (!o.passed) return kExitNumeric;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  util::keep_freed_memory();
  CLI::App app{"Waveform-domain music source separation"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  SynthArgs synth;
  auto* cmd_synth = app.add_subcommand("synth-data", "Generate a synthetic multi-stem dataset and manifest");
  cmd_synth->add_option("--out", synth.out, "Output directory")->required();
  cmd_synth->add_option("--tracks", synth.tracks, "Number of tracks")->check(CLI::PositiveNumber);
  cmd_synth->add_option("--duration", synth.duration, "Track length in seconds")->check(CLI::Range(1.0, 3600.0));
  cmd_synth->add_option("--sr", synth.sample_rate, "Sample rate in Hz")->check(CLI::Range(1000, 192000));
  cmd_synth->add_option("--seed", synth.seed, "Base seed");
  cmd_synth->add_option("--valid", synth.valid, "Validation tracks (default floor(15%))");
  cmd_synth->add_option("--test", synth.test, "Test tracks (default floor(15%))");
  cmd_synth->add_flag("--mono", synth.mono, "Write mono tracks");
  cmd_synth->add_option("--encoding", synth.encoding, "WAV sample format")
      ->check(CLI::IsMember({"float32", "pcm16"}));

  TrainArgs tr;
  auto* cmd_train = app.add_subcommand("train", "Train a model from a config file");
  cmd_train->add_option("--config", tr.config, "Config file")->required();
  cmd_train->add_flag("--resume", tr.resume, "Continue from <checkpoint>/last");
  cmd_train->add_option("--threads", tr.threads, "Worker cap")->check(CLI::PositiveNumber);
  cmd_train->add_flag("--quiet", tr.quiet, "No per-epoch progress");

  SeparateArgs sep;
  auto* cmd_sep = app.add_subcommand("separate", "Separate a mixture WAV into stems");
  cmd_sep->add_option("--model", sep.model, "Saved model directory (e.g. <checkpoint>/best)")
      ->required();
  cmd_sep->add_option("--input", sep.input, "Mixture WAV")->required();
  cmd_sep->add_option("--out", sep.out, "Output directory")->required();
  cmd_sep->add_option("--shifts", sep.options.shifts, "Random shifts to average (0 = off)")
      ->check(CLI::NonNegativeNumber);
  cmd_sep->add_option("--max-shift", sep.options.max_shift_seconds, "Largest shift in seconds")
      ->check(CLI::NonNegativeNumber);
  cmd_sep->add_option("--seed", sep.options.seed, "Shift seed");
  cmd_sep->add_option("--chunk", sep.options.chunk_seconds, "Conv-Tasnet chunk length in seconds")
      ->check(CLI::PositiveNumber);
  cmd_sep->add_option("--threads", sep.options.threads, "Worker cap")->check(CLI::PositiveNumber);

  EvaluateArgs ev;
  auto* cmd_eval = app.add_subcommand("evaluate", "Framewise SDR/SIR/SAR of estimates against references");
  cmd_eval->add_option("--estimates", ev.estimates, "Estimate directory (one sub-directory per track)");
  cmd_eval->add_option("--references", ev.references, "Reference track directory or dataset split directory")
      ->required();
  cmd_eval->add_option("--out", ev.out, "Report CSV")->required();
  cmd_eval->add_option("--summary", ev.summary, "Also write the summary text here");
  cmd_eval->add_flag("--baseline", ev.baseline, "Score the mixture itself as every estimate");
  cmd_eval->add_option("--frame", ev.options.frame_seconds, "Frame length in seconds")->check(CLI::PositiveNumber);
  cmd_eval->add_option("--hop", ev.options.hop_seconds, "Frame hop in seconds")->check(CLI::PositiveNumber);
  cmd_eval->add_option("--threads", ev.threads, "Worker cap")->check(CLI::PositiveNumber);

  GradArgs gc;
  auto* cmd_grad = app.add_subcommand("grad-check", "Finite-difference and adjoint checks");
  cmd_grad->add_option("--op", gc.ops, "Op to check (repeatable)");
  cmd_grad->add_option("--model", gc.model, "Whole-model check")->check(CLI::IsMember({"desk", "demucs", "convtasnet"}));
  cmd_grad->add_flag("--adjoint", gc.adjoint, "Run the adjoint suite");
  cmd_grad->add_flag("--list", gc.list, "List op names");
  cmd_grad->add_option("--seed", gc.seed, "Input seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (cmd_synth->parsed()) return run_synth(synth);
    if (cmd_train->parsed()) return run_train(tr);
    if (cmd_sep->parsed()) return run_separate(sep);
    if (cmd_eval->parsed()) return run_evaluate(ev);
    if (cmd_grad->parsed()) return run_grad_check(gc);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
