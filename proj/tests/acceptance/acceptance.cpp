// Acceptance run: one PASS/FAIL line per criterion. Trains both desk models,
// so a full run takes about an hour on one core. Pass criterion numbers as
// arguments to run a subset (4, 6 and 7 share the trained models).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/least_squares.hpp"
#include "wavesep/data/augment.hpp"
#include "wavesep/data/manifest.hpp"
#include "wavesep/data/sampler.hpp"
#include "wavesep/data/synth.hpp"
#include "wavesep/data/track_dir.hpp"
#include "wavesep/infer/separate.hpp"
#include "wavesep/metrics/bss_eval.hpp"
#include "wavesep/metrics/evaluate.hpp"
#include "wavesep/metrics/oracles.hpp"
#include "wavesep/models/convtasnet.hpp"
#include "wavesep/models/demucs.hpp"
#include "wavesep/train/config.hpp"
#include "wavesep/train/trainer.hpp"
#include "wavesep/util/memory.hpp"
#include "wavesep/util/parallel.hpp"
#include "wavesep/verify/suite.hpp"

namespace fs = std::filesystem;
using namespace wavesep;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kTrainBudgetSeconds = 1800.0;
const dsp::StftParams kOracleStft{1024, 256};

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Desk dataset: 12 train, 4 valid and 4 test tracks of 30 s at 8 kHz, stereo.
data::DatasetManifest desk_manifest() {
  return data::DatasetManifest(data::synthetic_entries(data::assign_splits(20, 12, 4), 30.0, 8000, 1));
}

std::vector<data::SourceSet> load_split(const data::DatasetManifest& m, data::Split s) {
  std::vector<data::SourceSet> out;
  for (const auto& e : m.split(s)) out.push_back(m.load_track(e));
  return out;
}

using Medians = std::map<std::string, double>;

Medians medians(const metrics::EvalReport& r) {
  Medians m;
  for (const auto& name : data::kStemNames) {
    m[name] = r.global_median(name, metrics::Metric::sdr).value_or(-metrics::kMaxDb);
  }
  return m;
}

std::string show(const Medians& m) {
  std::string s;
  for (const auto& name : data::kStemNames) s += " " + name + " " + fmt("%.2f", m.at(name));
  return s;
}

metrics::EvalReport score(const std::vector<data::SourceSet>& refs,
                          const std::function<data::SourceSet(const data::SourceSet&)>& estimate) {
  std::vector<metrics::TrackPair> pairs;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    pairs.push_back({"test" + std::to_string(i), estimate(refs[i]), refs[i]});
  }
  return metrics::evaluate_tracks(pairs, {}, util::hardware_threads());
}

class Acceptance {
 public:
  Acceptance(fs::path source_dir, fs::path work) : source_dir_(std::move(source_dir)), work_(std::move(work)) {
    fs::create_directories(work_);
  }

  Outcome gradient_suite() {
    const auto start = Clock::now();
    auto outcomes = verify::grad_check_ops();
    outcomes.push_back(verify::grad_check_model(verify::grad_check_demucs()));
    outcomes.push_back(verify::grad_check_model(verify::grad_check_convtasnet()));
    const double elapsed = seconds_since(start);
    std::cout << verify::format_table(outcomes);
    double worst = 0.0;
    int failed = 0;
    for (const auto& o : outcomes) {
      worst = std::max(worst, o.error);
      if (!o.passed) ++failed;
    }
    return {failed == 0 && elapsed <= 300.0,
            std::to_string(outcomes.size() - 2) + " ops and 2 whole models, worst rel err " + fmt("%.2e", worst) +
                " (limit 1e-4), " + std::to_string(failed) + " failed, " + fmt("%.1f", elapsed) + " s (limit 300 s)"};
  }

  Outcome adjoint_suite() {
    const auto outcomes = verify::adjoint_checks(100);
    std::cout << verify::format_table(outcomes);
    double worst = 0.0;
    bool ok = true;
    for (const auto& o : outcomes) {
      worst = std::max(worst, o.error);
      ok = ok && o.passed;
    }
    return {ok, std::to_string(outcomes.size()) + " operators x 100 instances, worst " + fmt("%.2e", worst) +
                    " (limit 1e-6)"};
  }

  Outcome init_property() {
    double worst = 0.0;
    bool identity = true;
    double min_gain = 1e300;
    std::string ratios;
    const auto spec = models::DemucsSpec::desk();
    auto plain = spec;
    plain.rescale = false;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const auto o = verify::rescale_identity_check(spec, seed);
      worst = std::max(worst, o.error);
      identity = identity && o.passed;
      const double with = verify::demucs_feature_scale(spec, seed).ratio();
      const double without = verify::demucs_feature_scale(plain, seed).ratio();
      std::printf("  seed %llu: last/first feature std %.3f rescaled, %.3f plain, gain %.2fx\n",
                  static_cast<unsigned long long>(seed), with, without, with / without);
      min_gain = std::min(min_gain, with / without);
    }
    return {identity && min_gain >= 4.0, "std identity worst rel err " + fmt("%.1e", worst) +
                                             " (limit 1e-6); feature-ratio improvement min " + fmt("%.2f", min_gain) +
                                             "x over 5 seeds (need >= 4x)"};
  }

  Outcome metrics_oracle() {
    std::mt19937_64 rng(2024);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      std::vector<std::vector<double>> refs(4, std::vector<double>(64));
      std::vector<double> est(64);
      for (auto& r : refs)
        for (double& v : r) v = normal(rng);
      for (double& v : est) v = normal(rng);
      const std::vector<std::span<const double>> spans(refs.begin(), refs.end());
      const std::size_t j = static_cast<std::size_t>(i % 4);
      const auto d = metrics::decompose(est, spans, j);
      const auto full = testing::least_squares_projection(est, spans);
      const auto target = testing::least_squares_projection(est, {spans[j]});
      std::vector<double> proj(64), interf(64), artif(64);
      for (std::size_t k = 0; k < 64; ++k) {
        proj[k] = d.target[k] + d.interference[k];
        interf[k] = full[k] - target[k];
        artif[k] = est[k] - full[k];
      }
      worst = std::max({worst, testing::relative_error(proj, full), testing::relative_error(d.target, target),
                        testing::relative_error(d.interference, interf), testing::relative_error(d.artifacts, artif)});
    }
    // Hand cases from the SDR/SIR/SAR definitions.
    bool hand = true;
    std::vector<double> s0{1, 0, 0, 0}, s1{0, 1, 0, 0};
    const std::vector<std::span<const double>> basis{s0, s1};
    const auto perfect = metrics::decompose(s0, basis, 0);
    hand = hand && metrics::sdr(perfect) == 100.0 && metrics::sir(perfect) == 100.0 && metrics::sar(perfect) == 100.0;
    std::vector<double> noisy{1, 0, 1, 0};
    const auto n = metrics::decompose(noisy, basis, 0);
    hand = hand && metrics::sdr(n) == 0.0 && metrics::sar(n) == 0.0 && metrics::sir(n) == 100.0;
    std::vector<double> mixed{1, 1, 0, 0};
    const auto m = metrics::decompose(mixed, basis, 0);
    hand = hand && m.target == s0 && m.interference == s1 && metrics::sdr(m) == 0.0 && metrics::sir(m) == 0.0;
    const metrics::Decomposition ten{{1, 0, 0}, {0, 1, 0}, {0, 0, 3}};
    hand = hand && std::abs(metrics::sdr(ten) + 10.0) < 1e-12;
    return {worst <= 1e-8 && hand, "1000 random 4-source instances, worst rel err " + fmt("%.2e", worst) +
                                       " (limit 1e-8); hand cases " + (hand ? "exact" : "MISMATCH")};
  }

  Outcome pipeline_integrity() {
    const auto manifest = desk_manifest();
    double worst = 0.0;
    std::vector<data::SourceSet> train;
    for (const auto& e : manifest.entries()) {
      auto t = manifest.load_track(e);
      worst = std::max(worst, t.mixture_error());
      if (e.split == data::Split::train) train.push_back(std::move(t));
    }
    // Disk round trip.
    data::save_track_dir(train.front(), work_ / "integrity_track");
    const auto loaded = data::load_track_dir(work_ / "integrity_track");
    worst = std::max(worst, loaded.mixture_error);
    fs::remove_all(work_ / "integrity_track");

    // Sampler arithmetic, extracts, augmentation and batches of two epochs.
    std::vector<std::size_t> lengths;
    for (const auto& t : train) lengths.push_back(t.length());
    const data::ExtractOptions opts;
    bool counts = true;
    std::size_t extracts = 0;
    for (std::uint64_t epoch = 0; epoch < 2; ++epoch) {
      const auto plan = data::plan_epoch(lengths, 8000, opts, 7, epoch);
      std::vector<int> per(train.size(), 0);
      for (const auto& r : plan.extracts) ++per[r.track];
      for (int c : per) counts = counts && c == static_cast<int>(std::floor(30.0 - 11.0)) + 1;
      for (std::size_t b = 0; b + 4 <= plan.extracts.size(); b += 4) {
        std::vector<data::SourceSet> items;
        for (std::size_t k = b; k < b + 4; ++k) {
          items.push_back(data::take_extract(train[plan.extracts[k].track], plan.extracts[k], opts));
          worst = std::max(worst, items.back().mixture_error());
        }
        const auto aug = data::augment_batch(items, {}, epoch * 1000 + b);
        for (const auto& a : aug) worst = std::max(worst, a.mixture_error());
        const auto batch = train::make_batch(aug);
        const std::size_t len = batch.mixture.shape[2], ch = batch.mixture.shape[1];
        for (std::size_t i = 0; i < 4; ++i)
          for (std::size_t c = 0; c < ch; ++c)
            for (std::size_t t = 0; t < len; ++t) {
              double sum = 0.0;
              for (std::size_t s = 0; s < 4; ++s) sum += batch.sources.data[((i * 4 + s) * ch + c) * len + t];
              worst = std::max(worst, std::abs(sum - batch.mixture.data[(i * ch + c) * len + t]));
            }
        extracts += 4;
      }
    }
    // Involutions on every stem of every training track.
    bool involution = true;
    for (const auto& t : train) {
      for (const auto& [name, w] : t.stems()) {
        auto u = w;
        data::flip_sign(u);
        data::flip_sign(u);
        involution = involution && u.samples() == w.samples();
        data::swap_channels(u);
        data::swap_channels(u);
        involution = involution && u.samples() == w.samples();
      }
    }
    return {worst <= 1e-6 && counts && involution,
            "max mixture error " + fmt("%.1e", worst) + " over synth, disk, " + std::to_string(extracts) +
                " extracts, augmentation and batches (limit 1e-6); 20 extracts per 30 s track " +
                (counts ? "yes" : "NO") + "; involutions " + (involution ? "identity" : "BROKEN")};
  }

  // Criterion 7 and the models it leaves behind for 4 and 6.
  Outcome end_to_end() {
    const auto manifest = desk_manifest();
    test_ = load_split(manifest, data::Split::test);
    baseline_ = medians(score(test_, [](const data::SourceSet& t) {
      data::SourceSet s;
      for (const auto& n : data::kStemNames) s.set(n, *t.mixture());
      return s;
    }));
    std::cout << "  baseline" << show(baseline_) << "\n";
    bool ok = true;
    std::string detail;
    for (const char* kind : {"demucs", "convtasnet"}) {
      auto config = train::TrainConfig::load(source_dir_ / "configs" / (std::string(kind) + "_desk.cfg"));
      config.checkpoint_dir = work_ / kind;
      fs::remove_all(config.checkpoint_dir);
      train::TrainOptions options;
      options.progress = &std::cout;
      options.threads = util::hardware_threads();
      const auto start = Clock::now();
      const auto result = train::train(config, manifest, options);
      const double wall = seconds_since(start);
      auto model = models::load_model<float>(config.checkpoint_dir / "best");
      const auto plain = medians(score(test_, [&](const data::SourceSet& t) {
        return infer::separate(*model, *t.mixture(), {});
      }));
      int better = 0;
      for (const auto& n : data::kStemNames) better += plain.at(n) >= baseline_.at(n) + 3.0 ? 1 : 0;
      std::cout << "  " << kind << show(plain) << "\n";
      const double drop = result.best_valid_l1 / result.log.front().valid_l1;
      const bool model_ok = better >= 3 && wall <= kTrainBudgetSeconds;
      ok = ok && model_ok;
      detail += std::string(kind) + ": " + std::to_string(better) + "/4 sources >= baseline+3 dB, trained " +
                fmt("%.0f", wall) + " s, valid L1 x" + fmt("%.2f", drop) + "; ";
      trained_[kind] = std::move(model);
      plain_[kind] = plain;
      valid_drop_l1_ = kind == std::string("demucs") ? drop : valid_drop_l1_;
    }
    // Loss ablation: the same Demucs config with L2, on a shorter budget.
    auto l2 = train::TrainConfig::load(source_dir_ / "configs" / "demucs_desk.cfg");
    l2.loss = train::LossKind::l2;
    l2.max_wall_seconds = 300.0;
    l2.checkpoint_dir = work_ / "demucs_l2";
    fs::remove_all(l2.checkpoint_dir);
    train::TrainOptions quiet;
    quiet.threads = util::hardware_threads();
    const auto l2_result = train::train(l2, manifest, quiet);
    const double l2_drop = l2_result.best_valid_l1 / l2_result.log.front().valid_l1;
    const bool converge = l2_drop <= 0.5 && valid_drop_l1_ <= 0.5;
    detail += "L1/L2 valid L1 ratio to untrained " + fmt("%.2f", valid_drop_l1_) + "/" + fmt("%.2f", l2_drop) +
              " (converged if <= 0.5)";
    return {ok && converge, detail};
  }

  Outcome equivariance() {
    if (trained_.empty()) return {false, "needs the models of criterion 7"};
    auto& tasnet = *trained_.at("convtasnet");
    auto& demucs = *trained_.at("demucs");
    const auto spec = std::get<models::ConvTasnetSpec>(tasnet.spec());
    const auto margin = static_cast<std::size_t>(spec.receptive_field_samples()) + 2000;
    const auto probe = verify::equivariance_probe(2, 16000, margin, 5);
    double tasnet_dev = 0.0, demucs_dev = 0.0;
    for (long long k : {1LL, 2LL, 7LL, 50LL, -3LL}) {
      const long long shift = k * spec.frontend_stride;
      tasnet_dev = std::max(tasnet_dev, models::check_equivariance(tasnet, probe, shift));
      demucs_dev = std::max(demucs_dev, models::check_equivariance(demucs, probe, shift));
    }
    infer::SeparateOptions stab;
    stab.shifts = 10;
    stab.threads = util::hardware_threads();
    const auto stabilized = medians(score(test_, [&](const data::SourceSet& t) {
      return infer::separate(demucs, *t.mixture(), stab);
    }));
    std::cout << "  demucs stabilized" << show(stabilized) << "\n";
    bool stab_ok = true;
    double worst_delta = 1e300;
    for (const auto& n : data::kStemNames) {
      const double delta = stabilized.at(n) - plain_.at("demucs").at(n);
      worst_delta = std::min(worst_delta, delta);
      stab_ok = stab_ok && delta >= -0.05;
    }
    return {tasnet_dev <= 1e-4 && demucs_dev > tasnet_dev && stab_ok,
            "Conv-Tasnet deviation " + fmt("%.2e", tasnet_dev) + " (limit 1e-4), Demucs " + fmt("%.2e", demucs_dev) +
                "; stabilized S=10 minus plain SDR, worst source " + fmt("%+.2f", worst_delta) + " dB (limit -0.05)"};
  }

  Outcome irm_topline() {
    if (trained_.empty()) return {false, "needs the models of criterion 7"};
    const auto irm = medians(score(test_, [](const data::SourceSet& t) {
      return metrics::irm_oracle(t, *t.mixture(), kOracleStft);
    }));
    std::cout << "  irm" << show(irm) << "\n";
    bool ok = true;
    double margin = 1e300;
    for (const auto& n : data::kStemNames) {
      for (const auto& [kind, m] : plain_) {
        margin = std::min(margin, irm.at(n) - m.at(n));
        ok = ok && irm.at(n) > m.at(n);
      }
    }
    return {ok, "smallest IRM lead over a trained model " + fmt("%+.2f", margin) + " dB across 4 sources x 2 models"};
  }

  Outcome determinism() {
    // Two complete train -> separate -> evaluate runs per model kind on a
    // reduced dataset; checkpoints and report CSVs are compared byte for byte.
    const data::DatasetManifest manifest(data::synthetic_entries(data::assign_splits(6, 4, 1), 12.0, 8000, 77));
    const auto test = load_split(manifest, data::Split::test);
    std::size_t files = 0;
    bool same = true;
    for (const char* kind : {"demucs", "convtasnet"}) {
      std::vector<fs::path> runs;
      for (int r = 0; r < 2; ++r) {
        auto config = train::TrainConfig::load(source_dir_ / "configs" / (std::string(kind) + "_desk.cfg"));
        config.epochs = 2;
        config.max_wall_seconds = 0.0;
        // Both runs train in the same place (the path is recorded in the
        // checkpoint) and are moved aside afterwards.
        const fs::path dir = work_ / "determinism";
        const fs::path kept = work_ / ("determinism_" + std::string(kind) + std::to_string(r));
        fs::remove_all(dir);
        fs::remove_all(kept);
        config.checkpoint_dir = dir / "run";
        train::TrainOptions options;
        options.threads = util::hardware_threads();
        train::train(config, manifest, options);
        auto model = models::load_model<float>(config.checkpoint_dir / "best");
        infer::SeparateOptions sep;
        sep.shifts = 3;
        sep.seed = 9;
        sep.threads = util::hardware_threads();
        std::vector<metrics::TrackPair> pairs;
        for (std::size_t i = 0; i < test.size(); ++i) {
          pairs.push_back({"t" + std::to_string(i), infer::separate(*model, *test[i].mixture(), sep), test[i]});
        }
        metrics::write_report_csv(metrics::evaluate_tracks(pairs), dir / "report.csv");
        fs::rename(dir, kept);
        runs.push_back(kept);
      }
      for (const auto& entry : fs::recursive_directory_iterator(runs[0])) {
        if (!entry.is_regular_file() || entry.path().filename() == "log.csv") continue;
        const auto rel = fs::relative(entry.path(), runs[0]);
        if (read_bytes(entry.path()) != read_bytes(runs[1] / rel)) {
          std::cout << "  differs: " << kind << "/" << rel.generic_string() << "\n";
          same = false;
        }
        ++files;
      }
      if (same)
        for (const auto& r : runs) fs::remove_all(r);
    }
    return {same && files > 0, std::to_string(files) + " checkpoint and report files compared across two runs per model: " +
                                   (same ? "bit-identical" : "DIFFERENT")};
  }

 private:
  static std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }

  fs::path source_dir_;
  fs::path work_;
  std::vector<data::SourceSet> test_;
  Medians baseline_;
  std::map<std::string, std::unique_ptr<models::SeparationModel<float>>> trained_;
  std::map<std::string, Medians> plain_;
  double valid_drop_l1_ = 1.0;
};

}  // namespace

int main(int argc, char** argv) {
  util::keep_freed_memory();
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::stoi(argv[i]));
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  if (selected.count(4) || selected.count(6)) selected.insert(7);

  Acceptance run(WAVESEP_SOURCE_DIR, fs::path(WAVESEP_BINARY_DIR) / "acceptance_work");
  const std::vector<std::pair<int, std::pair<std::string, std::function<Outcome()>>>> criteria{
      {1, {"gradient suite", [&] { return run.gradient_suite(); }}},
      {2, {"adjoint suite", [&] { return run.adjoint_suite(); }}},
      {3, {"init property", [&] { return run.init_property(); }}},
      {5, {"metrics oracle equivalence", [&] { return run.metrics_oracle(); }}},
      {8, {"pipeline integrity", [&] { return run.pipeline_integrity(); }}},
      {7, {"end-to-end learning", [&] { return run.end_to_end(); }}},
      {4, {"equivariance and stabilization", [&] { return run.equivariance(); }}},
      {6, {"IRM topline", [&] { return run.irm_topline(); }}},
      {9, {"determinism", [&] { return run.determinism(); }}},
  };
  std::map<int, std::string> lines;
  bool all = true;
  for (const auto& [id, named] : criteria) {
    if (!selected.count(id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = named.second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const std::string line = "criterion " + std::to_string(id) + " " + (o.pass ? "PASS" : "FAIL") + " " + named.first +
                             ": " + o.detail + " [" + fmt("%.0f", seconds_since(start)) + " s]";
    std::cout << line << std::endl;
    lines[id] = line;
    all = all && o.pass;
  }
  std::cout << "\nsummary\n";
  for (const auto& [id, line] : lines) std::cout << line << "\n";
  return all ? 0 : 1;
}
