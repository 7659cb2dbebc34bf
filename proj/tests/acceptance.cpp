// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>

#include "floorgraph/app.hpp"
#include "floorgraph/io.hpp"
#include "floorgraph/kernels.hpp"
#include "floorgraph/sampler.hpp"
#include "floorgraph/testkit.hpp"
#include "oracles.hpp"

using namespace floorgraph;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

constexpr int kCorpusSize = 20;

// Toy space: three fixed candidates, ADD and REMOVE only, flattened likelihood
// so that several subsets carry visible mass.
Outcome exact_posterior() {
  ModelParams p;
  p.transition = {0.5, 0.5, 0, 0, 0, 0, 0, 0};
  p.kernel.add_uniform_mix = 0.0;
  for (int i = 0; i < kNumClasses; ++i) {
    for (int j = 0; j < kNumClasses; ++j) p.likelihood[i][j] = i == j ? 1.0 / 3 + 0.04 : 1.0 / 3 - 0.02;
  }
  p.validate();
  const std::vector<Rect> cands{{4, 4, 20, 20}, {20, 4, 36, 20}, {12, 12, 28, 28}};
  World truth;
  truth.rooms = {{0, cands[0]}, {1, cands[1]}};
  const ClassifiedGrid g = classify(render_grid(truth, 40, 44, p, true, 7), p.thresholds);
  const auto posterior = enumerate_posterior(cands, g, p);

  std::vector<RoomCandidate> batch;
  for (const Rect& r : cands) batch.push_back({r, 1.0, 1.0 / 3});
  const ProposalContext ctx(MapEvidence(g, p), AddSeeding::FixedBatch, std::nullopt, batch);
  ChainState st = make_chain(World{}, g, p, 1);
  const long steps = 1000000;
  std::vector<long> visits(std::size_t{1} << cands.size(), 0);
  const auto t0 = Clock::now();
  for (long i = 0; i < steps; ++i) {
    step(st, ctx);
    std::uint32_t mask = 0;
    for (const Room& r : st.current.rooms) {
      for (std::size_t k = 0; k < cands.size(); ++k) {
        if (r.rect == cands[k]) mask |= 1u << k;
      }
    }
    ++visits[mask];
  }
  const double dt = seconds_since(t0);
  double tv = 0.0, top = 0.0;
  for (const PosteriorState& s : posterior) {
    tv += std::abs(s.probability - static_cast<double>(visits[s.mask]) / steps);
    top = std::max(top, s.probability);
  }
  tv /= 2.0;
  return {posterior.size() == 8 && tv <= 0.02 && dt < 30.0,
          fmt("8 states, largest mass %.3f, TV %.4f, %.1f s", top, tv, dt)};
}

Outcome reversibility() {
  const ModelParams p;
  Rng rng(2718);
  long accepted = 0, failures = 0;
  std::array<long, kNumKernels> per_kind{};
  for (std::uint64_t seed = 1; accepted < 10000; ++seed) {
    const GroundTruth gt = make_ground_truth(seed, WorldSpec{2, 5, 64, 128}, p, true);
    const ClassifiedGrid g = classify(gt.grid, p.thresholds);
    const ProposalContext ctx(MapEvidence(g, p), AddSeeding::FreeCells);
    World w = seed % 2 ? World{} : gt.truth.world;
    Score s = log_posterior(w, g, p);
    for (int i = 0; i < 3000 && accepted < 10000; ++i) {
      const KernelKind k = kAllKernels[rng.below(kNumKernels)];
      Proposal prop = propose(k, w, ctx, rng);
      if (!prop.valid) continue;
      const Score next = rescore_delta(s, w, prop.world, prop.dirty, g, p);
      if (!mh_accept(s.total, next.total, prop, rng.uniform())) continue;
      ++accepted;
      ++per_kind[kernel_index(k)];
      const auto back = apply_move(prop.world, prop.reverse, p, g.width(), g.height());
      if (!back || !structurally_equal(back->world, w) || !std::isfinite(prop.log_q_bwd)) ++failures;
      w = std::move(prop.world);
      s = next;
    }
  }
  bool all_pairs = true;
  std::string counts;
  for (KernelKind k : kAllKernels) {
    if (k == KernelKind::Remove || k == KernelKind::Merge || k == KernelKind::Dilate || k == KernelKind::Delete) continue;
    const long pair = per_kind[kernel_index(k)] + per_kind[kernel_index(reverse(k))];
    all_pairs = all_pairs && pair > 0;
    counts += fmt(" %s/%s %ld", to_string(k), to_string(reverse(k)), pair);
  }
  return {failures == 0 && all_pairs, fmt("%ld accepted, %ld failures;", accepted, failures) + counts};
}

Outcome scoring() {
  const ModelParams p;
  Rng rng(99);
  long applications = 0;
  double worst = 0.0;
  for (std::uint64_t seed = 1; applications < 1000; ++seed) {
    const GroundTruth gt = make_ground_truth(seed, WorldSpec{2, 5, 64, 128}, p, true);
    const ClassifiedGrid g = classify(gt.grid, p.thresholds);
    const ProposalContext ctx(MapEvidence(g, p), AddSeeding::FreeCells);
    World w = gt.truth.world;
    Score s = log_posterior(w, g, p);
    for (int i = 0; i < 4000 && applications < 1000; ++i) {
      Proposal prop = propose(kAllKernels[rng.below(kNumKernels)], w, ctx, rng);
      if (!prop.valid) continue;
      const Score inc = rescore_delta(s, w, prop.world, prop.dirty, g, p);
      worst = std::max(worst, std::abs(inc.total - log_posterior(prop.world, g, p).total));
      ++applications;
      if (mh_accept(s.total, inc.total, prop, rng.uniform())) {
        w = std::move(prop.world);
        s = inc;
      }
    }
  }
  std::mt19937_64 gen(2024);
  int mismatched = 0;
  double rel = 0.0;
  for (int i = 0; i < 100; ++i) {
    const World w = oracle::random_world(32, gen);
    const ClassifiedGrid m = oracle::random_grid(32, 32, gen);
    const Score s = log_posterior(w, m, p);
    ConfusionCounts naive{};
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) ++naive[class_index(oracle::predicted(w, p.geometry, x, y))][class_index(m.at(x, y))];
    }
    const double loop = oracle::log_likelihood(w, m, p);
    mismatched += s.confusion != naive;
    rel = std::max(rel, std::abs(s.log_likelihood - loop) / std::abs(loop));
  }
  return {worst <= 1e-9 && mismatched == 0 && rel <= 1e-12,
          fmt("max incremental |d| %.2e over %ld moves; %d/100 confusion mismatches, max rel. diff %.1e", worst,
              applications, mismatched, rel)};
}

Outcome resampler() {
  const WeightedSet a({0.2, 0.3, 0.5});
  const WeightedSet b({0.0, 1.0, 0.0, 3.0});
  const bool hand = resample(a, 0.6) == 2 && resample(a, 0.0) == 0 && resample(a, 0.2) == 0 &&
                    resample(a, 0.35) == 1 && resample(a, 0.5) == 1 && resample(b, 0.0) == 1 &&
                    resample(b, 0.25) == 1 && resample(b, 0.26) == 3;
  const std::vector<double> w{0.1, 0.2, 0.3, 0.4};
  const WeightedSet set(w);
  Rng rng(12345);
  const int n = 100000;
  std::vector<long> counts(w.size(), 0);
  for (int i = 0; i < n; ++i) ++counts[resample(set, rng.uniform())];
  double chi2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) chi2 += std::pow(counts[i] - n * w[i], 2) / (n * w[i]);
  // Chi-square survival function for 3 degrees of freedom.
  const double pvalue = std::erfc(std::sqrt(chi2 / 2)) + std::sqrt(2 * chi2 / std::numbers::pi) * std::exp(-chi2 / 2);
  return {hand && pvalue > 0.001, fmt("hand-computed indices %s; chi2 %.2f, p %.3f", hand ? "match" : "differ", chi2, pvalue)};
}

struct CorpusRun {
  Metrics metrics;
  double seconds = 0.0;
};

std::vector<CorpusRun> run_corpus(bool noise, long iterations) {
  const ModelParams p;
  std::vector<CorpusRun> out;
  for (int i = 1; i <= kCorpusSize; ++i) {
    const GroundTruth gt = make_ground_truth(static_cast<std::uint64_t>(i), WorldSpec{}, p, noise);
    RunOptions o;
    o.seed = static_cast<std::uint64_t>(i);
    o.iterations_per_frame = iterations;
    o.stall_window = 0;
    const auto t0 = Clock::now();
    const RunResult r = run({Frame{gt.grid, std::nullopt}}, o);
    out.push_back({evaluate(r.best, gt.truth.world), seconds_since(t0)});
  }
  return out;
}

Outcome noise_free() {
  int exact = 0;
  double slowest = 0.0;
  for (const CorpusRun& c : run_corpus(false, 50000)) {
    const Metrics& m = c.metrics;
    exact += m.room_count_error == 0 && m.door_precision == 1.0 && m.door_recall == 1.0 && m.max_wall_offset <= 1.0;
    slowest = std::max(slowest, c.seconds);
  }
  return {exact >= 19 && slowest < 30.0,
          fmt("%d/%d exact with walls within 1 cell, slowest %.1f s", exact, kCorpusSize, slowest)};
}

Outcome noisy() {
  int exact = 0;
  double iou = 0.0, recall = 0.0, slowest = 0.0;
  for (const CorpusRun& c : run_corpus(true, 200000)) {
    exact += c.metrics.room_count_error == 0;
    iou += c.metrics.mean_iou;
    recall += c.metrics.door_recall;
    slowest = std::max(slowest, c.seconds);
  }
  iou /= kCorpusSize;
  recall /= kCorpusSize;
  return {exact >= 16 && iou >= 0.85 && recall >= 0.8 && slowest < 60.0,
          fmt("count exact %d/%d, mean IoU %.3f, door recall %.3f, slowest %.1f s", exact, kCorpusSize, iou, recall,
              slowest)};
}

Outcome tables() {
  const ModelParams p;
  const LikelihoodTable expected = {{{0.5, 0.1, 0.1}, {0.3, 0.8, 0.1}, {0.2, 0.1, 0.8}}};
  const std::array<double, kNumKernels> phi = {0.2, 0.05, 0.125, 0.125, 0.2, 0.2, 0.05, 0.05};
  double sum = 0.0;
  for (double v : p.transition) sum += v;
  // The defaults must also survive the config file path.
  const RunConfig loaded = config_from_json(nlohmann::json::parse(config_to_json(RunConfig{}).dump()));
  const bool ok = p.likelihood == expected && p.transition == phi && sum == 1.0 &&
                  loaded.params.likelihood == expected && loaded.params.transition == phi;
  return {ok, fmt("likelihood rows and transition probabilities %s, sum %.17g", ok ? "match" : "differ", sum)};
}

Outcome replay() {
  const ModelParams p;
  const Exploration ex = make_exploration(1, WorldSpec{}, p, false, 18);
  RunOptions o;
  o.seed = 1;
  const RunResult online = run(ex.frames, o);

  bool monotone = true;
  double prev = INFINITY;
  std::string errors;
  long near_pose = 0, dilate = 0, split_merge = 0;
  for (const FrameReport& f : online.frames) {
    if (f.index >= 13) {
      const double e = ground_truth_error(evaluate(f.best, ex.ground_truth.truth.world));
      monotone = monotone && e <= prev;
      prev = e;
      errors += fmt("%s%.3f", errors.empty() ? "" : " ", e);
    }
    near_pose += f.adds_near_pose;
    dilate += f.stats[kernel_index(KernelKind::Dilate)].accepted;
    split_merge += f.stats[kernel_index(KernelKind::Split)].accepted + f.stats[kernel_index(KernelKind::Merge)].accepted;
  }

  RunOptions offline_opts = o;
  offline_opts.iterations_per_frame = 200000;
  offline_opts.stall_window = 0;
  const RunResult offline = run({Frame{ex.frames.back().grid, std::nullopt}}, offline_opts);
  const Metrics m = evaluate(online.best, offline.best);
  const bool close = m.room_count_error == 0 && m.mean_iou >= 0.85 && m.door_recall >= 0.8;
  const bool progression = near_pose > 0 && dilate > 0 && split_merge > 0;
  return {online.frames.size() == 18 && monotone && close && progression,
          fmt("last-5 errors [%s]; vs offline: count error %d, IoU %.3f, door recall %.3f; ADD near pose %ld, "
              "DILATE %ld, SPLIT+MERGE %ld",
              errors.c_str(), m.room_count_error, m.mean_iou, m.door_recall, near_pose, dilate, split_merge)};
}

Outcome determinism() {
  const ModelParams p;
  RunConfig cfg;
  cfg.seed = 17;
  cfg.iterations_per_frame = 20000;
  const GroundTruth gt = make_ground_truth(4, WorldSpec{}, p, true);
  const Exploration ex = make_exploration(2, WorldSpec{2, 4, 64, 128}, p, true, 6);
  auto produce = [&] {
    auto files = analyze_outputs(run({Frame{gt.grid, std::nullopt}}, cfg.run_options()), cfg);
    for (OutputFile& f : replay_outputs(ex.frames, run(ex.frames, cfg.run_options()), cfg)) {
      files.push_back({"replay/" + f.name, std::move(f.bytes)});
    }
    return files;
  };
  const auto a = produce();
  const auto b = produce();
  const auto dir = std::filesystem::temp_directory_path() / "floorgraph_acceptance";
  std::filesystem::remove_all(dir);
  write_outputs(dir / "a", a);
  write_outputs(dir / "b", b);
  int differing = a.size() == b.size() ? 0 : 1;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    differing += a[i].name != b[i].name || a[i].bytes != b[i].bytes ||
                 read_file(dir / "a" / a[i].name) != read_file(dir / "b" / b[i].name);
  }
  return {differing == 0, fmt("%zu JSON/SVG files compared, %d differ", a.size(), differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"exact-posterior chain oracle", exact_posterior},
      {"reversibility", reversibility},
      {"scoring oracles", scoring},
      {"resampler", resampler},
      {"noise-free recovery", noise_free},
      {"noisy recovery", noisy},
      {"table defaults", tables},
      {"online replay", replay},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
