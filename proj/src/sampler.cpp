#include "floorgraph/sampler.hpp"

#include <stdexcept>

namespace floorgraph {

ChainState make_chain(World initial, const ClassifiedGrid& cgrid, const ModelParams& params, std::uint64_t seed) {
  ChainState s;
  s.score = log_posterior(initial, cgrid, params);
  s.current = std::move(initial);
  s.best = s.current;
  s.best_score = s.score;
  s.rng = Rng(seed);
  return s;
}

void rebase_chain(ChainState& state, const ClassifiedGrid& cgrid, const ModelParams& params) {
  state.score = log_posterior(state.current, cgrid, params);
  state.best = state.current;
  state.best_score = state.score;
}

namespace {

KernelKind draw_kernel(const ModelParams& params, Rng& rng) {
  std::vector<double> phi(params.transition.begin(), params.transition.end());
  return kAllKernels[resample(WeightedSet(std::move(phi)), rng.uniform())];
}

}  // namespace

StepResult step(ChainState& state, const ProposalContext& ctx, DeltaCheck check) {
  const ModelParams& params = ctx.params();
  StepResult r;
  r.kind = draw_kernel(params, state.rng);
  KernelStats& ks = state.stats[kernel_index(r.kind)];
  ++ks.proposed;
  ++state.iteration;

  Proposal prop = propose(r.kind, state.current, ctx, state.rng);
  if (!prop.valid) {
    ++ks.invalid;
    return r;
  }
  r.valid = true;
  r.move = prop.move;
  const Score next = rescore_delta(state.score, state.current, prop.world, prop.dirty, ctx.grid(), params, check);
  if (!mh_accept(state.score.total, next.total, prop, state.rng.uniform())) return r;

  r.accepted = true;
  ++ks.accepted;
  state.last_accept = state.iteration;
  state.current = std::move(prop.world);
  state.score = next;
  if (state.score.total > state.best_score.total) {
    state.best = state.current;
    state.best_score = state.score;
  }
  return r;
}

RunResult run(const std::vector<Frame>& frames, const RunOptions& options) {
  if (frames.empty()) throw std::invalid_argument("run: no frames");
  const ModelParams& params = options.params;
  params.validate();

  RunResult result;
  std::optional<ChainState> chain;
  int width = -1, height = -1;
  double theta = 0.0;

  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Frame& frame = frames[f];
    const ClassifiedGrid source = classify(frame.grid, params.thresholds);
    double angle = 0.0;
    try {
      angle = main_orientation(source);
    } catch (const DetectionError&) {
      angle = 0.0;
    }
    RotatedGrid working = rotate_to_working_frame(source, angle);
    const ClassifiedGrid& grid = working.grid;

    FrameReport report;
    report.index = static_cast<int>(f);
    report.orientation_deg = angle;
    if (frame.pose) report.pose = working.to_working(*frame.pose);

    const bool reset = !chain || grid.width() != width || grid.height() != height || angle != theta;
    if (reset) {
      World empty;
      empty.orientation_deg = angle;
      chain = make_chain(std::move(empty), grid, params, options.seed);
      if (f > 0) chain->rng = Rng(options.seed + f);
      report.chain_reset = f > 0;
    } else {
      rebase_chain(*chain, grid, params);
    }
    width = grid.width();
    height = grid.height();
    theta = angle;

    const AddSeeding seeding = report.pose ? AddSeeding::Pose : AddSeeding::FreeCells;
    std::optional<Point> pose = report.pose;
    if (pose && (pose->x < 0 || pose->y < 0 || pose->x >= width || pose->y >= height)) pose.reset();
    const ProposalContext ctx(MapEvidence(grid, params), pose ? seeding : AddSeeding::FreeCells, pose);

    ChainState& s = *chain;
    const KernelStatsTable before = s.stats;
    const long start = s.iteration;
    s.last_accept = s.iteration;
    while (s.iteration - start < options.iterations_per_frame) {
      const StepResult r = step(s, ctx, options.verify);
      if (r.accepted && r.kind == KernelKind::Add && report.pose && r.move.rect.contains_center(
                                                           static_cast<int>(report.pose->x),
                                                           static_cast<int>(report.pose->y))) {
        ++report.adds_near_pose;
      }
      if (options.trace_every > 0 && (s.iteration - start) % options.trace_every == 0) {
        result.trace.push_back({static_cast<int>(f), s.iteration, s.score.total, s.best_score.total});
      }
      if (options.stall_window > 0 && s.iteration - s.last_accept >= options.stall_window) {
        report.stalled = true;
        break;
      }
    }
    report.iterations = s.iteration - start;
    for (int k = 0; k < kNumKernels; ++k) {
      report.stats[k] = {s.stats[k].proposed - before[k].proposed, s.stats[k].invalid - before[k].invalid,
                         s.stats[k].accepted - before[k].accepted};
    }
    report.best = s.best;
    report.best_score = s.best_score;
    result.frames.push_back(std::move(report));
    result.working = std::move(working);
  }

  result.best = chain->best;
  result.best_score = chain->best_score;
  result.stats = chain->stats;
  return result;
}

}  // namespace floorgraph
