#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "floorgraph/detect.hpp"
#include "floorgraph/grid.hpp"
#include "floorgraph/kernels.hpp"
#include "floorgraph/model.hpp"
#include "floorgraph/world.hpp"

namespace floorgraph {

struct KernelStats {
  long proposed = 0;
  long invalid = 0;
  long accepted = 0;
  friend bool operator==(const KernelStats&, const KernelStats&) = default;
};
using KernelStatsTable = std::array<KernelStats, kNumKernels>;

struct ChainState {
  World current;
  Score score;
  World best;
  Score best_score;
  Rng rng;
  long iteration = 0;
  long last_accept = 0;  // iteration of the most recent acceptance
  KernelStatsTable stats{};
};

ChainState make_chain(World initial, const ClassifiedGrid& cgrid, const ModelParams& params, std::uint64_t seed);

// Rescores current and best against a new map of the same size.
void rebase_chain(ChainState& state, const ClassifiedGrid& cgrid, const ModelParams& params);

struct StepResult {
  KernelKind kind = KernelKind::Add;
  bool valid = false;
  bool accepted = false;
  Move move;
};

// One MH iteration: kernel from Phi, proposal, incremental score, accept/reject.
StepResult step(ChainState& state, const ProposalContext& ctx, DeltaCheck check = DeltaCheck::Off);

// One map update. `pose` is in cells of the frame's own grid.
struct Frame {
  OccupancyGrid grid;
  std::optional<Point> pose;
};

struct RunOptions {
  ModelParams params;
  std::uint64_t seed = 0;
  long iterations_per_frame = 50000;
  long stall_window = 5000;  // 0 disables stall detection
  long trace_every = 1000;   // 0 disables the score trace
  DeltaCheck verify = DeltaCheck::Off;
};

struct TracePoint {
  int frame = 0;
  long iteration = 0;
  double current = 0.0;
  double best = 0.0;
};

struct FrameReport {
  int index = 0;
  double orientation_deg = 0.0;
  long iterations = 0;
  bool stalled = false;
  bool chain_reset = false;
  KernelStatsTable stats{};
  long adds_near_pose = 0;  // accepted ADDs whose room contains the pose
  std::optional<Point> pose;  // working frame
  World best;
  Score best_score;
};

struct RunResult {
  World best;
  Score best_score;
  RotatedGrid working;  // last frame, in the frame the world lives in
  std::vector<FrameReport> frames;
  std::vector<TracePoint> trace;
  KernelStatsTable stats{};
};

// Frame-stream driver; throws std::invalid_argument on an empty stream.
RunResult run(const std::vector<Frame>& frames, const RunOptions& options);

}  // namespace floorgraph
