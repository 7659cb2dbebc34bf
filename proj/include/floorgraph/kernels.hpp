#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "floorgraph/detect.hpp"
#include "floorgraph/model.hpp"
#include "floorgraph/world.hpp"

namespace floorgraph {

class EmptySelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Deterministic generator owned by one chain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }  // [0, 1)
  double normal(double sigma) { return std::normal_distribution<double>(0.0, sigma)(engine_); }
  std::size_t below(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * n)); }

 private:
  std::mt19937_64 engine_;
};

// Raw weights, their normalization and cumulative sums.
struct WeightedSet {
  std::vector<double> weights;
  std::vector<double> normalized;
  std::vector<double> cumulative;

  WeightedSet() = default;
  explicit WeightedSet(std::vector<double> raw);
  bool any_positive() const { return !cumulative.empty() && cumulative.back() > 0.0; }
  std::size_t size() const { return weights.size(); }
};

// min{ i | k <= A_i } over items with positive weight; k in [0, 1).
std::size_t resample(const WeightedSet& set, double k);

// A concrete transition. Which fields are meaningful depends on `kind`.
struct Move {
  KernelKind kind = KernelKind::Add;
  Rect rect;                // ADD
  int room = -1;            // REMOVE, SPLIT, SHRINK, DILATE, first room of MERGE
  int other = -1;           // second room of MERGE
  Axis cut_axis = Axis::Vertical;  // SPLIT: Vertical cuts at x = cut
  double cut = 0.0;                // end of the first child
  double cut2 = 0.0;               // start of the second child, within +-tau_adj of cut
  WallSide side = WallSide::Left;  // SHRINK, DILATE
  int delta = 0;
  Door door;                // ALLOCATE (id ignored)
  int door_id = -1;         // DELETE
  // ADD only when built as the reverse of a REMOVE: the doors the removal
  // detached, with `room` standing for the re-added room. Not part of q.
  std::vector<Door> restore_doors;
};

struct AppliedMove {
  World world;
  Move reverse;
  CellRect dirty;  // cells whose predicted class may differ
};

// Applies `move`; nullopt when the result would violate world invariants or
// the move is structurally impossible.
std::optional<AppliedMove> apply_move(const World& world, const Move& move, const ModelParams& params, int width,
                                      int height);

enum class AddSeeding {
  Pose,        // candidates around the robot pose
  FreeCells,   // offline: seed drawn uniformly from free cells
  FixedBatch,  // a fixed candidate set (used for exact-posterior checks)
};

// Detector outputs shared by the kernels for one map update.
class ProposalContext {
 public:
  ProposalContext(MapEvidence evidence, AddSeeding seeding, std::optional<Point> pose = std::nullopt,
                  std::vector<RoomCandidate> fixed_batch = {});

  const MapEvidence& evidence() const { return evidence_; }
  const ClassifiedGrid& grid() const { return evidence_.grid(); }
  const ModelParams& params() const { return evidence_.params(); }
  AddSeeding seeding() const { return seeding_; }
  const std::optional<Point>& pose() const { return pose_; }

  // Batch ADD draws from in the forward direction.
  std::vector<RoomCandidate> forward_batch(Rng& rng) const;
  // Batch used to evaluate the virtual ADD that would restore `room`.
  std::vector<RoomCandidate> reverse_batch(const Rect& room) const;

 private:
  MapEvidence evidence_;
  AddSeeding seeding_;
  std::optional<Point> pose_;
  std::vector<RoomCandidate> batch_;
};

// Selection weights used by the kernels.
double room_selection_weight(const ClassifiedGrid& cgrid, const Rect& room, const ModelParams& params);  // b_r
double wall_selection_weight(const ClassifiedGrid& cgrid, const Rect& room, WallSide side,
                             const ModelParams& params);  // v_w
double door_selection_weight(const ClassifiedGrid& cgrid, const World& world, const Door& door,
                             const ModelParams& params);  // z_g
double merge_affinity(const Rect& r, const Rect& s);      // a_r(s)
// P(max(1, round(|z|)) = delta), z ~ N(0, sigma^2).
double shift_probability(int delta, double sigma);
// Split line selection probability of cutting `room` at (axis, cut).
double split_cut_probability(const ClassifiedGrid& cgrid, const Room& room, Axis axis, double cut,
                             const ModelParams& params);
// Probability of the gap (> 0) or overlap (< 0) between the two split children.
double split_offset_probability(double offset, const ModelParams& params);

// Probability that the kernel named by `move.kind`, run on `world`, selects
// exactly `move` (the kernel-selection term is not included). ADD moves are
// evaluated against `ctx.reverse_batch`.
double move_probability(const World& world, const Move& move, const ProposalContext& ctx);

struct Proposal {
  KernelKind kind = KernelKind::Add;
  bool valid = false;
  Move move;
  Move reverse;
  World world;
  CellRect dirty;
  double log_q_fwd = 0.0;  // includes log Phi(kind)
  double log_q_bwd = 0.0;  // includes log Phi(reverse(kind))
};

Proposal propose(KernelKind kind, const World& world, const ProposalContext& ctx, Rng& rng);

// Metropolis-Hastings acceptance; the kernel-selection terms are part of q.
double acceptance_probability(double current_total, double proposal_total, const Proposal& proposal);
bool mh_accept(double current_total, double proposal_total, const Proposal& proposal, double u);

}  // namespace floorgraph
