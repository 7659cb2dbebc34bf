#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "floorgraph/grid.hpp"
#include "floorgraph/model.hpp"
#include "floorgraph/sampler.hpp"
#include "floorgraph/world.hpp"

namespace floorgraph {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WorldSpec {
  int rooms_min = 2;
  int rooms_max = 6;
  int size_min = 64;  // grid side, cells
  int size_max = 256;
  int margin = 4;
  int min_room_dim = 16;
  int door_min = 4;
  int door_max = 8;
};

struct SyntheticWorld {
  World world;
  int width = 0;
  int height = 0;
};

// Slicing layout: rooms tile a box exactly; a spanning tree of shared walls
// receives one door each. Throws GenerationError for infeasible specs.
SyntheticWorld gen_world(std::uint64_t seed, const WorldSpec& spec, const WorldGeometry& geom = {});

// Noise off: observed class = predicted class. Noise on: observed class drawn
// from the predicted class's likelihood row renormalized to sum to one.
OccupancyGrid render_grid(const World& world, int width, int height, const ModelParams& params, bool noise,
                          std::uint64_t seed);

struct GroundTruth {
  SyntheticWorld truth;
  OccupancyGrid grid;
  std::uint64_t seed = 0;
  bool noise = false;
};

GroundTruth make_ground_truth(std::uint64_t seed, const WorldSpec& spec, const ModelParams& params, bool noise);

// World holding the subset `mask` of `candidates`; room i gets id i.
World subset_world(const std::vector<Rect>& candidates, std::uint32_t mask);

struct PosteriorState {
  std::uint32_t mask = 0;
  double log_posterior = 0.0;
  double probability = 0.0;
};

inline constexpr int kMaxEnumerated = 12;

// Exact posterior over all 2^n subsets; throws std::invalid_argument for n > 12.
std::vector<PosteriorState> enumerate_posterior(const std::vector<Rect>& candidates, const ClassifiedGrid& cgrid,
                                                const ModelParams& params);

struct Metrics {
  int room_count_error = 0;
  int truth_rooms = 0;
  int estimate_rooms = 0;
  double mean_iou = 0.0;  // over truth rooms, unmatched count as 0
  std::vector<std::pair<int, int>> matches;  // (truth id, estimate id)
  int truth_doors = 0;
  int estimate_doors = 0;
  int matched_doors = 0;
  double door_precision = 1.0;
  double door_recall = 1.0;
  double edge_accuracy = 1.0;
  double max_wall_offset = 0.0;  // over matched rooms, cells
};

double rect_iou(const Rect& a, const Rect& b);
Metrics evaluate(const World& estimate, const World& truth, const WorldGeometry& geom = {});
nlohmann::ordered_json metrics_to_json(const Metrics& m);

// Scalar used to follow a replay: count error + (1 - IoU) + (1 - door recall).
double ground_truth_error(const Metrics& m);

// Synthetic exploration: the robot tours the rooms along the door tree. A
// frame reveals the rooms already left behind plus a growing box of the
// current one; the remaining frames revisit fully revealed rooms.
struct Exploration {
  GroundTruth ground_truth;
  std::vector<Frame> frames;
  std::vector<int> visited;  // room id entered at each frame
};

Exploration make_exploration(std::uint64_t seed, const WorldSpec& spec, const ModelParams& params, bool noise,
                             int frame_count = 18);

}  // namespace floorgraph
