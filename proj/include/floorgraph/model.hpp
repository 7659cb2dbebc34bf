#pragma once

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>

#include "floorgraph/grid.hpp"
#include "floorgraph/world.hpp"

namespace floorgraph {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class KernelKind : std::uint8_t { Add, Remove, Split, Merge, Shrink, Dilate, Allocate, Delete };
inline constexpr int kNumKernels = 8;
inline constexpr std::array<KernelKind, kNumKernels> kAllKernels = {
    KernelKind::Add,    KernelKind::Remove, KernelKind::Split,    KernelKind::Merge,
    KernelKind::Shrink, KernelKind::Dilate, KernelKind::Allocate, KernelKind::Delete};

const char* to_string(KernelKind kind);
KernelKind reverse(KernelKind kind);
inline constexpr int kernel_index(KernelKind k) { return static_cast<int>(k); }

struct KernelParams {
  double shift_sigma = 2.0;         // sigma_shift, cells
  double room_weight_cap = 100.0;   // h_b
  double wall_weight_cap = 100.0;   // h_v
  double door_weight_cap = 100.0;   // h_g
  int candidates = 5;               // K_candidates
  int growth_cap = 256;             // cells per side
  int min_line_length = 5;          // l_min
  double split_uniform_mix = 0.1;   // share of SPLIT mass spread uniformly over cut positions
  double split_offset_mix = 0.5;    // share of SPLIT mass on nonzero child offsets
  double add_uniform_mix = 0.05;    // share of ADD mass spread uniformly over integer rectangles
};

// Likelihood table indexed [predicted C_W][observed C_M].
using LikelihoodTable = std::array<std::array<double, kNumClasses>, kNumClasses>;

inline constexpr LikelihoodTable kDefaultLikelihood = {{
    {0.5, 0.1, 0.1},  // wall
    {0.3, 0.8, 0.1},  // unknown
    {0.2, 0.1, 0.8},  // free space
}};

// ADD, REMOVE, SPLIT, MERGE, SHRINK, DILATE, ALLOCATE, DELETE
inline constexpr std::array<double, kNumKernels> kDefaultTransition = {0.2, 0.05, 0.125, 0.125,
                                                                        0.2, 0.2,  0.05,  0.05};

struct ModelParams {
  double psi1 = 0.5;
  double psi2 = 0.5;
  double psi3 = 0.9;
  double psi4 = 0.5;
  LikelihoodTable likelihood = kDefaultLikelihood;
  Thresholds thresholds;
  WorldGeometry geometry;
  KernelParams kernel;
  std::array<double, kNumKernels> transition = kDefaultTransition;

  double phi(KernelKind k) const { return transition[kernel_index(k)]; }

  // Throws ConfigError naming the first offending field.
  void validate() const;
};

nlohmann::ordered_json params_to_json(const ModelParams& p);
// Missing keys keep their defaults; the result is validated.
ModelParams params_from_json(const nlohmann::json& j);

using ConfusionCounts = std::array<std::array<std::int64_t, kNumClasses>, kNumClasses>;

// Unnormalized log-posterior together with the integer statistics it is a
// function of, so incremental and full evaluation agree bit-for-bit.
struct Score {
  double log_prior = 0.0;
  double log_likelihood = 0.0;
  double total = 0.0;
  double log_alpha2 = 0.0;
  double log_alpha3 = 0.0;
  ConfusionCounts confusion{};  // [C_W][C_M] cell counts
  int doorless_rooms = 0;
  long overlap_excess = 0;

  friend bool operator==(const Score&, const Score&) = default;
};

double log_prior(const World& world, const ModelParams& params);
double log_likelihood(const World& world, const ClassifiedGrid& cgrid, const ModelParams& params);
Score log_posterior(const World& world, const ClassifiedGrid& cgrid, const ModelParams& params);

enum class DeltaCheck { Off, FullRecompute };

// Score of `after`, given the score of `before` and a region outside of which
// the two worlds rasterize identically. With DeltaCheck::FullRecompute a
// mis-declared region raises ContractError.
Score rescore_delta(const Score& before_score, const World& before, const World& after, const CellRect& dirty,
                    const ClassifiedGrid& cgrid, const ModelParams& params,
                    DeltaCheck check = DeltaCheck::Off);

}  // namespace floorgraph
