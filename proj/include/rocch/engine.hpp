#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rocch/data.hpp"
#include "rocch/gdt.hpp"
#include "rocch/rng.hpp"
#include "rocch/selection.hpp"

namespace rocch {

struct EngineConfig {
    std::size_t population_size = 20;
    std::uint64_t max_evaluations = 0;
    SelectorKind selector = SelectorKind::CH_NO_REDUNDANCY_AREA;
    VariationRates rates;
    int tournament_size = 4;
    std::uint64_t rng_seed = 0;
    // Budget fractions at which the log records a snapshot; a record lands on
    // the first generation boundary at or past each fraction.
    std::vector<double> checkpoint_ratios = {1.0 / 15, 1.0 / 10, 1.0 / 4, 1.0 / 3,
                                             1.0 / 2,  2.0 / 3, 1.0};
};

struct CheckpointRecord {
    double ratio = 0.0;
    std::uint64_t evaluations_used = 0;
    double train_auch = 0.0;
    double test_auch = 0.0;
    std::size_t hull_size = 0;  // vertices on the training hull chain, anchors included
    // Set when some generation since the previous record had to discard more
    // than the union's beyond-hull count, so hull members may have been lost.
    bool hull_regression_possible = false;
};

struct ConvergenceLog {
    std::vector<CheckpointRecord> records;
};

struct RunResult {
    std::vector<Individual> population;
    ConvergenceLog log;
    std::uint64_t evaluations_used = 0;
    std::uint64_t generations = 0;
    double train_auch = 0.0;
    double test_auch = 0.0;
};

// Tournament ranking: lower level first, larger contribution inside a level.
struct RankKey {
    std::size_t level = 0;
    double contribution = 0.0;
};

bool rank_better(const RankKey& a, const RankKey& b);

// Level index plus within-level contribution under the selector's metric.
// Redundant archive members rank one past the last level.
std::vector<RankKey> compute_rank_keys(const std::vector<ObjectiveVector>& points,
                                       SelectorKind selector);

// Samples k members with replacement; returns the best by rank_better
// (earliest sampled wins ties).
const Individual& tournament_select(const std::vector<Individual>& pop,
                                    const std::vector<RankKey>& keys, int k, RandomSource& rng);

// Builds `count` offspring: tournament parents, crossover, then the unary
// operators, each gated by its rate. Objectives are left unset.
std::vector<Individual> make_offspring(const std::vector<Individual>& pop,
                                       const std::vector<RankKey>& keys, const FeatureSpace& space,
                                       const EngineConfig& cfg, std::size_t count,
                                       RandomSource& rng);

// Batch truncation: whole fronts, then the boundary front by descending
// crowding distance. Returned indices are ascending.
std::vector<std::size_t> nsga2_survivors(const std::vector<ObjectiveVector>& points,
                                         std::size_t mu);

// Index of the member whose removal costs the least hypervolume within the
// worst front.
std::size_t sms_emoa_victim(const std::vector<ObjectiveVector>& points);

// Evenly spread weight pairs over (fpr, miss rate); w[0] = (0,1).
std::vector<std::pair<double, double>> moead_weights(std::size_t mu);

// For each subproblem, the T weight-space nearest subproblems (self included).
std::vector<std::vector<std::size_t>> moead_neighborhoods(
    const std::vector<std::pair<double, double>>& weights, std::size_t T);

// Hull-based survival loop (all CH selector kinds).
RunResult run_chmogp(const EngineConfig& cfg, const FeatureSpace& space, const Split& train,
                     const Split& test);

// The comparison rows: batch crowding truncation, steady-state hypervolume
// removal, or decomposition sweeps.
RunResult run_baseline(const EngineConfig& cfg, const FeatureSpace& space, const Split& train,
                       const Split& test);

// Dispatches on cfg.selector.
RunResult run(const EngineConfig& cfg, const FeatureSpace& space, const Split& train,
              const Split& test);

}  // namespace rocch
