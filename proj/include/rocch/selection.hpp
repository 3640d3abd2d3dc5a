#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rocch/rng.hpp"
#include "rocch/roc.hpp"

namespace rocch {

// The two objectives are exactly a point in ROC space; the rational
// coordinates carry the originating counts as numerator/denominator, so
// equality and dominance are exact.
using ObjectiveVector = RocPoint;

enum class Dominance { u_dominates, v_dominates, nondominated, equal };

// Minimize fpr, maximize tpr.
Dominance dominance(const ObjectiveVector& u, const ObjectiveVector& v);

// Output of convex-hull-based sorting. Indices refer to the input
// population. Every index lands in exactly one level or the archive.
struct LevelPartition {
    std::vector<std::vector<std::size_t>> levels;
    std::vector<std::size_t> redundant_archive;
};

// One value per survivor-selection strategy; comments give the usual names.
enum class SelectorKind {
    CH_NO_REDUNDANCY_AREA,       // CH-MOGP
    CH_NO_REDUNDANCY_CROWDING,   // CHCrowding
    CH_AREA_MU1,                 // CHH-MOGP
    CH_HV_MU1,                   // CH-EMOA
    CH_NO_REDUNDANCY_AREA_MU1,   // RCHH-EMOA
    NSGA2,                       // NSGA-II
    SMS_EMOA,                    // SMS-EMOA
    MOEAD,                       // MOEA/D
};

const char* selector_name(SelectorKind k);
SelectorKind parse_selector(std::string_view name);  // throws on unknown name
std::vector<SelectorKind> all_selectors();

// Duplicate objective vectors (beyond the first holder, population order)
// go to the archive; the rest are peeled into levels: a point belongs to
// the current level iff it lies on the current upper hull chain. Points
// strictly below the diagonal never lie on any chain; once only such
// points remain they form one final level together.
LevelPartition ch_sort_no_redundancy(std::span<const ObjectiveVector> pop);

// Same peeling but duplicates stay in the levels; archive is always empty.
LevelPartition ch_sort_keep_redundancy(std::span<const ObjectiveVector> pop);

enum class LevelMetric { area, crowding, hypervolume };

// Survivor selection: discard exactly n_discard members, archive first,
// then whole worst levels, then minimal-contribution members of the
// boundary level (contributions recomputed after every single removal).
// Returns surviving indices in population order. rng is consumed only by
// the archive branch.
std::vector<std::size_t> reduce(std::span<const ObjectiveVector> pop, std::size_t n_discard,
                                RandomSource& rng);

// reduce with the sort/metric variations used by the baseline strategies.
std::vector<std::size_t> reduce_with(std::span<const ObjectiveVector> pop, std::size_t n_discard,
                                     RandomSource& rng, bool keep_redundancy, LevelMetric metric);

// Standard fast non-dominated sort; equal vectors share a front.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> pop);

// Standard crowding distance over (fpr, tpr); per-objective boundaries get
// +infinity, zero-range objectives contribute 0.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

// Exclusive dominated-area contribution per front member, reference point
// (fpr,tpr) = (1,0). Throws if any member strictly dominates another.
std::vector<double> hypervolume2d_contribution(std::span<const ObjectiveVector> front);

// Same quantity without the mutual-nondomination check; dominated members
// and duplicates simply report 0. Used inside survivor selection where
// hull levels may contain same-fpr pairs.
std::vector<double> hv_exclusive(std::span<const ObjectiveVector> front);

// Area of the union of rectangles [fpr,1] x [0,tpr]; helper for the above,
// exposed for the test oracles.
double dominated_area(std::span<const ObjectiveVector> pts);

// Tchebycheff scalarization over the minimization objectives (fpr, 1-tpr).
// weight and ideal live in that minimization space.
double moead_scalarize(const ObjectiveVector& v, std::pair<double, double> weight,
                       std::pair<double, double> ideal);

}  // namespace rocch
