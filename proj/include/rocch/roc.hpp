#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "rocch/rational.hpp"

namespace rocch {

struct ConfusionCounts {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;
};

// A point in ROC space, x = false positive rate, y = true positive rate.
// Coordinates are exact rationals so hull predicates cannot be fooled by
// floating-point rounding.
struct RocPoint {
    Rational fpr;
    Rational tpr;

    static RocPoint of(double x, double y) {
        return RocPoint{Rational::from_double(x), Rational::from_double(y)};
    }
};

inline bool operator==(const RocPoint& a, const RocPoint& b) { return a.fpr == b.fpr && a.tpr == b.tpr; }
inline bool operator!=(const RocPoint& a, const RocPoint& b) { return !(a == b); }

// Lexicographic (fpr, tpr); a strict total order on distinct points.
bool point_less(const RocPoint& a, const RocPoint& b);

// Sign of the cross product (b-a) x (c-a): +1 when a->b->c turns left
// (counterclockwise), -1 right, 0 collinear. Exact.
int orient(const RocPoint& a, const RocPoint& b, const RocPoint& c);

RocPoint counts_to_point(const ConfusionCounts& c);

// Upper-left convex chain from (0,0) to (1,1). The anchors are virtual:
// always present, never population members. Interior vertices rise strictly
// in both coordinates and segment slopes decrease strictly, so a vertical
// segment can only start the chain and a horizontal one can only end it.
struct RocHull {
    std::vector<RocPoint> points;
};

RocHull upper_hull(std::span<const RocPoint> pts);

// True when p lies on the chain (vertex or interior of a segment).
bool point_on_chain(const RocHull& hull, const RocPoint& p);

// Area under the chain by trapezoid sum. Chains are the only inputs.
double auch(const RocHull& hull);

// Area of the triangle (prev, x, next): half the absolute cross product of
// (x - prev) and (next - x). Equals the AUCH lost when x leaves a convex
// chain and prev, next close the gap.
double triangle_contribution(const RocPoint& prev, const RocPoint& x, const RocPoint& next);

constexpr double kInfContribution = std::numeric_limits<double>::infinity();

// Contribution of every chain point, computed by cascading removal: repeat
// { find the interior point with the smallest current triangle area (ties:
// lowest index), record that area as its contribution, take it out, refresh
// the two neighbours } until only the endpoints remain. Endpoints report
// +infinity, as does everything when the chain has fewer than three points.
// Input must be sorted by (fpr, tpr); throws otherwise.
std::vector<double> delta_area(std::span<const RocPoint> chain);

// Same cascade, but also reports the order in which interior points were
// removed (indices into the input). Survival selection discards a prefix of
// this order.
struct DeltaAreaSchedule {
    std::vector<double> contribution;
    std::vector<std::size_t> removal_order;
};
DeltaAreaSchedule delta_area_schedule(std::span<const RocPoint> chain);

}  // namespace rocch
