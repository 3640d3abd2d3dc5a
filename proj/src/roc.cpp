#include "rocch/roc.hpp"

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <stdexcept>

namespace rocch {

namespace {

using BigInt = boost::multiprecision::cpp_int;

const Rational kZero = Rational::make(0, 1);
const Rational kOne = Rational::make(1, 1);

bool in_unit_interval(const Rational& r) { return r >= kZero && r <= kOne; }

// Exact cross sign over arbitrary denominators: scale each axis to the
// common denominator, then the sign of the scaled cross is the answer.
int orient_big(const RocPoint& a, const RocPoint& b, const RocPoint& c) {
    const BigInt ax = BigInt(a.fpr.num) * b.fpr.den * c.fpr.den;
    const BigInt bx = BigInt(b.fpr.num) * a.fpr.den * c.fpr.den;
    const BigInt cx = BigInt(c.fpr.num) * a.fpr.den * b.fpr.den;
    const BigInt ay = BigInt(a.tpr.num) * b.tpr.den * c.tpr.den;
    const BigInt by = BigInt(b.tpr.num) * a.tpr.den * c.tpr.den;
    const BigInt cy = BigInt(c.tpr.num) * a.tpr.den * b.tpr.den;
    const BigInt cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
    return cross.sign();
}

}  // namespace

bool point_less(const RocPoint& a, const RocPoint& b) {
    const int c = compare(a.fpr, b.fpr);
    if (c != 0) return c < 0;
    return compare(a.tpr, b.tpr) < 0;
}

int orient(const RocPoint& a, const RocPoint& b, const RocPoint& c) {
    // Points produced from one dataset split share denominators per axis;
    // that case stays in native arithmetic.
    if (a.fpr.den == b.fpr.den && b.fpr.den == c.fpr.den &&
        a.tpr.den == b.tpr.den && b.tpr.den == c.tpr.den) {
        const __int128 cross = static_cast<__int128>(b.fpr.num - a.fpr.num) * (c.tpr.num - a.tpr.num) -
                               static_cast<__int128>(b.tpr.num - a.tpr.num) * (c.fpr.num - a.fpr.num);
        return cross < 0 ? -1 : (cross > 0 ? 1 : 0);
    }
    return orient_big(a, b, c);
}

RocPoint counts_to_point(const ConfusionCounts& c) {
    if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
        throw std::invalid_argument("counts_to_point: negative count");
    const std::int64_t pos = c.tp + c.fn;
    const std::int64_t neg = c.fp + c.tn;
    if (pos == 0 || neg == 0)
        throw std::invalid_argument("counts_to_point: split has an empty class");
    return RocPoint{Rational::make(c.fp, neg), Rational::make(c.tp, pos)};
}

RocHull upper_hull(std::span<const RocPoint> pts) {
    std::vector<RocPoint> cand;
    cand.reserve(pts.size());
    for (const RocPoint& p : pts) {
        if (!in_unit_interval(p.fpr) || !in_unit_interval(p.tpr))
            throw std::invalid_argument("upper_hull: point outside the unit square");
        // Points on or below the anchor chord can never rise above it.
        if (compare(p.tpr, p.fpr) > 0) cand.push_back(p);
    }
    std::sort(cand.begin(), cand.end(), point_less);
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    // One candidate per fpr column: only the highest can be a vertex.
    // After the sort the highest is the last of each equal-fpr run.
    std::vector<RocPoint> best;
    for (std::size_t i = 0; i < cand.size(); ++i) {
        if (i + 1 < cand.size() && cand[i + 1].fpr == cand[i].fpr) continue;
        best.push_back(cand[i]);
    }

    RocHull hull;
    hull.points.push_back(RocPoint{kZero, kZero});
    for (const RocPoint& p : best) {
        while (hull.points.size() >= 2 &&
               orient(hull.points[hull.points.size() - 2], hull.points.back(), p) >= 0) {
            hull.points.pop_back();
        }
        hull.points.push_back(p);
    }
    const RocPoint top{kOne, kOne};
    while (hull.points.size() >= 2 &&
           orient(hull.points[hull.points.size() - 2], hull.points.back(), top) >= 0) {
        hull.points.pop_back();
    }
    hull.points.push_back(top);
    return hull;
}

bool point_on_chain(const RocHull& hull, const RocPoint& p) {
    for (std::size_t i = 0; i + 1 < hull.points.size(); ++i) {
        const RocPoint& a = hull.points[i];
        const RocPoint& b = hull.points[i + 1];
        if (compare(p.fpr, a.fpr) < 0 || compare(p.fpr, b.fpr) > 0) continue;
        if (orient(a, b, p) != 0) continue;
        // Collinear and inside the segment's fpr span; a vertical segment
        // needs the tpr check instead.
        if (a.fpr == b.fpr) {
            const Rational lo = a.tpr < b.tpr ? a.tpr : b.tpr;
            const Rational hi = a.tpr < b.tpr ? b.tpr : a.tpr;
            if (compare(p.tpr, lo) >= 0 && compare(p.tpr, hi) <= 0) return true;
        } else {
            return true;
        }
    }
    return false;
}

double auch(const RocHull& hull) {
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < hull.points.size(); ++i) {
        const double dx = hull.points[i + 1].fpr.value() - hull.points[i].fpr.value();
        const double ysum = hull.points[i].tpr.value() + hull.points[i + 1].tpr.value();
        area += 0.5 * ysum * dx;
    }
    return area;
}

double triangle_contribution(const RocPoint& prev, const RocPoint& x, const RocPoint& next) {
    const double ax = x.fpr.value() - prev.fpr.value();
    const double ay = x.tpr.value() - prev.tpr.value();
    const double bx = next.fpr.value() - x.fpr.value();
    const double by = next.tpr.value() - x.tpr.value();
    return 0.5 * std::abs(ax * by - ay * bx);
}

DeltaAreaSchedule delta_area_schedule(std::span<const RocPoint> chain) {
    const std::size_t n = chain.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (point_less(chain[i + 1], chain[i]))
            throw std::invalid_argument("delta_area: chain not sorted by (fpr, tpr)");
    }

    DeltaAreaSchedule out;
    out.contribution.assign(n, kInfContribution);
    if (n < 3) return out;

    std::vector<std::size_t> prev(n), next(n);
    for (std::size_t i = 0; i < n; ++i) {
        prev[i] = i == 0 ? n : i - 1;
        next[i] = i + 1 == n ? n : i + 1;
    }
    std::vector<double> cur(n, kInfContribution);
    for (std::size_t i = 1; i + 1 < n; ++i)
        cur[i] = triangle_contribution(chain[i - 1], chain[i], chain[i + 1]);

    std::vector<bool> alive(n, true);
    for (std::size_t removed = 0; removed + 2 < n; ++removed) {
        std::size_t best = n;
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (!alive[i]) continue;
            if (best == n || cur[i] < cur[best]) best = i;  // ties keep the lowest index
        }
        out.contribution[best] = cur[best];
        out.removal_order.push_back(best);
        alive[best] = false;
        const std::size_t L = prev[best], R = next[best];
        next[L] = R;
        prev[R] = L;
        if (L != 0) cur[L] = triangle_contribution(chain[prev[L]], chain[L], chain[next[L]]);
        if (R != n - 1) cur[R] = triangle_contribution(chain[prev[R]], chain[R], chain[next[R]]);
    }
    return out;
}

std::vector<double> delta_area(std::span<const RocPoint> chain) {
    return delta_area_schedule(chain).contribution;
}

}  // namespace rocch
