#include "rocch/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace rocch {

Dominance dominance(const ObjectiveVector& u, const ObjectiveVector& v) {
    const int fc = compare(u.fpr, v.fpr);
    const int tc = compare(u.tpr, v.tpr);
    if (fc == 0 && tc == 0) return Dominance::equal;
    if (fc <= 0 && tc >= 0) return Dominance::u_dominates;
    if (fc >= 0 && tc <= 0) return Dominance::v_dominates;
    return Dominance::nondominated;
}

const char* selector_name(SelectorKind k) {
    switch (k) {
        case SelectorKind::CH_NO_REDUNDANCY_AREA: return "CH-MOGP";
        case SelectorKind::CH_NO_REDUNDANCY_CROWDING: return "CHCrowding";
        case SelectorKind::CH_AREA_MU1: return "CHH-MOGP";
        case SelectorKind::CH_HV_MU1: return "CH-EMOA";
        case SelectorKind::CH_NO_REDUNDANCY_AREA_MU1: return "RCHH-EMOA";
        case SelectorKind::NSGA2: return "NSGA-II";
        case SelectorKind::SMS_EMOA: return "SMS-EMOA";
        case SelectorKind::MOEAD: return "MOEA-D";
    }
    return "?";
}

SelectorKind parse_selector(std::string_view name) {
    std::string key;
    for (const char c : name) {
        if (c == '-' || c == '_' || c == '/' || c == ' ') continue;
        key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    if (key == "CHMOGP") return SelectorKind::CH_NO_REDUNDANCY_AREA;
    if (key == "CHCROWDING") return SelectorKind::CH_NO_REDUNDANCY_CROWDING;
    if (key == "CHHMOGP") return SelectorKind::CH_AREA_MU1;
    if (key == "CHEMOA") return SelectorKind::CH_HV_MU1;
    if (key == "RCHHEMOA") return SelectorKind::CH_NO_REDUNDANCY_AREA_MU1;
    if (key == "NSGA2" || key == "NSGAII") return SelectorKind::NSGA2;
    if (key == "SMSEMOA") return SelectorKind::SMS_EMOA;
    if (key == "MOEAD") return SelectorKind::MOEAD;
    throw std::invalid_argument("unknown selector: " + std::string(name));
}

std::vector<SelectorKind> all_selectors() {
    return {SelectorKind::CH_NO_REDUNDANCY_AREA,      SelectorKind::CH_NO_REDUNDANCY_CROWDING,
            SelectorKind::CH_AREA_MU1,                SelectorKind::CH_HV_MU1,
            SelectorKind::CH_NO_REDUNDANCY_AREA_MU1,  SelectorKind::NSGA2,
            SelectorKind::SMS_EMOA,                   SelectorKind::MOEAD};
}

namespace {

LevelPartition ch_sort_impl(std::span<const ObjectiveVector> pop, bool archive_duplicates) {
    if (pop.empty()) throw std::invalid_argument("ch_sort: empty population");
    LevelPartition part;

    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        bool dup = false;
        if (archive_duplicates) {
            for (const std::size_t j : remaining) {
                if (pop[j] == pop[i]) { dup = true; break; }
            }
        }
        if (dup)
            part.redundant_archive.push_back(i);
        else
            remaining.push_back(i);
    }

    while (!remaining.empty()) {
        std::vector<RocPoint> pts;
        pts.reserve(remaining.size());
        for (const std::size_t i : remaining) pts.push_back(pop[i]);
        const RocHull hull = upper_hull(pts);

        std::vector<std::size_t> level, rest;
        for (const std::size_t i : remaining) {
            if (point_on_chain(hull, pop[i]))
                level.push_back(i);
            else
                rest.push_back(i);
        }
        if (level.empty()) {
            // Everything left sits strictly below the diagonal; no chain
            // will ever touch these, so they fall into one final level.
            part.levels.push_back(std::move(remaining));
            break;
        }
        part.levels.push_back(std::move(level));
        remaining = std::move(rest);
    }
    return part;
}

// Chain over a level's points (anchors added), plus the map back from chain
// position to population index.
struct LevelChain {
    std::vector<RocPoint> points;
    std::vector<std::size_t> pop_index;  // aligned with points; anchors hold npos
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

LevelChain level_chain(std::span<const ObjectiveVector> pop, const std::vector<std::size_t>& level) {
    LevelChain c;
    std::vector<std::size_t> order = level;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pop[a] != pop[b]) return point_less(pop[a], pop[b]);
        return a < b;
    });
    c.points.push_back(RocPoint::of(0, 0));
    c.pop_index.push_back(LevelChain::npos);
    for (const std::size_t i : order) {
        c.points.push_back(pop[i]);
        c.pop_index.push_back(i);
    }
    c.points.push_back(RocPoint::of(1, 1));
    c.pop_index.push_back(LevelChain::npos);
    return c;
}

// Removes `count` members of `level` with the minimal area contribution,
// one at a time in delta-area cascade order.
void remove_by_area(std::span<const ObjectiveVector> pop, const std::vector<std::size_t>& level,
                    std::size_t count, std::vector<char>& removed) {
    const LevelChain chain = level_chain(pop, level);
    const DeltaAreaSchedule sched = delta_area_schedule(chain.points);
    for (std::size_t k = 0; k < count; ++k)
        removed[chain.pop_index[sched.removal_order[k]]] = 1;
}

// Generic one-at-a-time removal with recomputation, for the crowding and
// hypervolume metrics.
template <class Metric>
void remove_iteratively(std::span<const ObjectiveVector> pop, const std::vector<std::size_t>& level,
                        std::size_t count, std::vector<char>& removed, Metric metric) {
    std::vector<std::size_t> alive = level;
    for (std::size_t k = 0; k < count; ++k) {
        std::vector<ObjectiveVector> pts;
        pts.reserve(alive.size());
        for (const std::size_t i : alive) pts.push_back(pop[i]);
        const std::vector<double> score = metric(pts);
        std::size_t worst = 0;
        for (std::size_t i = 1; i < score.size(); ++i)
            if (score[i] < score[worst]) worst = i;
        removed[alive[worst]] = 1;
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(worst));
    }
}

}  // namespace

LevelPartition ch_sort_no_redundancy(std::span<const ObjectiveVector> pop) {
    return ch_sort_impl(pop, true);
}

LevelPartition ch_sort_keep_redundancy(std::span<const ObjectiveVector> pop) {
    return ch_sort_impl(pop, false);
}

std::vector<std::size_t> reduce(std::span<const ObjectiveVector> pop, std::size_t n_discard,
                                RandomSource& rng) {
    return reduce_with(pop, n_discard, rng, false, LevelMetric::area);
}

std::vector<std::size_t> reduce_with(std::span<const ObjectiveVector> pop, std::size_t n_discard,
                                     RandomSource& rng, bool keep_redundancy, LevelMetric metric) {
    if (n_discard > pop.size()) throw std::invalid_argument("reduce: discard count exceeds population");
    std::vector<char> removed(pop.size(), 0);
    if (n_discard > 0) {
        const LevelPartition part = keep_redundancy ? ch_sort_keep_redundancy(pop)
                                                    : ch_sort_no_redundancy(pop);
        std::size_t deficit = n_discard;
        if (part.redundant_archive.size() >= deficit) {
            std::vector<std::size_t> pool = part.redundant_archive;
            for (std::size_t k = 0; k < deficit; ++k) {
                const std::size_t j = k + rng.index(pool.size() - k);
                std::swap(pool[k], pool[j]);
                removed[pool[k]] = 1;
            }
            deficit = 0;
        } else {
            for (const std::size_t i : part.redundant_archive) removed[i] = 1;
            deficit -= part.redundant_archive.size();
            std::size_t li = part.levels.size();
            while (li > 0 && part.levels[li - 1].size() < deficit) {
                --li;
                for (const std::size_t i : part.levels[li]) removed[i] = 1;
                deficit -= part.levels[li].size();
            }
            if (deficit > 0) {
                const std::vector<std::size_t>& boundary = part.levels[li - 1];
                switch (metric) {
                    case LevelMetric::area:
                        remove_by_area(pop, boundary, deficit, removed);
                        break;
                    case LevelMetric::crowding:
                        remove_iteratively(pop, boundary, deficit, removed,
                                           [](std::span<const ObjectiveVector> f) {
                                               return crowding_distance(f);
                                           });
                        break;
                    case LevelMetric::hypervolume:
                        remove_iteratively(pop, boundary, deficit, removed,
                                           [](std::span<const ObjectiveVector> f) {
                                               return hv_exclusive(f);
                                           });
                        break;
                }
            }
        }
    }
    std::vector<std::size_t> kept;
    kept.reserve(pop.size() - n_discard);
    for (std::size_t i = 0; i < pop.size(); ++i)
        if (!removed[i]) kept.push_back(i);
    return kept;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::span<const ObjectiveVector> pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dom_count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            switch (dominance(pop[i], pop[j])) {
                case Dominance::u_dominates:
                    dominated[i].push_back(j);
                    ++dom_count[j];
                    break;
                case Dominance::v_dominates:
                    dominated[j].push_back(i);
                    ++dom_count[i];
                    break;
                default:
                    break;
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i)
        if (dom_count[i] == 0) current.push_back(i);
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (const std::size_t i : current)
            for (const std::size_t j : dominated[i])
                if (--dom_count[j] == 0) next.push_back(j);
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    const std::size_t n = front.size();
    std::vector<double> dist(n, 0.0);
    if (n == 0) return dist;
    if (n <= 2) {
        std::fill(dist.begin(), dist.end(), kInfContribution);
        return dist;
    }
    const auto accumulate_objective = [&](auto value_of, auto less) {
        std::vector<std::size_t> order(n);
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (less(a, b)) return true;
            if (less(b, a)) return false;
            return a < b;
        });
        dist[order.front()] = kInfContribution;
        dist[order.back()] = kInfContribution;
        const double range = value_of(order.back()) - value_of(order.front());
        if (range <= 0.0) return;
        for (std::size_t k = 1; k + 1 < n; ++k) {
            if (dist[order[k]] == kInfContribution) continue;
            dist[order[k]] += (value_of(order[k + 1]) - value_of(order[k - 1])) / range;
        }
    };
    accumulate_objective([&](std::size_t i) { return front[i].fpr.value(); },
                         [&](std::size_t a, std::size_t b) { return front[a].fpr < front[b].fpr; });
    accumulate_objective([&](std::size_t i) { return front[i].tpr.value(); },
                         [&](std::size_t a, std::size_t b) { return front[a].tpr < front[b].tpr; });
    return dist;
}

double dominated_area(std::span<const ObjectiveVector> pts) {
    if (pts.empty()) return 0.0;
    std::vector<std::size_t> order(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return point_less(pts[a], pts[b]);
    });
    // height at x is the best tpr among points with fpr <= x.
    double area = 0.0;
    double best_tpr = pts[order[0]].tpr.value();
    double x = pts[order[0]].fpr.value();
    for (std::size_t k = 1; k < order.size(); ++k) {
        const double nx = pts[order[k]].fpr.value();
        if (nx > x) {
            area += best_tpr * (nx - x);
            x = nx;
        }
        best_tpr = std::max(best_tpr, pts[order[k]].tpr.value());
    }
    area += best_tpr * (1.0 - x);
    return area;
}

std::vector<double> hv_exclusive(std::span<const ObjectiveVector> front) {
    const double whole = dominated_area(front);
    std::vector<double> out(front.size(), 0.0);
    std::vector<ObjectiveVector> rest;
    rest.reserve(front.size());
    for (std::size_t i = 0; i < front.size(); ++i) {
        rest.clear();
        for (std::size_t j = 0; j < front.size(); ++j)
            if (j != i) rest.push_back(front[j]);
        out[i] = whole - dominated_area(rest);
    }
    return out;
}

std::vector<double> hypervolume2d_contribution(std::span<const ObjectiveVector> front) {
    for (std::size_t i = 0; i < front.size(); ++i) {
        for (std::size_t j = 0; j < front.size(); ++j) {
            if (i == j) continue;
            if (dominance(front[i], front[j]) == Dominance::u_dominates)
                throw std::invalid_argument("hypervolume2d_contribution: dominated member present");
        }
    }
    return hv_exclusive(front);
}

double moead_scalarize(const ObjectiveVector& v, std::pair<double, double> weight,
                       std::pair<double, double> ideal) {
    const double g1 = v.fpr.value();
    const double g2 = 1.0 - v.tpr.value();
    return std::max(weight.first * std::abs(g1 - ideal.first),
                    weight.second * std::abs(g2 - ideal.second));
}

}  // namespace rocch
