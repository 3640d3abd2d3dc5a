#include "rocch/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rocch {

namespace {

struct SelectorTraits {
    bool ch_family = false;
    bool keep_redundancy = false;
    LevelMetric metric = LevelMetric::area;
    bool mu_plus_one = false;
};

SelectorTraits traits_of(SelectorKind k) {
    switch (k) {
        case SelectorKind::CH_NO_REDUNDANCY_AREA:
            return {true, false, LevelMetric::area, false};
        case SelectorKind::CH_NO_REDUNDANCY_CROWDING:
            return {true, false, LevelMetric::crowding, false};
        case SelectorKind::CH_AREA_MU1:
            return {true, true, LevelMetric::area, true};
        case SelectorKind::CH_HV_MU1:
            return {true, true, LevelMetric::hypervolume, true};
        case SelectorKind::CH_NO_REDUNDANCY_AREA_MU1:
            return {true, false, LevelMetric::area, true};
        case SelectorKind::NSGA2:
            return {false, false, LevelMetric::crowding, false};
        case SelectorKind::SMS_EMOA:
            return {false, false, LevelMetric::hypervolume, true};
        case SelectorKind::MOEAD:
            return {false, false, LevelMetric::crowding, false};
    }
    throw std::logic_error("unknown selector kind");
}

// Contributions for one level/front, aligned with `members`.
std::vector<double> group_contributions(const std::vector<ObjectiveVector>& points,
                                        const std::vector<std::size_t>& members,
                                        LevelMetric metric) {
    std::vector<ObjectiveVector> pts;
    pts.reserve(members.size());
    for (const std::size_t i : members) pts.push_back(points[i]);
    switch (metric) {
        case LevelMetric::crowding:
            return crowding_distance(pts);
        case LevelMetric::hypervolume:
            return hv_exclusive(pts);
        case LevelMetric::area: {
            std::vector<std::size_t> order(members.size());
            for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                if (pts[a] != pts[b]) return point_less(pts[a], pts[b]);
                return a < b;
            });
            std::vector<RocPoint> chain;
            chain.reserve(members.size() + 2);
            chain.push_back(RocPoint::of(0, 0));
            for (const std::size_t i : order) chain.push_back(pts[i]);
            chain.push_back(RocPoint::of(1, 1));
            const std::vector<double> vals = delta_area(chain);
            std::vector<double> out(members.size(), 0.0);
            for (std::size_t pos = 0; pos < order.size(); ++pos) out[order[pos]] = vals[pos + 1];
            return out;
        }
    }
    throw std::logic_error("unknown level metric");
}

std::vector<ObjectiveVector> points_of(const std::vector<Individual>& pop) {
    std::vector<ObjectiveVector> pts;
    pts.reserve(pop.size());
    for (const Individual& ind : pop) {
        if (!ind.objectives) throw std::logic_error("individual lacks objectives");
        pts.push_back(*ind.objectives);
    }
    return pts;
}

void apply_unary(GdtPtr& tree, const FeatureSpace& space, const VariationRates& rates,
                 RandomSource& rng) {
    if (rng.chance(rates.mutation)) tree = mutate(tree, space, rng);
    if (rng.chance(rates.shifting)) tree = shift(tree, space, rng);
    if (rng.chance(rates.splitting)) tree = split(tree, space, rng);
}

bool has_both_classes(const Split& s) {
    bool pos = false, neg = false;
    for (const int l : s.labels) (l == 1 ? pos : neg) = true;
    return pos && neg;
}

struct Runner {
    const EngineConfig& cfg;
    const FeatureSpace& space;
    const Split& train;
    const Split& test;
    SelectorTraits traits;
    RandomSource rng;
    std::vector<Individual> pop;
    std::uint64_t evals = 0;
    std::uint64_t generations = 0;
    std::vector<double> ratios;
    std::size_t next_ratio = 0;
    bool regression_flag = false;
    ConvergenceLog log;

    Runner(const EngineConfig& c, const FeatureSpace& sp, const Split& tr, const Split& te)
        : cfg(c), space(sp), train(tr), test(te), traits(traits_of(c.selector)), rng(c.rng_seed) {
        if (cfg.population_size < 2)
            throw std::invalid_argument("population_size must be at least 2");
        if (cfg.max_evaluations < cfg.population_size)
            throw std::invalid_argument("max_evaluations must cover the initial population");
        if (cfg.tournament_size < 1) throw std::invalid_argument("tournament_size must be >= 1");
        for (const double r :
             {cfg.rates.crossover, cfg.rates.mutation, cfg.rates.shifting, cfg.rates.splitting})
            if (r < 0.0 || r > 1.0) throw std::invalid_argument("variation rates must be in [0,1]");
        if (train.rows.size() != train.labels.size() || test.rows.size() != test.labels.size())
            throw std::invalid_argument("split rows/labels length mismatch");
        if (!has_both_classes(train) || !has_both_classes(test))
            throw std::invalid_argument("splits must contain both classes");
        ratios = cfg.checkpoint_ratios;
        std::sort(ratios.begin(), ratios.end());
        ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());
        for (const double r : ratios)
            if (r <= 0.0 || r > 1.0)
                throw std::invalid_argument("checkpoint ratios must lie in (0,1]");
    }

    void evaluate_one(Individual& ind) {
        if (ind.objectives) return;
        ind.objectives = counts_to_point(evaluate(*ind.tree, train.rows, train.labels));
        ind.eval_stamp = 1;
        ++evals;
    }

    RocHull train_hull() const { return upper_hull(points_of(pop)); }

    double test_auch() const {
        std::vector<RocPoint> pts;
        pts.reserve(pop.size());
        for (const Individual& ind : pop)
            pts.push_back(counts_to_point(evaluate(*ind.tree, test.rows, test.labels)));
        return auch(upper_hull(pts));
    }

    void log_pending() {
        while (next_ratio < ratios.size() &&
               static_cast<double>(evals) >=
                   ratios[next_ratio] * static_cast<double>(cfg.max_evaluations)) {
            const RocHull hull = train_hull();
            CheckpointRecord rec;
            rec.ratio = ratios[next_ratio];
            rec.evaluations_used = evals;
            rec.train_auch = auch(hull);
            rec.test_auch = test_auch();
            rec.hull_size = hull.points.size();
            rec.hull_regression_possible = regression_flag;
            log.records.push_back(rec);
            regression_flag = false;
            ++next_ratio;
        }
    }

    void init() {
        pop.clear();
        pop.reserve(cfg.population_size);
        for (std::size_t i = 0; i < cfg.population_size; ++i) {
            pop.push_back(Individual{random_tree(space, rng), std::nullopt, 0});
            evaluate_one(pop.back());
        }
        log_pending();
    }

    void survive_union(std::vector<Individual>& u, std::size_t discard) {
        const std::vector<ObjectiveVector> upts = points_of(u);
        if (traits.ch_family) {
            const LevelPartition part = traits.keep_redundancy ? ch_sort_keep_redundancy(upts)
                                                               : ch_sort_no_redundancy(upts);
            if (discard > upts.size() - part.levels[0].size()) regression_flag = true;
            const std::vector<std::size_t> keep =
                reduce_with(upts, discard, rng, traits.keep_redundancy, traits.metric);
            std::vector<Individual> next;
            next.reserve(keep.size());
            for (const std::size_t i : keep) next.push_back(std::move(u[i]));
            pop = std::move(next);
        } else {
            const std::vector<std::size_t> keep = nsga2_survivors(upts, cfg.population_size);
            std::vector<Individual> next;
            next.reserve(keep.size());
            for (const std::size_t i : keep) next.push_back(std::move(u[i]));
            pop = std::move(next);
        }
    }

    void loop_generational() {
        while (evals < cfg.max_evaluations) {
            const std::uint64_t remaining = cfg.max_evaluations - evals;
            const std::size_t batch =
                traits.mu_plus_one
                    ? 1
                    : static_cast<std::size_t>(std::min<std::uint64_t>(
                          cfg.population_size, remaining));
            const std::vector<RankKey> keys = compute_rank_keys(points_of(pop), cfg.selector);
            std::vector<Individual> offspring =
                make_offspring(pop, keys, space, cfg, batch, rng);
            for (Individual& o : offspring) evaluate_one(o);

            std::vector<Individual> u = pop;
            for (Individual& o : offspring) u.push_back(std::move(o));

            if (cfg.selector == SelectorKind::SMS_EMOA) {
                const std::size_t victim = sms_emoa_victim(points_of(u));
                u.erase(u.begin() + static_cast<std::ptrdiff_t>(victim));
                pop = std::move(u);
            } else {
                survive_union(u, batch);
            }
            ++generations;
            log_pending();
        }
    }

    void loop_moead() {
        const std::size_t mu = cfg.population_size;
        const std::vector<std::pair<double, double>> weights = moead_weights(mu);
        const std::vector<std::vector<std::size_t>> hood =
            moead_neighborhoods(weights, std::min<std::size_t>(5, mu));
        auto objectives = [](const ObjectiveVector& p) {
            return std::pair<double, double>{p.fpr.value(), 1.0 - p.tpr.value()};
        };
        std::pair<double, double> ideal{1.0, 1.0};
        for (const Individual& ind : pop) {
            const auto [f1, f2] = objectives(*ind.objectives);
            ideal.first = std::min(ideal.first, f1);
            ideal.second = std::min(ideal.second, f2);
        }
        auto g = [&](const ObjectiveVector& p, std::size_t sub) {
            return moead_scalarize(p, weights[sub], ideal);
        };
        while (evals < cfg.max_evaluations) {
            for (std::size_t i = 0; i < mu && evals < cfg.max_evaluations; ++i) {
                const std::vector<std::size_t>& nb = hood[i];
                auto pick = [&] {
                    std::size_t best = nb[rng.index(nb.size())];
                    for (int t = 1; t < cfg.tournament_size; ++t) {
                        const std::size_t c = nb[rng.index(nb.size())];
                        if (g(*pop[c].objectives, i) < g(*pop[best].objectives, i)) best = c;
                    }
                    return best;
                };
                const std::size_t p1 = pick();
                const std::size_t p2 = pick();
                GdtPtr c1 = pop[p1].tree;
                GdtPtr c2 = pop[p2].tree;
                if (rng.chance(cfg.rates.crossover)) std::tie(c1, c2) = crossover(c1, c2, rng);
                apply_unary(c1, space, cfg.rates, rng);
                Individual child{std::move(c1), std::nullopt, 0};
                evaluate_one(child);
                const auto [f1, f2] = objectives(*child.objectives);
                ideal.first = std::min(ideal.first, f1);
                ideal.second = std::min(ideal.second, f2);
                for (const std::size_t j : nb)
                    if (g(*child.objectives, j) < g(*pop[j].objectives, j)) pop[j] = child;
            }
            ++generations;
            log_pending();
        }
    }

    RunResult finish() {
        RunResult out;
        const RocHull hull = train_hull();
        out.train_auch = auch(hull);
        out.test_auch = test_auch();
        out.population = std::move(pop);
        out.log = std::move(log);
        out.evaluations_used = evals;
        out.generations = generations;
        return out;
    }
};

}  // namespace

bool rank_better(const RankKey& a, const RankKey& b) {
    if (a.level != b.level) return a.level < b.level;
    return a.contribution > b.contribution;
}

std::vector<RankKey> compute_rank_keys(const std::vector<ObjectiveVector>& points,
                                       SelectorKind selector) {
    const SelectorTraits traits = traits_of(selector);
    std::vector<RankKey> keys(points.size());
    if (traits.ch_family) {
        const LevelPartition part = traits.keep_redundancy ? ch_sort_keep_redundancy(points)
                                                           : ch_sort_no_redundancy(points);
        for (std::size_t li = 0; li < part.levels.size(); ++li) {
            const std::vector<double> contrib =
                group_contributions(points, part.levels[li], traits.metric);
            for (std::size_t pos = 0; pos < part.levels[li].size(); ++pos)
                keys[part.levels[li][pos]] = RankKey{li, contrib[pos]};
        }
        for (const std::size_t i : part.redundant_archive)
            keys[i] = RankKey{part.levels.size(), 0.0};
    } else {
        const LevelMetric metric =
            selector == SelectorKind::SMS_EMOA ? LevelMetric::hypervolume : LevelMetric::crowding;
        const auto fronts = fast_nondominated_sort(points);
        for (std::size_t fi = 0; fi < fronts.size(); ++fi) {
            const std::vector<double> contrib = group_contributions(points, fronts[fi], metric);
            for (std::size_t pos = 0; pos < fronts[fi].size(); ++pos)
                keys[fronts[fi][pos]] = RankKey{fi, contrib[pos]};
        }
    }
    return keys;
}

const Individual& tournament_select(const std::vector<Individual>& pop,
                                    const std::vector<RankKey>& keys, int k, RandomSource& rng) {
    if (pop.empty()) throw std::invalid_argument("tournament over empty population");
    if (keys.size() != pop.size())
        throw std::invalid_argument("tournament keys/population size mismatch");
    if (k < 1) throw std::invalid_argument("tournament size must be >= 1");
    std::size_t best = rng.index(pop.size());
    for (int i = 1; i < k; ++i) {
        const std::size_t c = rng.index(pop.size());
        if (rank_better(keys[c], keys[best])) best = c;
    }
    return pop[best];
}

std::vector<Individual> make_offspring(const std::vector<Individual>& pop,
                                       const std::vector<RankKey>& keys, const FeatureSpace& space,
                                       const EngineConfig& cfg, std::size_t count,
                                       RandomSource& rng) {
    std::vector<Individual> out;
    out.reserve(count);
    while (out.size() < count) {
        const Individual& p1 = tournament_select(pop, keys, cfg.tournament_size, rng);
        const Individual& p2 = tournament_select(pop, keys, cfg.tournament_size, rng);
        GdtPtr c1 = p1.tree;
        GdtPtr c2 = p2.tree;
        if (rng.chance(cfg.rates.crossover)) std::tie(c1, c2) = crossover(c1, c2, rng);
        apply_unary(c1, space, cfg.rates, rng);
        out.push_back(Individual{std::move(c1), std::nullopt, 0});
        if (out.size() < count) {
            apply_unary(c2, space, cfg.rates, rng);
            out.push_back(Individual{std::move(c2), std::nullopt, 0});
        }
    }
    return out;
}

std::vector<std::size_t> nsga2_survivors(const std::vector<ObjectiveVector>& points,
                                         std::size_t mu) {
    if (mu > points.size())
        throw std::invalid_argument("nsga2_survivors: mu exceeds population size");
    const auto fronts = fast_nondominated_sort(points);
    std::vector<std::size_t> out;
    out.reserve(mu);
    for (const std::vector<std::size_t>& front : fronts) {
        if (out.size() == mu) break;
        if (out.size() + front.size() <= mu) {
            out.insert(out.end(), front.begin(), front.end());
            continue;
        }
        const std::size_t need = mu - out.size();
        std::vector<ObjectiveVector> pts;
        pts.reserve(front.size());
        for (const std::size_t i : front) pts.push_back(points[i]);
        const std::vector<double> cd = crowding_distance(pts);
        std::vector<std::size_t> order(front.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cd[a] != cd[b]) return cd[a] > cd[b];
            return front[a] < front[b];
        });
        for (std::size_t i = 0; i < need; ++i) out.push_back(front[order[i]]);
        break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::size_t sms_emoa_victim(const std::vector<ObjectiveVector>& points) {
    if (points.empty()) throw std::invalid_argument("sms_emoa_victim: empty population");
    const auto fronts = fast_nondominated_sort(points);
    const std::vector<std::size_t>& last = fronts.back();
    if (last.size() == 1) return last[0];
    std::vector<ObjectiveVector> pts;
    pts.reserve(last.size());
    for (const std::size_t i : last) pts.push_back(points[i]);
    const std::vector<double> contrib = hv_exclusive(pts);
    std::size_t argmin = 0;
    for (std::size_t i = 1; i < contrib.size(); ++i)
        if (contrib[i] < contrib[argmin]) argmin = i;
    return last[argmin];
}

std::vector<std::pair<double, double>> moead_weights(std::size_t mu) {
    if (mu < 2) throw std::invalid_argument("moead_weights: need at least two subproblems");
    std::vector<std::pair<double, double>> w;
    w.reserve(mu);
    for (std::size_t i = 0; i < mu; ++i) {
        const double a = static_cast<double>(i) / static_cast<double>(mu - 1);
        w.emplace_back(a, 1.0 - a);
    }
    return w;
}

std::vector<std::vector<std::size_t>> moead_neighborhoods(
    const std::vector<std::pair<double, double>>& weights, std::size_t T) {
    if (T < 1 || T > weights.size())
        throw std::invalid_argument("moead_neighborhoods: bad neighborhood size");
    std::vector<std::vector<std::size_t>> hood(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        std::vector<std::size_t> order(weights.size());
        for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double da = std::hypot(weights[a].first - weights[i].first,
                                         weights[a].second - weights[i].second);
            const double db = std::hypot(weights[b].first - weights[i].first,
                                         weights[b].second - weights[i].second);
            if (da != db) return da < db;
            return a < b;
        });
        hood[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(T));
        std::sort(hood[i].begin(), hood[i].end());
    }
    return hood;
}

RunResult run_chmogp(const EngineConfig& cfg, const FeatureSpace& space, const Split& train,
                     const Split& test) {
    if (!traits_of(cfg.selector).ch_family)
        throw std::invalid_argument("run_chmogp requires a hull-based selector");
    return run(cfg, space, train, test);
}

RunResult run_baseline(const EngineConfig& cfg, const FeatureSpace& space, const Split& train,
                       const Split& test) {
    if (traits_of(cfg.selector).ch_family)
        throw std::invalid_argument("run_baseline requires a baseline selector");
    return run(cfg, space, train, test);
}

RunResult run(const EngineConfig& cfg, const FeatureSpace& space, const Split& train,
              const Split& test) {
    Runner r(cfg, space, train, test);
    r.init();
    if (cfg.selector == SelectorKind::MOEAD)
        r.loop_moead();
    else
        r.loop_generational();
    return r.finish();
}

}  // namespace rocch
