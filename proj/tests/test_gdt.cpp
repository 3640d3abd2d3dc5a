#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rocch/gdt.hpp"

using namespace rocch;

namespace {

FeatureSpace numeric_space(std::size_t n) {
    FeatureSpace s;
    for (std::size_t i = 0; i < n; ++i) s.attributes.push_back(AttributeRange{false, 0.0, 1.0, {}});
    return s;
}

FeatureSpace mixed_space() {
    FeatureSpace s = numeric_space(3);
    AttributeRange cat;
    cat.categorical = true;
    cat.codes = {0.0, 1.0, 2.0};
    s.attributes.push_back(cat);
    return s;
}

BoolExpr cmp(char op, std::size_t attr, double c) {
    BoolExpr e;
    e.kind = BoolExpr::Kind::cmp;
    e.op = op;
    e.attr = attr;
    e.constant = c;
    return e;
}

// Structure with constants masked; shift must keep this fixed.
void shape_expr(const BoolExpr& e, std::string& out) {
    if (e.kind == BoolExpr::Kind::cmp) {
        out += e.op;
        out += 'x' + std::to_string(e.attr);
        return;
    }
    out += e.kind == BoolExpr::Kind::negation      ? "!("
           : e.kind == BoolExpr::Kind::conjunction ? "&("
                                                   : "|(";
    for (const BoolExpr& k : e.kids) shape_expr(k, out);
    out += ')';
}

std::string shape(const GdtNode& t) {
    if (t.is_leaf) return t.label ? "1" : "0";
    std::string out = "[";
    shape_expr(t.condition, out);
    out += ' ' + shape(*t.then_child) + ' ' + shape(*t.else_child) + ']';
    return out;
}

void collect_constants(const BoolExpr& e, std::vector<double>& out) {
    if (e.kind == BoolExpr::Kind::cmp) {
        out.push_back(e.constant);
        return;
    }
    for (const BoolExpr& k : e.kids) collect_constants(k, out);
}

void collect_constants(const GdtNode& t, std::vector<double>& out) {
    if (t.is_leaf) return;
    collect_constants(t.condition, out);
    collect_constants(*t.then_child, out);
    collect_constants(*t.else_child, out);
}

GdtPtr full_tree(int levels_left, int label) {
    if (levels_left == 1) return make_leaf(label);
    return make_branch(cmp('<', 0, 0.5), full_tree(levels_left - 1, label),
                       full_tree(levels_left - 1, 1 - label));
}

// Caterpillar of the given depth: cheap to copy yet sits at the cap.
GdtPtr chain_tree(int levels_left) {
    if (levels_left == 1) return make_leaf(1);
    return make_branch(cmp('>', 0, 0.5), chain_tree(levels_left - 1), make_leaf(0));
}

}  // namespace

TEST_CASE("random_tree: depth_max 1 is always a bare leaf") {
    const FeatureSpace s = numeric_space(2);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        RandomSource rng(seed);
        const GdtPtr t = random_tree(s, rng, 1, 1);
        CHECK(t->is_leaf);
    }
}

TEST_CASE("random_tree: depth bounds hold and all depths occur") {
    const FeatureSpace s = mixed_space();
    RandomSource rng(7);
    std::set<int> seen_depths;
    std::set<int> seen_labels;
    for (int i = 0; i < 10000; ++i) {
        const GdtPtr t = random_tree(s, rng);
        const int d = depth(*t);
        CHECK(d >= 1);
        CHECK(d <= 3);
        seen_depths.insert(d);
        if (t->is_leaf) seen_labels.insert(t->label);
    }
    CHECK(seen_depths == std::set<int>{1, 2, 3});
    CHECK(seen_labels == std::set<int>{0, 1});
}

TEST_CASE("random_tree: depth_min forces branching") {
    const FeatureSpace s = numeric_space(2);
    RandomSource rng(21);
    for (int i = 0; i < 2000; ++i) {
        const GdtPtr t = random_tree(s, rng, 2, 3);
        CHECK(depth(*t) >= 2);
    }
}

TEST_CASE("random_tree is deterministic under a fixed seed") {
    const FeatureSpace s = mixed_space();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        RandomSource a(seed), b(seed);
        CHECK(to_text(*random_tree(s, a)) == to_text(*random_tree(s, b)));
    }
}

TEST_CASE("random_tree: constants respect attribute metadata") {
    FeatureSpace s;
    s.attributes.push_back(AttributeRange{false, -2.0, 5.0, {}});
    AttributeRange cat;
    cat.categorical = true;
    cat.codes = {3.0, 7.0};
    s.attributes.push_back(cat);
    RandomSource rng(3);
    for (int i = 0; i < 5000; ++i) {
        const GdtPtr t = random_tree(s, rng, 2, 3);
        std::vector<double> consts;
        std::vector<const GdtNode*> stack{t.get()};
        while (!stack.empty()) {
            const GdtNode* n = stack.back();
            stack.pop_back();
            if (n->is_leaf) continue;
            std::vector<const BoolExpr*> es{&n->condition};
            while (!es.empty()) {
                const BoolExpr* e = es.back();
                es.pop_back();
                if (e->kind == BoolExpr::Kind::cmp) {
                    if (e->attr == 0) {
                        CHECK(e->constant >= -2.0);
                        CHECK(e->constant <= 5.0);
                    } else {
                        CHECK(e->op == '=');
                        CHECK((e->constant == 3.0 || e->constant == 7.0));
                    }
                } else {
                    for (const BoolExpr& k : e->kids) es.push_back(&k);
                }
            }
            stack.push_back(n->then_child.get());
            stack.push_back(n->else_child.get());
        }
    }
}

TEST_CASE("classify fixed traces") {
    CHECK(classify(*make_leaf(1), {0.42}) == 1);
    CHECK(classify(*make_leaf(0), {}) == 0);

    const GdtPtr thr = make_branch(cmp('<', 0, 0.5), make_leaf(1), make_leaf(0));
    CHECK(classify(*thr, {0.3}) == 1);
    CHECK(classify(*thr, {0.7}) == 0);

    BoolExpr wrapped;
    wrapped.kind = BoolExpr::Kind::negation;
    wrapped.kids.push_back(cmp('>', 0, 0.5));
    const GdtPtr thr2 = make_branch(wrapped, make_leaf(1), make_leaf(0));
    for (double x = 0.0; x <= 1.0; x += 0.01) {
        if (x == 0.5) continue;
        CHECK(classify(*thr, {x}) == classify(*thr2, {x}));
    }

    CHECK_THROWS_AS(classify(*thr, {}), std::out_of_range);
}

TEST_CASE("boolean connectives evaluate correctly") {
    BoolExpr both;
    both.kind = BoolExpr::Kind::conjunction;
    both.kids = {cmp('>', 0, 0.2), cmp('<', 0, 0.8)};
    CHECK(eval_expr(both, {0.5}));
    CHECK_FALSE(eval_expr(both, {0.9}));

    BoolExpr either;
    either.kind = BoolExpr::Kind::disjunction;
    either.kids = {cmp('<', 0, 0.2), cmp('>', 0, 0.8)};
    CHECK(eval_expr(either, {0.1}));
    CHECK(eval_expr(either, {0.9}));
    CHECK_FALSE(eval_expr(either, {0.5}));

    CHECK(eval_expr(cmp('=', 0, 2.0), {2.0}));
    CHECK_FALSE(eval_expr(cmp('=', 0, 2.0), {2.5}));
}

TEST_CASE("evaluate: anchors, hand tally, totality, degeneracy") {
    const std::vector<std::vector<double>> rows{{0.1}, {0.4}, {0.6}, {0.9}};
    const std::vector<int> labels{1, 0, 1, 0};

    const ConfusionCounts all_pos = evaluate(*make_leaf(1), rows, labels);
    CHECK(all_pos.tp == 2);
    CHECK(all_pos.fp == 2);
    CHECK(all_pos.tn == 0);
    CHECK(all_pos.fn == 0);
    CHECK(counts_to_point(all_pos) == RocPoint::of(1, 1));
    CHECK(counts_to_point(evaluate(*make_leaf(0), rows, labels)) == RocPoint::of(0, 0));

    const GdtPtr thr = make_branch(cmp('<', 0, 0.5), make_leaf(1), make_leaf(0));
    const ConfusionCounts c = evaluate(*thr, rows, labels);
    CHECK(c.tp == 1);
    CHECK(c.fp == 1);
    CHECK(c.tn == 1);
    CHECK(c.fn == 1);

    const FeatureSpace s = numeric_space(1);
    RandomSource rng(17);
    for (int i = 0; i < 200; ++i) {
        const GdtPtr t = random_tree(s, rng);
        const ConfusionCounts k = evaluate(*t, rows, labels);
        CHECK(k.tp + k.fp + k.tn + k.fn == 4);
    }

    CHECK_THROWS_AS(evaluate(*make_leaf(1), rows, {1, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(evaluate(*make_leaf(1), {{0.1}}, {1, 0}), std::invalid_argument);
}

TEST_CASE("crossover: two leaves swap to the same pair") {
    const GdtPtr a = make_leaf(0), b = make_leaf(1);
    RandomSource rng(5);
    const auto [c1, c2] = crossover(a, b, rng);
    CHECK(tree_equal(*c1, *b));
    CHECK(tree_equal(*c2, *a));
}

TEST_CASE("crossover: root swap yields the parents exchanged") {
    const GdtPtr a = make_leaf(0);
    const GdtPtr b = make_branch(cmp('>', 1, 0.25), make_leaf(1), make_leaf(0));
    bool found = false;
    for (std::uint64_t seed = 0; seed < 200 && !found; ++seed) {
        RandomSource rng(seed);
        const auto [c1, c2] = crossover(a, b, rng);
        if (tree_equal(*c1, *b) && tree_equal(*c2, *a)) found = true;
    }
    CHECK(found);
}

TEST_CASE("crossover: deep parents never exceed the depth cap") {
    const GdtPtr a = chain_tree(kMaxTreeDepth);
    const GdtPtr b = chain_tree(kMaxTreeDepth);
    REQUIRE(depth(*a) == 17);
    RandomSource rng(11);
    for (int i = 0; i < 10000; ++i) {
        const auto [c1, c2] = crossover(a, b, rng);
        CHECK(depth(*c1) <= kMaxTreeDepth);
        CHECK(depth(*c2) <= kMaxTreeDepth);
    }
}

TEST_CASE("crossover is deterministic under a fixed seed") {
    const FeatureSpace s = mixed_space();
    RandomSource gen(23);
    const GdtPtr a = random_tree(s, gen, 2, 3);
    const GdtPtr b = random_tree(s, gen, 2, 3);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        RandomSource r1(seed), r2(seed);
        const auto [x1, y1] = crossover(a, b, r1);
        const auto [x2, y2] = crossover(a, b, r2);
        CHECK(to_text(*x1) == to_text(*x2));
        CHECK(to_text(*y1) == to_text(*y2));
    }
}

TEST_CASE("mutate: leaf-rooted trees, depth cap, determinism") {
    const FeatureSpace s = mixed_space();
    RandomSource rng(31);
    const GdtPtr leaf = make_leaf(1);
    for (int i = 0; i < 500; ++i) {
        const GdtPtr m = mutate(leaf, s, rng);
        CHECK(depth(*m) <= 3);  // whole tree replaced by a fragment
    }
    const GdtPtr deep = chain_tree(kMaxTreeDepth);
    for (int i = 0; i < 10000; ++i) {
        const GdtPtr m = mutate(deep, s, rng);
        CHECK(depth(*m) <= kMaxTreeDepth);
    }
    RandomSource r1(9), r2(9);
    CHECK(to_text(*mutate(deep, s, r1)) == to_text(*mutate(deep, s, r2)));
}

TEST_CASE("shift: bare leaf unchanged, range respected, structure fixed") {
    const FeatureSpace s = numeric_space(2);
    RandomSource rng(41);
    const GdtPtr leaf = make_leaf(0);
    CHECK(shift(leaf, s, rng) == leaf);

    BoolExpr joint;
    joint.kind = BoolExpr::Kind::conjunction;
    joint.kids = {cmp('<', 0, 0.5), cmp('>', 1, 0.5)};
    const GdtPtr t =
        make_branch(joint, make_branch(cmp('=', 0, 0.25), make_leaf(1), make_leaf(0)), make_leaf(0));
    const std::string base_shape = shape(*t);
    std::vector<double> base_consts;
    collect_constants(*t, base_consts);

    for (int i = 0; i < 10000; ++i) {
        const GdtPtr out = shift(t, s, rng);
        CHECK(shape(*out) == base_shape);
        std::vector<double> consts;
        collect_constants(*out, consts);
        REQUIRE(consts.size() == base_consts.size());
        int differing = 0;
        for (std::size_t k = 0; k < consts.size(); ++k) {
            CHECK(consts[k] >= 0.0);
            CHECK(consts[k] <= 1.0);
            if (consts[k] != base_consts[k]) {
                ++differing;
                CHECK(std::fabs(consts[k] - base_consts[k]) <= 0.1 + 1e-15);
            }
        }
        CHECK(differing == 1);
    }
}

TEST_CASE("shift: categorical comparisons resample an observed code") {
    FeatureSpace s;
    AttributeRange cat;
    cat.categorical = true;
    cat.codes = {1.0, 4.0, 9.0};
    s.attributes.push_back(cat);
    const GdtPtr t = make_branch(cmp('=', 0, 4.0), make_leaf(1), make_leaf(0));
    RandomSource rng(51);
    std::set<double> seen;
    for (int i = 0; i < 2000; ++i) {
        const GdtPtr out = shift(t, s, rng);
        std::vector<double> consts;
        collect_constants(*out, consts);
        REQUIRE(consts.size() == 1);
        CHECK((consts[0] == 1.0 || consts[0] == 4.0 || consts[0] == 9.0));
        seen.insert(consts[0]);
    }
    CHECK(seen.size() == 3);
}

TEST_CASE("split: leaf becomes a branch preserving the class on the then side") {
    const FeatureSpace s = numeric_space(2);
    RandomSource rng(61);
    const GdtPtr out = split(make_leaf(1), s, rng);
    REQUIRE_FALSE(out->is_leaf);
    CHECK(out->condition.kind == BoolExpr::Kind::cmp);
    CHECK(out->then_child->is_leaf);
    CHECK(out->else_child->is_leaf);
    CHECK(out->then_child->label == 1);
    CHECK(out->else_child->label == 0);
}

TEST_CASE("split: leaf count grows by one below the cap, unchanged at it") {
    const FeatureSpace s = mixed_space();
    RandomSource rng(71);
    for (int i = 0; i < 500; ++i) {
        const GdtPtr t = random_tree(s, rng);
        const GdtPtr out = split(t, s, rng);
        CHECK(count_leaves(*out) == count_leaves(*t) + 1);
        CHECK(depth(*out) <= kMaxTreeDepth);
    }
    // Every leaf of a full depth-17 tree sits at the cap.
    const GdtPtr capped = full_tree(kMaxTreeDepth, 1);
    const GdtPtr same = split(capped, s, rng);
    CHECK(same == capped);
}

TEST_CASE("serialization matches the documented form exactly") {
    const GdtPtr inner = make_branch(cmp('=', 7, 2.0), make_leaf(0), make_leaf(1));
    const GdtPtr t = make_branch(cmp('<', 3, 0.25), make_leaf(1), inner);
    const std::string text = "(if (< x3 0.25) 1 (if (= x7 2) 0 1))";
    CHECK(to_text(*t) == text);
    CHECK(to_text(*parse_tree(text)) == text);
    CHECK(tree_equal(*parse_tree(text), *t));

    BoolExpr neg;
    neg.kind = BoolExpr::Kind::negation;
    BoolExpr pair;
    pair.kind = BoolExpr::Kind::disjunction;
    pair.kids = {cmp('>', 0, 0.125), cmp('=', 1, 3.0)};
    neg.kids.push_back(pair);
    const GdtPtr t2 = make_branch(neg, make_leaf(0), make_leaf(1));
    CHECK(to_text(*t2) == "(if (not (or (> x0 0.125) (= x1 3))) 0 1)");
}

TEST_CASE("serialization round-trips random trees exactly") {
    const FeatureSpace s = mixed_space();
    RandomSource rng(81);
    for (int i = 0; i < 1000; ++i) {
        GdtPtr t = random_tree(s, rng, 1, 3);
        // Deepen some trees through variation to cover nested structures.
        for (int k = 0; k < 3; ++k) t = mutate(t, s, rng);
        const std::string text = to_text(*t);
        const GdtPtr back = parse_tree(text);
        CHECK(tree_equal(*back, *t));
        CHECK(to_text(*back) == text);
    }
}

TEST_CASE("parse_tree rejects malformed input") {
    CHECK_THROWS_AS(parse_tree(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("2"), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("(if"), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("(if (< x 0.2) 1 0)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("(if (< x0 abc) 1 0)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("(frob (< x0 0.2) 1 0)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("(if (<= x0 0.2) 1 0)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("1 1"), std::invalid_argument);
    CHECK_THROWS_AS(parse_tree("(if (< x0 0.2) 1 0) extra"), std::invalid_argument);
}

TEST_CASE("variation rate defaults") {
    const VariationRates r;
    CHECK(r.crossover == 0.9);
    CHECK(r.mutation == 0.1);
    CHECK(r.shifting == 0.1);
    CHECK(r.splitting == 0.1);
}
