#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rocch/roc.hpp"
#include "rocch/rng.hpp"

namespace rocch {

// Per-attribute metadata a tree generator needs: value kind plus the range
// (or category codes) observed on the training split.
struct AttributeRange {
    bool categorical = false;
    double lo = 0.0;
    double hi = 1.0;
    std::vector<double> codes;  // categorical only, ascending, nonempty
};

struct FeatureSpace {
    std::vector<AttributeRange> attributes;
};

// Boolean condition tree: comparison leaves combined with not/and/or.
// Comparison constants always lie inside the observed attribute range.
struct BoolExpr {
    enum class Kind { cmp, negation, conjunction, disjunction };
    Kind kind = Kind::cmp;
    std::size_t attr = 0;  // cmp only
    char op = '<';         // cmp only: '<', '>', '='
    double constant = 0.0; // cmp only
    std::vector<BoolExpr> kids;  // negation: 1, conjunction/disjunction: 2
};

bool expr_equal(const BoolExpr& a, const BoolExpr& b);
bool eval_expr(const BoolExpr& e, const std::vector<double>& row);

struct GdtNode;
using GdtPtr = std::shared_ptr<const GdtNode>;

// Decision tree node. Trees are immutable; operators rebuild the spine and
// share unchanged subtrees.
struct GdtNode {
    bool is_leaf = true;
    int label = 0;       // leaf only, 0 or 1
    BoolExpr condition;  // branch only
    GdtPtr then_child;   // branch only
    GdtPtr else_child;   // branch only
};

// A lone leaf has depth 1.
inline constexpr int kMaxTreeDepth = 17;

GdtPtr make_leaf(int label);
GdtPtr make_branch(BoolExpr condition, GdtPtr then_child, GdtPtr else_child);

int depth(const GdtNode& t);
std::size_t count_nodes(const GdtNode& t);
std::size_t count_leaves(const GdtNode& t);
bool tree_equal(const GdtNode& a, const GdtNode& b);

// Ramped half-and-half: target depth uniform in [depth_min, depth_max], then
// a coin picks full or grow construction.
GdtPtr random_tree(const FeatureSpace& space, RandomSource& rng, int depth_min = 1,
                   int depth_max = 3);

int classify(const GdtNode& t, const std::vector<double>& row);

// Tallies predictions over a labeled split. Throws when the split lacks a
// positive or a negative instance.
ConfusionCounts evaluate(const GdtNode& t, const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels);

// Subtree swap at uniformly chosen positions. A violating offspring pair is
// redrawn up to 5 times; afterwards the parents come back unchanged.
std::pair<GdtPtr, GdtPtr> crossover(const GdtPtr& a, const GdtPtr& b, RandomSource& rng);

// Replaces a uniformly chosen subtree with a fresh grow-style fragment of
// depth <= 3, with the same redraw policy as crossover.
GdtPtr mutate(const GdtPtr& t, const FeatureSpace& space, RandomSource& rng);

// Perturbs one uniformly chosen comparison constant by at most 10% of the
// attribute's observed range, clamped to that range. Categorical comparisons
// resample their code. Trees with no comparison come back unchanged.
GdtPtr shift(const GdtPtr& t, const FeatureSpace& space, RandomSource& rng);

// Replaces a uniformly chosen leaf of class c with a branch over a random
// comparison whose children are Leaf(c) and Leaf(1-c). A leaf already at the
// depth cap leaves the tree unchanged.
GdtPtr split(const GdtPtr& t, const FeatureSpace& space, RandomSource& rng);

// Parenthesized text form, e.g. (if (< x3 0.25) 1 (if (= x7 2) 0 1)).
//   tree := '0' | '1' | '(' 'if' cond tree tree ')'
//   cond := '(' op 'x'N const ')' | '(' 'not' cond ')'
//         | '(' 'and' cond cond ')' | '(' 'or' cond cond ')'
// Constants print with enough digits to round-trip exactly.
std::string to_text(const GdtNode& t);
GdtPtr parse_tree(const std::string& text);

struct VariationRates {
    double crossover = 0.9;
    double mutation = 0.1;
    double shifting = 0.1;
    double splitting = 0.1;
};

// eval_stamp identifies the split objectives were computed on, so a cached
// vector is never reused across folds.
struct Individual {
    GdtPtr tree;
    std::optional<RocPoint> objectives;
    std::uint64_t eval_stamp = 0;
};

}  // namespace rocch
