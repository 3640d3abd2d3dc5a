#include "rocch/gdt.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace rocch {

namespace {

BoolExpr random_comparison(const FeatureSpace& space, RandomSource& rng) {
    BoolExpr e;
    e.kind = BoolExpr::Kind::cmp;
    e.attr = rng.index(space.attributes.size());
    const AttributeRange& a = space.attributes[e.attr];
    if (a.categorical) {
        e.op = '=';
        e.constant = a.codes[rng.index(a.codes.size())];
    } else {
        constexpr char ops[3] = {'<', '>', '='};
        e.op = ops[rng.index(3)];
        e.constant = rng.real_range(a.lo, a.hi);
    }
    return e;
}

// Mostly single comparisons; a fifth get an and/or partner and a fifth a
// not wrapper, so the whole function set stays reachable.
BoolExpr random_condition(const FeatureSpace& space, RandomSource& rng) {
    BoolExpr e = random_comparison(space, rng);
    if (rng.chance(0.2)) {
        BoolExpr pair;
        pair.kind = rng.chance(0.5) ? BoolExpr::Kind::conjunction : BoolExpr::Kind::disjunction;
        pair.kids.push_back(std::move(e));
        pair.kids.push_back(random_comparison(space, rng));
        e = std::move(pair);
    }
    if (rng.chance(0.2)) {
        BoolExpr neg;
        neg.kind = BoolExpr::Kind::negation;
        neg.kids.push_back(std::move(e));
        e = std::move(neg);
    }
    return e;
}

// level counts from 1 at the root; target is the sampled tree depth.
GdtPtr build_node(const FeatureSpace& space, RandomSource& rng, int level, int target,
                  bool full, int depth_min) {
    const bool must_leaf = level == target;
    const bool must_branch = level < depth_min;
    bool branch;
    if (must_leaf)
        branch = false;
    else if (full || must_branch)
        branch = true;
    else
        branch = rng.chance(0.5);
    if (!branch) return make_leaf(static_cast<int>(rng.index(2)));
    BoolExpr cond = random_condition(space, rng);
    GdtPtr t = build_node(space, rng, level + 1, target, full, depth_min);
    GdtPtr e = build_node(space, rng, level + 1, target, full, depth_min);
    return make_branch(std::move(cond), std::move(t), std::move(e));
}

// Preorder subtree lookup: node, then-subtree, else-subtree.
GdtPtr subtree_at(const GdtPtr& node, std::size_t& counter, std::size_t target) {
    if (counter++ == target) return node;
    if (node->is_leaf) return nullptr;
    if (GdtPtr hit = subtree_at(node->then_child, counter, target)) return hit;
    return subtree_at(node->else_child, counter, target);
}

// Same preorder contract as subtree_at; the prefix before the target is
// traversed identically, so indices agree.
GdtPtr replace_at(const GdtPtr& node, std::size_t& counter, std::size_t target,
                  const GdtPtr& replacement) {
    if (counter++ == target) return replacement;
    if (node->is_leaf) return node;
    GdtPtr t = replace_at(node->then_child, counter, target, replacement);
    GdtPtr e = replace_at(node->else_child, counter, target, replacement);
    if (t == node->then_child && e == node->else_child) return node;
    return make_branch(node->condition, std::move(t), std::move(e));
}

std::size_t cmp_count(const BoolExpr& e) {
    if (e.kind == BoolExpr::Kind::cmp) return 1;
    std::size_t n = 0;
    for (const BoolExpr& k : e.kids) n += cmp_count(k);
    return n;
}

std::size_t cmp_count(const GdtNode& t) {
    if (t.is_leaf) return 0;
    return cmp_count(t.condition) + cmp_count(*t.then_child) + cmp_count(*t.else_child);
}

BoolExpr perturb_cmp(const BoolExpr& e, const FeatureSpace& space, RandomSource& rng) {
    BoolExpr out = e;
    const AttributeRange& a = space.attributes[e.attr];
    if (a.categorical) {
        out.constant = a.codes[rng.index(a.codes.size())];
    } else {
        const double step = 0.1 * (a.hi - a.lo);
        out.constant = std::clamp(e.constant + rng.real_range(-step, step), a.lo, a.hi);
    }
    return out;
}

BoolExpr shift_expr(const BoolExpr& e, std::size_t& counter, std::size_t target,
                    const FeatureSpace& space, RandomSource& rng) {
    if (e.kind == BoolExpr::Kind::cmp) {
        if (counter++ == target) return perturb_cmp(e, space, rng);
        return e;
    }
    BoolExpr out = e;
    for (BoolExpr& k : out.kids) k = shift_expr(k, counter, target, space, rng);
    return out;
}

GdtPtr shift_node(const GdtPtr& node, std::size_t& counter, std::size_t target,
                  const FeatureSpace& space, RandomSource& rng) {
    if (node->is_leaf) return node;
    BoolExpr cond = shift_expr(node->condition, counter, target, space, rng);
    GdtPtr t = shift_node(node->then_child, counter, target, space, rng);
    GdtPtr e = shift_node(node->else_child, counter, target, space, rng);
    return make_branch(std::move(cond), std::move(t), std::move(e));
}

// leaf_at reports the chosen leaf's level; split_leaf rebuilds around it.
const GdtNode* leaf_at(const GdtNode& node, std::size_t& counter, std::size_t target, int level,
                       int& out_level) {
    if (node.is_leaf) {
        if (counter++ == target) {
            out_level = level;
            return &node;
        }
        return nullptr;
    }
    if (const GdtNode* hit = leaf_at(*node.then_child, counter, target, level + 1, out_level))
        return hit;
    return leaf_at(*node.else_child, counter, target, level + 1, out_level);
}

GdtPtr split_leaf(const GdtPtr& node, std::size_t& counter, std::size_t target,
                  const BoolExpr& cond) {
    if (node->is_leaf) {
        if (counter++ == target)
            return make_branch(cond, make_leaf(node->label), make_leaf(1 - node->label));
        return node;
    }
    GdtPtr t = split_leaf(node->then_child, counter, target, cond);
    GdtPtr e = split_leaf(node->else_child, counter, target, cond);
    if (t == node->then_child && e == node->else_child) return node;
    return make_branch(node->condition, std::move(t), std::move(e));
}

std::string format_constant(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_expr(const BoolExpr& e, std::string& out) {
    switch (e.kind) {
        case BoolExpr::Kind::cmp:
            out += '(';
            out += e.op;
            out += " x";
            out += std::to_string(e.attr);
            out += ' ';
            out += format_constant(e.constant);
            out += ')';
            return;
        case BoolExpr::Kind::negation:
            out += "(not ";
            print_expr(e.kids[0], out);
            out += ')';
            return;
        case BoolExpr::Kind::conjunction:
        case BoolExpr::Kind::disjunction:
            out += e.kind == BoolExpr::Kind::conjunction ? "(and " : "(or ";
            print_expr(e.kids[0], out);
            out += ' ';
            print_expr(e.kids[1], out);
            out += ')';
            return;
    }
}

void print_node(const GdtNode& t, std::string& out) {
    if (t.is_leaf) {
        out += t.label ? '1' : '0';
        return;
    }
    out += "(if ";
    print_expr(t.condition, out);
    out += ' ';
    print_node(*t.then_child, out);
    out += ' ';
    print_node(*t.else_child, out);
    out += ')';
}

struct Parser {
    std::vector<std::string> tokens;
    std::size_t pos = 0;

    explicit Parser(const std::string& text) {
        std::string cur;
        for (const char c : text) {
            if (c == '(' || c == ')') {
                if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
                tokens.push_back(std::string(1, c));
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                if (!cur.empty()) tokens.push_back(std::exchange(cur, {}));
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) tokens.push_back(cur);
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("tree parse error at token " + std::to_string(pos) + ": " +
                                    what);
    }

    const std::string& next() {
        if (pos >= tokens.size()) fail("unexpected end of input");
        return tokens[pos++];
    }

    void expect(const std::string& tok) {
        if (next() != tok) fail("expected '" + tok + "'");
    }

    double constant() {
        const std::string& tok = next();
        const char* begin = tok.c_str();
        char* end = nullptr;
        const double v = std::strtod(begin, &end);
        if (end != begin + tok.size()) fail("bad constant '" + tok + "'");
        return v;
    }

    std::size_t attribute() {
        const std::string& tok = next();
        if (tok.size() < 2 || tok[0] != 'x') fail("bad attribute '" + tok + "'");
        const char* begin = tok.c_str() + 1;
        char* end = nullptr;
        const unsigned long long v = std::strtoull(begin, &end, 10);
        if (end != begin + tok.size() - 1) fail("bad attribute '" + tok + "'");
        return static_cast<std::size_t>(v);
    }

    BoolExpr expr() {
        expect("(");
        const std::string head = next();
        BoolExpr e;
        if (head == "<" || head == ">" || head == "=") {
            e.kind = BoolExpr::Kind::cmp;
            e.op = head[0];
            e.attr = attribute();
            e.constant = constant();
        } else if (head == "not") {
            e.kind = BoolExpr::Kind::negation;
            e.kids.push_back(expr());
        } else if (head == "and" || head == "or") {
            e.kind = head == "and" ? BoolExpr::Kind::conjunction : BoolExpr::Kind::disjunction;
            e.kids.push_back(expr());
            e.kids.push_back(expr());
        } else {
            fail("unknown operator '" + head + "'");
        }
        expect(")");
        return e;
    }

    GdtPtr tree() {
        const std::string& tok = next();
        if (tok == "0") return make_leaf(0);
        if (tok == "1") return make_leaf(1);
        if (tok != "(") fail("expected leaf or '('");
        expect("if");
        BoolExpr cond = expr();
        GdtPtr t = tree();
        GdtPtr e = tree();
        expect(")");
        return make_branch(std::move(cond), std::move(t), std::move(e));
    }
};

}  // namespace

bool expr_equal(const BoolExpr& a, const BoolExpr& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == BoolExpr::Kind::cmp)
        return a.attr == b.attr && a.op == b.op && a.constant == b.constant;
    if (a.kids.size() != b.kids.size()) return false;
    for (std::size_t i = 0; i < a.kids.size(); ++i)
        if (!expr_equal(a.kids[i], b.kids[i])) return false;
    return true;
}

bool eval_expr(const BoolExpr& e, const std::vector<double>& row) {
    switch (e.kind) {
        case BoolExpr::Kind::cmp: {
            if (e.attr >= row.size())
                throw std::out_of_range("attribute index " + std::to_string(e.attr) +
                                        " outside row of size " + std::to_string(row.size()));
            const double v = row[e.attr];
            if (e.op == '<') return v < e.constant;
            if (e.op == '>') return v > e.constant;
            return v == e.constant;
        }
        case BoolExpr::Kind::negation:
            return !eval_expr(e.kids[0], row);
        case BoolExpr::Kind::conjunction:
            return eval_expr(e.kids[0], row) && eval_expr(e.kids[1], row);
        case BoolExpr::Kind::disjunction:
            return eval_expr(e.kids[0], row) || eval_expr(e.kids[1], row);
    }
    throw std::logic_error("unreachable");
}

GdtPtr make_leaf(int label) {
    auto n = std::make_shared<GdtNode>();
    n->is_leaf = true;
    n->label = label;
    return n;
}

GdtPtr make_branch(BoolExpr condition, GdtPtr then_child, GdtPtr else_child) {
    auto n = std::make_shared<GdtNode>();
    n->is_leaf = false;
    n->condition = std::move(condition);
    n->then_child = std::move(then_child);
    n->else_child = std::move(else_child);
    return n;
}

int depth(const GdtNode& t) {
    if (t.is_leaf) return 1;
    return 1 + std::max(depth(*t.then_child), depth(*t.else_child));
}

std::size_t count_nodes(const GdtNode& t) {
    if (t.is_leaf) return 1;
    return 1 + count_nodes(*t.then_child) + count_nodes(*t.else_child);
}

std::size_t count_leaves(const GdtNode& t) {
    if (t.is_leaf) return 1;
    return count_leaves(*t.then_child) + count_leaves(*t.else_child);
}

bool tree_equal(const GdtNode& a, const GdtNode& b) {
    if (a.is_leaf != b.is_leaf) return false;
    if (a.is_leaf) return a.label == b.label;
    return expr_equal(a.condition, b.condition) && tree_equal(*a.then_child, *b.then_child) &&
           tree_equal(*a.else_child, *b.else_child);
}

GdtPtr random_tree(const FeatureSpace& space, RandomSource& rng, int depth_min, int depth_max) {
    if (space.attributes.empty()) throw std::invalid_argument("feature space has no attributes");
    if (depth_min < 1 || depth_max < depth_min)
        throw std::invalid_argument("bad depth bounds for random_tree");
    const int target = depth_min + static_cast<int>(rng.index(
                                       static_cast<std::size_t>(depth_max - depth_min + 1)));
    const bool full = rng.chance(0.5);
    return build_node(space, rng, 1, target, full, depth_min);
}

int classify(const GdtNode& t, const std::vector<double>& row) {
    const GdtNode* node = &t;
    while (!node->is_leaf)
        node = eval_expr(node->condition, row) ? node->then_child.get() : node->else_child.get();
    return node->label;
}

ConfusionCounts evaluate(const GdtNode& t, const std::vector<std::vector<double>>& rows,
                         const std::vector<int>& labels) {
    if (rows.size() != labels.size())
        throw std::invalid_argument("evaluate: rows and labels differ in length");
    ConfusionCounts c;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument("evaluate: labels must be 0 or 1");
        const int pred = classify(t, rows[i]);
        if (labels[i] == 1)
            (pred == 1 ? c.tp : c.fn) += 1;
        else
            (pred == 1 ? c.fp : c.tn) += 1;
    }
    if (c.tp + c.fn == 0 || c.fp + c.tn == 0)
        throw std::invalid_argument("evaluate: split needs at least one instance of each class");
    return c;
}

std::pair<GdtPtr, GdtPtr> crossover(const GdtPtr& a, const GdtPtr& b, RandomSource& rng) {
    const std::size_t na = count_nodes(*a);
    const std::size_t nb = count_nodes(*b);
    for (int attempt = 0; attempt < 6; ++attempt) {
        const std::size_t i = rng.index(na);
        const std::size_t j = rng.index(nb);
        std::size_t c0 = 0, c1 = 0, c2 = 0, c3 = 0;
        const GdtPtr sa = subtree_at(a, c0, i);
        const GdtPtr sb = subtree_at(b, c1, j);
        GdtPtr child1 = replace_at(a, c2, i, sb);
        GdtPtr child2 = replace_at(b, c3, j, sa);
        if (depth(*child1) <= kMaxTreeDepth && depth(*child2) <= kMaxTreeDepth)
            return {std::move(child1), std::move(child2)};
    }
    return {a, b};
}

GdtPtr mutate(const GdtPtr& t, const FeatureSpace& space, RandomSource& rng) {
    const std::size_t n = count_nodes(*t);
    for (int attempt = 0; attempt < 6; ++attempt) {
        const std::size_t i = rng.index(n);
        const int target = 1 + static_cast<int>(rng.index(3));
        const GdtPtr fragment = build_node(space, rng, 1, target, false, 1);
        std::size_t counter = 0;
        GdtPtr out = replace_at(t, counter, i, fragment);
        if (depth(*out) <= kMaxTreeDepth) return out;
    }
    return t;
}

GdtPtr shift(const GdtPtr& t, const FeatureSpace& space, RandomSource& rng) {
    const std::size_t n = cmp_count(*t);
    if (n == 0) return t;
    const std::size_t target = rng.index(n);
    std::size_t counter = 0;
    return shift_node(t, counter, target, space, rng);
}

GdtPtr split(const GdtPtr& t, const FeatureSpace& space, RandomSource& rng) {
    const std::size_t n = count_leaves(*t);
    const std::size_t target = rng.index(n);
    std::size_t counter = 0;
    int level = 0;
    leaf_at(*t, counter, target, 1, level);
    if (level >= kMaxTreeDepth) return t;
    const BoolExpr cond = random_comparison(space, rng);
    counter = 0;
    return split_leaf(t, counter, target, cond);
}

std::string to_text(const GdtNode& t) {
    std::string out;
    print_node(t, out);
    return out;
}

GdtPtr parse_tree(const std::string& text) {
    Parser p(text);
    GdtPtr t = p.tree();
    if (p.pos != p.tokens.size()) p.fail("trailing input");
    return t;
}

}  // namespace rocch
