#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rocch/gdt.hpp"
#include "rocch/rng.hpp"

namespace rocch {

enum class ColumnKind { numeric, categorical, ignore };

// Parsed from a key-value schema file; see README for the grammar.
// label_column, positive_label and negative_label are mandatory.
struct SchemaSpec {
    std::size_t label_column = 0;
    std::string positive_label;
    std::string negative_label;
    std::string missing_token = "?";
    bool has_header = false;
    // 0 = sniff from the first data line (comma wins over whitespace).
    char delimiter = 0;
    ColumnKind default_kind = ColumnKind::numeric;
    std::map<std::size_t, ColumnKind> kinds;
    std::optional<std::size_t> columns;  // declared count, validated when set
};

SchemaSpec parse_schema(const std::string& text);
SchemaSpec load_schema(const std::string& path);

// Feature matrix after label mapping, categorical coding and imputation.
// Attribute order follows the file's kept columns; `space` feeds gdt.
struct Dataset {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    FeatureSpace space;
    // Per attribute: the ascending token list behind categorical codes
    // (empty for numeric attributes).
    std::vector<std::vector<std::string>> category_tokens;
    std::size_t positives = 0;
    std::size_t negatives = 0;
};

Dataset load_dataset(const std::string& data_path, const SchemaSpec& spec);
Dataset load_dataset(const std::string& data_path, const std::string& schema_path);

struct FoldAssignment {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// splits[repeat][fold]; within a repeat the test sets partition the dataset
// and per-fold class counts stay within one of each other.
struct FoldPlan {
    int k = 5;
    int repeats = 20;
    std::vector<std::vector<FoldAssignment>> splits;
};

// Shuffles each class independently, then deals round-robin into k folds.
// Throws when a class has fewer than k members.
FoldPlan stratified_kfold(const Dataset& ds, int k, int repeats, RandomSource& rng);

// Row/label view of one side of a fold, in index order.
struct Split {
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
};

Split materialize_split(const Dataset& ds, const std::vector<std::size_t>& indices);

}  // namespace rocch
