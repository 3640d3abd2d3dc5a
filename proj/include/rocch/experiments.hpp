#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rocch/engine.hpp"

namespace rocch {

struct DatasetEntry {
    std::string name;
    std::string data_path;
    std::string schema_path;
    // 0 means "resolve from the budget preset by dataset name".
    std::uint64_t max_evaluations = 0;
};

// Parsed experiment description. One run covers the full cross product
// datasets x selectors x repeats x folds; each cell is an independent
// seeded engine run.
struct ExperimentConfig {
    std::vector<DatasetEntry> datasets;
    std::vector<SelectorKind> selectors;
    std::size_t population_size = 20;
    int folds = 5;
    int repeats = 20;
    std::uint64_t base_seed = 1;
    std::size_t workers = 1;
    std::string output_dir;
    std::string budget_preset = "standard";
    std::vector<double> checkpoint_ratios = EngineConfig{}.checkpoint_ratios;
};

// Line-based "key = value" text, '#' comments. `dataset` may repeat; its
// value is whitespace-separated: name data-path schema-path [max-evals].
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);

// Per-dataset evaluation budgets. Preset names: "standard", "large".
// Unknown dataset -> nullopt; unknown preset -> invalid_argument.
std::optional<std::uint64_t> preset_budget(std::string_view preset, std::string_view dataset);

// Resolved budget for one entry: explicit value if set, else preset lookup.
// Throws when neither source provides one.
std::uint64_t resolve_budget(const ExperimentConfig& cfg, const DatasetEntry& entry);

// Seed plumbing. The fold plan depends only on (base, dataset) so every
// selector sees identical splits; job seeds additionally separate
// selector, repeat and fold.
std::uint64_t fold_seed(std::uint64_t base, std::string_view dataset);
std::uint64_t job_seed(std::uint64_t base, std::string_view dataset, SelectorKind selector,
                       int repeat, int fold);

// One line of results.csv: a checkpoint of one engine run.
struct ResultRow {
    std::string dataset;
    SelectorKind selector = SelectorKind::CH_NO_REDUNDANCY_AREA;
    int repeat = 0;
    int fold = 0;
    double ratio = 0.0;
    std::uint64_t evaluations = 0;
    double train_auch = 0.0;
    double test_auch = 0.0;
    std::size_t hull_size = 0;
};

std::string result_csv_header();
std::string format_result_row(const ResultRow& row);
ResultRow parse_result_row(const std::string& line);
std::vector<ResultRow> load_results(const std::string& path);

struct RunReport {
    std::size_t jobs_total = 0;
    std::size_t jobs_run = 0;
    std::size_t jobs_skipped = 0;
    std::size_t jobs_failed = 0;
};

// Executes every job, skipping those whose row file already exists under
// output_dir/rows, then rebuilds results.csv (and timings.csv) from the
// row files in canonical job order. Failures land in failures.csv and do
// not stop the run.
RunReport run_experiment(const ExperimentConfig& cfg);

struct SummaryCell {
    std::string dataset;
    SelectorKind selector;
    std::size_t n = 0;       // full-budget rows behind the cell
    double mean = 0.0;       // of test AUCH at ratio 1
    double stdev = 0.0;      // sample standard deviation, 0 when n < 2
};

// Renders mean and sample std scaled by 100, e.g. "90.00 ± 14.14"; cells
// with n < 2 render as "--".
std::string format_cell(const SummaryCell& cell);

// Final-checkpoint test-AUCH statistics per (dataset, selector), ordered by
// dataset name then selector name. Permutation-invariant in row order.
std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows);

struct CurveCell {
    std::string dataset;
    SelectorKind selector;
    double ratio = 0.0;
    std::size_t n = 0;
    double mean_test = 0.0;
    double mean_train = 0.0;
};

// Mean AUCH per checkpoint ratio, same ordering/means as summarize at
// ratio 1. Suitable for external plotting.
std::vector<CurveCell> convergence(const std::vector<ResultRow>& rows);

enum class Outcome { A_WINS, B_WINS, DRAW };

struct WilcoxonResult {
    double p = 1.0;       // two-sided
    double u_a = 0.0;     // Mann-Whitney statistic of sample a
    Outcome outcome = Outcome::DRAW;
};

// Two-sample rank-sum test with midranks for ties. Exact tail enumeration
// (subset-sum over doubled ranks) when max(n,m) <= 20, tie-corrected
// normal approximation with continuity correction otherwise. A side wins
// only when p < alpha and its mean is higher.
WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                 double alpha = 0.05);

struct ComparisonRow {
    std::string dataset;
    double ratio = 0.0;
    WilcoxonResult test;
};

struct ComparisonTable {
    SelectorKind a;
    SelectorKind b;
    std::vector<ComparisonRow> rows;              // ratio-major, dataset order within
    // Aligned with `ratios`: wins/draws/losses of `a` across datasets.
    std::vector<double> ratios;
    std::vector<std::size_t> a_wins, draws, b_wins;
};

// Rank-sum comparison of two selectors' test AUCH at every checkpoint
// ratio, one triple per ratio across datasets.
ComparisonTable compare_selectors(const std::vector<ResultRow>& rows, SelectorKind a,
                                  SelectorKind b, double alpha = 0.05);

// Emitters used by the CLI; all writing is deterministic given the rows.
void write_summary_csv(const std::vector<SummaryCell>& cells, const std::string& path);
void write_curves_csv(const std::vector<CurveCell>& cells, const std::string& path);
void write_comparison_csv(const ComparisonTable& table, const std::string& path);

}  // namespace rocch
