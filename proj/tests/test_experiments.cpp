#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rocch/experiments.hpp"

using namespace rocch;
namespace fs = std::filesystem;

namespace {

std::string repo_path(const std::string& rel) { return std::string(ROCCH_REPO_ROOT) + "/" + rel; }

struct TempDir {
    fs::path path;
    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("rocch_exp_" + std::to_string(getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Reference two-sided rank-sum p by enumerating every n-subset of the
// pooled sample and tallying doubled-midrank sums.
double oracle_p(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = a.size(), N = a.size() + b.size();
    std::vector<double> pooled(a);
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<std::size_t> order(N);
    for (std::size_t i = 0; i < N; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t x, std::size_t y) { return pooled[x] < pooled[y]; });
    std::vector<std::uint64_t> rank2(N);
    for (std::size_t i = 0; i < N;) {
        std::size_t j = i;
        while (j + 1 < N && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        for (std::size_t k = i; k <= j; ++k) rank2[order[k]] = i + j + 2;
        i = j + 1;
    }
    std::uint64_t w2 = 0;
    for (std::size_t i = 0; i < n; ++i) w2 += rank2[i];

    std::vector<int> mask(N, 0);
    std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n), 1);
    std::sort(mask.begin(), mask.end());  // lexicographically first arrangement
    std::uint64_t le = 0, ge = 0, total = 0;
    do {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < N; ++i)
            if (mask[i]) s += rank2[i];
        ++total;
        if (s <= w2) ++le;
        if (s >= w2) ++ge;
    } while (std::next_permutation(mask.begin(), mask.end()));
    return std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) / static_cast<double>(total));
}

// Sample pair whose ranks within 1..N are exactly `ranks_of_a`.
std::pair<std::vector<double>, std::vector<double>> from_ranks(const std::set<int>& ranks_of_a,
                                                               int N) {
    std::vector<double> a, b;
    for (int r = 1; r <= N; ++r)
        (ranks_of_a.count(r) ? a : b).push_back(static_cast<double>(r));
    return {a, b};
}

std::string minimal_config(const std::string& out_dir) {
    std::ostringstream cfg;
    cfg << "output_dir = " << out_dir << "\n";
    cfg << "selectors = ch-mogp, nsga2\n";
    cfg << "folds = 2\nrepeats = 2\nseed = 7\npopulation = 20\n";
    cfg << "dataset = monks-3 " << repo_path("data/monks-3.data") << " "
        << repo_path("data/monks-3.schema") << " 60\n";
    return cfg.str();
}

}  // namespace

TEST_CASE("preset budgets resolve by dataset name") {
    CHECK(preset_budget("standard", "bcw") == 50000);
    CHECK(preset_budget("standard", "monks-2") == 1000000);
    CHECK(preset_budget("standard", "transfusion") == 22000);
    CHECK(preset_budget("large", "bcw") == 18500);
    CHECK(preset_budget("large", "monks-2") == 10000000);
    CHECK(preset_budget("large", "wdbc") == 21000);
    CHECK_FALSE(preset_budget("standard", "no-such-dataset").has_value());
    CHECK_THROWS_AS(preset_budget("huge", "bcw"), std::invalid_argument);
}

TEST_CASE("experiment config parses keys, comments and dataset lines") {
    const std::string text =
        "# demo\n"
        "output_dir = /tmp/out\n"
        "selectors = ch-mogp, nsga2, sms-emoa\n"
        "population = 30\n"
        "folds = 4\n"
        "repeats = 3\n"
        "seed = 42\n"
        "workers = 2\n"
        "budget_preset = large\n"
        "dataset = bcw data/bcw.data data/bcw.schema   # preset budget\n"
        "dataset = custom a.csv a.schema 1234\n";
    const ExperimentConfig cfg = parse_experiment_config(text);
    CHECK(cfg.output_dir == "/tmp/out");
    REQUIRE(cfg.selectors.size() == 3);
    CHECK(cfg.selectors[0] == SelectorKind::CH_NO_REDUNDANCY_AREA);
    CHECK(cfg.selectors[2] == SelectorKind::SMS_EMOA);
    CHECK(cfg.population_size == 30);
    CHECK(cfg.folds == 4);
    CHECK(cfg.repeats == 3);
    CHECK(cfg.base_seed == 42);
    CHECK(cfg.workers == 2);
    REQUIRE(cfg.datasets.size() == 2);
    CHECK(cfg.datasets[0].max_evaluations == 0);
    CHECK(resolve_budget(cfg, cfg.datasets[0]) == 18500);
    CHECK(resolve_budget(cfg, cfg.datasets[1]) == 1234);
    CHECK(cfg.checkpoint_ratios == EngineConfig{}.checkpoint_ratios);
}

TEST_CASE("experiment config rejects malformed input") {
    const std::string base =
        "output_dir = /tmp/o\nselectors = nsga2\ndataset = bcw a b 100\n";
    CHECK_NOTHROW(parse_experiment_config(base));

    auto fails = [&](const std::string& text, const std::string& needle) {
        try {
            parse_experiment_config(text);
            FAIL_CHECK("no exception for: " << text);
        } catch (const std::invalid_argument& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    fails("output_dir = /tmp/o\nselectors = nsga2\n", "no datasets");
    fails("output_dir = /tmp/o\ndataset = bcw a b 100\n", "no selectors");
    fails("selectors = nsga2\ndataset = bcw a b 100\n", "no output_dir");
    fails(base + "bogus line\n", "line 4");
    fails(base + "mystery = 1\n", "unknown key");
    fails(base + "folds = 1\n", "folds");
    fails(base + "repeats = 0\n", "repeats");
    fails(base + "workers = 0\n", "workers");
    fails(base + "folds = many\n", "bad value for folds");
    fails(base + "selectors = nsga7\n", "bad value for selectors");
    fails(base + "dataset = two parts\n", "dataset needs");
    fails(base + "dataset = bcw a b 1 2\n", "dataset needs");
    fails(base + "dataset = bad/name a b 100\n", "alphanumeric");
    fails(base + "dataset = bcw other.csv other.schema 5\n", "duplicate dataset");
    fails(base + "checkpoint_ratios = 0.5, 0.2, 1\n", "checkpoint_ratios");
    fails(base + "checkpoint_ratios = 0.5, 0.9\n", "checkpoint_ratios");
    fails(base + "checkpoint_ratios = 0, 1\n", "checkpoint_ratios");
    // budget resolution is part of config validation
    fails("output_dir = /tmp/o\nselectors = nsga2\ndataset = mystery a b\n", "no explicit budget");
    fails(base + "budget_preset = huge\n", "unknown budget preset");
}

TEST_CASE("seed derivation separates every coordinate") {
    const std::uint64_t s = job_seed(1, "bcw", SelectorKind::NSGA2, 3, 2);
    CHECK(s == job_seed(1, "bcw", SelectorKind::NSGA2, 3, 2));
    CHECK(s != job_seed(2, "bcw", SelectorKind::NSGA2, 3, 2));
    CHECK(s != job_seed(1, "wdbc", SelectorKind::NSGA2, 3, 2));
    CHECK(s != job_seed(1, "bcw", SelectorKind::SMS_EMOA, 3, 2));
    CHECK(s != job_seed(1, "bcw", SelectorKind::NSGA2, 4, 2));
    CHECK(s != job_seed(1, "bcw", SelectorKind::NSGA2, 3, 1));
    CHECK(fold_seed(1, "bcw") == fold_seed(1, "bcw"));
    CHECK(fold_seed(1, "bcw") != fold_seed(1, "wdbc"));
    CHECK(fold_seed(1, "bcw") != fold_seed(2, "bcw"));
}

TEST_CASE("result rows round-trip through csv text") {
    ResultRow row{"monks-1", SelectorKind::SMS_EMOA, 7, 3, 1.0 / 15.0, 1333,
                  0.912345678901234567, 0.87654321, 11};
    const ResultRow back = parse_result_row(format_result_row(row));
    CHECK(back.dataset == row.dataset);
    CHECK(back.selector == row.selector);
    CHECK(back.repeat == row.repeat);
    CHECK(back.fold == row.fold);
    CHECK(back.ratio == row.ratio);
    CHECK(back.evaluations == row.evaluations);
    CHECK(back.train_auch == row.train_auch);
    CHECK(back.test_auch == row.test_auch);
    CHECK(back.hull_size == row.hull_size);
    CHECK_THROWS_AS(parse_result_row("a,b,c"), std::invalid_argument);
}

TEST_CASE("rank-sum: fixed outcomes") {
    const std::vector<double> a{1, 2, 3}, b{10, 11, 12};
    const WilcoxonResult r = wilcoxon_rank_sum(a, b);
    // min possible two-sided p at 3 vs 3 is 2/C(6,3); never significant
    CHECK(r.p == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(r.outcome == Outcome::DRAW);
    CHECK(r.u_a == 0.0);

    const std::vector<double> same{0.5, 0.7, 0.9, 1.1};
    const WilcoxonResult eq = wilcoxon_rank_sum(same, same);
    CHECK(eq.p == 1.0);
    CHECK(eq.outcome == Outcome::DRAW);

    CHECK_THROWS_AS(wilcoxon_rank_sum(std::vector<double>{1.0}, b), std::invalid_argument);
}

TEST_CASE("rank-sum: exact tail matches full enumeration up to size 8") {
    RandomSource rng(404);
    for (std::size_t n = 2; n <= 8; ++n) {
        for (std::size_t m = 2; m <= 8; ++m) {
            for (int trial = 0; trial < 3; ++trial) {
                std::vector<double> a, b;
                // small value pool forces heavy ties
                for (std::size_t i = 0; i < n; ++i)
                    a.push_back(static_cast<double>(rng.index(5)));
                for (std::size_t i = 0; i < m; ++i)
                    b.push_back(static_cast<double>(rng.index(5)) + (trial == 2 ? 0.5 : 0.0));
                const WilcoxonResult r = wilcoxon_rank_sum(a, b);
                CHECK(r.p == oracle_p(a, b));
            }
        }
    }
}

TEST_CASE("rank-sum: published critical values at equal sizes 10 and 20") {
    // two-sided 0.05 rejects at U <= 23 for sizes 10 vs 10
    {
        auto [a23, b23] = from_ranks({1, 2, 3, 4, 5, 6, 7, 11, 19, 20}, 20);
        const WilcoxonResult r23 = wilcoxon_rank_sum(a23, b23);
        CHECK(r23.u_a == 23.0);
        CHECK(r23.p <= 0.05);
        auto [a24, b24] = from_ranks({1, 2, 3, 4, 5, 6, 7, 12, 19, 20}, 20);
        const WilcoxonResult r24 = wilcoxon_rank_sum(a24, b24);
        CHECK(r24.u_a == 24.0);
        CHECK(r24.p > 0.05);
    }
    // and at U <= 127 for sizes 20 vs 20
    {
        std::set<int> s127{21, 35, 36, 37, 38, 39, 40};
        for (int r = 1; r <= 13; ++r) s127.insert(r);
        auto [a, b] = from_ranks(s127, 40);
        const WilcoxonResult r127 = wilcoxon_rank_sum(a, b);
        CHECK(r127.u_a == 127.0);
        CHECK(r127.p <= 0.05);

        std::set<int> s128{22, 35, 36, 37, 38, 39, 40};
        for (int r = 1; r <= 13; ++r) s128.insert(r);
        auto [a2, b2] = from_ranks(s128, 40);
        const WilcoxonResult r128 = wilcoxon_rank_sum(a2, b2);
        CHECK(r128.u_a == 128.0);
        CHECK(r128.p > 0.05);
    }
}

TEST_CASE("rank-sum: large samples use the normal tail and pick the shifted winner") {
    std::vector<double> a, b;
    for (int i = 0; i < 50; ++i) {
        a.push_back(0.02 * i);
        b.push_back(0.02 * i + 3.0);
    }
    const WilcoxonResult r = wilcoxon_rank_sum(a, b);
    CHECK(r.p < 1e-6);
    CHECK(r.outcome == Outcome::B_WINS);
    const WilcoxonResult mirrored = wilcoxon_rank_sum(b, a);
    CHECK(mirrored.p == r.p);
    CHECK(mirrored.outcome == Outcome::A_WINS);

    // all-equal large samples have zero variance, never significance
    const std::vector<double> flat(30, 1.0);
    CHECK(wilcoxon_rank_sum(flat, flat).p == 1.0);

    RandomSource rng(5);
    std::vector<double> pa(a), pb(b);
    rng.shuffle(pa);
    rng.shuffle(pb);
    const WilcoxonResult shuffled = wilcoxon_rank_sum(pa, pb);
    CHECK(shuffled.p == r.p);
    CHECK(shuffled.outcome == r.outcome);
}

namespace {

ResultRow quick_row(const std::string& ds, SelectorKind sel, int rep, int fold, double ratio,
                    double test_auch) {
    return ResultRow{ds, sel, rep, fold, ratio, 100, 0.9, test_auch, 5};
}

}  // namespace

TEST_CASE("summarize reports final-checkpoint mean and sample deviation, x100") {
    std::vector<ResultRow> rows;
    rows.push_back(quick_row("d1", SelectorKind::NSGA2, 0, 0, 1.0, 0.8));
    rows.push_back(quick_row("d1", SelectorKind::NSGA2, 0, 1, 1.0, 1.0));
    rows.push_back(quick_row("d1", SelectorKind::NSGA2, 0, 0, 0.5, 0.1));  // ignored ratio
    rows.push_back(quick_row("d1", SelectorKind::SMS_EMOA, 0, 0, 1.0, 0.9));
    rows.push_back(quick_row("d1", SelectorKind::SMS_EMOA, 0, 1, 1.0, 0.9));
    rows.push_back(quick_row("d0", SelectorKind::NSGA2, 0, 0, 1.0, 0.7));  // lone row

    const std::vector<SummaryCell> cells = summarize(rows);
    REQUIRE(cells.size() == 3);
    CHECK(cells[0].dataset == "d0");  // dataset-major ordering
    CHECK(format_cell(cells[0]) == "--");
    CHECK(cells[1].dataset == "d1");
    CHECK(selector_name(cells[1].selector) == std::string("NSGA-II"));
    CHECK(cells[1].n == 2);
    CHECK(format_cell(cells[1]) == "90.00 ± 14.14");
    CHECK(format_cell(cells[2]) == "90.00 ± 0.00");

    // row order cannot matter
    std::vector<ResultRow> shuffled(rows);
    RandomSource rng(2);
    rng.shuffle(shuffled);
    const std::vector<SummaryCell> again = summarize(shuffled);
    REQUIRE(again.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(again[i].dataset == cells[i].dataset);
        CHECK(again[i].mean == cells[i].mean);
        CHECK(again[i].stdev == cells[i].stdev);
    }
}

TEST_CASE("convergence curves agree with the summary at the final ratio") {
    std::vector<ResultRow> rows;
    for (int rep = 0; rep < 4; ++rep)
        for (const double ratio : {0.25, 0.5, 1.0})
            rows.push_back(quick_row("d", SelectorKind::NSGA2, rep, 0, ratio,
                                     0.5 + 0.1 * ratio + 0.01 * rep));
    const std::vector<CurveCell> curve = convergence(rows);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].ratio == 0.25);
    CHECK(curve[2].ratio == 1.0);
    for (const CurveCell& c : curve) CHECK(c.n == 4);
    const std::vector<SummaryCell> cells = summarize(rows);
    REQUIRE(cells.size() == 1);
    CHECK(curve[2].mean_test == cells[0].mean);
    CHECK(curve[2].mean_train == 0.9);
}

TEST_CASE("selector comparison emits one rank-sum triple per ratio") {
    std::vector<ResultRow> rows;
    const SelectorKind A = SelectorKind::CH_NO_REDUNDANCY_AREA, B = SelectorKind::MOEAD;
    for (int rep = 0; rep < 10; ++rep) {
        for (const double ratio : {0.5, 1.0}) {
            // strong separation on gap, dead heat on even
            rows.push_back(quick_row("gap", A, rep, 0, ratio, 0.90 + 0.001 * rep));
            rows.push_back(quick_row("gap", B, rep, 0, ratio, 0.60 + 0.001 * rep));
            rows.push_back(quick_row("even", A, rep, 0, ratio, 0.80 + 0.001 * (rep % 3)));
            rows.push_back(quick_row("even", B, rep, 0, ratio, 0.80 + 0.001 * (rep % 3)));
        }
    }
    const ComparisonTable table = compare_selectors(rows, A, B);
    REQUIRE(table.ratios == std::vector<double>{0.5, 1.0});
    REQUIRE(table.rows.size() == 4);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(table.a_wins[i] == 1);
        CHECK(table.draws[i] == 1);
        CHECK(table.b_wins[i] == 0);
    }
    // cells appear ratio-major, dataset order within
    CHECK(table.rows[0].dataset == "even");
    CHECK(table.rows[1].dataset == "gap");
    CHECK(table.rows[0].ratio == 0.5);
    CHECK(table.rows[3].ratio == 1.0);
    CHECK(table.rows[1].test.outcome == Outcome::A_WINS);
    CHECK(table.rows[0].test.outcome == Outcome::DRAW);
}

TEST_CASE("run_experiment covers the grid, resumes, and writes stable bytes") {
    TempDir dir_a, dir_b;
    ExperimentConfig cfg = parse_experiment_config(minimal_config(dir_a.str()));

    const RunReport first = run_experiment(cfg);
    CHECK(first.jobs_total == 8);  // 1 dataset x 2 selectors x 2 repeats x 2 folds
    CHECK(first.jobs_run == 8);
    CHECK(first.jobs_skipped == 0);
    CHECK(first.jobs_failed == 0);

    const std::vector<ResultRow> rows = load_results(dir_a.str() + "/results.csv");
    CHECK(rows.size() == 8 * 7);  // one row per checkpoint ratio
    for (const ResultRow& r : rows) {
        CHECK(r.dataset == "monks-3");
        CHECK(r.train_auch >= 0.0);
        CHECK(r.train_auch <= 1.0);
        CHECK(r.test_auch >= 0.0);
        CHECK(r.test_auch <= 1.0);
        CHECK(r.evaluations <= 60);
        CHECK(r.hull_size >= 2);
    }
    // final checkpoint exhausts the budget exactly
    std::size_t finals = 0;
    for (const ResultRow& r : rows)
        if (r.ratio == 1.0) {
            CHECK(r.evaluations == 60);
            ++finals;
        }
    CHECK(finals == 8);

    // resume: nothing recomputed, identical bytes
    const std::string bytes_a = slurp(dir_a.path / "results.csv");
    const RunReport second = run_experiment(cfg);
    CHECK(second.jobs_run == 0);
    CHECK(second.jobs_skipped == 8);
    CHECK(slurp(dir_a.path / "results.csv") == bytes_a);

    // an independent parallel run produces the same result table
    ExperimentConfig par = parse_experiment_config(minimal_config(dir_b.str()));
    par.workers = 3;
    run_experiment(par);
    CHECK(slurp(dir_b.path / "results.csv") == bytes_a);

    // the output directory is bound to its config
    ExperimentConfig other = cfg;
    other.base_seed = 8;
    CHECK_THROWS_AS(run_experiment(other), std::invalid_argument);

    // derived tables write deterministically
    write_summary_csv(summarize(rows), dir_a.str() + "/summary.csv");
    write_curves_csv(convergence(rows), dir_a.str() + "/curves.csv");
    const ComparisonTable table =
        compare_selectors(rows, SelectorKind::CH_NO_REDUNDANCY_AREA, SelectorKind::NSGA2);
    write_comparison_csv(table, dir_a.str() + "/compare.csv");
    const std::string summary = slurp(dir_a.path / "summary.csv");
    CHECK(summary.find("dataset,selector,n,mean,stdev,label") == 0);
    CHECK(summary.find("monks-3,CH-MOGP,4,") != std::string::npos);
    const std::string compare = slurp(dir_a.path / "compare.csv");
    CHECK(compare.find("(total)") != std::string::npos);
}

TEST_CASE("row count is jobs times checkpoints at the documented scale") {
    TempDir dir;
    std::ostringstream text;
    text << "output_dir = " << dir.str() << "\n";
    text << "selectors = ch-mogp, nsga2\n";
    text << "folds = 5\nrepeats = 20\nseed = 3\nworkers = 4\n";
    text << "dataset = monks-3 " << repo_path("data/monks-3.data") << " "
         << repo_path("data/monks-3.schema") << " 60\n";
    const ExperimentConfig cfg = parse_experiment_config(text.str());
    const RunReport report = run_experiment(cfg);
    CHECK(report.jobs_total == 200);  // 1 dataset x 2 selectors x 5 folds x 20 repeats
    CHECK(report.jobs_failed == 0);
    const std::vector<ResultRow> rows = load_results(dir.str() + "/results.csv");
    CHECK(rows.size() == 1400);  // 200 jobs x 7 checkpoints
}

TEST_CASE("mean training AUCH never drops along the hull selector's curve") {
    TempDir dir;
    std::ostringstream text;
    text << "output_dir = " << dir.str() << "\n";
    text << "selectors = ch-mogp\n";
    text << "folds = 2\nrepeats = 2\nseed = 5\n";
    text << "dataset = monks-3 " << repo_path("data/monks-3.data") << " "
         << repo_path("data/monks-3.schema") << " 200\n";
    run_experiment(parse_experiment_config(text.str()));
    const std::vector<CurveCell> curve =
        convergence(load_results(dir.str() + "/results.csv"));
    REQUIRE(curve.size() == 7);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        CHECK(curve[i].ratio > curve[i - 1].ratio);
        CHECK(curve[i].mean_train >= curve[i - 1].mean_train - 1e-12);
    }
}

TEST_CASE("run_experiment records failing datasets and carries on") {
    TempDir dir;
    ExperimentConfig cfg = parse_experiment_config(minimal_config(dir.str()));
    cfg.datasets.push_back(DatasetEntry{"ghost", "no-such.csv", "no-such.schema", 50});

    const RunReport report = run_experiment(cfg);
    CHECK(report.jobs_total == 16);
    CHECK(report.jobs_run == 8);
    CHECK(report.jobs_failed == 8);

    const std::vector<ResultRow> rows = load_results(dir.str() + "/results.csv");
    CHECK(rows.size() == 8 * 7);
    for (const ResultRow& r : rows) CHECK(r.dataset == "monks-3");

    const std::string failures = slurp(dir.path / "failures.csv");
    CHECK(failures.find("ghost,CH-MOGP,0,0,") != std::string::npos);
    CHECK(std::count(failures.begin(), failures.end(), '\n') == 1 + 8);
}

TEST_CASE("load_results rejects foreign files") {
    TempDir dir;
    {
        std::ofstream out(dir.path / "results.csv");
        out << "something,else\n";
    }
    CHECK_THROWS_AS(load_results(dir.str() + "/results.csv"), std::runtime_error);
    CHECK_THROWS_AS(load_results(dir.str() + "/missing.csv"), std::runtime_error);
}
