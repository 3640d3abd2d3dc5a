#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rocch/experiments.hpp"

using namespace rocch;

namespace {

// Column padding that treats UTF-8 continuation bytes as zero-width.
std::size_t display_width(const std::string& s) {
    std::size_t w = 0;
    for (const char c : s)
        if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++w;
    return w;
}

void print_padded(const std::string& s, std::size_t width) {
    std::cout << s;
    for (std::size_t i = display_width(s); i < width; ++i) std::cout << ' ';
}

void print_summary_table(const std::vector<SummaryCell>& cells) {
    std::set<std::string> datasets;
    std::set<std::string> selectors;
    std::map<std::pair<std::string, std::string>, std::string> label;
    for (const SummaryCell& c : cells) {
        datasets.insert(c.dataset);
        selectors.insert(selector_name(c.selector));
        label[{c.dataset, selector_name(c.selector)}] = format_cell(c);
    }
    std::size_t name_w = 7;
    for (const std::string& d : datasets) name_w = std::max(name_w, display_width(d));
    std::map<std::string, std::size_t> col_w;
    for (const std::string& s : selectors) {
        col_w[s] = display_width(s);
        for (const std::string& d : datasets) {
            const auto it = label.find({d, s});
            if (it != label.end()) col_w[s] = std::max(col_w[s], display_width(it->second));
        }
    }
    print_padded("dataset", name_w + 2);
    for (const std::string& s : selectors) print_padded(s, col_w[s] + 2);
    std::cout << '\n';
    for (const std::string& d : datasets) {
        print_padded(d, name_w + 2);
        for (const std::string& s : selectors) {
            const auto it = label.find({d, s});
            print_padded(it == label.end() ? "--" : it->second, col_w[s] + 2);
        }
        std::cout << '\n';
    }
}

int cmd_run(const std::string& config_path, bool strict) {
    const ExperimentConfig cfg = load_experiment_config(config_path);
    const RunReport report = run_experiment(cfg);
    std::cout << "jobs: " << report.jobs_total << " total, " << report.jobs_run << " run, "
              << report.jobs_skipped << " resumed, " << report.jobs_failed << " failed\n";
    std::cout << "results: " << cfg.output_dir << "/results.csv\n";
    if (report.jobs_failed > 0) {
        std::cout << "failures listed in " << cfg.output_dir << "/failures.csv\n";
        if (strict) return 2;
    }
    return 0;
}

int cmd_summarize(const std::string& in_dir) {
    const std::vector<ResultRow> rows = load_results(in_dir + "/results.csv");
    const std::vector<SummaryCell> cells = summarize(rows);
    write_summary_csv(cells, in_dir + "/summary.csv");
    print_summary_table(cells);
    std::cout << "wrote " << in_dir << "/summary.csv\n";
    return 0;
}

int cmd_compare(const std::string& in_dir, const std::string& selectors, double alpha) {
    const std::size_t comma = selectors.find(',');
    if (comma == std::string::npos)
        throw std::invalid_argument("--selectors needs two names, e.g. CH-MOGP,NSGA-II");
    const SelectorKind a = parse_selector(selectors.substr(0, comma));
    const SelectorKind b = parse_selector(selectors.substr(comma + 1));
    const std::vector<ResultRow> rows = load_results(in_dir + "/results.csv");
    const ComparisonTable table = compare_selectors(rows, a, b, alpha);
    const std::string out =
        in_dir + "/compare_" + selector_name(a) + "_vs_" + selector_name(b) + ".csv";
    write_comparison_csv(table, out);
    std::cout << selector_name(a) << " vs " << selector_name(b) << " (alpha " << alpha
              << "), wins-draws-losses across datasets:\n";
    for (std::size_t i = 0; i < table.ratios.size(); ++i) {
        char ratio[32];
        std::snprintf(ratio, sizeof ratio, "%.4g", table.ratios[i]);
        std::cout << "  ratio " << ratio << ": " << table.a_wins[i] << '-' << table.draws[i] << '-'
                  << table.b_wins[i] << '\n';
    }
    std::cout << "wrote " << out << '\n';
    return 0;
}

int cmd_curves(const std::string& in_dir) {
    const std::vector<ResultRow> rows = load_results(in_dir + "/results.csv");
    const std::vector<CurveCell> cells = convergence(rows);
    write_curves_csv(cells, in_dir + "/curves.csv");
    std::cout << "wrote " << cells.size() << " curve rows to " << in_dir << "/curves.csv\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ROC convex-hull genetic programming experiment harness"};
    app.require_subcommand(1);

    std::string config_path, in_dir, selectors;
    double alpha = 0.05;
    bool strict = false;

    CLI::App* run_cmd = app.add_subcommand("run", "execute all jobs from a config file");
    run_cmd->add_option("--config", config_path, "experiment config file")->required();
    run_cmd->add_flag("--strict", strict, "exit nonzero when any job failed");

    CLI::App* sum_cmd = app.add_subcommand("summarize", "final-budget table from results.csv");
    sum_cmd->add_option("--in", in_dir, "experiment output directory")->required();

    CLI::App* cmp_cmd = app.add_subcommand("compare", "rank-sum wins/draws/losses per ratio");
    cmp_cmd->add_option("--in", in_dir, "experiment output directory")->required();
    cmp_cmd->add_option("--selectors", selectors, "two selector names, comma separated")
        ->required();
    cmp_cmd->add_option("--alpha", alpha, "significance level (default 0.05)");

    CLI::App* cur_cmd = app.add_subcommand("curves", "mean AUCH per checkpoint ratio");
    cur_cmd->add_option("--in", in_dir, "experiment output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) return cmd_run(config_path, strict);
        if (sum_cmd->parsed()) return cmd_summarize(in_dir);
        if (cmp_cmd->parsed()) return cmd_compare(in_dir, selectors, alpha);
        if (cur_cmd->parsed()) return cmd_curves(in_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
