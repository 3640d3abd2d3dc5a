#include "rocch/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "rocch/data.hpp"

namespace fs = std::filesystem;

namespace rocch {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_list(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            const std::string piece = trim(s.substr(start, i - start));
            if (!piece.empty()) out.push_back(piece);
            start = i + 1;
        }
    }
    return out;
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in((std::string(s)));
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// Distinct type so the parser can tell its own diagnostics from stoi/stod
// failures, which also raise invalid_argument.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

[[noreturn]] void config_error(int line, const std::string& what) {
    throw ConfigError("experiment config line " + std::to_string(line) + ": " + what);
}

bool valid_dataset_name(std::string_view name) {
    if (name.empty()) return false;
    for (const char c : name) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_') return false;
    }
    return true;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Sorted-order accumulation keeps means/stds invariant under input
// permutation despite floating-point non-associativity.
double mean_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (const double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(std::vector<double> v, double mean) {
    if (v.size() < 2) return 0.0;
    std::sort(v.begin(), v.end());
    double s = 0.0;
    for (const double x : v) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

std::optional<std::uint64_t> preset_budget(std::string_view preset, std::string_view dataset) {
    using Table = std::map<std::string, std::uint64_t, std::less<>>;
    static const Table standard = {
        {"australian", 100000}, {"bands", 150000},   {"bcw", 50000},       {"crx", 50000},
        {"german", 200000},     {"house-votes", 30000}, {"ionosphere", 80000}, {"kr-vs-kp", 200000},
        {"mammographic", 60000}, {"monks-1", 200000}, {"monks-2", 1000000}, {"monks-3", 40000},
        {"parkinsons", 30000},  {"pima", 80000},      {"sonar", 30000},     {"spect", 40000},
        {"tic-tac-toe", 300000}, {"transfusion", 22000}, {"wdbc", 30000},   {"adult", 10000},
        {"magic04", 10000},     {"skin", 10000},
    };
    static const Table large = {
        {"australian", 100000}, {"bands", 1500000},  {"bcw", 18500},        {"crx", 450000},
        {"german", 120000},     {"house-votes", 24000}, {"ionosphere", 80000}, {"kr-vs-kp", 2000000},
        {"mammographic", 80000}, {"monks-1", 230000}, {"monks-2", 10000000}, {"monks-3", 190000},
        {"parkinsons", 42000},  {"pima", 180000},     {"sonar", 12000},      {"spect", 10000},
        {"tic-tac-toe", 3000000}, {"transfusion", 35000}, {"wdbc", 21000},   {"adult", 300000},
        {"magic04", 40000},     {"skin", 30000},
    };
    const Table* table = nullptr;
    if (preset == "standard") table = &standard;
    else if (preset == "large") table = &large;
    else throw std::invalid_argument("unknown budget preset: " + std::string(preset));
    const auto it = table->find(dataset);
    if (it == table->end()) return std::nullopt;
    return it->second;
}

std::uint64_t resolve_budget(const ExperimentConfig& cfg, const DatasetEntry& entry) {
    if (entry.max_evaluations > 0) return entry.max_evaluations;
    const auto preset = preset_budget(cfg.budget_preset, entry.name);
    if (!preset)
        throw std::invalid_argument("dataset " + entry.name + " has no explicit budget and is not in preset " +
                                    cfg.budget_preset);
    return *preset;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig cfg;
    bool ratios_set = false;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) config_error(lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (value.empty()) config_error(lineno, "empty value for " + key);
        try {
            if (key == "output_dir") {
                cfg.output_dir = value;
            } else if (key == "budget_preset") {
                cfg.budget_preset = value;
            } else if (key == "selectors") {
                cfg.selectors.clear();
                for (const std::string& s : split_list(value, ','))
                    cfg.selectors.push_back(parse_selector(s));
            } else if (key == "population") {
                cfg.population_size = std::stoul(value);
            } else if (key == "folds") {
                cfg.folds = std::stoi(value);
            } else if (key == "repeats") {
                cfg.repeats = std::stoi(value);
            } else if (key == "seed") {
                cfg.base_seed = std::stoull(value);
            } else if (key == "workers") {
                cfg.workers = std::stoul(value);
            } else if (key == "checkpoint_ratios") {
                cfg.checkpoint_ratios.clear();
                for (const std::string& s : split_list(value, ','))
                    cfg.checkpoint_ratios.push_back(std::stod(s));
                ratios_set = true;
            } else if (key == "dataset") {
                const std::vector<std::string> parts = split_ws(value);
                if (parts.size() < 3 || parts.size() > 4)
                    config_error(lineno, "dataset needs: name data-path schema-path [max-evals]");
                DatasetEntry entry{parts[0], parts[1], parts[2], 0};
                if (!valid_dataset_name(entry.name))
                    config_error(lineno, "dataset name must be alphanumeric with - or _");
                if (parts.size() == 4) entry.max_evaluations = std::stoull(parts[3]);
                for (const DatasetEntry& prev : cfg.datasets)
                    if (prev.name == entry.name) config_error(lineno, "duplicate dataset " + entry.name);
                cfg.datasets.push_back(std::move(entry));
            } else {
                config_error(lineno, "unknown key " + key);
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            config_error(lineno, std::string("bad value for ") + key + ": " + e.what());
        }
    }
    if (cfg.datasets.empty()) throw std::invalid_argument("experiment config: no datasets");
    if (cfg.selectors.empty()) throw std::invalid_argument("experiment config: no selectors");
    if (cfg.output_dir.empty()) throw std::invalid_argument("experiment config: no output_dir");
    if (cfg.folds < 2) throw std::invalid_argument("experiment config: folds must be >= 2");
    if (cfg.repeats < 1) throw std::invalid_argument("experiment config: repeats must be >= 1");
    if (cfg.workers < 1) throw std::invalid_argument("experiment config: workers must be >= 1");
    if (ratios_set) {
        if (cfg.checkpoint_ratios.empty() ||
            !std::is_sorted(cfg.checkpoint_ratios.begin(), cfg.checkpoint_ratios.end()) ||
            cfg.checkpoint_ratios.front() <= 0.0 || cfg.checkpoint_ratios.back() != 1.0)
            throw std::invalid_argument(
                "experiment config: checkpoint_ratios must ascend within (0,1] and end at 1");
    }
    (void)preset_budget(cfg.budget_preset, "");  // rejects unknown preset names
    for (const DatasetEntry& entry : cfg.datasets) resolve_budget(cfg, entry);
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open experiment config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

std::uint64_t fold_seed(std::uint64_t base, std::string_view dataset) {
    return mix_seed({base, fnv1a64(dataset)});
}

std::uint64_t job_seed(std::uint64_t base, std::string_view dataset, SelectorKind selector,
                       int repeat, int fold) {
    return mix_seed({base, fnv1a64(dataset), fnv1a64(selector_name(selector)),
                     static_cast<std::uint64_t>(repeat), static_cast<std::uint64_t>(fold)});
}

std::string result_csv_header() {
    return "dataset,selector,repeat,fold,ratio,evaluations,train_auch,test_auch,hull_size";
}

std::string format_result_row(const ResultRow& row) {
    std::ostringstream out;
    out << row.dataset << ',' << selector_name(row.selector) << ',' << row.repeat << ',' << row.fold
        << ',' << format_double(row.ratio) << ',' << row.evaluations << ','
        << format_double(row.train_auch) << ',' << format_double(row.test_auch) << ','
        << row.hull_size;
    return out.str();
}

ResultRow parse_result_row(const std::string& line) {
    const std::vector<std::string> f = split_list(line, ',');
    if (f.size() != 9) throw std::invalid_argument("result row needs 9 fields: " + line);
    ResultRow row;
    row.dataset = f[0];
    row.selector = parse_selector(f[1]);
    row.repeat = std::stoi(f[2]);
    row.fold = std::stoi(f[3]);
    row.ratio = std::stod(f[4]);
    row.evaluations = std::stoull(f[5]);
    row.train_auch = std::stod(f[6]);
    row.test_auch = std::stod(f[7]);
    row.hull_size = std::stoul(f[8]);
    return row;
}

std::vector<ResultRow> load_results(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open results file: " + path);
    std::vector<ResultRow> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first) {
            first = false;
            if (line != result_csv_header())
                throw std::runtime_error("unexpected results header in " + path);
            continue;
        }
        if (trim(line).empty()) continue;
        rows.push_back(parse_result_row(line));
    }
    return rows;
}

namespace {

struct Job {
    std::size_t dataset;
    std::size_t selector;
    int repeat;
    int fold;
};

std::string job_stem(const ExperimentConfig& cfg, const Job& j) {
    std::ostringstream out;
    out << cfg.datasets[j.dataset].name << "__" << selector_name(cfg.selectors[j.selector]) << "__r"
        << j.repeat << "_f" << j.fold;
    return out.str();
}

// Write-to-temp then rename; a file under its final name is always complete.
void write_atomic(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << content;
    }
    fs::rename(tmp, path);
}

std::string echo_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "output_dir = " << cfg.output_dir << '\n';
    out << "budget_preset = " << cfg.budget_preset << '\n';
    out << "population = " << cfg.population_size << '\n';
    out << "folds = " << cfg.folds << '\n';
    out << "repeats = " << cfg.repeats << '\n';
    out << "seed = " << cfg.base_seed << '\n';
    out << "selectors = ";
    for (std::size_t i = 0; i < cfg.selectors.size(); ++i)
        out << (i ? ", " : "") << selector_name(cfg.selectors[i]);
    out << '\n';
    out << "checkpoint_ratios = ";
    for (std::size_t i = 0; i < cfg.checkpoint_ratios.size(); ++i)
        out << (i ? ", " : "") << format_double(cfg.checkpoint_ratios[i]);
    out << '\n';
    for (const DatasetEntry& d : cfg.datasets) {
        out << "dataset = " << d.name << ' ' << d.data_path << ' ' << d.schema_path;
        if (d.max_evaluations > 0) out << ' ' << d.max_evaluations;
        out << '\n';
    }
    return out.str();
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg) {
    const fs::path root(cfg.output_dir);
    const fs::path rows_dir = root / "rows";
    const fs::path timings_dir = root / "timings";
    const fs::path failures_dir = root / "failures";
    fs::create_directories(rows_dir);
    fs::create_directories(timings_dir);
    fs::create_directories(failures_dir);

    // The seed-relevant parts of the config are pinned to the output
    // directory; resuming under a different config would silently mix
    // incompatible rows.
    const std::string echo = echo_config(cfg);
    const fs::path echo_path = root / "config_echo.txt";
    if (fs::exists(echo_path)) {
        std::ifstream in(echo_path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        if (buf.str() != echo)
            throw std::invalid_argument("output dir " + cfg.output_dir +
                                        " was produced by a different config");
    } else {
        write_atomic(echo_path, echo);
    }

    // One shared load per dataset; a failure here fails the dataset's jobs
    // but not the run.
    struct Loaded {
        Dataset data;
        FoldPlan plan;
        std::uint64_t budget = 0;
        std::string error;
    };
    std::vector<Loaded> loaded(cfg.datasets.size());
    for (std::size_t i = 0; i < cfg.datasets.size(); ++i) {
        try {
            loaded[i].budget = resolve_budget(cfg, cfg.datasets[i]);
            loaded[i].data = load_dataset(cfg.datasets[i].data_path, cfg.datasets[i].schema_path);
            RandomSource rng(fold_seed(cfg.base_seed, cfg.datasets[i].name));
            loaded[i].plan = stratified_kfold(loaded[i].data, cfg.folds, cfg.repeats, rng);
        } catch (const std::exception& e) {
            loaded[i].error = e.what();
        }
    }

    std::vector<Job> jobs;
    for (std::size_t d = 0; d < cfg.datasets.size(); ++d)
        for (std::size_t s = 0; s < cfg.selectors.size(); ++s)
            for (int r = 0; r < cfg.repeats; ++r)
                for (int f = 0; f < cfg.folds; ++f) jobs.push_back(Job{d, s, r, f});

    std::atomic<std::size_t> next{0}, ran{0}, skipped{0}, failed{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= jobs.size()) return;
            const Job& job = jobs[i];
            const std::string stem = job_stem(cfg, job);
            const fs::path row_path = rows_dir / (stem + ".csv");
            const fs::path fail_path = failures_dir / (stem + ".txt");
            if (fs::exists(row_path)) {
                ++skipped;
                continue;
            }
            const Loaded& src = loaded[job.dataset];
            const auto t0 = std::chrono::steady_clock::now();
            try {
                if (!src.error.empty()) throw std::runtime_error(src.error);
                EngineConfig ecfg;
                ecfg.population_size = cfg.population_size;
                ecfg.max_evaluations = src.budget;
                ecfg.selector = cfg.selectors[job.selector];
                ecfg.rng_seed = job_seed(cfg.base_seed, cfg.datasets[job.dataset].name,
                                         ecfg.selector, job.repeat, job.fold);
                ecfg.checkpoint_ratios = cfg.checkpoint_ratios;
                const FoldAssignment& assign = src.plan.splits[job.repeat][job.fold];
                const Split train = materialize_split(src.data, assign.train);
                const Split test = materialize_split(src.data, assign.test);
                const RunResult result = run(ecfg, src.data.space, train, test);
                std::ostringstream out;
                for (const CheckpointRecord& rec : result.log.records) {
                    ResultRow row{cfg.datasets[job.dataset].name,
                                  ecfg.selector,
                                  job.repeat,
                                  job.fold,
                                  rec.ratio,
                                  rec.evaluations_used,
                                  rec.train_auch,
                                  rec.test_auch,
                                  rec.hull_size};
                    out << format_result_row(row) << '\n';
                }
                const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                                    std::chrono::steady_clock::now() - t0)
                                    .count();
                write_atomic(timings_dir / (stem + ".txt"), std::to_string(ms) + "\n");
                write_atomic(row_path, out.str());
                if (fs::exists(fail_path)) fs::remove(fail_path);
                ++ran;
            } catch (const std::exception& e) {
                write_atomic(fail_path, std::string(e.what()) + "\n");
                ++failed;
            }
        }
    };

    const std::size_t pool = std::min(cfg.workers, jobs.size());
    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (std::size_t i = 0; i < pool; ++i) threads.emplace_back(worker);
        for (std::thread& t : threads) t.join();
    }

    // Rebuild the merged tables in canonical job order so output bytes do
    // not depend on scheduling.
    std::ostringstream results, timings, failures;
    results << result_csv_header() << '\n';
    timings << "dataset,selector,repeat,fold,millis\n";
    failures << "dataset,selector,repeat,fold,error\n";
    bool any_failure = false;
    for (const Job& job : jobs) {
        const std::string stem = job_stem(cfg, job);
        const fs::path row_path = rows_dir / (stem + ".csv");
        if (fs::exists(row_path)) {
            std::ifstream in(row_path, std::ios::binary);
            results << in.rdbuf();
            std::ifstream tin(timings_dir / (stem + ".txt"));
            std::string ms;
            if (tin && std::getline(tin, ms))
                timings << cfg.datasets[job.dataset].name << ','
                        << selector_name(cfg.selectors[job.selector]) << ',' << job.repeat << ','
                        << job.fold << ',' << ms << '\n';
            continue;
        }
        const fs::path fail_path = failures_dir / (stem + ".txt");
        std::string why = "job did not run";
        if (fs::exists(fail_path)) {
            std::ifstream fin(fail_path);
            std::getline(fin, why);
        }
        failures << cfg.datasets[job.dataset].name << ','
                 << selector_name(cfg.selectors[job.selector]) << ',' << job.repeat << ','
                 << job.fold << ',' << why << '\n';
        any_failure = true;
    }
    write_atomic(root / "results.csv", results.str());
    write_atomic(root / "timings.csv", timings.str());
    if (any_failure) write_atomic(root / "failures.csv", failures.str());
    else if (fs::exists(root / "failures.csv")) fs::remove(root / "failures.csv");

    return RunReport{jobs.size(), ran.load(), skipped.load(), failed.load()};
}

std::string format_cell(const SummaryCell& cell) {
    if (cell.n < 2) return "--";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f ± %.2f", cell.mean * 100.0, cell.stdev * 100.0);
    return buf;
}

namespace {

using CellKey = std::pair<std::string, std::string>;  // dataset, selector name

}  // namespace

std::vector<SummaryCell> summarize(const std::vector<ResultRow>& rows) {
    // Full budget means the largest ratio seen for that cell.
    std::map<CellKey, double> final_ratio;
    for (const ResultRow& r : rows) {
        const CellKey key{r.dataset, selector_name(r.selector)};
        const auto it = final_ratio.find(key);
        if (it == final_ratio.end() || r.ratio > it->second) final_ratio[key] = r.ratio;
    }
    std::map<CellKey, std::pair<SelectorKind, std::vector<double>>> samples;
    for (const ResultRow& r : rows) {
        const CellKey key{r.dataset, selector_name(r.selector)};
        if (r.ratio != final_ratio[key]) continue;
        auto& slot = samples[key];
        slot.first = r.selector;
        slot.second.push_back(r.test_auch);
    }
    std::vector<SummaryCell> out;
    for (const auto& [key, slot] : samples) {
        SummaryCell cell;
        cell.dataset = key.first;
        cell.selector = slot.first;
        cell.n = slot.second.size();
        cell.mean = mean_of(slot.second);
        cell.stdev = sample_std(slot.second, cell.mean);
        out.push_back(std::move(cell));
    }
    return out;
}

std::vector<CurveCell> convergence(const std::vector<ResultRow>& rows) {
    std::map<std::tuple<std::string, std::string, double>,
             std::pair<SelectorKind, std::pair<std::vector<double>, std::vector<double>>>>
        cells;
    for (const ResultRow& r : rows) {
        auto& slot = cells[{r.dataset, selector_name(r.selector), r.ratio}];
        slot.first = r.selector;
        slot.second.first.push_back(r.test_auch);
        slot.second.second.push_back(r.train_auch);
    }
    std::vector<CurveCell> out;
    for (const auto& [key, slot] : cells) {
        CurveCell cell;
        cell.dataset = std::get<0>(key);
        cell.selector = slot.first;
        cell.ratio = std::get<2>(key);
        cell.n = slot.second.first.size();
        cell.mean_test = mean_of(slot.second.first);
        cell.mean_train = mean_of(slot.second.second);
        out.push_back(std::move(cell));
    }
    return out;
}

WilcoxonResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                 double alpha) {
    const std::size_t n = a.size(), m = b.size();
    if (n < 2 || m < 2) throw std::invalid_argument("wilcoxon_rank_sum: need at least 2 per sample");
    const std::size_t N = n + m;

    struct Tagged {
        double value;
        bool from_a;
    };
    std::vector<Tagged> pooled;
    pooled.reserve(N);
    for (const double x : a) pooled.push_back({x, true});
    for (const double x : b) pooled.push_back({x, false});
    std::sort(pooled.begin(), pooled.end(), [](const Tagged& x, const Tagged& y) {
        if (x.value != y.value) return x.value < y.value;
        return x.from_a && !y.from_a;  // any fixed tie order; ranks are shared anyway
    });

    // Doubled midranks stay integral under ties: positions i..j share
    // midrank (i+j+2)/2, so its double is i+j+2.
    std::vector<std::uint64_t> rank2(N);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t i = 0; i < N;) {
        std::size_t j = i;
        while (j + 1 < N && pooled[j + 1].value == pooled[i].value) ++j;
        for (std::size_t k = i; k <= j; ++k) rank2[k] = i + j + 2;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }
    std::uint64_t w2 = 0;
    for (std::size_t i = 0; i < N; ++i)
        if (pooled[i].from_a) w2 += rank2[i];

    WilcoxonResult res;
    res.u_a = static_cast<double>(w2) / 2.0 - static_cast<double>(n * (n + 1)) / 2.0;

    if (std::max(n, m) <= 20) {
        // Subset-sum tally over doubled ranks: ways[k][s] counts the size-k
        // subsets of the pool with doubled-rank sum s. Counts top out at
        // C(40,20) which fits comfortably in 64 bits.
        const std::size_t smax = N * (N + 1);
        std::vector<std::vector<std::uint64_t>> ways(n + 1,
                                                     std::vector<std::uint64_t>(smax + 1, 0));
        ways[0][0] = 1;
        for (std::size_t i = 0; i < N; ++i) {
            const std::uint64_t r = rank2[i];
            for (std::size_t k = std::min(n, i + 1); k >= 1; --k)
                for (std::size_t s = smax; s >= r; --s)
                    if (ways[k - 1][s - r]) ways[k][s] += ways[k - 1][s - r];
        }
        std::uint64_t le = 0, ge = 0, total = 0;
        for (std::size_t s = 0; s <= smax; ++s) {
            total += ways[n][s];
            if (s <= w2) le += ways[n][s];
            if (s >= w2) ge += ways[n][s];
        }
        res.p = std::min(1.0, 2.0 * static_cast<double>(std::min(le, ge)) /
                                  static_cast<double>(total));
    } else {
        const double mean_u = static_cast<double>(n) * static_cast<double>(m) / 2.0;
        double tie_term = 0.0;
        for (const std::size_t t : tie_sizes) {
            const double td = static_cast<double>(t);
            tie_term += td * td * td - td;
        }
        const double Nd = static_cast<double>(N);
        const double var = static_cast<double>(n) * static_cast<double>(m) / 12.0 *
                           ((Nd + 1.0) - tie_term / (Nd * (Nd - 1.0)));
        if (var <= 0.0) {
            res.p = 1.0;
        } else {
            const double z = std::max(0.0, std::abs(res.u_a - mean_u) - 0.5) / std::sqrt(var);
            res.p = std::erfc(z / std::sqrt(2.0));
        }
    }

    const double mean_a = mean_of({a.begin(), a.end()});
    const double mean_b = mean_of({b.begin(), b.end()});
    if (res.p < alpha && mean_a != mean_b)
        res.outcome = mean_a > mean_b ? Outcome::A_WINS : Outcome::B_WINS;
    return res;
}

ComparisonTable compare_selectors(const std::vector<ResultRow>& rows, SelectorKind a,
                                  SelectorKind b, double alpha) {
    ComparisonTable table;
    table.a = a;
    table.b = b;
    std::set<double> ratio_set;
    std::set<std::string> dataset_set;
    for (const ResultRow& r : rows) {
        if (r.selector != a && r.selector != b) continue;
        ratio_set.insert(r.ratio);
        dataset_set.insert(r.dataset);
    }
    for (const double ratio : ratio_set) {
        std::size_t wins = 0, draws = 0, losses = 0;
        for (const std::string& ds : dataset_set) {
            std::vector<double> sa, sb;
            for (const ResultRow& r : rows) {
                if (r.dataset != ds || r.ratio != ratio) continue;
                if (r.selector == a) sa.push_back(r.test_auch);
                else if (r.selector == b) sb.push_back(r.test_auch);
            }
            if (sa.size() < 2 || sb.size() < 2) continue;
            ComparisonRow row{ds, ratio, wilcoxon_rank_sum(sa, sb, alpha)};
            switch (row.test.outcome) {
                case Outcome::A_WINS: ++wins; break;
                case Outcome::B_WINS: ++losses; break;
                case Outcome::DRAW: ++draws; break;
            }
            table.rows.push_back(std::move(row));
        }
        table.ratios.push_back(ratio);
        table.a_wins.push_back(wins);
        table.draws.push_back(draws);
        table.b_wins.push_back(losses);
    }
    return table;
}

void write_summary_csv(const std::vector<SummaryCell>& cells, const std::string& path) {
    std::ostringstream out;
    out << "dataset,selector,n,mean,stdev,label\n";
    for (const SummaryCell& c : cells)
        out << c.dataset << ',' << selector_name(c.selector) << ',' << c.n << ','
            << format_double(c.mean) << ',' << format_double(c.stdev) << ',' << format_cell(c)
            << '\n';
    write_atomic(path, out.str());
}

void write_curves_csv(const std::vector<CurveCell>& cells, const std::string& path) {
    std::ostringstream out;
    out << "dataset,selector,ratio,n,mean_test,mean_train\n";
    for (const CurveCell& c : cells)
        out << c.dataset << ',' << selector_name(c.selector) << ',' << format_double(c.ratio) << ','
            << c.n << ',' << format_double(c.mean_test) << ',' << format_double(c.mean_train)
            << '\n';
    write_atomic(path, out.str());
}

void write_comparison_csv(const ComparisonTable& table, const std::string& path) {
    std::ostringstream out;
    out << "ratio,dataset,outcome,p,u_a\n";
    const char* const a_name = selector_name(table.a);
    const char* const b_name = selector_name(table.b);
    for (const ComparisonRow& r : table.rows) {
        const char* who = r.test.outcome == Outcome::A_WINS   ? a_name
                          : r.test.outcome == Outcome::B_WINS ? b_name
                                                              : "draw";
        out << format_double(r.ratio) << ',' << r.dataset << ',' << who << ','
            << format_double(r.test.p) << ',' << format_double(r.test.u_a) << '\n';
    }
    for (std::size_t i = 0; i < table.ratios.size(); ++i)
        out << format_double(table.ratios[i]) << ",(total)," << table.a_wins[i] << '-'
            << table.draws[i] << '-' << table.b_wins[i] << ",,\n";
    write_atomic(path, out.str());
}

}  // namespace rocch
