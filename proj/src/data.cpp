#include "rocch/data.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rocch {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void schema_fail(std::size_t line_no, const std::string& what) {
    throw std::invalid_argument("schema line " + std::to_string(line_no) + ": " + what);
}

ColumnKind parse_kind(const std::string& v, std::size_t line_no) {
    if (v == "numeric") return ColumnKind::numeric;
    if (v == "categorical") return ColumnKind::categorical;
    if (v == "ignore") return ColumnKind::ignore;
    schema_fail(line_no, "unknown column kind '" + v + "'");
}

std::size_t parse_index(const std::string& v, std::size_t line_no, const std::string& what) {
    const char* begin = v.c_str();
    char* end = nullptr;
    const unsigned long long n = std::strtoull(begin, &end, 10);
    if (v.empty() || end != begin + v.size()) schema_fail(line_no, "bad " + what + " '" + v + "'");
    return static_cast<std::size_t>(n);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<std::string> split_row(const std::string& line, char delimiter) {
    std::vector<std::string> out;
    if (delimiter == ' ') {
        std::istringstream in(line);
        std::string tok;
        while (in >> tok) out.push_back(tok);
        return out;
    }
    std::string cur;
    for (const char c : line) {
        if (c == delimiter) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    if (n % 2 == 1) return v[n / 2];
    return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

SchemaSpec parse_schema(const std::string& text) {
    SchemaSpec spec;
    bool saw_label = false, saw_pos = false, saw_neg = false;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::string line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) schema_fail(line_no, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "label_column") {
            spec.label_column = parse_index(value, line_no, "label_column");
            saw_label = true;
        } else if (key == "positive_label") {
            spec.positive_label = value;
            saw_pos = true;
        } else if (key == "negative_label") {
            spec.negative_label = value;
            saw_neg = true;
        } else if (key == "missing_token") {
            spec.missing_token = value;
        } else if (key == "header") {
            if (value != "0" && value != "1") schema_fail(line_no, "header must be 0 or 1");
            spec.has_header = value == "1";
        } else if (key == "delimiter") {
            if (value == "comma")
                spec.delimiter = ',';
            else if (value == "whitespace")
                spec.delimiter = ' ';
            else if (value == "auto")
                spec.delimiter = 0;
            else
                schema_fail(line_no, "delimiter must be comma, whitespace or auto");
        } else if (key == "default") {
            spec.default_kind = parse_kind(value, line_no);
        } else if (key == "columns") {
            spec.columns = parse_index(value, line_no, "columns");
        } else if (key.rfind("column.", 0) == 0) {
            const std::size_t idx = parse_index(key.substr(7), line_no, "column index");
            if (spec.kinds.count(idx)) schema_fail(line_no, "duplicate column." + std::to_string(idx));
            spec.kinds[idx] = parse_kind(value, line_no);
        } else {
            schema_fail(line_no, "unknown key '" + key + "'");
        }
    }
    if (!saw_label) throw std::invalid_argument("schema: label_column is required");
    if (!saw_pos) throw std::invalid_argument("schema: positive_label is required");
    if (!saw_neg) throw std::invalid_argument("schema: negative_label is required");
    if (spec.positive_label == spec.negative_label)
        throw std::invalid_argument("schema: positive_label equals negative_label");
    return spec;
}

SchemaSpec load_schema(const std::string& path) { return parse_schema(read_file(path)); }

Dataset load_dataset(const std::string& data_path, const SchemaSpec& spec) {
    const std::string text = read_file(data_path);

    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> line_of_row;
    {
        std::istringstream in(text);
        std::string raw;
        std::size_t line_no = 0;
        bool header_pending = spec.has_header;
        char delimiter = spec.delimiter;
        while (std::getline(in, raw)) {
            ++line_no;
            const std::string line = trim(raw);
            if (line.empty()) continue;
            if (header_pending) {
                header_pending = false;
                continue;
            }
            if (delimiter == 0) delimiter = line.find(',') != std::string::npos ? ',' : ' ';
            cells.push_back(split_row(line, delimiter));
            line_of_row.push_back(line_no);
        }
    }
    if (cells.empty()) throw std::invalid_argument(data_path + ": no data rows");

    const std::size_t width = spec.columns.value_or(cells[0].size());
    if (spec.label_column >= width)
        throw std::invalid_argument(data_path + ": label column " +
                                    std::to_string(spec.label_column) + " outside row of width " +
                                    std::to_string(width));
    for (std::size_t r = 0; r < cells.size(); ++r)
        if (cells[r].size() != width)
            throw std::invalid_argument(data_path + " line " + std::to_string(line_of_row[r]) +
                                        ": expected " + std::to_string(width) + " fields, got " +
                                        std::to_string(cells[r].size()));

    std::vector<std::size_t> kept;  // source column per attribute
    for (std::size_t c = 0; c < width; ++c) {
        if (c == spec.label_column) continue;
        auto it = spec.kinds.find(c);
        const ColumnKind kind = it == spec.kinds.end() ? spec.default_kind : it->second;
        if (kind != ColumnKind::ignore) kept.push_back(c);
    }
    if (kept.empty()) throw std::invalid_argument(data_path + ": schema keeps no feature columns");

    Dataset ds;
    ds.labels.reserve(cells.size());
    for (std::size_t r = 0; r < cells.size(); ++r) {
        const std::string& tok = cells[r][spec.label_column];
        if (tok == spec.positive_label)
            ds.labels.push_back(1);
        else if (tok == spec.negative_label)
            ds.labels.push_back(0);
        else
            throw std::invalid_argument(data_path + " line " + std::to_string(line_of_row[r]) +
                                        ": unknown label token '" + tok + "'");
    }
    ds.positives = static_cast<std::size_t>(std::count(ds.labels.begin(), ds.labels.end(), 1));
    ds.negatives = ds.labels.size() - ds.positives;
    if (ds.positives == 0 || ds.negatives == 0)
        throw std::invalid_argument(data_path + ": only one class present");

    ds.rows.assign(cells.size(), std::vector<double>(kept.size(), 0.0));
    ds.space.attributes.resize(kept.size());
    ds.category_tokens.resize(kept.size());

    for (std::size_t a = 0; a < kept.size(); ++a) {
        const std::size_t c = kept[a];
        auto it = spec.kinds.find(c);
        const ColumnKind kind = it == spec.kinds.end() ? spec.default_kind : it->second;

        if (kind == ColumnKind::numeric) {
            std::vector<double> observed;
            std::vector<bool> missing(cells.size(), false);
            for (std::size_t r = 0; r < cells.size(); ++r) {
                const std::string& tok = cells[r][c];
                if (tok == spec.missing_token) {
                    missing[r] = true;
                    continue;
                }
                const char* begin = tok.c_str();
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (tok.empty() || end != begin + tok.size())
                    throw std::invalid_argument(data_path + " line " +
                                                std::to_string(line_of_row[r]) + ": column " +
                                                std::to_string(c) + " has non-numeric value '" +
                                                tok + "'");
                ds.rows[r][a] = v;
                observed.push_back(v);
            }
            if (observed.empty())
                throw std::invalid_argument(data_path + ": column " + std::to_string(c) +
                                            " has no observed values");
            const double fill = median_of(observed);
            for (std::size_t r = 0; r < cells.size(); ++r)
                if (missing[r]) ds.rows[r][a] = fill;
            AttributeRange& range = ds.space.attributes[a];
            range.categorical = false;
            range.lo = *std::min_element(observed.begin(), observed.end());
            range.hi = *std::max_element(observed.begin(), observed.end());
        } else {
            std::map<std::string, std::size_t> freq;
            for (std::size_t r = 0; r < cells.size(); ++r)
                if (cells[r][c] != spec.missing_token) ++freq[cells[r][c]];
            if (freq.empty())
                throw std::invalid_argument(data_path + ": column " + std::to_string(c) +
                                            " has no observed values");
            // Mode fills the gaps; ties resolve to the smallest token.
            std::string mode = freq.begin()->first;
            for (const auto& [tok, n] : freq)
                if (n > freq[mode]) mode = tok;
            std::map<std::string, double> code;
            std::vector<std::string>& tokens = ds.category_tokens[a];
            for (const auto& [tok, n] : freq) {
                code[tok] = static_cast<double>(tokens.size());
                tokens.push_back(tok);
            }
            for (std::size_t r = 0; r < cells.size(); ++r) {
                const std::string& tok = cells[r][c];
                ds.rows[r][a] = code[tok == spec.missing_token ? mode : tok];
            }
            AttributeRange& range = ds.space.attributes[a];
            range.categorical = true;
            range.lo = 0.0;
            range.hi = static_cast<double>(tokens.size() - 1);
            for (std::size_t i = 0; i < tokens.size(); ++i)
                range.codes.push_back(static_cast<double>(i));
        }
    }
    return ds;
}

Dataset load_dataset(const std::string& data_path, const std::string& schema_path) {
    return load_dataset(data_path, load_schema(schema_path));
}

Split materialize_split(const Dataset& ds, const std::vector<std::size_t>& indices) {
    Split out;
    out.rows.reserve(indices.size());
    out.labels.reserve(indices.size());
    for (const std::size_t i : indices) {
        if (i >= ds.rows.size())
            throw std::out_of_range("materialize_split: index " + std::to_string(i) +
                                    " outside dataset of size " + std::to_string(ds.rows.size()));
        out.rows.push_back(ds.rows[i]);
        out.labels.push_back(ds.labels[i]);
    }
    return out;
}

FoldPlan stratified_kfold(const Dataset& ds, int k, int repeats, RandomSource& rng) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be at least 2");
    if (repeats < 1) throw std::invalid_argument("stratified_kfold: repeats must be positive");
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < ds.labels.size(); ++i)
        (ds.labels[i] == 1 ? pos : neg).push_back(i);
    if (pos.size() < static_cast<std::size_t>(k) || neg.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("stratified_kfold: a class has fewer than k members");

    FoldPlan plan;
    plan.k = k;
    plan.repeats = repeats;
    plan.splits.resize(repeats);
    for (int rep = 0; rep < repeats; ++rep) {
        rng.shuffle(pos);
        rng.shuffle(neg);
        std::vector<std::vector<std::size_t>> fold_members(k);
        for (std::size_t i = 0; i < pos.size(); ++i) fold_members[i % k].push_back(pos[i]);
        for (std::size_t i = 0; i < neg.size(); ++i) fold_members[i % k].push_back(neg[i]);
        plan.splits[rep].resize(k);
        for (int f = 0; f < k; ++f) {
            FoldAssignment& fa = plan.splits[rep][f];
            fa.test = fold_members[f];
            std::sort(fa.test.begin(), fa.test.end());
            for (int g = 0; g < k; ++g)
                if (g != f)
                    fa.train.insert(fa.train.end(), fold_members[g].begin(), fold_members[g].end());
            std::sort(fa.train.begin(), fa.train.end());
        }
    }
    return plan;
}

}  // namespace rocch
