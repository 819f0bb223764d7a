#include "kdetl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "kdetl/error.hpp"

namespace kdetl {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                              : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view field) {
    if (field.empty()) return std::nullopt;
    if (field.front() == '+') field.remove_prefix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
    if (ec != std::errc{} || ptr != field.data() + field.size() || !std::isfinite(value)) {
        return std::nullopt;
    }
    return value;
}

}  // namespace

Dataset::Dataset(std::vector<std::string> names, Eigen::MatrixXd values)
    : names_(std::move(names)), values_(std::move(values)) {
    if (names_.empty()) throw Error("empty-dataset", "dataset has no variables");
    if (values_.rows() < 1) throw Error("zero-usable-rows", "dataset has no rows");
    if (static_cast<std::size_t>(values_.cols()) != names_.size()) {
        throw Error("shape-mismatch", "column count does not match number of names");
    }
    std::unordered_set<std::string> seen;
    for (const auto& n : names_) {
        if (!seen.insert(n).second) throw Error("duplicate-name", "duplicate variable name '" + n + "'");
    }
    if (!values_.allFinite()) throw Error("non-finite", "dataset contains non-finite values");
}

std::optional<std::size_t> Dataset::find(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names_.begin());
}

std::size_t Dataset::index_of(std::string_view name) const {
    if (auto idx = find(name)) return *idx;
    throw Error("unknown-variable", "unknown variable '" + std::string(name) + "'");
}

Eigen::MatrixXd Dataset::gather(std::span<const std::size_t> rows, std::span<const int> cols) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const auto src = values_.col(cols[static_cast<std::size_t>(c)]);
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            out(r, c) = src(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)]));
        }
    }
    return out;
}

Eigen::MatrixXd Dataset::gather(std::span<const int> cols) const {
    Eigen::MatrixXd out(values_.rows(), static_cast<Eigen::Index>(cols.size()));
    for (Eigen::Index c = 0; c < out.cols(); ++c) out.col(c) = values_.col(cols[static_cast<std::size_t>(c)]);
    return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
    std::vector<int> cols(names_.size());
    std::iota(cols.begin(), cols.end(), 0);
    return Dataset(names_, gather(rows, cols));
}

Dataset Dataset::head(std::size_t n) const {
    if (n > rows()) throw Error("insufficient-rows", "head() asked for more rows than available");
    return Dataset(names_, values_.topRows(static_cast<Eigen::Index>(n)));
}

Dataset Dataset::reorder(const std::vector<std::string>& names) const {
    if (names.size() != names_.size()) {
        throw Error("variable-mismatch", "datasets do not share the same variables");
    }
    std::vector<int> cols;
    cols.reserve(names.size());
    for (const auto& n : names) {
        const auto idx = find(n);
        if (!idx) throw Error("variable-mismatch", "variable '" + n + "' missing from dataset");
        cols.push_back(static_cast<int>(*idx));
    }
    return Dataset(names, gather(cols));
}

Dataset parse_csv(std::string_view text) {
    std::vector<std::string> names;
    std::vector<std::vector<double>> rows;
    bool header = true;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        const auto fields = split_fields(line);
        if (header) {
            for (auto f : fields) names.emplace_back(f);
            header = false;
            continue;
        }
        if (fields.size() != names.size()) continue;
        std::vector<double> row;
        row.reserve(fields.size());
        for (auto f : fields) {
            auto v = parse_number(f);
            if (!v) break;
            row.push_back(*v);
        }
        if (row.size() == names.size()) rows.push_back(std::move(row));
    }
    if (header) throw Error("missing-header", "CSV has no header row");
    {
        std::unordered_set<std::string> seen;
        for (const auto& n : names) {
            if (!seen.insert(n).second) throw Error("duplicate-name", "duplicate header name '" + n + "'");
        }
    }
    if (rows.empty()) throw Error("zero-usable-rows", "CSV contains no usable numeric rows");
    Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < names.size(); ++c) {
            values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
    }
    return Dataset(std::move(names), std::move(values));
}

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("unreadable-file", "cannot open '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_csv(buf.str());
}

std::string to_csv(const Dataset& data) {
    std::ostringstream out;
    out << std::setprecision(17);
    const auto& names = data.names();
    for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
    out << '\n';
    const auto& v = data.values();
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
        for (Eigen::Index c = 0; c < v.cols(); ++c) out << (c ? "," : "") << v(r, c);
        out << '\n';
    }
    return out.str();
}

void write_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("write-failed", "cannot write '" + path.string() + "'");
    out << to_csv(data);
    if (!out) throw Error("write-failed", "error while writing '" + path.string() + "'");
}

RowIndices all_rows(std::size_t n) {
    RowIndices rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

RowIndices FoldPlan::training_rows(std::size_t m) const {
    RowIndices out;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        if (f == m) continue;
        out.insert(out.end(), folds[f].begin(), folds[f].end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

FoldPlan kfold_indices(std::size_t n, std::size_t k, Seed seed) {
    if (k < 2) throw Error("invalid-folds", "k-fold requires k >= 2");
    if (k > n) throw Error("invalid-folds", "k-fold requires k <= N");
    auto order = all_rows(n);
    auto rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    FoldPlan plan;
    plan.k = k;
    plan.folds.resize(k);
    for (std::size_t i = 0; i < n; ++i) plan.folds[i % k].push_back(order[i]);
    for (auto& f : plan.folds) std::sort(f.begin(), f.end());
    return plan;
}

std::pair<Dataset, Dataset> holdout_split(const Dataset& data, std::size_t test_n, Seed seed) {
    if (test_n == 0 || test_n >= data.rows()) {
        throw Error("invalid-split", "holdout requires 0 < test_n < N");
    }
    auto order = all_rows(data.rows());
    auto rng = make_rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    RowIndices test(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_n));
    RowIndices train(order.begin() + static_cast<std::ptrdiff_t>(test_n), order.end());
    return {data.select_rows(train), data.select_rows(test)};
}

}  // namespace kdetl
