#include "dafr/dataset.hpp"

#include "dafr/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_map>

namespace dafr {
namespace {

struct Cell {
    std::string text;
    bool quoted = false;
};

std::string_view trim(std::string_view s) {
    auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::vector<Cell> split_line(std::string_view line) {
    std::vector<Cell> cells;
    std::size_t pos = 0;
    while (true) {
        std::size_t end = line.find(',', pos);
        auto raw = trim(line.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        Cell cell;
        if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"') {
            cell.quoted = true;
            raw = raw.substr(1, raw.size() - 2);
        }
        cell.text = std::string(raw);
        cells.push_back(std::move(cell));
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return cells;
}

std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

}  // namespace

void Dataset::validate() const {
    if (features.rows() < 1) throw DataError("no_rows", "dataset has zero rows");
    if (features.cols() < 1) throw DataError("no_features", "dataset has zero feature columns");
    if (features.rows() != target.size())
        throw DataError("shape_mismatch", "feature row count " + std::to_string(features.rows()) +
                                              " differs from target length " + std::to_string(target.size()));
    if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
        throw DataError("shape_mismatch", "feature name count differs from feature column count");
    if (!features.allFinite() || !target.allFinite())
        throw DataError("non_finite_value", "dataset contains NaN or infinite values");
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& row_indices) const {
    Dataset out;
    out.feature_names = feature_names;
    out.target_name = target_name;
    out.features.resize(static_cast<Eigen::Index>(row_indices.size()), features.cols());
    out.target.resize(static_cast<Eigen::Index>(row_indices.size()));
    for (std::size_t i = 0; i < row_indices.size(); ++i) {
        const auto r = row_indices[i];
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
        out.target(static_cast<Eigen::Index>(i)) = target(r);
    }
    return out;
}

namespace {

struct CsvTable {
    std::vector<std::string> header;
    std::unordered_map<std::string, std::size_t> column_index;
    std::vector<std::vector<Cell>> rows;
    std::string source;

    std::size_t index_of(const std::string& name) const {
        auto it = column_index.find(name);
        if (it == column_index.end())
            throw DataError("missing_column", "column '" + name + "' not found in '" + source + "'");
        return it->second;
    }

    double value(std::size_t r, std::size_t c) const {
        const auto& cell = rows[r][c];
        const std::string where = "data row " + std::to_string(r + 1) + ", column '" + header[c] + "'";
        if (cell.text.empty()) throw DataError("missing_value", "empty cell at " + where);
        auto v = cell.quoted ? std::nullopt : parse_number(cell.text);
        if (!v) throw DataError("non_numeric_cell", "'" + cell.text + "' is not a number at " + where);
        if (!std::isfinite(*v)) throw DataError("non_finite_value", "non-finite value at " + where);
        return *v;
    }

    Matrix columns(const std::vector<std::size_t>& selected) const {
        Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(selected.size()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t j = 0; j < selected.size(); ++j)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = value(r, selected[j]);
        return m;
    }
};

CsvTable read_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("file_not_found", "cannot open '" + path.string() + "'");

    CsvTable table;
    table.source = path.string();
    std::string line;
    if (!std::getline(in, line) || trim(line).empty())
        throw DataError("missing_header", "'" + path.string() + "' has no header row");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    for (auto& cell : split_line(line)) {
        if (!table.column_index.emplace(cell.text, table.header.size()).second)
            throw DataError("duplicate_column", "column '" + cell.text + "' appears twice in header");
        table.header.push_back(cell.text);
    }
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != table.header.size())
            throw DataError("ragged_row", "data row " + std::to_string(table.rows.size() + 1) + " has " +
                                              std::to_string(cells.size()) + " fields, header has " +
                                              std::to_string(table.header.size()));
        table.rows.push_back(std::move(cells));
    }
    if (table.rows.empty()) throw DataError("no_rows", "'" + path.string() + "' has zero data rows");
    return table;
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 const std::vector<std::string>& feature_columns) {
    const auto table = read_table(path);
    const std::size_t target_idx = table.index_of(target_column);

    std::vector<std::size_t> selected;
    if (feature_columns.empty()) {
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            if (c == target_idx) continue;
            const auto& first = table.rows.front()[c];
            if (!first.quoted && parse_number(first.text)) selected.push_back(c);
        }
    } else {
        for (const auto& name : feature_columns) {
            const auto c = table.index_of(name);
            if (c == target_idx)
                throw DataError("target_as_feature", "target column '" + name + "' listed as a feature");
            selected.push_back(c);
        }
    }
    if (selected.empty()) throw DataError("no_features", "no numeric feature columns in '" + path.string() + "'");

    Dataset ds;
    ds.target_name = target_column;
    for (auto c : selected) ds.feature_names.push_back(table.header[c]);
    ds.target = table.columns({target_idx}).col(0);
    ds.features = table.columns(selected);
    return ds;
}

Matrix load_feature_matrix(const std::filesystem::path& path, const std::vector<std::string>& feature_columns) {
    const auto table = read_table(path);
    std::vector<std::size_t> selected;
    for (const auto& name : feature_columns) selected.push_back(table.index_of(name));
    return table.columns(selected);
}

std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("write_failed", "cannot write '" + path.string() + "'");
    for (const auto& name : ds.feature_names) out << name << ',';
    out << ds.target_name << '\n';
    for (Eigen::Index r = 0; r < ds.rows(); ++r) {
        for (Eigen::Index c = 0; c < ds.cols(); ++c) out << format_double(ds.features(r, c)) << ',';
        out << format_double(ds.target(r)) << '\n';
    }
}

Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0))
        throw DataError("bad_fraction", "test fraction must lie in (0,1), got " + format_double(test_fraction));
    const auto n = ds.rows();
    const auto n_test = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) * test_fraction));
    const auto n_train = n - n_test;
    if (n_train < kMinTrainRows)
        throw DataError("train_too_small", "train split would have " + std::to_string(n_train) +
                                               " rows, need at least " + std::to_string(kMinTrainRows));
    if (n_test < 1) throw DataError("test_empty", "test split would be empty");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<Eigen::Index> train_rows(order.begin(), order.begin() + n_train);
    std::vector<Eigen::Index> test_rows(order.begin() + n_train, order.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    return {ds.subset(train_rows), ds.subset(test_rows)};
}

Scaler::Scaler(Vector means, Vector stddevs, std::vector<bool> constant)
    : means_(std::move(means)), stddevs_(std::move(stddevs)), constant_(std::move(constant)) {
    if (means_.size() != stddevs_.size() || static_cast<Eigen::Index>(constant_.size()) != means_.size())
        throw DataError("scaler_shape", "scaler parameter vectors differ in length");
    for (Eigen::Index j = 0; j < means_.size(); ++j)
        if (!constant_[static_cast<std::size_t>(j)] && !(stddevs_(j) > 0.0))
            throw DataError("scaler_shape", "non-constant scaler column needs a positive stddev");
}

Scaler Scaler::fit(const Matrix& features) {
    const auto n = features.rows();
    if (n < 2) throw DataError("too_few_rows", "scaler needs at least 2 rows, got " + std::to_string(n));
    const auto p = features.cols();
    Vector means(p);
    Vector stddevs(p);
    std::vector<bool> constant(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto col = features.col(j);
        if ((col.array() == col(0)).all()) {
            constant[static_cast<std::size_t>(j)] = true;
            means(j) = col(0);
            stddevs(j) = 0.0;
            continue;
        }
        const double mean = col.sum() / static_cast<double>(n);
        const double ss = (col.array() - mean).square().sum();
        means(j) = mean;
        stddevs(j) = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return Scaler(std::move(means), std::move(stddevs), std::move(constant));
}

Matrix Scaler::apply(const Matrix& features) const {
    if (features.cols() != width())
        throw PipelineError("width_mismatch", "scaler expects " + std::to_string(width()) + " columns, got " +
                                                  std::to_string(features.cols()));
    Matrix out(features.rows(), features.cols());
    for (Eigen::Index j = 0; j < width(); ++j) {
        if (constant_[static_cast<std::size_t>(j)])
            out.col(j).setZero();
        else
            out.col(j) = (features.col(j).array() - means_(j)) / stddevs_(j);
    }
    return out;
}

Vector Scaler::apply_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    if (row.size() != width())
        throw PipelineError("width_mismatch", "scaler expects " + std::to_string(width()) + " values, got " +
                                                  std::to_string(row.size()));
    Vector out(width());
    for (Eigen::Index j = 0; j < width(); ++j)
        out(j) = constant_[static_cast<std::size_t>(j)] ? 0.0 : (row(j) - means_(j)) / stddevs_(j);
    return out;
}

Matrix Scaler::invert(const Matrix& scaled) const {
    if (scaled.cols() != width())
        throw PipelineError("width_mismatch", "scaler expects " + std::to_string(width()) + " columns");
    Matrix out(scaled.rows(), scaled.cols());
    for (Eigen::Index j = 0; j < width(); ++j) {
        if (constant_[static_cast<std::size_t>(j)])
            out.col(j).setConstant(means_(j));
        else
            out.col(j) = scaled.col(j).array() * stddevs_(j) + means_(j);
    }
    return out;
}

}  // namespace dafr
