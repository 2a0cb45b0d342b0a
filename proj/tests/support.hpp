#pragma once

// Test-only helpers: random problem generators and brute-force oracles that
// share no code path with the library implementations they check.

#include "dafr/dataset.hpp"
#include "dafr/simfn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace dafr::test {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double lo = -1.0,
                            double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = u(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double lo = -1.0, double hi = 1.0) {
    return random_matrix(rng, n, 1, lo, hi).col(0);
}

inline double max_rel_diff(const Vector& a, const Vector& b) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i)
        worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(1.0, std::abs(b(i))));
    return worst;
}

/// Solves the normal equations (A^T A) x = A^T y for A = [1 X] by Gaussian
/// elimination with partial pivoting on plain nested vectors.
inline Vector normal_equation_oracle(const Matrix& x, const Vector& y) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto m = static_cast<std::size_t>(x.cols()) + 1;
    auto a = [&](std::size_t i, std::size_t j) { return j == 0 ? 1.0 : x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)); };
    std::vector<std::vector<double>> g(m, std::vector<double>(m + 1, 0.0));
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t i = 0; i < n; ++i) g[r][c] += a(i, r) * a(i, c);
        for (std::size_t i = 0; i < n; ++i) g[r][m] += a(i, r) * y(static_cast<Eigen::Index>(i));
    }
    for (std::size_t col = 0; col < m; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < m; ++r)
            if (std::abs(g[r][col]) > std::abs(g[piv][col])) piv = r;
        std::swap(g[col], g[piv]);
        for (std::size_t r = col + 1; r < m; ++r) {
            const double f = g[r][col] / g[col][col];
            for (std::size_t c = col; c <= m; ++c) g[r][c] -= f * g[col][c];
        }
    }
    Vector beta(static_cast<Eigen::Index>(m));
    for (std::size_t r = m; r-- > 0;) {
        double s = g[r][m];
        for (std::size_t c = r + 1; c < m; ++c) s -= g[r][c] * beta(static_cast<Eigen::Index>(c));
        beta(static_cast<Eigen::Index>(r)) = s / g[r][r];
    }
    return beta;
}

/// Full-sort KNN vote over already-standardized references.
inline SegmentLabel knn_oracle(const std::vector<std::vector<double>>& refs, const std::vector<SegmentLabel>& labels,
                               const std::vector<double>& query, int k) {
    struct Entry {
        double d2;
        std::size_t idx;
    };
    std::vector<Entry> all;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t j = 0; j < query.size(); ++j) d2 += (refs[i][j] - query[j]) * (refs[i][j] - query[j]);
        all.push_back({d2, i});
    }
    std::sort(all.begin(), all.end(), [](const Entry& a, const Entry& b) {
        return a.d2 != b.d2 ? a.d2 < b.d2 : a.idx < b.idx;
    });
    std::array<int, 3> votes{0, 0, 0};
    for (int i = 0; i < k; ++i) votes[static_cast<std::size_t>(labels[all[static_cast<std::size_t>(i)].idx])] += 1;
    int best = std::max({votes[0], votes[1], votes[2]});
    std::vector<SegmentLabel> tied;
    for (std::size_t l = 0; l < 3; ++l)
        if (votes[l] == best) tied.push_back(static_cast<SegmentLabel>(l));
    if (tied.size() == 1) return tied.front();
    for (int i = 0; i < k; ++i) {
        auto label = labels[all[static_cast<std::size_t>(i)].idx];
        if (std::find(tied.begin(), tied.end(), label) != tied.end()) return label;
    }
    return tied.front();
}

inline double naive_mape(const Vector& y, const Vector& yhat) {
    long double s = 0.0L;
    for (Eigen::Index i = 0; i < y.size(); ++i) s += std::fabs((y(i) - yhat(i)) / y(i));
    return static_cast<double>(100.0L * s / y.size());
}

/// Sum of squared errors of `pred` against `y` over `rows`.
inline double sse_over(const Vector& y, const Vector& pred, const std::vector<Eigen::Index>& rows) {
    double s = 0.0;
    for (auto r : rows) s += (y(r) - pred(r)) * (y(r) - pred(r));
    return s;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() / ("dafr_" + tag + "_" + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace dafr::test
