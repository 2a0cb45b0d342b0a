#include "dafr/metrics.hpp"

#include "dafr/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace dafr {
namespace {

void check_pair(const Vector& y, const Vector& yhat) {
    if (y.size() != yhat.size())
        throw PipelineError("length_mismatch", "actual has " + std::to_string(y.size()) + " values, predicted has " +
                                                   std::to_string(yhat.size()));
    if (y.size() == 0) throw PipelineError("empty_input", "metric needs at least one value");
}

double abs_pct_error(double y, double yhat, Eigen::Index row) {
    if (y == 0.0)
        throw PipelineError("zero_target", "MAPE is undefined at zero targets (row " + std::to_string(row) +
                                               "); shift or exclude zero targets before evaluating");
    return std::abs(y - yhat) / std::abs(y);
}

}  // namespace

double mape(const Vector& y, const Vector& yhat) {
    check_pair(y, yhat);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) sum += abs_pct_error(y(i), yhat(i), i);
    return 100.0 * sum / static_cast<double>(y.size());
}

double rmse(const Vector& y, const Vector& yhat) {
    check_pair(y, yhat);
    return std::sqrt((y - yhat).squaredNorm() / static_cast<double>(y.size()));
}

double mad(const Vector& y, const Vector& yhat) {
    check_pair(y, yhat);
    return (y - yhat).cwiseAbs().sum() / static_cast<double>(y.size());
}

double quantile(const Vector& values, double q) {
    if (values.size() == 0) throw PipelineError("empty_input", "quantile of an empty vector");
    if (!(q >= 0.0 && q <= 1.0)) throw PipelineError("bad_quantile", "quantile level must lie in [0,1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = static_cast<double>(v.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

std::size_t DecileProfile::total_count() const {
    return std::accumulate(bin_counts.begin(), bin_counts.end(), std::size_t{0});
}

double DecileProfile::weighted_mape() const {
    double sum = 0.0;
    for (std::size_t i = 0; i < n_bins(); ++i) sum += static_cast<double>(bin_counts[i]) * bin_mapes[i];
    return sum / static_cast<double>(total_count());
}

std::pair<std::size_t, std::size_t> bin_rank_range(std::size_t n, std::size_t n_bins, std::size_t i) {
    return {i * n / n_bins, (i + 1) * n / n_bins};
}

DecileProfile decile_mape_profile(const Vector& y, const Vector& yhat, std::size_t n_bins) {
    check_pair(y, yhat);
    if (n_bins < 1) throw PipelineError("bad_bins", "need at least one bin");
    const auto n = static_cast<std::size_t>(y.size());
    if (n < n_bins)
        throw PipelineError("too_few_rows", std::to_string(n) + " rows cannot fill " + std::to_string(n_bins) + " bins");

    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return y(a) < y(b); });

    DecileProfile profile;
    profile.bin_edges.push_back(y(order.front()));
    for (std::size_t b = 0; b < n_bins; ++b) {
        const auto [lo, hi] = bin_rank_range(n, n_bins, b);
        double sum = 0.0;
        for (auto r = lo; r < hi; ++r) sum += abs_pct_error(y(order[r]), yhat(order[r]), order[r]);
        profile.bin_counts.push_back(hi - lo);
        profile.bin_mapes.push_back(100.0 * sum / static_cast<double>(hi - lo));
        profile.bin_edges.push_back(y(order[hi - 1]));
    }
    return profile;
}

BathtubReport bathtub_report(const DecileProfile& profile) {
    if (profile.n_bins() != 10)
        throw PipelineError("bad_bins", "bathtub report needs a 10-bin profile, got " +
                                            std::to_string(profile.n_bins()));
    const auto& m = profile.bin_mapes;
    BathtubReport r;
    r.front_mean = (m[0] + m[1] + m[2]) / 3.0;
    r.mid_mean = (m[3] + m[4] + m[5] + m[6]) / 4.0;
    r.back_mean = (m[7] + m[8] + m[9]) / 3.0;
    r.is_bathtub = r.front_mean > r.mid_mean && r.back_mean > r.mid_mean;
    return r;
}

std::string profile_to_csv(const DecileProfile& profile) {
    std::ostringstream out;
    out << "bin,count,y_low,y_high,mape\n";
    for (std::size_t i = 0; i < profile.n_bins(); ++i) {
        out << (i + 1) << ',' << profile.bin_counts[i] << ',' << format_double(profile.bin_edges[i]) << ','
            << format_double(profile.bin_edges[i + 1]) << ',' << format_double(profile.bin_mapes[i]) << '\n';
    }
    return out.str();
}

}  // namespace dafr
