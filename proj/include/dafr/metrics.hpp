#pragma once

#include "dafr/dataset.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace dafr {

/// 100 * mean(|y - yhat| / |y|). Throws on length mismatch or any zero target.
double mape(const Vector& y, const Vector& yhat);
double rmse(const Vector& y, const Vector& yhat);
/// Mean absolute deviation of the residuals.
double mad(const Vector& y, const Vector& yhat);

/// Linear-interpolation quantile at position (n-1)*q of the sorted values.
double quantile(const Vector& values, double q);

/// MAPE per equal-count bin of rows ranked by actual target.
struct DecileProfile {
    std::vector<double> bin_mapes;
    std::vector<std::size_t> bin_counts;
    /// n_bins + 1 entries: min(y), then the max actual y of each bin.
    std::vector<double> bin_edges;

    std::size_t n_bins() const { return bin_mapes.size(); }
    std::size_t total_count() const;
    /// Count-weighted mean of the bin MAPEs; equals the overall MAPE.
    double weighted_mape() const;
};

inline constexpr std::size_t kDefaultBins = 10;

/// Rows are stable-sorted by ascending y (ties keep input order); bin i takes
/// sorted ranks [floor(i*n/b), floor((i+1)*n/b)).
DecileProfile decile_mape_profile(const Vector& y, const Vector& yhat, std::size_t n_bins = kDefaultBins);

/// Bin ranks [lo, hi) for bin `i` of `n_bins` over `n` rows.
std::pair<std::size_t, std::size_t> bin_rank_range(std::size_t n, std::size_t n_bins, std::size_t i);

struct BathtubReport {
    double front_mean = 0.0;  // bins 1-3
    double mid_mean = 0.0;    // bins 4-7
    double back_mean = 0.0;   // bins 8-10
    bool is_bathtub = false;
};

/// Requires a 10-bin profile.
BathtubReport bathtub_report(const DecileProfile& profile);

/// CSV with columns bin,count,y_low,y_high,mape (bins 1-based).
std::string profile_to_csv(const DecileProfile& profile);

}  // namespace dafr
