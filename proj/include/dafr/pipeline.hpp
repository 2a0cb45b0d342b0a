#pragma once

#include "dafr/dataset.hpp"
#include "dafr/fitfn.hpp"
#include "dafr/metrics.hpp"
#include "dafr/simfn.hpp"

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dafr {

/// Quantile boundary pair splitting the target into front/mid/back.
struct SegmentSpec {
    double q_front = 0.3;
    double q_back = 0.7;
    /// Target-value thresholds, resolved from training targets.
    std::optional<double> t_front;
    std::optional<double> t_back;

    bool resolved() const { return t_front.has_value() && t_back.has_value(); }
    void validate() const;
    SegmentSpec resolve(const Vector& y) const;
};

/// FRONT if y <= t_front, BACK if y > t_back, MID otherwise.
std::vector<SegmentLabel> segment_assign(const Vector& y, const SegmentSpec& spec);

struct TrainOptions {
    int k = kDefaultNeighbors;
    SegmentSpec spec;
    /// Defaults to p + 2.
    std::optional<Eigen::Index> min_segment_rows;
    std::size_t n_bins = kDefaultBins;
};

/// Baseline fit, three segment fits, the router that picks between them and
/// the before/after training profiles.
struct DafrModel {
    std::vector<std::string> feature_names;
    std::string target_name;
    SegmentSpec spec;
    Scaler scaler;
    std::shared_ptr<const FittedModel> baseline;
    std::shared_ptr<const FittedModel> front;
    std::shared_ptr<const FittedModel> mid;
    std::shared_ptr<const FittedModel> back;
    std::shared_ptr<const KnnRouter> router;
    DecileProfile train_profile_before;
    DecileProfile train_profile_after;

    const FittedModel& segment_model(SegmentLabel label) const;
    Eigen::Index width() const { return scaler.width(); }
    /// Row count per segment in the training data (router reference labels).
    std::array<std::size_t, kSegmentCount> segment_sizes() const;
};

DafrModel dafr_train(const Dataset& train, const FitFunction& fit, const TrainOptions& options = {});

struct ScoreResult {
    Vector predictions;
    std::vector<SegmentLabel> segments;
    /// Distance to the nearest router reference row; zero for oracle routing.
    std::vector<double> nearest_distances;
};

/// Routes every row with the KNN router, then predicts with that segment's model.
ScoreResult dafr_score(const DafrModel& model, const Matrix& features);

/// Evaluation-only: routes by the true target instead of the router.
ScoreResult dafr_score_oracle(const DafrModel& model, const Matrix& features, const Vector& y_true);

struct MetricSet {
    double mape = 0.0;
    double rmse = 0.0;
    double mad = 0.0;
};

MetricSet compute_metrics(const Vector& y, const Vector& yhat);

struct DiagnoseReport {
    DecileProfile baseline_profile;
    DecileProfile dafr_profile;
    MetricSet baseline;
    MetricSet dafr;
    /// Present only for 10-bin profiles.
    std::optional<BathtubReport> baseline_bathtub;
    std::optional<BathtubReport> dafr_bathtub;
    /// confusion[true segment][routed segment]
    std::array<std::array<std::size_t, kSegmentCount>, kSegmentCount> confusion{};
    std::size_t rows = 0;
};

DiagnoseReport diagnose(const DafrModel& model, const Dataset& eval, std::size_t n_bins = kDefaultBins);

}  // namespace dafr
