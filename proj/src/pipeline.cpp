#include "dafr/pipeline.hpp"

#include "dafr/error.hpp"

#include <spdlog/spdlog.h>

#include <string>

namespace dafr {
namespace {

std::string segment_name_upper(SegmentLabel label) {
    std::string s(to_string(label));
    for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    return s;
}

std::vector<Eigen::Index> rows_with(const std::vector<SegmentLabel>& labels, SegmentLabel label) {
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] == label) rows.push_back(static_cast<Eigen::Index>(i));
    return rows;
}

std::shared_ptr<const FittedModel> fit_segment(const FitFunction& fit, const Dataset& part, SegmentLabel label) {
    try {
        return fit.train(part.features, part.target);
    } catch (const PipelineError& e) {
        throw PipelineError(e.code(), std::string(to_string(label)) + " segment: " + e.what());
    }
}

// Predicts each row with the model of its segment.
Vector predict_by_segment(const DafrModel& model, const Matrix& features, const std::vector<SegmentLabel>& labels) {
    Vector out(features.rows());
    for (auto label : {SegmentLabel::Front, SegmentLabel::Mid, SegmentLabel::Back}) {
        const auto rows = rows_with(labels, label);
        if (rows.empty()) continue;
        Matrix part(static_cast<Eigen::Index>(rows.size()), features.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) part.row(static_cast<Eigen::Index>(i)) = features.row(rows[i]);
        const Vector pred = model.segment_model(label).predict(part);
        for (std::size_t i = 0; i < rows.size(); ++i) out(rows[i]) = pred(static_cast<Eigen::Index>(i));
    }
    return out;
}

void check_width(const DafrModel& model, const Matrix& features) {
    if (features.cols() != model.width())
        throw PipelineError("width_mismatch", "model expects " + std::to_string(model.width()) + " features, got " +
                                                  std::to_string(features.cols()));
    if (!features.allFinite()) throw PipelineError("non_finite_value", "features contain non-finite values");
}

}  // namespace

void SegmentSpec::validate() const {
    if (!(q_front > 0.0 && q_front < 1.0 && q_back > 0.0 && q_back < 1.0 && q_front < q_back))
        throw PipelineError("bad_segment_spec", "segment quantiles need 0 < q_front < q_back < 1");
}

SegmentSpec SegmentSpec::resolve(const Vector& y) const {
    validate();
    SegmentSpec out = *this;
    out.t_front = quantile(y, q_front);
    out.t_back = quantile(y, q_back);
    return out;
}

std::vector<SegmentLabel> segment_assign(const Vector& y, const SegmentSpec& spec) {
    if (!spec.resolved()) throw PipelineError("unresolved_spec", "segment thresholds have not been resolved");
    std::vector<SegmentLabel> labels(static_cast<std::size_t>(y.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        auto& label = labels[static_cast<std::size_t>(i)];
        if (y(i) <= *spec.t_front)
            label = SegmentLabel::Front;
        else if (y(i) > *spec.t_back)
            label = SegmentLabel::Back;
        else
            label = SegmentLabel::Mid;
    }
    return labels;
}

const FittedModel& DafrModel::segment_model(SegmentLabel label) const {
    switch (label) {
        case SegmentLabel::Front: return *front;
        case SegmentLabel::Mid: return *mid;
        case SegmentLabel::Back: return *back;
    }
    throw PipelineError("bad_label", "unknown segment label");
}

std::array<std::size_t, kSegmentCount> DafrModel::segment_sizes() const {
    std::array<std::size_t, kSegmentCount> sizes{};
    for (auto label : router->labels()) ++sizes[static_cast<std::size_t>(label)];
    return sizes;
}

DafrModel dafr_train(const Dataset& train, const FitFunction& fit, const TrainOptions& options) {
    train.validate();
    options.spec.validate();
    const auto p = train.cols();
    const Eigen::Index min_rows = options.min_segment_rows.value_or(p + 2);

    DafrModel model;
    model.feature_names = train.feature_names;
    model.target_name = train.target_name;

    // Baseline fit, baseline scores, decile MAPE profile.
    model.baseline = fit.train(train.features, train.target);
    const Vector baseline_pred = model.baseline->predict(train.features);
    model.train_profile_before = decile_mape_profile(train.target, baseline_pred, options.n_bins);

    // Split by target quantile thresholds.
    model.spec = options.spec.resolve(train.target);
    const auto labels = segment_assign(train.target, model.spec);
    const bool degenerate = (train.target.array() == train.target(0)).all();

    std::array<std::vector<Eigen::Index>, kSegmentCount> rows;
    for (auto label : {SegmentLabel::Front, SegmentLabel::Mid, SegmentLabel::Back})
        rows[static_cast<std::size_t>(label)] = rows_with(labels, label);

    auto size_of = [&](SegmentLabel l) { return static_cast<Eigen::Index>(rows[static_cast<std::size_t>(l)].size()); };
    if (degenerate) {
        spdlog::warn("all training targets equal {}; every row is FRONT and mid/back reuse the front model",
                     train.target(0));
    }
    std::string undersized;
    for (auto label : {SegmentLabel::Front, SegmentLabel::Mid, SegmentLabel::Back}) {
        if (degenerate && label != SegmentLabel::Front) continue;
        if (size_of(label) >= min_rows) continue;
        if (!undersized.empty()) undersized += ", ";
        undersized += segment_name_upper(label) + " has " + std::to_string(size_of(label)) + " rows";
    }
    if (!undersized.empty()) {
        throw PipelineError("segment_too_small",
                            "segment too small: " + undersized + ", need at least " + std::to_string(min_rows) +
                                " (front=" + std::to_string(size_of(SegmentLabel::Front)) +
                                ", mid=" + std::to_string(size_of(SegmentLabel::Mid)) +
                                ", back=" + std::to_string(size_of(SegmentLabel::Back)) +
                                "); adjust --q-front/--q-back");
    }

    // Per-segment fits.
    model.front = fit_segment(fit, train.subset(rows[0]), SegmentLabel::Front);
    if (degenerate) {
        model.mid = model.front;
        model.back = model.front;
    } else {
        model.mid = fit_segment(fit, train.subset(rows[1]), SegmentLabel::Mid);
        model.back = fit_segment(fit, train.subset(rows[2]), SegmentLabel::Back);
    }

    // Per-segment scores on their own rows, recombined profile.
    const Vector segment_pred = predict_by_segment(model, train.features, labels);
    model.train_profile_after = decile_mape_profile(train.target, segment_pred, options.n_bins);

    // Similarity router on standardized features.
    model.scaler = Scaler::fit(train.features);
    model.router = std::make_shared<const KnnRouter>(KnnRouter::fit(train.features, labels, options.k, model.scaler));

    spdlog::debug("trained segments front={} mid={} back={}", size_of(SegmentLabel::Front),
                  size_of(SegmentLabel::Mid), size_of(SegmentLabel::Back));
    return model;
}

ScoreResult dafr_score(const DafrModel& model, const Matrix& features) {
    check_width(model, features);
    ScoreResult result;
    result.segments.resize(static_cast<std::size_t>(features.rows()));
    result.nearest_distances.resize(static_cast<std::size_t>(features.rows()));
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        const auto routed = model.router->route(features.row(i));
        result.segments[static_cast<std::size_t>(i)] = routed.label;
        result.nearest_distances[static_cast<std::size_t>(i)] = routed.nearest_distance;
    }
    result.predictions = predict_by_segment(model, features, result.segments);
    return result;
}

ScoreResult dafr_score_oracle(const DafrModel& model, const Matrix& features, const Vector& y_true) {
    check_width(model, features);
    if (y_true.size() != features.rows())
        throw PipelineError("length_mismatch", "true target length differs from feature rows");
    ScoreResult result;
    result.segments = segment_assign(y_true, model.spec);
    result.nearest_distances.assign(result.segments.size(), 0.0);
    result.predictions = predict_by_segment(model, features, result.segments);
    return result;
}

MetricSet compute_metrics(const Vector& y, const Vector& yhat) {
    return {mape(y, yhat), rmse(y, yhat), mad(y, yhat)};
}

DiagnoseReport diagnose(const DafrModel& model, const Dataset& eval, std::size_t n_bins) {
    eval.validate();
    check_width(model, eval.features);
    const Vector baseline_pred = model.baseline->predict(eval.features);
    const auto scored = dafr_score(model, eval.features);

    DiagnoseReport report;
    report.rows = static_cast<std::size_t>(eval.rows());
    report.baseline_profile = decile_mape_profile(eval.target, baseline_pred, n_bins);
    report.dafr_profile = decile_mape_profile(eval.target, scored.predictions, n_bins);
    report.baseline = compute_metrics(eval.target, baseline_pred);
    report.dafr = compute_metrics(eval.target, scored.predictions);
    if (n_bins == 10) {
        report.baseline_bathtub = bathtub_report(report.baseline_profile);
        report.dafr_bathtub = bathtub_report(report.dafr_profile);
    }
    const auto truth = segment_assign(eval.target, model.spec);
    for (std::size_t i = 0; i < truth.size(); ++i)
        ++report.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(scored.segments[i])];
    return report;
}

}  // namespace dafr
