#pragma once

#include "dafr/dataset.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace dafr {

/// Ordered FRONT < MID < BACK; the order doubles as the last-resort tie-break.
enum class SegmentLabel : std::uint8_t { Front = 0, Mid = 1, Back = 2 };

inline constexpr std::size_t kSegmentCount = 3;

std::string_view to_string(SegmentLabel label);
/// Accepts "front", "mid", "back".
SegmentLabel parse_segment_label(std::string_view text);

struct RouteResult {
    SegmentLabel label = SegmentLabel::Front;
    /// Euclidean distance (standardized space) to the nearest reference row.
    double nearest_distance = 0.0;
};

/// Routes a raw feature vector to a segment.
class SimilarityFunction {
public:
    virtual ~SimilarityFunction() = default;

    virtual RouteResult route(const Eigen::Ref<const Eigen::RowVectorXd>& x) const = 0;
    virtual Eigen::Index width() const = 0;
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr int kDefaultNeighbors = 5;

/// Exhaustive k-nearest-neighbour majority vote over standardized features.
///
/// Neighbours are ordered by (squared distance, reference row index). The
/// label with the most votes wins; among labels tied on votes the one held by
/// the nearest neighbour wins.
class KnnRouter final : public SimilarityFunction {
public:
    /// `reference_points` must already be standardized with `scaler`.
    KnnRouter(RowMatrix reference_points, std::vector<SegmentLabel> labels, int k, Scaler scaler);

    /// Standardizes `features` with `scaler` and stores them.
    static KnnRouter fit(const Matrix& features, std::vector<SegmentLabel> labels, int k, Scaler scaler);

    RouteResult route(const Eigen::Ref<const Eigen::RowVectorXd>& x) const override;
    Eigen::Index width() const override { return scaler_.width(); }

    int k() const { return k_; }
    const RowMatrix& reference_points() const { return reference_points_; }
    const std::vector<SegmentLabel>& labels() const { return labels_; }
    const Scaler& scaler() const { return scaler_; }

private:
    RowMatrix reference_points_;
    std::vector<SegmentLabel> labels_;
    int k_;
    Scaler scaler_;
};

inline KnnRouter knn_fit(const Matrix& features, std::vector<SegmentLabel> labels, int k, Scaler scaler) {
    return KnnRouter::fit(features, std::move(labels), k, std::move(scaler));
}

}  // namespace dafr
