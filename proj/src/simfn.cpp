#include "dafr/simfn.hpp"

#include "dafr/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace dafr {

std::string_view to_string(SegmentLabel label) {
    switch (label) {
        case SegmentLabel::Front: return "front";
        case SegmentLabel::Mid: return "mid";
        case SegmentLabel::Back: return "back";
    }
    return "unknown";
}

SegmentLabel parse_segment_label(std::string_view text) {
    if (text == "front") return SegmentLabel::Front;
    if (text == "mid") return SegmentLabel::Mid;
    if (text == "back") return SegmentLabel::Back;
    throw PipelineError("bad_label", "unknown segment label '" + std::string(text) + "'");
}

KnnRouter::KnnRouter(RowMatrix reference_points, std::vector<SegmentLabel> labels, int k, Scaler scaler)
    : reference_points_(std::move(reference_points)), labels_(std::move(labels)), k_(k), scaler_(std::move(scaler)) {
    const auto n = reference_points_.rows();
    if (static_cast<Eigen::Index>(labels_.size()) != n)
        throw PipelineError("length_mismatch", "router has " + std::to_string(n) + " reference rows but " +
                                                   std::to_string(labels_.size()) + " labels");
    if (k_ < 1) throw PipelineError("bad_k", "k must be at least 1");
    if (k_ > n)
        throw PipelineError("bad_k", "k=" + std::to_string(k_) + " exceeds the " + std::to_string(n) +
                                         " reference rows");
    if (reference_points_.cols() != scaler_.width())
        throw PipelineError("width_mismatch", "router reference width differs from scaler width");
}

KnnRouter KnnRouter::fit(const Matrix& features, std::vector<SegmentLabel> labels, int k, Scaler scaler) {
    if (features.cols() != scaler.width())
        throw PipelineError("width_mismatch", "scaler was fitted on a different feature width");
    RowMatrix standardized = scaler.apply(features);
    return KnnRouter(std::move(standardized), std::move(labels), k, std::move(scaler));
}

RouteResult KnnRouter::route(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    if (x.size() != width())
        throw PipelineError("width_mismatch", "router expects " + std::to_string(width()) + " features, got " +
                                                  std::to_string(x.size()));
    if (!x.allFinite()) throw PipelineError("non_finite_value", "query contains non-finite values");
    const Vector q = scaler_.apply_row(x);

    const auto n = reference_points_.rows();
    const auto p = reference_points_.cols();
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const double* r = reference_points_.row(i).data();
        double d2 = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double diff = r[j] - q(j);
            d2 += diff * diff;
        }
        dist[static_cast<std::size_t>(i)] = {d2, i};
    }
    const auto kk = static_cast<std::size_t>(k_);
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk), dist.end());

    std::array<int, kSegmentCount> votes{};
    for (std::size_t i = 0; i < kk; ++i) ++votes[static_cast<std::size_t>(labels_[static_cast<std::size_t>(dist[i].second)])];
    const int best = *std::max_element(votes.begin(), votes.end());

    RouteResult result;
    result.nearest_distance = std::sqrt(dist.front().first);
    // Nearest neighbour whose label is among the vote leaders; the neighbour
    // order is total, so this always resolves.
    for (std::size_t i = 0; i < kk; ++i) {
        const auto label = labels_[static_cast<std::size_t>(dist[i].second)];
        if (votes[static_cast<std::size_t>(label)] == best) {
            result.label = label;
            break;
        }
    }
    return result;
}

}  // namespace dafr
