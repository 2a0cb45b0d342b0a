#include "dafr/fitfn.hpp"

#include "dafr/error.hpp"

#include <cmath>

namespace dafr {

LinearModel::LinearModel(double intercept, Vector coefficients, double ridge_lambda, Eigen::Index training_rows)
    : intercept_(intercept),
      coefficients_(std::move(coefficients)),
      ridge_lambda_(ridge_lambda),
      training_rows_(training_rows) {}

Vector LinearModel::predict(const Matrix& features) const {
    if (features.cols() != width())
        throw PipelineError("width_mismatch", "model expects " + std::to_string(width()) + " features, got " +
                                                  std::to_string(features.cols()));
    // Explicit per-row accumulation keeps each prediction independent of how
    // rows are batched.
    Vector out(features.rows());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
        double acc = intercept_;
        for (Eigen::Index j = 0; j < width(); ++j) acc += features(i, j) * coefficients_(j);
        out(i) = acc;
    }
    return out;
}

LinearModel ols_fit(const Matrix& features, const Vector& target, double ridge_lambda) {
    const auto n = features.rows();
    const auto p = features.cols();
    if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda))
        throw PipelineError("bad_ridge", "ridge lambda must be finite and >= 0");
    if (target.size() != n)
        throw PipelineError("length_mismatch", "feature rows and target length differ");
    if (n <= p)
        throw PipelineError("too_few_rows", "least squares needs more rows than features (n=" + std::to_string(n) +
                                                ", p=" + std::to_string(p) + ")");
    if (!features.allFinite() || !target.allFinite())
        throw PipelineError("non_finite_value", "least squares input contains non-finite values");

    const bool ridge = ridge_lambda > 0.0;
    const Eigen::Index m = ridge ? n + p : n;
    Matrix design = Matrix::Zero(m, p + 1);
    design.topLeftCorner(n, 1).setOnes();
    design.topRightCorner(n, p) = features;
    Vector rhs = Vector::Zero(m);
    rhs.head(n) = target;
    if (ridge) design.bottomRightCorner(p, p).diagonal().setConstant(std::sqrt(ridge_lambda));

    Eigen::ColPivHouseholderQR<Matrix> qr(design);
    qr.setThreshold(kRankTolerance);
    if (qr.rank() < p + 1) {
        const auto dependent = qr.colsPermutation().indices()(qr.rank());
        const std::string which =
            dependent == 0 ? std::string("the intercept column") : "feature column " + std::to_string(dependent - 1);
        throw PipelineError("rank_deficient", "design matrix is rank deficient: " + which +
                                                  " is linearly dependent on the others; "
                                                  "remove it or fit with a ridge penalty (--ridge > 0)");
    }
    const Vector beta = qr.solve(rhs);
    return LinearModel(beta(0), beta.tail(p), ridge_lambda, n);
}

OlsFit::OlsFit(double ridge_lambda) : ridge_lambda_(ridge_lambda) {
    if (!(ridge_lambda >= 0.0)) throw PipelineError("bad_ridge", "ridge lambda must be >= 0");
}

std::unique_ptr<FittedModel> OlsFit::train(const Matrix& features, const Vector& target) const {
    return std::make_unique<LinearModel>(ols_fit(features, target, ridge_lambda_));
}

const LinearModel& as_linear(const FittedModel& model) {
    if (auto* linear = dynamic_cast<const LinearModel*>(&model)) return *linear;
    throw PipelineError("not_linear", "model is not a LinearModel");
}

}  // namespace dafr
