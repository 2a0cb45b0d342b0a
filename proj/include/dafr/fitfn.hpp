#pragma once

#include "dafr/dataset.hpp"

#include <memory>
#include <string>

namespace dafr {

/// A trained regressor. Implementations are immutable once built.
class FittedModel {
public:
    virtual ~FittedModel() = default;

    virtual Vector predict(const Matrix& features) const = 0;
    /// Feature dimension the model was trained on.
    virtual Eigen::Index width() const = 0;
};

/// Trainable line function. `train` must be deterministic for identical
/// inputs and configuration.
class FitFunction {
public:
    virtual ~FitFunction() = default;

    virtual std::unique_ptr<FittedModel> train(const Matrix& features, const Vector& target) const = 0;
    virtual std::string name() const = 0;
};

/// y = intercept + x . coefficients
class LinearModel final : public FittedModel {
public:
    LinearModel() = default;
    LinearModel(double intercept, Vector coefficients, double ridge_lambda, Eigen::Index training_rows);

    Vector predict(const Matrix& features) const override;
    Eigen::Index width() const override { return coefficients_.size(); }

    double intercept() const { return intercept_; }
    const Vector& coefficients() const { return coefficients_; }
    double ridge_lambda() const { return ridge_lambda_; }
    Eigen::Index training_rows() const { return training_rows_; }

private:
    double intercept_ = 0.0;
    Vector coefficients_;
    double ridge_lambda_ = 0.0;
    Eigen::Index training_rows_ = 0;
};

/// Relative pivot threshold below which a design column counts as dependent.
inline constexpr double kRankTolerance = 1e-10;

/// Least squares with an unpenalized intercept and optional ridge penalty
/// lambda * |b|^2, solved by column-pivoted Householder QR of the augmented
/// design [1 X; 0 sqrt(lambda) I].
LinearModel ols_fit(const Matrix& features, const Vector& target, double ridge_lambda = 0.0);

inline Vector predict(const LinearModel& model, const Matrix& features) { return model.predict(features); }

class OlsFit final : public FitFunction {
public:
    explicit OlsFit(double ridge_lambda = 0.0);

    std::unique_ptr<FittedModel> train(const Matrix& features, const Vector& target) const override;
    std::string name() const override { return "ols"; }
    double ridge_lambda() const { return ridge_lambda_; }

private:
    double ridge_lambda_;
};

/// Downcast helper; throws if `model` is not a LinearModel.
const LinearModel& as_linear(const FittedModel& model);

}  // namespace dafr
