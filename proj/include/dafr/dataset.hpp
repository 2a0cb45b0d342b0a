#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dafr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tabular numeric training corpus: n rows of p features plus one target.
struct Dataset {
    Matrix features;
    Vector target;
    std::vector<std::string> feature_names;
    std::string target_name;

    Eigen::Index rows() const { return features.rows(); }
    Eigen::Index cols() const { return features.cols(); }

    /// Throws DataError if the shape or finiteness invariants do not hold.
    void validate() const;

    /// Copy of the given rows, in the given order.
    Dataset subset(const std::vector<Eigen::Index>& row_indices) const;
};

/// Reads a header-first CSV. When `feature_columns` is empty every non-target
/// column whose first data cell is an unquoted number becomes a feature.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column,
                 const std::vector<std::string>& feature_columns = {});

/// Reads only the named columns, in the given order; other columns may hold
/// anything.
Matrix load_feature_matrix(const std::filesystem::path& path, const std::vector<std::string>& feature_columns);

/// Writes features then target, with shortest round-trip float formatting.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Shortest decimal string that parses back to exactly `value`.
std::string format_double(double value);

struct Split {
    Dataset train;
    Dataset test;
};

inline constexpr Eigen::Index kMinTrainRows = 30;

/// Seeded shuffle (std::mt19937_64 + std::shuffle) followed by a cut. The test
/// part has round(n * test_fraction) rows; both parts keep the shuffled order.
Split train_test_split(const Dataset& ds, double test_fraction, std::uint64_t seed);

/// Column standardizer with sample (n-1) standard deviation.
class Scaler {
public:
    Scaler() = default;
    Scaler(Vector means, Vector stddevs, std::vector<bool> constant);

    static Scaler fit(const Matrix& features);

    Matrix apply(const Matrix& features) const;
    Vector apply_row(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    Matrix invert(const Matrix& scaled) const;

    Eigen::Index width() const { return means_.size(); }
    const Vector& means() const { return means_; }
    const Vector& stddevs() const { return stddevs_; }
    const std::vector<bool>& constant() const { return constant_; }

private:
    Vector means_;
    Vector stddevs_;
    // Constant columns map to zero and invert to their (exact) value.
    std::vector<bool> constant_;
};

inline Scaler fit_scaler(const Dataset& ds) { return Scaler::fit(ds.features); }
inline Matrix apply_scaler(const Scaler& s, const Matrix& features) { return s.apply(features); }

}  // namespace dafr
