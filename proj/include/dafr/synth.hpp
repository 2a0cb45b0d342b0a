#pragma once

#include "dafr/dataset.hpp"

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace dafr {

enum class GeneratorKind { SingleLine, PiecewiseThree, HeteroTails };

std::string_view to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view text);

struct LinePiece {
    double intercept = 0.0;
    Vector coefficients;
};

/// Synthetic regression problem. Features are iid U(0,1).
///
/// - single_line: y = pieces[0] + N(0, sigma^2)
/// - piecewise_three: pieces[r] applies where feature 0 falls in region r,
///   split at `breakpoints`; the default pieces put low x0 at low y.
/// - hetero_tails: single line whose noise is multiplied by
///   `tail_noise_factor` for rows whose noiseless y is in the lowest or
///   highest `tail_fraction` of rows.
///
/// After generation every target is shifted by max(0, 1 - min(y)) so that
/// MAPE stays defined.
struct SynthConfig {
    GeneratorKind kind = GeneratorKind::SingleLine;
    Eigen::Index n = 2000;
    Eigen::Index p = 3;
    double noise_sigma = 1.0;
    std::uint64_t seed = 1;
    std::vector<LinePiece> pieces;
    std::array<double, 2> breakpoints{0.3, 0.7};
    double tail_noise_factor = 5.0;
    double tail_fraction = 0.2;

    /// Default pieces for `kind` and `p`.
    static SynthConfig defaults(GeneratorKind kind, Eigen::Index p = 3);
    void validate() const;
};

Dataset generate(const SynthConfig& config);

inline constexpr double kDefaultTailFraction = 0.05;
inline constexpr double kDefaultTailMagnitude = 4.0;
inline constexpr double kDefaultMidSigma = 1.0;

/// Pushes round(fraction * n) targets drawn from the bottom and top target
/// deciles away from the median by magnitude * stddev(y).
Dataset inject_tail_outliers(const Dataset& ds, double fraction, double magnitude, std::uint64_t seed);

/// Adds N(0, (sigma * stddev(y))^2) to round(fraction * n) targets drawn from
/// target deciles 4-7.
Dataset inject_mid_noise(const Dataset& ds, double fraction, double sigma, std::uint64_t seed);

}  // namespace dafr
