#include "dafr/synth.hpp"

#include "dafr/error.hpp"
#include "dafr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace dafr {
namespace {

LinePiece make_piece(double intercept, double lead, double rest, Eigen::Index p) {
    LinePiece piece;
    piece.intercept = intercept;
    piece.coefficients = Vector::Constant(p, rest);
    piece.coefficients(0) = lead;
    return piece;
}

double eval_piece(const LinePiece& piece, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    double acc = piece.intercept;
    for (Eigen::Index j = 0; j < x.size(); ++j) acc += x(j) * piece.coefficients(j);
    return acc;
}

double sample_stddev(const Vector& v) {
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size() - 1));
}

// Rows whose target rank falls in the given decile bins.
std::vector<Eigen::Index> rows_in_deciles(const Vector& y, std::size_t first_bin, std::size_t last_bin) {
    const auto n = static_cast<std::size_t>(y.size());
    std::vector<Eigen::Index> order(n);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return y(a) < y(b); });
    std::vector<Eigen::Index> rows;
    for (auto bin = first_bin; bin <= last_bin; ++bin) {
        const auto [lo, hi] = bin_rank_range(n, kDefaultBins, bin);
        rows.insert(rows.end(), order.begin() + static_cast<std::ptrdiff_t>(lo),
                    order.begin() + static_cast<std::ptrdiff_t>(hi));
    }
    std::sort(rows.begin(), rows.end());
    return rows;
}

std::vector<Eigen::Index> pick_rows(std::vector<Eigen::Index> pool, std::size_t count, std::mt19937_64& rng,
                                    const char* what) {
    if (count > pool.size())
        throw PipelineError("bad_fraction", std::string(what) + ": requested " + std::to_string(count) +
                                                " rows but only " + std::to_string(pool.size()) + " are eligible");
    std::shuffle(pool.begin(), pool.end(), rng);
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

void check_injectable(const Dataset& ds) {
    ds.validate();
    if (ds.rows() < static_cast<Eigen::Index>(kDefaultBins) || (ds.target.array() == ds.target(0)).all())
        throw PipelineError("degenerate_target", "injection needs at least 10 rows and a non-constant target");
}

}  // namespace

std::string_view to_string(GeneratorKind kind) {
    switch (kind) {
        case GeneratorKind::SingleLine: return "single_line";
        case GeneratorKind::PiecewiseThree: return "piecewise_three";
        case GeneratorKind::HeteroTails: return "hetero_tails";
    }
    return "unknown";
}

GeneratorKind parse_generator_kind(std::string_view text) {
    if (text == "single_line") return GeneratorKind::SingleLine;
    if (text == "piecewise_three") return GeneratorKind::PiecewiseThree;
    if (text == "hetero_tails") return GeneratorKind::HeteroTails;
    throw DataError("bad_generator", "unknown generator '" + std::string(text) +
                                         "' (expected single_line, piecewise_three or hetero_tails)");
}

SynthConfig SynthConfig::defaults(GeneratorKind kind, Eigen::Index p) {
    SynthConfig config;
    config.kind = kind;
    config.p = p;
    if (p < 1) return config;  // rejected by validate()
    switch (kind) {
        case GeneratorKind::SingleLine:
        case GeneratorKind::HeteroTails:
            config.pieces = {make_piece(20.0, 10.0, 5.0, p)};
            break;
        case GeneratorKind::PiecewiseThree:
            config.pieces = {make_piece(5.0, 20.0, 2.0, p), make_piece(0.0, 50.0, -2.0, p),
                             make_piece(-50.0, 120.0, 4.0, p)};
            break;
    }
    return config;
}

void SynthConfig::validate() const {
    if (n < 2) throw DataError("bad_config", "synthetic n must be at least 2");
    if (p < 1) throw DataError("bad_config", "synthetic p must be at least 1");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
        throw DataError("bad_config", "noise sigma must be finite and >= 0");
    const std::size_t want = kind == GeneratorKind::PiecewiseThree ? 3 : 1;
    if (pieces.size() != want)
        throw DataError("bad_config", std::string(to_string(kind)) + " needs " + std::to_string(want) + " line pieces");
    for (const auto& piece : pieces)
        if (piece.coefficients.size() != p) throw DataError("bad_config", "line piece width differs from p");
    if (kind == GeneratorKind::PiecewiseThree &&
        !(breakpoints[0] > 0.0 && breakpoints[0] < breakpoints[1] && breakpoints[1] < 1.0))
        throw DataError("bad_config", "breakpoints need 0 < b1 < b2 < 1");
    if (kind == GeneratorKind::HeteroTails &&
        (!(tail_noise_factor > 0.0) || !(tail_fraction > 0.0 && tail_fraction < 0.5)))
        throw DataError("bad_config", "hetero_tails needs factor > 0 and tail fraction in (0, 0.5)");
}

Dataset generate(const SynthConfig& config) {
    config.validate();
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Dataset ds;
    ds.target_name = "y";
    for (Eigen::Index j = 0; j < config.p; ++j) ds.feature_names.push_back("x" + std::to_string(j + 1));
    ds.features.resize(config.n, config.p);
    for (Eigen::Index i = 0; i < config.n; ++i)
        for (Eigen::Index j = 0; j < config.p; ++j) ds.features(i, j) = unit(rng);

    Vector clean(config.n);
    for (Eigen::Index i = 0; i < config.n; ++i) {
        std::size_t piece = 0;
        if (config.kind == GeneratorKind::PiecewiseThree) {
            const double x0 = ds.features(i, 0);
            piece = x0 < config.breakpoints[0] ? 0 : (x0 < config.breakpoints[1] ? 1 : 2);
        }
        clean(i) = eval_piece(config.pieces[piece], ds.features.row(i));
    }

    Vector scale = Vector::Constant(config.n, config.noise_sigma);
    if (config.kind == GeneratorKind::HeteroTails) {
        const double lo = quantile(clean, config.tail_fraction);
        const double hi = quantile(clean, 1.0 - config.tail_fraction);
        for (Eigen::Index i = 0; i < config.n; ++i)
            if (clean(i) <= lo || clean(i) >= hi) scale(i) *= config.tail_noise_factor;
    }

    ds.target.resize(config.n);
    for (Eigen::Index i = 0; i < config.n; ++i) {
        const double eps = normal(rng);
        ds.target(i) = clean(i) + scale(i) * eps;
    }
    const double shift = std::max(0.0, 1.0 - ds.target.minCoeff());
    if (shift > 0.0) ds.target.array() += shift;
    return ds;
}

Dataset inject_tail_outliers(const Dataset& ds, double fraction, double magnitude, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 0.2))
        throw PipelineError("bad_fraction", "tail outlier fraction must lie in (0, 0.2]");
    if (!(magnitude > 0.0) || !std::isfinite(magnitude))
        throw PipelineError("bad_magnitude", "tail outlier magnitude must be finite and > 0");
    check_injectable(ds);
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.rows())));
    Dataset out = ds;
    if (count == 0) return out;

    std::mt19937_64 rng(seed);
    auto pool = rows_in_deciles(ds.target, 0, 0);
    const auto top = rows_in_deciles(ds.target, kDefaultBins - 1, kDefaultBins - 1);
    pool.insert(pool.end(), top.begin(), top.end());
    std::sort(pool.begin(), pool.end());
    const auto chosen = pick_rows(std::move(pool), count, rng, "tail injection");

    const double shift = magnitude * sample_stddev(ds.target);
    const double median = quantile(ds.target, 0.5);
    for (auto r : chosen) out.target(r) += ds.target(r) < median ? -shift : shift;
    return out;
}

Dataset inject_mid_noise(const Dataset& ds, double fraction, double sigma, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 0.5))
        throw PipelineError("bad_fraction", "mid noise fraction must lie in (0, 0.5]");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw PipelineError("bad_sigma", "mid noise sigma must be finite and > 0");
    check_injectable(ds);
    const auto count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(ds.rows())));
    Dataset out = ds;
    if (count == 0) return out;

    std::mt19937_64 rng(seed);
    const auto chosen = pick_rows(rows_in_deciles(ds.target, 3, 6), count, rng, "mid noise injection");
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = sigma * sample_stddev(ds.target);
    for (auto r : chosen) out.target(r) += scale * normal(rng);
    return out;
}

}  // namespace dafr
