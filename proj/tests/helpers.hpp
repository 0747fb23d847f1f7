#pragma once

// Shared fixtures and small statistical utilities for the test binaries.

#include "cpca/model.hpp"
#include "cpca/reweight.hpp"
#include "cpca/rng.hpp"
#include "cpca/sampler.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

// System 1 of the two-chain experiment: a 4-DOF quartic chain with a wide
// first well, weak nearest-neighbour coupling, and beta range [0.2, 1.0].
inline cpca::model::SystemSpec sys1_spec() {
    cpca::model::SystemSpec spec;
    spec.n = 4;
    spec.potential = cpca::model::QuarticChainParams{
        {6.0, 1.0, 0.4, 0.4}, {0.0, 12.0, 19.0, 21.0}, 1e-5, 10.0};
    spec.beta_target = 1.0;
    spec.beta_lo = 0.2;
    spec.beta_hi = 1.0;
    spec.projection = {1, 2, 3};
    spec.label = "sys1";
    return spec;
}

// System 2: same chain but the wide well moved to the second coordinate.
inline cpca::model::SystemSpec sys2_spec() {
    cpca::model::SystemSpec spec = sys1_spec();
    std::get<cpca::model::QuarticChainParams>(spec.potential).b = {1.0, 4.0, 0.4,
                                                                   0.4};
    spec.label = "sys2";
    return spec;
}

inline cpca::model::SystemSpec harmonic_spec(std::vector<double> omega,
                                             double beta_lo, double beta_hi,
                                             const std::string& label = "gauss") {
    cpca::model::SystemSpec spec;
    spec.n = omega.size();
    spec.projection.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) spec.projection[i] = i + 1;
    spec.potential = cpca::model::HarmonicParams{std::move(omega)};
    spec.beta_target = 1.0;
    spec.beta_lo = beta_lo;
    spec.beta_hi = beta_hi;
    spec.label = label;
    return spec;
}

inline std::vector<double> random_vector(cpca::SplitMix64& rng, std::size_t n,
                                         double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (auto& e : v) e = lo + (hi - lo) * rng.uniform01();
    return v;
}

// Uniform-weight sequence over the given column data.
inline cpca::reweight::WeightedSequence uniform_sequence(
    std::vector<std::vector<double>> cols, const std::string& label) {
    cpca::reweight::WeightedSequence ws;
    ws.label = label;
    ws.n_steps = cols.at(0).size();
    ws.weights.assign(ws.n_steps, 1.0 / static_cast<double>(ws.n_steps));
    ws.cols = std::move(cols);
    return ws;
}

struct BlockEstimate {
    double value = 0.0;
    double se = 0.0;
};

// Batch-means estimate of a self-normalized weighted mean: the chain is cut
// into n_blocks consecutive blocks, each block yields its own weighted mean,
// and the spread of the block means gives the standard error. Blocks much
// longer than the chain's mixing time make this robust to autocorrelation.
inline BlockEstimate weighted_block_mean(std::span<const double> values,
                                         std::span<const double> weights,
                                         std::size_t n_blocks = 100) {
    const std::size_t n = values.size();
    if (n != weights.size() || n_blocks < 2 || n < 2 * n_blocks) {
        throw std::invalid_argument("weighted_block_mean: bad shapes");
    }
    const std::size_t len = n / n_blocks;
    std::vector<double> block(n_blocks);
    for (std::size_t k = 0; k < n_blocks; ++k) {
        double num = 0.0, den = 0.0;
        for (std::size_t i = k * len; i < (k + 1) * len; ++i) {
            num += weights[i] * values[i];
            den += weights[i];
        }
        block[k] = den > 0.0 ? num / den : 0.0;
    }
    double mean = 0.0;
    for (double b : block) mean += b;
    mean /= static_cast<double>(n_blocks);
    double var = 0.0;
    for (double b : block) var += (b - mean) * (b - mean);
    var /= static_cast<double>(n_blocks - 1);
    return {mean, std::sqrt(var / static_cast<double>(n_blocks))};
}

// Same scheme for a weighted second moment about a fixed center pair:
// estimates E[(x - cx)(y - cy)] with per-block self-normalization.
inline BlockEstimate weighted_block_cov(std::span<const double> x,
                                        std::span<const double> y,
                                        std::span<const double> weights,
                                        double cx, double cy,
                                        std::size_t n_blocks = 100) {
    std::vector<double> prod(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        prod[i] = (x[i] - cx) * (y[i] - cy);
    }
    return weighted_block_mean(prod, weights, n_blocks);
}

inline std::vector<double> ones(std::size_t n) {
    return std::vector<double>(n, 1.0);
}

} // namespace testutil
