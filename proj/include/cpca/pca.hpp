#pragma once

#include "cpca/reweight.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cpca::pca {

struct ComposedStats {
    std::vector<double> mean;       // z^W, length m
    std::vector<double> covariance; // T^W, row-major m x m
    std::uint64_t n_total = 0;
    std::vector<double> per_system_fractions;
    std::size_t m = 0;
};

struct EigenResult {
    std::vector<double> values;  // descending
    std::vector<double> vectors; // row-major, row k = u_k
    std::size_t m = 0;
};

struct CommonAxes {
    std::vector<double> eigenvalues;  // l, descending
    std::vector<double> eigenvectors; // row-major l x m, row k = u_k
    std::vector<double> mean;         // m
    std::size_t l = 0;
    std::size_t m = 0;
    std::span<const double> axis(std::size_t k) const {
        return {eigenvectors.data() + k * m, m};
    }
};

// z^W_i = sum_s fraction_s sum_nu w_nu z_i; default fractions are
// N_step^(s)/N_Tot. Explicit fractions must be positive and sum to 1.
std::vector<double> composed_mean(
    std::span<const reweight::WeightedSequence> sequences,
    const std::optional<std::vector<double>>& fractions = {});

// T^W_ij = sum_s fraction_s sum_nu w_nu (z_i - mean_i)(z_j - mean_j);
// the upper triangle is computed and mirrored, so the result is symmetric
// by construction.
std::vector<double> composed_covariance(
    std::span<const reweight::WeightedSequence> sequences,
    std::span<const double> mean,
    const std::optional<std::vector<double>>& fractions = {});

ComposedStats composed_stats(
    std::span<const reweight::WeightedSequence> sequences,
    const std::optional<std::vector<double>>& fractions = {});

// Plain unweighted mean and covariance (1/N normalization) of one point set
// given as coordinate columns.
std::pair<std::vector<double>, std::vector<double>> single_sequence_stats(
    std::span<const std::vector<double>> cols);

// Cyclic Jacobi for a symmetric matrix: rotations sweep all (p, q) pairs
// until the off-diagonal Frobenius norm falls below 1e-14 of the matrix norm,
// at most 100 sweeps. Eigenvalues come back descending; each eigenvector is
// signed so its largest-magnitude component (ties: lowest index) is positive.
EigenResult symmetric_eigen(std::span<const double> matrix, std::size_t m);

// Top-l eigenpairs of stats.covariance plus the composed mean.
CommonAxes build_axes(const ComposedStats& stats, std::size_t l);

// phi(x) = ((x - mean | u_k))_k.
std::vector<double> pc_project(const CommonAxes& axes,
                               std::span<const double> point);

// Column-wise phi over a point set; element-for-element identical to
// pc_project applied per point.
std::vector<std::vector<double>> pc_project_batch(
    const CommonAxes& axes, std::span<const std::vector<double>> cols);

} // namespace cpca::pca
