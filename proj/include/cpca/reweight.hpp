#pragma once

#include "cpca/model.hpp"
#include "cpca/sampler.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cpca::reweight {

struct WeightedSequence {
    std::string label;
    // Projected coordinates stored by column: cols[j][nu] is coordinate j of
    // sample nu, j < m.
    std::vector<std::vector<double>> cols;
    // Normalized importance weights, sum 1.
    std::vector<double> weights;
    std::uint64_t n_steps = 0;

    std::size_t m() const { return cols.size(); }
    std::size_t size() const { return weights.size(); }
    std::vector<double> point(std::size_t nu) const;
    // Throws InputError on inconsistent lengths, negative weights, or a
    // weight sum off 1 by more than 1e-12.
    void validate() const;
};

// Normalized weights recovering rho_BG(beta_target) from the chain's own
// target density: for DELOCALIZED chains the per-point log-ratio is
// log rho_BG(beta_target) - log rho_R, normalized by one log-sum-exp pass;
// CANONICAL chains already target rho_BG(beta_target), so the ratio is
// identically 1 and the weights come out exactly uniform. Points are the
// projection pi applied per sample.
WeightedSequence compute_weights(const model::SystemSpec& spec,
                                 const sampler::Trajectory& traj);

// sum_nu w_nu B_nu, evaluated as B_0 + sum_nu w_nu (B_nu - B_0) so constant
// observables come back exactly.
double reweighted_expectation(const WeightedSequence& ws,
                              std::span<const double> values);

// pi(x): coordinate selection by the spec's 1-based projection list.
std::vector<double> project_point(const model::SystemSpec& spec,
                                  std::span<const double> x);
// Column layout: result[j][nu] = coordinate projection[j] of sample nu.
std::vector<std::vector<double>> project_trajectory(
    const model::SystemSpec& spec, const sampler::Trajectory& traj);

// 1 / sum_nu w_nu^2, in [1, N].
double effective_sample_size(const WeightedSequence& ws);

} // namespace cpca::reweight
