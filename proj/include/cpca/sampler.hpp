#pragma once

#include "cpca/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cpca::sampler {

enum class Target { DELOCALIZED, CANONICAL };

std::string target_name(Target t);
Target target_from_name(const std::string& name);

struct SamplerConfig {
    std::uint64_t n_steps = 0;
    std::uint64_t burn_in = 0;
    std::uint64_t thin = 1;
    double step_size_x = 0.1;
    double step_size_p = 0.5;
    std::uint64_t seed = 1;
    Target target = Target::DELOCALIZED;
    // Initial point overrides. Defaults: x0 = well centers d (quartic) or the
    // origin (harmonic), p0 = 0. The canonical baseline passes x0 = d - b to
    // start inside one well.
    std::optional<std::vector<double>> x0;
    std::optional<std::vector<double>> p0;
    // Set by tune_step_sizes: acceptance measured on its final pilot chain.
    std::optional<double> pilot_acceptance;

    void validate() const;
};

struct Trajectory {
    std::string spec_label;
    std::size_t n = 0;
    Target target = Target::DELOCALIZED;
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;
    // Flat row-major storage: sample nu occupies [nu*n, (nu+1)*n).
    std::vector<double> xs;
    std::vector<double> ps;
    // E(x,p) for each retained sample, cached by the chain; batch
    // recomputation from xs/ps reproduces these bit for bit.
    std::vector<double> energies;

    std::size_t size() const { return n == 0 ? 0 : xs.size() / n; }
    std::span<const double> x_row(std::size_t nu) const {
        return {xs.data() + nu * n, n};
    }
    std::span<const double> p_row(std::size_t nu) const {
        return {ps.data() + nu * n, n};
    }
    model::PhasePoint point(std::size_t nu) const;
    // Per-coordinate column copies for the batch kernels.
    std::vector<std::vector<double>> x_columns() const;
    std::vector<std::vector<double>> p_columns() const;
};

struct ChainDiagnostics {
    double acceptance_rate = 0.0;
    std::vector<std::uint64_t> well_transition_counts;
    double effective_sample_estimate = 0.0;
};

// Symmetric Gaussian random-walk Metropolis on (x,p) jointly; the log-target
// is log_rho_r (DELOCALIZED) or log_rho_bg at beta_target (CANONICAL).
// Deterministic per seed. Retains every thin-th step after burn_in, so the
// trajectory holds exactly floor((n_steps - burn_in)/thin) samples.
Trajectory metropolis_sample(const model::SystemSpec& spec,
                             const SamplerConfig& cfg);

// Scales both step sizes by a common factor found with a bracketing bisection
// of pilot chains (derived seeds; cfg.seed stays reserved for the production
// run) until pilot acceptance lands within +-0.1 of target_acceptance.
// Throws NumericalError after 30 unsuccessful pilot rounds.
SamplerConfig tune_step_sizes(const model::SystemSpec& spec,
                              const SamplerConfig& cfg,
                              double target_acceptance = 0.35);

// Sign changes of (x_coordinate - threshold) along the retained chain;
// coordinate is 0-based. A point exactly at the threshold counts as the
// positive side.
std::uint64_t count_well_transitions(const Trajectory& traj,
                                     std::size_t coordinate, double threshold);

// Acceptance, per-coordinate well transitions (thresholds d_i for the quartic
// chain, 0 for the harmonic), and a batch-means effective-sample estimate
// computed on the energy series.
ChainDiagnostics chain_diagnostics(const model::SystemSpec& spec,
                                   const Trajectory& traj);

} // namespace cpca::sampler
