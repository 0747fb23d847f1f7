#include "cpca/reweight.hpp"

#include "cpca/errors.hpp"
#include "cpca/kernels.hpp"

#include <cmath>
#include <limits>

namespace cpca::reweight {

std::vector<double> WeightedSequence::point(std::size_t nu) const {
    std::vector<double> out(cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j) out[j] = cols[j][nu];
    return out;
}

void WeightedSequence::validate() const {
    if (weights.empty()) throw InputError("weighted sequence '" + label + "' is empty");
    if (weights.size() != n_steps) {
        throw InputError("weighted sequence '" + label +
                         "': n_steps does not match the weight count");
    }
    for (const auto& c : cols) {
        if (c.size() != weights.size()) {
            throw InputError("weighted sequence '" + label +
                             "': column length does not match the weight count");
        }
    }
    for (double w : weights) {
        if (!(w >= 0.0)) {
            throw InputError("weighted sequence '" + label + "': negative weight");
        }
    }
    // Summed with the library's pairwise reduction; a naive left-to-right
    // loop would drift past the tolerance from rounding alone at N = 5e5.
    if (std::abs(kernels::reduce_sum(weights) - 1.0) > 1e-12) {
        throw InputError("weighted sequence '" + label +
                         "': weights do not sum to 1");
    }
}

WeightedSequence compute_weights(const model::SystemSpec& spec,
                                 const sampler::Trajectory& traj) {
    spec.validate();
    if (traj.n != spec.n) {
        throw InputError("compute_weights: trajectory dimension " +
                         std::to_string(traj.n) + " does not match spec n = " +
                         std::to_string(spec.n));
    }
    const std::size_t N = traj.size();
    if (N == 0) throw InputError("compute_weights: empty trajectory");
    if (traj.energies.size() != N) {
        throw InputError("compute_weights: trajectory lacks cached energies");
    }

    std::vector<double> lr(N, 0.0);
    if (traj.target == sampler::Target::DELOCALIZED) {
        for (std::size_t nu = 0; nu < N; ++nu) {
            lr[nu] = model::log_weight_ratio_energy(spec, traj.energies[nu]);
        }
    }

    const double mx = kernels::reduce_max(lr);
    if (!std::isfinite(mx)) {
        throw NumericalError(
            "compute_weights: degenerate weights, every log ratio is -inf");
    }
    std::vector<double> w(N);
    kernels::exp_shifted(lr, mx, w);
    const double z = kernels::reduce_sum(w);
    if (!(z > 0.0) || !std::isfinite(z)) {
        throw NumericalError("compute_weights: weight normalizer is not positive");
    }
    kernels::scale(w, 1.0 / z);

    WeightedSequence ws;
    ws.label = traj.spec_label;
    ws.cols = project_trajectory(spec, traj);
    ws.weights = std::move(w);
    ws.n_steps = N;
    return ws;
}

double reweighted_expectation(const WeightedSequence& ws,
                              std::span<const double> values) {
    if (values.size() != ws.size()) {
        throw InputError("reweighted_expectation: " + std::to_string(values.size()) +
                         " values for " + std::to_string(ws.size()) + " weights");
    }
    if (values.empty()) {
        throw InputError("reweighted_expectation: empty sequence");
    }
    const double shift = values[0];
    return shift + kernels::weighted_shifted_sum(values, ws.weights, shift);
}

std::vector<double> project_point(const model::SystemSpec& spec,
                                  std::span<const double> x) {
    if (x.size() != spec.n) {
        throw InputError("project_point: point has length " +
                         std::to_string(x.size()) + ", spec n = " +
                         std::to_string(spec.n));
    }
    std::vector<double> out(spec.m());
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = x[spec.projection[j] - 1];
    }
    return out;
}

std::vector<std::vector<double>> project_trajectory(
    const model::SystemSpec& spec, const sampler::Trajectory& traj) {
    spec.validate();
    if (traj.n != spec.n) {
        throw InputError("project_trajectory: trajectory dimension mismatch");
    }
    const std::size_t N = traj.size();
    std::vector<std::vector<double>> cols(spec.m(), std::vector<double>(N));
    for (std::size_t j = 0; j < cols.size(); ++j) {
        const std::size_t c = spec.projection[j] - 1;
        for (std::size_t nu = 0; nu < N; ++nu) {
            cols[j][nu] = traj.xs[nu * traj.n + c];
        }
    }
    return cols;
}

double effective_sample_size(const WeightedSequence& ws) {
    ws.validate();
    const double s = kernels::dot(ws.weights, ws.weights);
    return 1.0 / s;
}

} // namespace cpca::reweight
