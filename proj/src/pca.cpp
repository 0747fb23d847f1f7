#include "cpca/pca.hpp"

#include "cpca/errors.hpp"
#include "cpca/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cpca::pca {

namespace {

std::vector<double> resolve_fractions(
    std::span<const reweight::WeightedSequence> sequences,
    const std::optional<std::vector<double>>& fractions, std::uint64_t* n_total) {
    if (sequences.empty()) throw InputError("composition: no sequences given");
    const std::size_t m = sequences[0].m();
    std::uint64_t total = 0;
    for (const auto& ws : sequences) {
        ws.validate();
        if (ws.m() != m) {
            throw InputError("composition: sequence '" + ws.label +
                             "' has dimension " + std::to_string(ws.m()) +
                             ", expected " + std::to_string(m));
        }
        total += ws.n_steps;
    }
    if (n_total) *n_total = total;
    if (fractions) {
        if (fractions->size() != sequences.size()) {
            throw InputError("composition: " + std::to_string(fractions->size()) +
                             " fractions for " + std::to_string(sequences.size()) +
                             " sequences");
        }
        double sum = 0.0;
        for (double f : *fractions) {
            if (!(f > 0.0)) throw InputError("fractions must be positive");
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw InputError("fractions must sum to 1");
        }
        return *fractions;
    }
    std::vector<double> out(sequences.size());
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        out[s] = static_cast<double>(sequences[s].n_steps) /
                 static_cast<double>(total);
    }
    return out;
}

} // namespace

std::vector<double> composed_mean(
    std::span<const reweight::WeightedSequence> sequences,
    const std::optional<std::vector<double>>& fractions) {
    const std::vector<double> frac = resolve_fractions(sequences, fractions, nullptr);
    const std::size_t m = sequences[0].m();
    std::vector<double> mean(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double acc = 0.0;
        for (std::size_t s = 0; s < sequences.size(); ++s) {
            acc += frac[s] * kernels::weighted_shifted_sum(
                                 sequences[s].cols[j], sequences[s].weights, 0.0);
        }
        mean[j] = acc;
    }
    return mean;
}

std::vector<double> composed_covariance(
    std::span<const reweight::WeightedSequence> sequences,
    std::span<const double> mean,
    const std::optional<std::vector<double>>& fractions) {
    const std::vector<double> frac = resolve_fractions(sequences, fractions, nullptr);
    const std::size_t m = sequences[0].m();
    if (mean.size() != m) {
        throw InputError("composed_covariance: mean length does not match m");
    }
    std::vector<double> cov(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t s = 0; s < sequences.size(); ++s) {
                acc += frac[s] * kernels::weighted_centered_dot(
                                     sequences[s].cols[i], sequences[s].cols[j],
                                     sequences[s].weights, mean[i], mean[j]);
            }
            cov[i * m + j] = acc;
            cov[j * m + i] = acc;
        }
    }
    return cov;
}

ComposedStats composed_stats(
    std::span<const reweight::WeightedSequence> sequences,
    const std::optional<std::vector<double>>& fractions) {
    ComposedStats stats;
    stats.per_system_fractions =
        resolve_fractions(sequences, fractions, &stats.n_total);
    stats.m = sequences[0].m();
    stats.mean = composed_mean(sequences, fractions);
    stats.covariance = composed_covariance(sequences, stats.mean, fractions);
    return stats;
}

std::pair<std::vector<double>, std::vector<double>> single_sequence_stats(
    std::span<const std::vector<double>> cols) {
    if (cols.empty() || cols[0].empty()) {
        throw InputError("single_sequence_stats: empty point set");
    }
    const std::size_t m = cols.size();
    const std::size_t N = cols[0].size();
    for (const auto& c : cols) {
        if (c.size() != N) {
            throw InputError("single_sequence_stats: ragged columns");
        }
    }
    const double inv_n = 1.0 / static_cast<double>(N);
    std::vector<double> mean(m);
    for (std::size_t j = 0; j < m; ++j) {
        mean[j] = kernels::reduce_sum(cols[j]) * inv_n;
    }
    const std::vector<double> ones(N, 1.0);
    std::vector<double> cov(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            const double v = kernels::weighted_centered_dot(cols[i], cols[j], ones,
                                                            mean[i], mean[j]) *
                             inv_n;
            cov[i * m + j] = v;
            cov[j * m + i] = v;
        }
    }
    return {std::move(mean), std::move(cov)};
}

EigenResult symmetric_eigen(std::span<const double> matrix, std::size_t m) {
    if (m == 0 || matrix.size() != m * m) {
        throw InputError("symmetric_eigen: matrix size does not match m");
    }
    double max_abs = 0.0;
    for (double v : matrix) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (std::abs(matrix[i * m + j] - matrix[j * m + i]) >
                1e-10 * std::max(1e-300, max_abs)) {
                throw InputError("symmetric_eigen: matrix is not symmetric");
            }
        }
    }

    std::vector<double> a(matrix.begin(), matrix.end());
    std::vector<double> v(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) v[i * m + i] = 1.0;

    auto frob = [&](bool off_only) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                if (off_only && i == j) continue;
                s += a[i * m + j] * a[i * m + j];
            }
        }
        return std::sqrt(s);
    };

    bool converged = false;
    for (int sweep = 0; sweep < 100; ++sweep) {
        if (frob(true) <= 1e-14 * frob(false)) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = a[p * m + q];
                if (apq == 0.0) continue;
                const double theta = (a[q * m + q] - a[p * m + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                a[p * m + p] -= t * apq;
                a[q * m + q] += t * apq;
                a[p * m + q] = 0.0;
                a[q * m + p] = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a[i * m + p];
                    const double aiq = a[i * m + q];
                    a[i * m + p] = c * aip - s * aiq;
                    a[p * m + i] = a[i * m + p];
                    a[i * m + q] = s * aip + c * aiq;
                    a[q * m + i] = a[i * m + q];
                }
                for (std::size_t i = 0; i < m; ++i) {
                    const double vip = v[i * m + p];
                    const double viq = v[i * m + q];
                    v[i * m + p] = c * vip - s * viq;
                    v[i * m + q] = s * vip + c * viq;
                }
            }
        }
    }
    if (!converged && frob(true) > 1e-14 * frob(false)) {
        throw NumericalError("symmetric_eigen: no convergence within 100 sweeps");
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return a[x * m + x] > a[y * m + y];
    });

    EigenResult res;
    res.m = m;
    res.values.resize(m);
    res.vectors.resize(m * m);
    for (std::size_t k = 0; k < m; ++k) {
        const std::size_t col = order[k];
        res.values[k] = a[col * m + col];
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double mag = std::abs(v[i * m + col]);
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        const double sign = v[arg * m + col] < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            res.vectors[k * m + i] = sign * v[i * m + col];
        }
    }
    return res;
}

CommonAxes build_axes(const ComposedStats& stats, std::size_t l) {
    const std::size_t m = stats.m;
    if (l == 0 || l > m) {
        throw InputError("build_axes: l must lie in [1, m]");
    }
    if (stats.mean.size() != m || stats.covariance.size() != m * m) {
        throw InputError("build_axes: inconsistent ComposedStats");
    }
    const EigenResult eig = symmetric_eigen(stats.covariance, m);
    CommonAxes axes;
    axes.l = l;
    axes.m = m;
    axes.mean = stats.mean;
    axes.eigenvalues.assign(eig.values.begin(), eig.values.begin() + l);
    axes.eigenvectors.assign(eig.vectors.begin(), eig.vectors.begin() + l * m);
    return axes;
}

std::vector<double> pc_project(const CommonAxes& axes,
                               std::span<const double> point) {
    if (point.size() != axes.m) {
        throw InputError("pc_project: point has length " +
                         std::to_string(point.size()) + ", expected " +
                         std::to_string(axes.m));
    }
    std::vector<double> scores(axes.l, 0.0);
    for (std::size_t k = 0; k < axes.l; ++k) {
        double s = 0.0;
        for (std::size_t j = 0; j < axes.m; ++j) {
            s += axes.eigenvectors[k * axes.m + j] * (point[j] - axes.mean[j]);
        }
        scores[k] = s;
    }
    return scores;
}

std::vector<std::vector<double>> pc_project_batch(
    const CommonAxes& axes, std::span<const std::vector<double>> cols) {
    if (cols.size() != axes.m) {
        throw InputError("pc_project_batch: column count does not match m");
    }
    const std::size_t N = cols.empty() ? 0 : cols[0].size();
    for (const auto& c : cols) {
        if (c.size() != N) throw InputError("pc_project_batch: ragged columns");
    }
    std::vector<std::vector<double>> scores(axes.l, std::vector<double>(N, 0.0));
    for (std::size_t k = 0; k < axes.l; ++k) {
        for (std::size_t j = 0; j < axes.m; ++j) {
            kernels::axpy_shifted(cols[j], axes.eigenvectors[k * axes.m + j],
                                  axes.mean[j], scores[k]);
        }
    }
    return scores;
}

} // namespace cpca::pca
