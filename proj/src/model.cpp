#include "cpca/model.hpp"

#include "cpca/errors.hpp"
#include "cpca/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cpca::model {

namespace {

void check_dim(std::size_t got, std::size_t want, const char* what) {
    if (got != want) {
        throw InputError(std::string(what) + ": expected length " +
                         std::to_string(want) + ", got " + std::to_string(got));
    }
}

// log((1 - e^{-u})/u) with g(0) = 0; the small-u branch expands
// (1 - e^{-u})/u - 1 to avoid cancellation, the negative branch uses
// (1 - e^{-u})/u = e^{-u} (e^{u} - 1)/u.
double g_of_u(double u) {
    if (u == 0.0) return 0.0;
    if (u < 0.0) return -u + g_of_u(-u);
    if (u < 1e-4) {
        const double s = -u / 2 + u * u / 6 - u * u * u / 24 + u * u * u * u / 120;
        return std::log1p(s);
    }
    return std::log1p(-std::exp(-u)) - std::log(u);
}

// The scalar energy loops below apply the exact per-element operation
// sequences of the batch kernels, in the same term order, so cached per-point
// energies and batch recomputations agree bit for bit.

double quartic_energy(const QuarticChainParams& q, std::span<const double> x) {
    double e = 0.0;
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double b2 = q.b[i] * q.b[i];
        const double c = q.amplitude / (b2 * b2);
        const double t = x[i] - q.d[i];
        const double qq = t * t - b2;
        e += c * (qq * qq);
    }
    const double khalf = q.k / 2;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double delta = q.d[i] - q.d[i + 1];
        const double t = (x[i] - x[i + 1]) - delta;
        e += khalf * (t * t);
    }
    return e;
}

double harmonic_energy(const HarmonicParams& h, std::span<const double> x) {
    double e = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x[i];
        e += (h.omega[i] / 2) * (t * t);
    }
    return e;
}

std::size_t batch_len(const SystemSpec& spec,
                      std::span<const std::vector<double>> cols) {
    check_dim(cols.size(), spec.n, "coordinate columns");
    const std::size_t len = cols.empty() ? 0 : cols[0].size();
    for (const auto& c : cols) check_dim(c.size(), len, "coordinate column");
    return len;
}

} // namespace

void SystemSpec::validate() const {
    if (n == 0) throw InputError("system '" + label + "': n must be positive");
    if (const auto* q = std::get_if<QuarticChainParams>(&potential)) {
        check_dim(q->b.size(), n, ("system '" + label + "' b").c_str());
        check_dim(q->d.size(), n, ("system '" + label + "' d").c_str());
        for (std::size_t i = 0; i < n; ++i) {
            if (!(q->b[i] > 0.0)) {
                throw InputError("system '" + label + "': b[" +
                                 std::to_string(i + 1) + "] must be > 0");
            }
        }
        if (!(q->k >= 0.0)) throw InputError("system '" + label + "': k must be >= 0");
        if (!(q->amplitude >= 0.0)) {
            throw InputError("system '" + label + "': amplitude must be >= 0");
        }
    } else {
        const auto& h = std::get<HarmonicParams>(potential);
        check_dim(h.omega.size(), n, ("system '" + label + "' omega").c_str());
        for (std::size_t i = 0; i < n; ++i) {
            if (!(h.omega[i] > 0.0)) {
                throw InputError("system '" + label + "': omega[" +
                                 std::to_string(i + 1) + "] must be > 0");
            }
        }
    }
    if (!(beta_target > 0.0)) {
        throw InputError("system '" + label + "': beta_target must be > 0");
    }
    if (!(beta_lo >= 0.0) || !(beta_hi >= beta_lo)) {
        throw InputError("system '" + label +
                         "': need 0 <= beta_lo <= beta_hi");
    }
    if (beta_target < beta_lo || beta_target > beta_hi) {
        throw InputError("system '" + label +
                         "': beta_target must lie in [beta_lo, beta_hi]");
    }
    if (projection.empty() || projection.size() > n) {
        throw InputError("system '" + label + "': projection must pick 1..n coordinates");
    }
    for (std::size_t i = 0; i < projection.size(); ++i) {
        if (projection[i] < 1 || projection[i] > n) {
            throw InputError("system '" + label + "': projection index " +
                             std::to_string(projection[i]) + " outside [1, " +
                             std::to_string(n) + "]");
        }
        if (i > 0 && projection[i] <= projection[i - 1]) {
            throw InputError("system '" + label +
                             "': projection indices must be strictly increasing");
        }
    }
}

double potential_energy(const SystemSpec& spec, std::span<const double> x) {
    check_dim(x.size(), spec.n, "potential_energy x");
    if (const auto* q = std::get_if<QuarticChainParams>(&spec.potential)) {
        return quartic_energy(*q, x);
    }
    return harmonic_energy(std::get<HarmonicParams>(spec.potential), x);
}

std::vector<double> potential_gradient(const SystemSpec& spec,
                                       std::span<const double> x) {
    check_dim(x.size(), spec.n, "potential_gradient x");
    std::vector<double> g(spec.n, 0.0);
    if (const auto* q = std::get_if<QuarticChainParams>(&spec.potential)) {
        for (std::size_t i = 0; i < spec.n; ++i) {
            const double b2 = q->b[i] * q->b[i];
            const double c = q->amplitude / (b2 * b2);
            const double t = x[i] - q->d[i];
            g[i] += 4.0 * c * t * (t * t - b2);
        }
        for (std::size_t i = 0; i + 1 < spec.n; ++i) {
            const double r = (x[i] - x[i + 1]) - (q->d[i] - q->d[i + 1]);
            g[i] += q->k * r;
            g[i + 1] -= q->k * r;
        }
    } else {
        const auto& h = std::get<HarmonicParams>(spec.potential);
        for (std::size_t i = 0; i < spec.n; ++i) g[i] = h.omega[i] * x[i];
    }
    return g;
}

double kinetic_energy(const SystemSpec& spec, std::span<const double> p) {
    check_dim(p.size(), spec.n, "kinetic_energy p");
    double e = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double t = p[i];
        e += 0.5 * (t * t);
    }
    return e;
}

double total_energy(const SystemSpec& spec, const PhasePoint& pt) {
    return potential_energy(spec, pt.x) + kinetic_energy(spec, pt.p);
}

double log_rho_bg(const SystemSpec& spec, const PhasePoint& pt, double beta) {
    return -beta * total_energy(spec, pt);
}

double log_rho_r_energy(double beta_lo, double beta_hi, double energy) {
    if (!std::isfinite(energy)) {
        throw InputError("log_rho_r: energy is not finite");
    }
    if (beta_lo == beta_hi) return -beta_lo * energy;
    return -beta_lo * energy + g_of_u((beta_hi - beta_lo) * energy);
}

double log_rho_r(const SystemSpec& spec, const PhasePoint& pt) {
    return log_rho_r_energy(spec.beta_lo, spec.beta_hi, total_energy(spec, pt));
}

double log_weight_ratio_energy(const SystemSpec& spec, double energy) {
    return -spec.beta_target * energy -
           log_rho_r_energy(spec.beta_lo, spec.beta_hi, energy);
}

double log_weight_ratio(const SystemSpec& spec, const PhasePoint& pt) {
    return log_weight_ratio_energy(spec, total_energy(spec, pt));
}

std::vector<double> potential_energy_batch(
    const SystemSpec& spec, std::span<const std::vector<double>> cols) {
    const std::size_t len = batch_len(spec, cols);
    std::vector<double> e(len, 0.0);
    if (const auto* q = std::get_if<QuarticChainParams>(&spec.potential)) {
        for (std::size_t i = 0; i < spec.n; ++i) {
            kernels::quartic_accum(cols[i], q->b[i], q->d[i], q->amplitude, e);
        }
        const double khalf = q->k / 2;
        for (std::size_t i = 0; i + 1 < spec.n; ++i) {
            kernels::coupling_accum(cols[i], cols[i + 1], q->d[i] - q->d[i + 1],
                                    khalf, e);
        }
    } else {
        const auto& h = std::get<HarmonicParams>(spec.potential);
        for (std::size_t i = 0; i < spec.n; ++i) {
            kernels::shifted_sq_accum(cols[i], 0.0, h.omega[i] / 2, e);
        }
    }
    return e;
}

std::vector<double> kinetic_energy_batch(
    const SystemSpec& spec, std::span<const std::vector<double>> cols) {
    const std::size_t len = batch_len(spec, cols);
    std::vector<double> e(len, 0.0);
    for (std::size_t i = 0; i < spec.n; ++i) {
        kernels::shifted_sq_accum(cols[i], 0.0, 0.5, e);
    }
    return e;
}

std::vector<double> total_energy_batch(
    const SystemSpec& spec, std::span<const std::vector<double>> x_cols,
    std::span<const std::vector<double>> p_cols) {
    std::vector<double> e = potential_energy_batch(spec, x_cols);
    const std::vector<double> k = kinetic_energy_batch(spec, p_cols);
    kernels::axpy_shifted(k, 1.0, 0.0, e);
    return e;
}

void potential_energy_line(const SystemSpec& spec, std::span<const double> fixed_x,
                           std::size_t varying, std::span<const double> nodes,
                           std::span<double> out) {
    check_dim(fixed_x.size(), spec.n, "potential_energy_line fixed_x");
    check_dim(out.size(), nodes.size(), "potential_energy_line out");
    if (varying >= spec.n) {
        throw InputError("potential_energy_line: varying index out of range");
    }
    if (const auto* q = std::get_if<QuarticChainParams>(&spec.potential)) {
        double base = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (i == varying) continue;
            const double b2 = q->b[i] * q->b[i];
            const double c = q->amplitude / (b2 * b2);
            const double t = fixed_x[i] - q->d[i];
            const double qq = t * t - b2;
            base += c * (qq * qq);
        }
        const double khalf = q->k / 2;
        for (std::size_t i = 0; i + 1 < spec.n; ++i) {
            if (i == varying || i + 1 == varying) continue;
            const double t = (fixed_x[i] - fixed_x[i + 1]) - (q->d[i] - q->d[i + 1]);
            base += khalf * (t * t);
        }
        std::fill(out.begin(), out.end(), base);
        kernels::quartic_accum(nodes, q->b[varying], q->d[varying], q->amplitude,
                               out);
        if (varying + 1 < spec.n) {
            // (t - x_{v+1} - d_v + d_{v+1})^2
            kernels::shifted_sq_accum(
                nodes, fixed_x[varying + 1] + q->d[varying] - q->d[varying + 1],
                khalf, out);
        }
        if (varying > 0) {
            // (x_{v-1} - t - d_{v-1} + d_v)^2 == (t - (x_{v-1} - d_{v-1} + d_v))^2
            kernels::shifted_sq_accum(
                nodes, fixed_x[varying - 1] - q->d[varying - 1] + q->d[varying],
                khalf, out);
        }
    } else {
        const auto& h = std::get<HarmonicParams>(spec.potential);
        double base = 0.0;
        for (std::size_t i = 0; i < spec.n; ++i) {
            if (i == varying) continue;
            const double t = fixed_x[i];
            base += (h.omega[i] / 2) * (t * t);
        }
        std::fill(out.begin(), out.end(), base);
        kernels::shifted_sq_accum(nodes, 0.0, h.omega[varying] / 2, out);
    }
}

} // namespace cpca::model
