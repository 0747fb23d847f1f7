#include "cpca/sampler.hpp"

#include "cpca/errors.hpp"
#include "cpca/rng.hpp"

#include <cmath>
#include <cstdio>
#include <variant>

namespace cpca::sampler {

namespace {

double log_target(const model::SystemSpec& spec, Target target, double energy) {
    if (target == Target::CANONICAL) return -spec.beta_target * energy;
    return model::log_rho_r_energy(spec.beta_lo, spec.beta_hi, energy);
}

std::vector<double> default_x0(const model::SystemSpec& spec) {
    if (const auto* q = std::get_if<model::QuarticChainParams>(&spec.potential)) {
        return q->d;
    }
    return std::vector<double>(spec.n, 0.0);
}

void check_override(const std::optional<std::vector<double>>& v, std::size_t n,
                    const char* what) {
    if (!v) return;
    if (v->size() != n) {
        throw ConfigError(std::string(what) + " override: expected length " +
                          std::to_string(n));
    }
    for (double e : *v) {
        if (!std::isfinite(e)) {
            throw ConfigError(std::string(what) + " override: non-finite entry");
        }
    }
}

} // namespace

std::string target_name(Target t) {
    return t == Target::DELOCALIZED ? "DELOCALIZED" : "CANONICAL";
}

Target target_from_name(const std::string& name) {
    if (name == "DELOCALIZED") return Target::DELOCALIZED;
    if (name == "CANONICAL") return Target::CANONICAL;
    throw InputError("unknown sampler target: " + name);
}

void SamplerConfig::validate() const {
    if (n_steps == 0) throw ConfigError("sampler: n_steps must be positive");
    if (burn_in >= n_steps) {
        throw ConfigError("sampler: burn_in must be smaller than n_steps");
    }
    if (thin == 0) throw ConfigError("sampler: thin must be >= 1");
    if (!(step_size_x > 0.0) || !(step_size_p > 0.0)) {
        throw ConfigError("sampler: step sizes must be > 0");
    }
}

model::PhasePoint Trajectory::point(std::size_t nu) const {
    const auto xr = x_row(nu);
    const auto pr = p_row(nu);
    return {{xr.begin(), xr.end()}, {pr.begin(), pr.end()}};
}

std::vector<std::vector<double>> Trajectory::x_columns() const {
    std::vector<std::vector<double>> cols(n, std::vector<double>(size()));
    for (std::size_t nu = 0; nu < size(); ++nu) {
        for (std::size_t j = 0; j < n; ++j) cols[j][nu] = xs[nu * n + j];
    }
    return cols;
}

std::vector<std::vector<double>> Trajectory::p_columns() const {
    std::vector<std::vector<double>> cols(n, std::vector<double>(size()));
    for (std::size_t nu = 0; nu < size(); ++nu) {
        for (std::size_t j = 0; j < n; ++j) cols[j][nu] = ps[nu * n + j];
    }
    return cols;
}

Trajectory metropolis_sample(const model::SystemSpec& spec,
                             const SamplerConfig& cfg) {
    spec.validate();
    cfg.validate();
    check_override(cfg.x0, spec.n, "x0");
    check_override(cfg.p0, spec.n, "p0");

    const std::size_t n = spec.n;
    std::vector<double> x = cfg.x0 ? *cfg.x0 : default_x0(spec);
    std::vector<double> p = cfg.p0 ? *cfg.p0 : std::vector<double>(n, 0.0);
    double energy = model::potential_energy(spec, x) + model::kinetic_energy(spec, p);
    if (!std::isfinite(energy)) {
        throw ConfigError("sampler: energy is not finite at the initial point");
    }
    double lt = log_target(spec, cfg.target, energy);
    if (!std::isfinite(lt)) {
        throw ConfigError("sampler: log-target is not finite at the initial point");
    }

    const std::uint64_t kept = (cfg.n_steps - cfg.burn_in) / cfg.thin;
    Trajectory traj;
    traj.spec_label = spec.label;
    traj.n = n;
    traj.target = cfg.target;
    traj.seed = cfg.seed;
    traj.xs.reserve(kept * n);
    traj.ps.reserve(kept * n);
    traj.energies.reserve(kept);

    GaussianRng rng(cfg.seed);
    std::vector<double> xn(n), pn(n);
    std::uint64_t accepted = 0;
    for (std::uint64_t step = 1; step <= cfg.n_steps; ++step) {
        for (std::size_t i = 0; i < n; ++i) {
            xn[i] = x[i] + cfg.step_size_x * rng.normal();
        }
        for (std::size_t i = 0; i < n; ++i) {
            pn[i] = p[i] + cfg.step_size_p * rng.normal();
        }
        const double en =
            model::potential_energy(spec, xn) + model::kinetic_energy(spec, pn);
        // The uniform is drawn unconditionally to keep the RNG stream aligned
        // with the step index. Overflowed proposals are plain rejections.
        const double u = rng.uniform01();
        if (std::isfinite(en)) {
            const double ltn = log_target(spec, cfg.target, en);
            const double delta = ltn - lt;
            if (delta >= 0.0 || std::log(u) < delta) {
                x.swap(xn);
                p.swap(pn);
                energy = en;
                lt = ltn;
                ++accepted;
            }
        }
        if (step > cfg.burn_in && (step - cfg.burn_in) % cfg.thin == 0) {
            traj.xs.insert(traj.xs.end(), x.begin(), x.end());
            traj.ps.insert(traj.ps.end(), p.begin(), p.end());
            traj.energies.push_back(energy);
        }
    }
    traj.acceptance_rate =
        static_cast<double>(accepted) / static_cast<double>(cfg.n_steps);
    return traj;
}

SamplerConfig tune_step_sizes(const model::SystemSpec& spec,
                              const SamplerConfig& cfg,
                              double target_acceptance) {
    spec.validate();
    cfg.validate();
    if (!(target_acceptance > 0.0) || !(target_acceptance < 1.0)) {
        throw ConfigError("tune_step_sizes: target acceptance must lie in (0, 1)");
    }
    const double band = 0.1;
    double t = 0.0;
    double t_lo = 0.0, t_hi = 0.0;
    bool have_lo = false, have_hi = false;
    double acc = 0.0;
    for (int round = 0; round < 30; ++round) {
        SamplerConfig pilot = cfg;
        pilot.n_steps = 2000;
        pilot.burn_in = 0;
        pilot.thin = 1;
        pilot.seed = derive_seed(cfg.seed, 0x70u + static_cast<std::uint64_t>(round));
        const double s = std::exp(t);
        pilot.step_size_x = cfg.step_size_x * s;
        pilot.step_size_p = cfg.step_size_p * s;
        acc = metropolis_sample(spec, pilot).acceptance_rate;
        if (std::abs(acc - target_acceptance) <= band) {
            SamplerConfig out = cfg;
            out.step_size_x = pilot.step_size_x;
            out.step_size_p = pilot.step_size_p;
            out.pilot_acceptance = acc;
            return out;
        }
        // Acceptance decreases with step size: too-high acceptance means the
        // current scale is a lower bracket, too-low an upper one.
        if (acc > target_acceptance) {
            t_lo = t;
            have_lo = true;
            t = have_hi ? (t_lo + t_hi) / 2 : t + std::log(4.0);
        } else {
            t_hi = t;
            have_hi = true;
            t = have_lo ? (t_lo + t_hi) / 2 : t - std::log(4.0);
        }
    }
    char msg[128];
    std::snprintf(msg, sizeof msg,
                  "step-size tuning failed to reach the acceptance band after 30 "
                  "pilot rounds (last acceptance %.3f)",
                  acc);
    throw NumericalError(msg);
}

std::uint64_t count_well_transitions(const Trajectory& traj,
                                     std::size_t coordinate, double threshold) {
    if (coordinate >= traj.n) {
        throw InputError("count_well_transitions: coordinate out of range");
    }
    std::uint64_t count = 0;
    int prev = 0;
    for (std::size_t nu = 0; nu < traj.size(); ++nu) {
        const double v = traj.xs[nu * traj.n + coordinate];
        const int side = v >= threshold ? 1 : -1;
        if (nu > 0 && side != prev) ++count;
        prev = side;
    }
    return count;
}

ChainDiagnostics chain_diagnostics(const model::SystemSpec& spec,
                                   const Trajectory& traj) {
    ChainDiagnostics diag;
    diag.acceptance_rate = traj.acceptance_rate;
    diag.well_transition_counts.resize(traj.n, 0);
    const auto* q = std::get_if<model::QuarticChainParams>(&spec.potential);
    for (std::size_t j = 0; j < traj.n; ++j) {
        const double threshold = q ? q->d[j] : 0.0;
        diag.well_transition_counts[j] =
            count_well_transitions(traj, j, threshold);
    }

    // Batch means on the energy series: tau ~= L * Var(batch means) / Var(E),
    // ESS = N / tau, clamped to [1, N].
    const std::size_t N = traj.size();
    if (N < 4) {
        diag.effective_sample_estimate = static_cast<double>(N);
        return diag;
    }
    const std::size_t K = static_cast<std::size_t>(std::sqrt(static_cast<double>(N)));
    const std::size_t L = N / K;
    const std::size_t used = K * L;
    double mean = 0.0;
    for (std::size_t i = 0; i < used; ++i) mean += traj.energies[i];
    mean /= static_cast<double>(used);
    double var = 0.0;
    for (std::size_t i = 0; i < used; ++i) {
        const double dv = traj.energies[i] - mean;
        var += dv * dv;
    }
    var /= static_cast<double>(used);
    double var_bm = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        double bm = 0.0;
        for (std::size_t i = k * L; i < (k + 1) * L; ++i) bm += traj.energies[i];
        bm /= static_cast<double>(L);
        const double dv = bm - mean;
        var_bm += dv * dv;
    }
    var_bm /= static_cast<double>(K);
    double ess = static_cast<double>(N);
    if (var_bm > 0.0 && var > 0.0) {
        const double tau = static_cast<double>(L) * var_bm / var;
        ess = static_cast<double>(N) / std::max(tau, 1.0);
    }
    diag.effective_sample_estimate =
        std::min(std::max(ess, 1.0), static_cast<double>(N));
    return diag;
}

} // namespace cpca::sampler
