#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace cpca::model {

// Quartic double-well chain:
//   U(x) = sum_i (amplitude/b_i^4) ((x_i - d_i)^2 - b_i^2)^2
//        + sum_i (k/2) (x_i - x_{i+1} - d_i + d_{i+1})^2
// Wells sit at d_i +- b_i, the barrier height per coordinate is `amplitude`.
struct QuarticChainParams {
    std::vector<double> b;    // well half-widths, all > 0
    std::vector<double> d;    // well centers
    double k = 0.0;           // nearest-neighbour coupling, >= 0
    double amplitude = 10.0;  // barrier height; 0 gives a flat potential
};

// Diagonal harmonic potential U(x) = sum_i omega_i x_i^2 / 2. Registered so
// tests can compare against analytic Gaussian moments.
struct HarmonicParams {
    std::vector<double> omega; // all > 0
};

using Potential = std::variant<QuarticChainParams, HarmonicParams>;

struct SystemSpec {
    std::size_t n = 0;
    Potential potential;
    double beta_target = 1.0;
    double beta_lo = 1.0;
    double beta_hi = 1.0;
    std::vector<std::size_t> projection; // 1-based coordinate picks, strictly increasing
    std::string label;

    std::size_t m() const { return projection.size(); }
    // Throws InputError on any violated invariant (dimension mismatches,
    // nonpositive b/omega, bad beta ordering, bad projection indices).
    void validate() const;
};

struct PhasePoint {
    std::vector<double> x;
    std::vector<double> p;
};

double potential_energy(const SystemSpec& spec, std::span<const double> x);
std::vector<double> potential_gradient(const SystemSpec& spec,
                                       std::span<const double> x);
// (p|p)/2, unit masses.
double kinetic_energy(const SystemSpec& spec, std::span<const double> p);
double total_energy(const SystemSpec& spec, const PhasePoint& pt);

// log rho_BG = -beta * E(x,p), unnormalized.
double log_rho_bg(const SystemSpec& spec, const PhasePoint& pt, double beta);

// Delocalized density with f uniform on [beta_lo, beta_hi]:
//   rho_R(E) = (exp(-beta_lo E) - exp(-beta_hi E)) / ((beta_hi - beta_lo) E)
// evaluated in log space; the degenerate range beta_lo == beta_hi falls back
// to log_rho_bg at that beta, and E == 0 returns the analytic limit 0.
double log_rho_r(const SystemSpec& spec, const PhasePoint& pt);
// Same quantity as a function of the energy alone (all densities here depend
// on (x,p) only through E).
double log_rho_r_energy(double beta_lo, double beta_hi, double energy);

// log rho_BG(pt; beta_target) - log rho_R(pt).
double log_weight_ratio(const SystemSpec& spec, const PhasePoint& pt);
double log_weight_ratio_energy(const SystemSpec& spec, double energy);

// Batch forms over coordinate columns: cols[j][nu] is coordinate j of sample
// nu. They accumulate term-by-term in the same order as the scalar versions,
// so a batch recomputation reproduces per-point energies bit for bit.
std::vector<double> potential_energy_batch(
    const SystemSpec& spec, std::span<const std::vector<double>> cols);
std::vector<double> kinetic_energy_batch(
    const SystemSpec& spec, std::span<const std::vector<double>> cols);
std::vector<double> total_energy_batch(
    const SystemSpec& spec, std::span<const std::vector<double>> x_cols,
    std::span<const std::vector<double>> p_cols);

// U along one coordinate with the others frozen: out[i] = U(fixed_x with
// coordinate `varying` (0-based) replaced by nodes[i]). Used by the
// quadrature oracle to sweep tensor-grid lines.
void potential_energy_line(const SystemSpec& spec, std::span<const double> fixed_x,
                           std::size_t varying, std::span<const double> nodes,
                           std::span<double> out);

} // namespace cpca::model
