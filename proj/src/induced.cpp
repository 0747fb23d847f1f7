#include "cpca/induced.hpp"

#include "cpca/errors.hpp"
#include "cpca/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <variant>

namespace cpca::induced {

namespace {

constexpr double kMassScale = 0x1p52;
constexpr double kMassScaleInv = 0x1p-52;

std::optional<std::size_t> axis_bin(double v, double lo, double hi,
                                    std::size_t bins) {
    if (!(v >= lo) || !(v <= hi)) return std::nullopt;
    const double r = (v - lo) / (hi - lo);
    auto idx = static_cast<std::size_t>(r * static_cast<double>(bins));
    if (idx >= bins) idx = bins - 1; // v at (or rounded onto) the top edge
    return idx;
}

PCHistogram accumulate_samples(const PCGrid& grid,
                               std::span<const std::vector<double>> cols,
                               std::span<const double> weights) {
    grid.validate();
    if (cols.size() != grid.dims()) {
        throw InputError("histogram: point dimension " +
                         std::to_string(cols.size()) + " does not match grid (" +
                         std::to_string(grid.dims()) + ")");
    }
    for (const auto& c : cols) {
        if (c.size() != weights.size()) {
            throw InputError("histogram: column length does not match weights");
        }
    }
    std::vector<std::int64_t> acc(grid.total_bins(), 0);
    std::int64_t oor = 0;
    std::vector<double> point(grid.dims());
    for (std::size_t nu = 0; nu < weights.size(); ++nu) {
        for (std::size_t a = 0; a < cols.size(); ++a) point[a] = cols[a][nu];
        const std::int64_t q = std::llround(weights[nu] * kMassScale);
        if (const auto idx = grid.bin_index(point)) {
            acc[*idx] += q;
        } else {
            oor += q;
        }
    }
    PCHistogram hist;
    hist.grid = grid;
    hist.masses.resize(acc.size());
    for (std::size_t b = 0; b < acc.size(); ++b) {
        hist.masses[b] = static_cast<double>(acc[b]) * kMassScaleInv;
    }
    hist.out_of_range_mass = static_cast<double>(oor) * kMassScaleInv;
    return hist;
}

// ---- quadrature oracle ------------------------------------------------------

struct QuadContext {
    const model::SystemSpec* spec;
    double beta;
    std::size_t i0, j0;              // outer coordinates, 0-based
    std::vector<std::size_t> rest;   // integrated-out coordinates
    std::vector<double> box_lo, box_hi;
    std::size_t qpd;
    bool i_matters, j_matters;       // whether x_i/x_j couple into `rest`
    std::map<std::pair<double, double>, double> psi_cache;
};

// U terms that involve only the outer pair: the two (or one, harmonic) well
// terms plus their mutual coupling when adjacent.
double pair_potential(const QuadContext& ctx, double xi, double xj) {
    const auto& spec = *ctx.spec;
    double e = 0.0;
    if (const auto* q = std::get_if<model::QuarticChainParams>(&spec.potential)) {
        for (const std::size_t c : {ctx.i0, ctx.j0}) {
            const double b2 = q->b[c] * q->b[c];
            const double cc = q->amplitude / (b2 * b2);
            const double t = (c == ctx.i0 ? xi : xj) - q->d[c];
            const double qq = t * t - b2;
            e += cc * (qq * qq);
        }
        const std::size_t a = std::min(ctx.i0, ctx.j0);
        const std::size_t b = std::max(ctx.i0, ctx.j0);
        if (b == a + 1) {
            const double va = a == ctx.i0 ? xi : xj;
            const double vb = b == ctx.i0 ? xi : xj;
            const double t = (va - vb) - (q->d[a] - q->d[b]);
            e += q->k / 2 * (t * t);
        }
    } else {
        const auto& h = std::get<model::HarmonicParams>(spec.potential);
        e += (h.omega[ctx.i0] / 2) * (xi * xi);
        e += (h.omega[ctx.j0] / 2) * (xj * xj);
    }
    return e;
}

// psi = integral over `rest` of exp(-beta (U - U_pair)), by nested trapezoid
// sweeps; the innermost dimension runs as one vectorized line.
double psi_recurse(QuadContext& ctx, std::vector<double>& x, double neg_beta_upair,
                   std::size_t depth) {
    const std::size_t dim = ctx.rest[depth];
    const double lo = ctx.box_lo[dim];
    const double hi = ctx.box_hi[dim];
    const std::size_t q = ctx.qpd;
    const double h = (hi - lo) / static_cast<double>(q - 1);
    if (depth + 1 == ctx.rest.size()) {
        std::vector<double> nodes(q), u(q), vals(q);
        for (std::size_t t = 0; t < q; ++t) {
            nodes[t] = lo + h * static_cast<double>(t);
        }
        model::potential_energy_line(*ctx.spec, x, dim, nodes, u);
        kernels::scale(u, -ctx.beta);
        kernels::exp_shifted(u, neg_beta_upair, vals);
        const double s =
            kernels::reduce_sum(vals) - 0.5 * (vals.front() + vals.back());
        return s * h;
    }
    double sum = 0.0;
    for (std::size_t t = 0; t < q; ++t) {
        x[dim] = lo + h * static_cast<double>(t);
        const double w = (t == 0 || t + 1 == q) ? 0.5 : 1.0;
        sum += w * psi_recurse(ctx, x, neg_beta_upair, depth + 1);
    }
    x[dim] = 0.0;
    return sum * h;
}

double density(QuadContext& ctx, double xi, double xj) {
    const double upair = pair_potential(ctx, xi, xj);
    if (ctx.rest.empty()) {
        return kernels::exp_core(-ctx.beta * upair);
    }
    const std::pair<double, double> key{ctx.i_matters ? xi : 0.0,
                                        ctx.j_matters ? xj : 0.0};
    const auto it = ctx.psi_cache.find(key);
    double psi;
    if (it != ctx.psi_cache.end()) {
        psi = it->second;
    } else {
        std::vector<double> x(ctx.spec->n, 0.0);
        x[ctx.i0] = xi;
        x[ctx.j0] = xj;
        psi = psi_recurse(ctx, x, -ctx.beta * upair, 0);
        ctx.psi_cache.emplace(key, psi);
    }
    return kernels::exp_core(-ctx.beta * upair) * psi;
}

// Composite Simpson weights for an even interval count.
std::vector<double> simpson_weights(std::size_t intervals, double h) {
    std::vector<double> w(intervals + 1, 0.0);
    for (std::size_t t = 0; t + 2 <= intervals + 1; t += 2) {
        w[t] += h / 3;
        w[t + 1] += 4 * h / 3;
        w[t + 2] += h / 3;
    }
    return w;
}

double plane_integral(QuadContext& ctx, double ilo, double ihi, double jlo,
                      double jhi, std::size_t intervals) {
    const double hi_ = (ihi - ilo) / static_cast<double>(intervals);
    const double hj = (jhi - jlo) / static_cast<double>(intervals);
    const std::vector<double> wi = simpson_weights(intervals, hi_);
    const std::vector<double> wj = simpson_weights(intervals, hj);
    double sum = 0.0;
    for (std::size_t b = 0; b <= intervals; ++b) {
        const double xj = jlo + hj * static_cast<double>(b);
        double row = 0.0;
        for (std::size_t a = 0; a <= intervals; ++a) {
            const double xi = ilo + hi_ * static_cast<double>(a);
            row += wi[a] * density(ctx, xi, xj);
        }
        sum += wj[b] * row;
    }
    return sum;
}

} // namespace

std::size_t PCGrid::total_bins() const {
    std::size_t total = 1;
    for (std::size_t b : bins) total *= b;
    return total;
}

void PCGrid::validate() const {
    if (bins.empty() || lo.size() != bins.size() || hi.size() != bins.size()) {
        throw InputError("grid: lo/hi/bins must share a positive dimension");
    }
    std::size_t total = 1;
    for (std::size_t a = 0; a < bins.size(); ++a) {
        if (bins[a] == 0) throw InputError("grid: bin counts must be >= 1");
        if (!(lo[a] < hi[a])) {
            throw InputError("grid: need lo < hi on axis " + std::to_string(a + 1));
        }
        if (total > 10'000'000 / bins[a]) {
            throw InputError("grid: total bin count exceeds 1e7");
        }
        total *= bins[a];
    }
}

std::optional<std::size_t> PCGrid::bin_index(std::span<const double> point) const {
    if (point.size() != dims()) {
        throw InputError("grid: point dimension does not match grid");
    }
    std::size_t idx = 0;
    for (std::size_t a = 0; a < dims(); ++a) {
        const auto ab = axis_bin(point[a], lo[a], hi[a], bins[a]);
        if (!ab) return std::nullopt;
        idx = idx * bins[a] + *ab;
    }
    return idx;
}

double PCGrid::center(std::size_t axis, std::size_t bin) const {
    const double width = (hi[axis] - lo[axis]) / static_cast<double>(bins[axis]);
    return lo[axis] + (static_cast<double>(bin) + 0.5) * width;
}

PCHistogram induced_histogram(const reweight::WeightedSequence& ws,
                              const pca::CommonAxes& axes, const PCGrid& grid) {
    ws.validate();
    if (ws.m() != axes.m) {
        throw InputError("induced_histogram: sequence dimension " +
                         std::to_string(ws.m()) + " does not match axes (m = " +
                         std::to_string(axes.m) + ")");
    }
    if (grid.dims() != axes.l) {
        throw InputError("induced_histogram: grid dimension does not match l");
    }
    const auto scores = pca::pc_project_batch(axes, ws.cols);
    return accumulate_samples(grid, scores, ws.weights);
}

PCHistogram reweighted_marginal(const reweight::WeightedSequence& ws,
                                std::pair<std::size_t, std::size_t> coords,
                                const PCGrid& grid) {
    ws.validate();
    if (grid.dims() != 2) {
        throw InputError("reweighted_marginal: grid must be 2-D");
    }
    for (const std::size_t c : {coords.first, coords.second}) {
        if (c < 1 || c > ws.m()) {
            throw InputError("reweighted_marginal: coordinate " +
                             std::to_string(c) + " outside [1, " +
                             std::to_string(ws.m()) + "]");
        }
    }
    const std::vector<std::vector<double>> pair_cols = {
        ws.cols[coords.first - 1], ws.cols[coords.second - 1]};
    return accumulate_samples(grid, pair_cols, ws.weights);
}

PCHistogram exact_marginal_quadrature(const model::SystemSpec& spec,
                                      std::pair<std::size_t, std::size_t> coords,
                                      const PCGrid& grid,
                                      std::size_t quad_points_per_dim) {
    spec.validate();
    grid.validate();
    if (spec.n > 6) {
        throw InputError("exact_marginal_quadrature: n > 6 is too costly");
    }
    if (grid.dims() != 2) {
        throw InputError("exact_marginal_quadrature: grid must be 2-D");
    }
    if (quad_points_per_dim < 8) {
        throw InputError("exact_marginal_quadrature: need >= 8 nodes per dim");
    }
    const std::size_t ci = coords.first, cj = coords.second;
    if (ci < 1 || ci > spec.n || cj < 1 || cj > spec.n || ci == cj) {
        throw InputError("exact_marginal_quadrature: coordinate pair must name "
                         "two distinct coordinates in [1, n]");
    }

    QuadContext ctx;
    ctx.spec = &spec;
    ctx.beta = spec.beta_target;
    ctx.i0 = ci - 1;
    ctx.j0 = cj - 1;
    ctx.box_lo.resize(spec.n);
    ctx.box_hi.resize(spec.n);
    const auto* quartic = std::get_if<model::QuarticChainParams>(&spec.potential);
    if (quartic) {
        if (!(quartic->amplitude > 0.0)) {
            throw InputError("exact_marginal_quadrature: a flat potential "
                             "(amplitude 0) has no normalizable BG density");
        }
        for (std::size_t r = 0; r < spec.n; ++r) {
            const double sigma =
                quartic->b[r] / std::sqrt(8.0 * quartic->amplitude * ctx.beta);
            const double reach = 2.0 * quartic->b[r] + 5.0 * sigma;
            ctx.box_lo[r] = quartic->d[r] - reach;
            ctx.box_hi[r] = quartic->d[r] + reach;
        }
    } else {
        const auto& h = std::get<model::HarmonicParams>(spec.potential);
        for (std::size_t r = 0; r < spec.n; ++r) {
            const double sigma = 1.0 / std::sqrt(ctx.beta * h.omega[r]);
            ctx.box_lo[r] = -7.0 * sigma;
            ctx.box_hi[r] = 7.0 * sigma;
        }
    }
    for (std::size_t r = 0; r < spec.n; ++r) {
        if (r != ctx.i0 && r != ctx.j0) ctx.rest.push_back(r);
    }
    ctx.i_matters = ctx.j_matters = false;
    if (quartic && quartic->k != 0.0) {
        auto couples_rest = [&](std::size_t c) {
            for (const std::size_t r : ctx.rest) {
                if (r + 1 == c || c + 1 == r) return true;
            }
            return false;
        };
        ctx.i_matters = couples_rest(ctx.i0);
        ctx.j_matters = couples_rest(ctx.j0);
    }

    // Convergence probe on the box total mass: the inner-dimension node count
    // is the only accuracy knob exposed, so double it and compare.
    const double ilo = ctx.box_lo[ctx.i0], ihi = ctx.box_hi[ctx.i0];
    const double jlo = ctx.box_lo[ctx.j0], jhi = ctx.box_hi[ctx.j0];
    ctx.qpd = quad_points_per_dim;
    const double probe1 = plane_integral(ctx, ilo, ihi, jlo, jhi, 32);
    ctx.psi_cache.clear();
    ctx.qpd = 2 * quad_points_per_dim;
    const double probe2 = plane_integral(ctx, ilo, ihi, jlo, jhi, 32);
    if (!(probe2 > 0.0) ||
        std::abs(probe2 - probe1) > 1e-6 * std::abs(probe2)) {
        throw NumericalError(
            "exact_marginal_quadrature: total mass moved by more than 1e-6 "
            "relative when doubling quad_points_per_dim; raise it");
    }
    ctx.psi_cache.clear();
    ctx.qpd = quad_points_per_dim;

    const double z_total = plane_integral(ctx, ilo, ihi, jlo, jhi, 512);

    // Bin masses: one global fine grid, composite Simpson (8 subintervals per
    // axis per bin) over each bin patch.
    constexpr std::size_t kSub = 8;
    const std::size_t na = grid.bins[0] * kSub + 1;
    const std::size_t nb = grid.bins[1] * kSub + 1;
    const double ha = (grid.hi[0] - grid.lo[0]) / static_cast<double>(na - 1);
    const double hb = (grid.hi[1] - grid.lo[1]) / static_cast<double>(nb - 1);
    std::vector<double> vals(na * nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const double xj = grid.lo[1] + hb * static_cast<double>(b);
        for (std::size_t a = 0; a < na; ++a) {
            const double xi = grid.lo[0] + ha * static_cast<double>(a);
            vals[b * na + a] = density(ctx, xi, xj);
        }
    }
    const std::vector<double> wa = simpson_weights(kSub, ha);
    const std::vector<double> wb = simpson_weights(kSub, hb);
    PCHistogram hist;
    hist.grid = grid;
    hist.masses.assign(grid.total_bins(), 0.0);
    for (std::size_t bi = 0; bi < grid.bins[0]; ++bi) {
        for (std::size_t bj = 0; bj < grid.bins[1]; ++bj) {
            double s = 0.0;
            for (std::size_t q = 0; q <= kSub; ++q) {
                const std::size_t row = bj * kSub + q;
                double line = 0.0;
                for (std::size_t t = 0; t <= kSub; ++t) {
                    line += wa[t] * vals[row * na + bi * kSub + t];
                }
                s += wb[q] * line;
            }
            hist.masses[bi * grid.bins[1] + bj] = s / z_total;
        }
    }
    double total = 0.0;
    for (double v : hist.masses) total += v;
    if (total > 1.0) {
        kernels::scale(hist.masses, 1.0 / total);
        hist.out_of_range_mass = 0.0;
    } else {
        hist.out_of_range_mass = 1.0 - total;
    }
    return hist;
}

std::pair<double, double> marginal_error(const PCHistogram& estimate,
                                         const PCHistogram& exact) {
    const PCGrid& a = estimate.grid;
    const PCGrid& b = exact.grid;
    if (a.bins != b.bins || a.lo != b.lo || a.hi != b.hi) {
        throw InputError("marginal_error: histogram grids differ");
    }
    double sum = 0.0, mx = 0.0;
    for (std::size_t i = 0; i < estimate.masses.size(); ++i) {
        const double d = std::abs(estimate.masses[i] - exact.masses[i]);
        sum += d;
        mx = std::max(mx, d);
    }
    return {sum / static_cast<double>(estimate.masses.size()), mx};
}

PCHistogram coarsen(const PCHistogram& hist, std::size_t factor) {
    if (factor == 0) throw InputError("coarsen: factor must be >= 1");
    const PCGrid& g = hist.grid;
    PCGrid coarse = g;
    for (std::size_t a = 0; a < g.dims(); ++a) {
        if (g.bins[a] % factor != 0) {
            throw InputError("coarsen: bins on axis " + std::to_string(a + 1) +
                             " not divisible by " + std::to_string(factor));
        }
        coarse.bins[a] = g.bins[a] / factor;
    }
    PCHistogram out;
    out.grid = coarse;
    out.masses.assign(coarse.total_bins(), 0.0);
    out.out_of_range_mass = hist.out_of_range_mass;
    for (std::size_t flat = 0; flat < hist.masses.size(); ++flat) {
        std::size_t rem = flat;
        std::size_t cflat = 0;
        for (std::size_t a = 0; a < g.dims(); ++a) {
            std::size_t stride = 1;
            for (std::size_t b = a + 1; b < g.dims(); ++b) stride *= g.bins[b];
            const std::size_t fa = rem / stride;
            rem %= stride;
            cflat = cflat * coarse.bins[a] + fa / factor;
        }
        out.masses[cflat] += hist.masses[flat];
    }
    return out;
}

} // namespace cpca::induced
