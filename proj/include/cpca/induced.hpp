#pragma once

#include "cpca/pca.hpp"
#include "cpca/reweight.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace cpca::induced {

struct PCGrid {
    std::vector<double> lo;
    std::vector<double> hi;
    std::vector<std::size_t> bins;

    std::size_t dims() const { return bins.size(); }
    std::size_t total_bins() const;
    // lo < hi per axis, bins >= 1, total bin count <= 1e7.
    void validate() const;
    // Flattened row-major bin index, or nullopt for a point outside the grid.
    // Bins are half-open [edge_k, edge_{k+1}) with the last bin closed at hi.
    std::optional<std::size_t> bin_index(std::span<const double> point) const;
    double center(std::size_t axis, std::size_t bin) const;
};

// Sample-based masses accumulate in 2^-52 fixed point (per-bin int64
// counters), so every mass is an exact multiple of 2^-52 and merging bins is
// exactly associative; quadrature-based masses are plain doubles.
struct PCHistogram {
    PCGrid grid;
    std::vector<double> masses;
    double out_of_range_mass = 0.0;
};

// Push every weighted sample through phi and accumulate its weight into the
// containing bin.
PCHistogram induced_histogram(const reweight::WeightedSequence& ws,
                              const pca::CommonAxes& axes, const PCGrid& grid);

// Weighted 2-D histogram of two raw (projected, not PC) coordinate columns;
// coordinates are 1-based positions in the sequence's column list.
PCHistogram reweighted_marginal(const reweight::WeightedSequence& ws,
                                std::pair<std::size_t, std::size_t> coords,
                                const PCGrid& grid);

// Exact BG marginal of raw coordinates (x_i, x_j), 1-based, by tensor
// quadrature of exp(-beta_target U): trapezoid with quad_points_per_dim nodes
// over each integrated-out dimension (momenta cancel analytically), per-bin
// composite Simpson over the pair plane, normalized over an automatic box
// [d - 2b - 5 sigma, d + 2b + 5 sigma] (harmonic: +-7 sigma) with sigma from
// a Laplace estimate at the well bottom. Throws NumericalError when doubling
// quad_points_per_dim moves the probe total mass by more than 1e-6 relative.
PCHistogram exact_marginal_quadrature(const model::SystemSpec& spec,
                                      std::pair<std::size_t, std::size_t> coords,
                                      const PCGrid& grid,
                                      std::size_t quad_points_per_dim);

// (mean, max) absolute bin-mass deviation; grids must match exactly.
std::pair<double, double> marginal_error(const PCHistogram& estimate,
                                         const PCHistogram& exact);

// Merge factor^dims blocks of bins into one; bin counts must divide evenly.
// Exact for sample-based histograms by the fixed-point representation.
PCHistogram coarsen(const PCHistogram& hist, std::size_t factor);

} // namespace cpca::induced
