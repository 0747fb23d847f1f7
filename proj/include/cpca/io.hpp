#pragma once

#include "cpca/induced.hpp"
#include "cpca/pca.hpp"
#include "cpca/reweight.hpp"
#include "cpca/sampler.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

// Columnar text serialization. Every floating-point value is written with 17
// significant digits, so numeric round trips are bit exact. Labels must be
// whitespace-free (enforced at config parse time and re-checked here).
namespace cpca::io {

std::string fmt17(double v);

// Header `# label n m seed target`, then one row `nu x_1 .. x_n p_1 .. p_n`
// per retained sample (nu is the 1-based sample index).
void write_trajectory(const sampler::Trajectory& traj, std::size_t m,
                      const std::filesystem::path& path);
// Re-derives the energy cache from the stored points; bit-identical to the
// cache the chain wrote because the file round-trips exactly.
sampler::Trajectory read_trajectory(const model::SystemSpec& spec,
                                    const std::filesystem::path& path);

// Header `# label m`, rows `nu w z_1 .. z_m`.
void write_weights(const reweight::WeightedSequence& ws,
                   const std::filesystem::path& path);
reweight::WeightedSequence read_weights(const std::filesystem::path& path);

// Eigenvalues line, one line per eigenvector, then the mean line.
void write_axes(const pca::CommonAxes& axes, const std::filesystem::path& path);
pca::CommonAxes read_axes(const std::filesystem::path& path);

// 2-D histograms only: a `# grid ...` metadata line, a CSV column header,
// then `bin_i,bin_j,center_1,center_2,mass,neg_log_mass` rows.
void write_histogram(const induced::PCHistogram& hist,
                     const std::filesystem::path& path);

// Labeled point sets (column layout) interleaved into one CSV, thinned with a
// uniform stride so at most max_rows data rows are written.
void write_scatter(
    std::span<const std::pair<std::string, std::vector<std::vector<double>>>>
        labeled_cols,
    const std::filesystem::path& path, std::size_t max_rows = 50'000);

} // namespace cpca::io
