#include "cpca/io.hpp"

#include "cpca/errors.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cpca::io {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line_no,
                       const std::string& msg) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) {
        toks.push_back(tok);
    }
    return toks;
}

double parse_double(const std::string& tok, const std::filesystem::path& path,
                    std::size_t line_no) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end != begin + tok.size() || tok.empty()) {
        fail(path, line_no, "expected a number, got '" + tok + "'");
    }
    return v;
}

std::uint64_t parse_u64(const std::string& tok, const std::filesystem::path& path,
                        std::size_t line_no) {
    if (tok.empty() || !std::isdigit(static_cast<unsigned char>(tok[0]))) {
        fail(path, line_no, "expected a nonnegative integer, got '" + tok + "'");
    }
    const char* begin = tok.c_str();
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(begin, &end, 10);
    if (end != begin + tok.size() || errno == ERANGE) {
        fail(path, line_no, "expected a nonnegative integer, got '" + tok + "'");
    }
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    return out;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open '" + path.string() + "' for reading");
    }
    return in;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

void check_label(const std::string& label, const char* what) {
    if (label.empty()) {
        throw IoError(std::string(what) + " label is empty");
    }
    for (const char c : label) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
            throw IoError(std::string(what) + " label '" + label +
                          "' contains whitespace or a comma");
        }
    }
}

// Reads the next line that contains at least one token; returns false at EOF.
bool next_row(std::ifstream& in, std::size_t& line_no,
              std::vector<std::string>& toks) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        toks = split_ws(line);
        if (!toks.empty()) {
            return true;
        }
    }
    return false;
}

} // namespace

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trajectory(const sampler::Trajectory& traj, std::size_t m,
                      const std::filesystem::path& path) {
    check_label(traj.spec_label, "trajectory");
    auto out = open_out(path);
    out << "# " << traj.spec_label << ' ' << traj.n << ' ' << m << ' '
        << traj.seed << ' ' << sampler::target_name(traj.target) << '\n';
    const std::size_t steps = traj.size();
    for (std::size_t nu = 0; nu < steps; ++nu) {
        out << nu + 1;
        for (const double v : traj.x_row(nu)) {
            out << ' ' << fmt17(v);
        }
        for (const double v : traj.p_row(nu)) {
            out << ' ' << fmt17(v);
        }
        out << '\n';
    }
    finish_write(out, path);
}

sampler::Trajectory read_trajectory(const model::SystemSpec& spec,
                                    const std::filesystem::path& path) {
    auto in = open_in(path);
    std::size_t line_no = 0;
    std::vector<std::string> toks;
    if (!next_row(in, line_no, toks)) {
        fail(path, 1, "missing trajectory header");
    }
    if (toks.size() != 6 || toks[0] != "#") {
        fail(path, line_no, "malformed trajectory header, expected "
                            "'# label n m seed target'");
    }
    sampler::Trajectory traj;
    traj.spec_label = toks[1];
    traj.n = parse_u64(toks[2], path, line_no);
    const std::uint64_t m = parse_u64(toks[3], path, line_no);
    traj.seed = parse_u64(toks[4], path, line_no);
    try {
        traj.target = sampler::target_from_name(toks[5]);
    } catch (const InputError& e) {
        fail(path, line_no, e.what());
    }
    if (traj.spec_label != spec.label) {
        fail(path, line_no, "trajectory belongs to system '" + traj.spec_label +
                                "', not '" + spec.label + "'");
    }
    if (traj.n != spec.n || m != spec.m()) {
        fail(path, line_no, "header dimensions (n=" + std::to_string(traj.n) +
                                ", m=" + std::to_string(m) +
                                ") do not match system '" + spec.label + "'");
    }

    std::size_t rows = 0;
    while (next_row(in, line_no, toks)) {
        if (toks.size() != 1 + 2 * traj.n) {
            fail(path, line_no, "expected " + std::to_string(1 + 2 * traj.n) +
                                    " columns, got " + std::to_string(toks.size()));
        }
        const std::uint64_t nu = parse_u64(toks[0], path, line_no);
        if (nu != rows + 1) {
            fail(path, line_no, "sample index " + std::to_string(nu) +
                                    " out of order, expected " +
                                    std::to_string(rows + 1));
        }
        for (std::size_t i = 0; i < traj.n; ++i) {
            traj.xs.push_back(parse_double(toks[1 + i], path, line_no));
        }
        for (std::size_t i = 0; i < traj.n; ++i) {
            traj.ps.push_back(parse_double(toks[1 + traj.n + i], path, line_no));
        }
        ++rows;
    }
    traj.energies =
        model::total_energy_batch(spec, traj.x_columns(), traj.p_columns());
    return traj;
}

void write_weights(const reweight::WeightedSequence& ws,
                   const std::filesystem::path& path) {
    ws.validate();
    check_label(ws.label, "weight sequence");
    auto out = open_out(path);
    out << "# " << ws.label << ' ' << ws.m() << '\n';
    for (std::size_t nu = 0; nu < ws.size(); ++nu) {
        out << nu + 1 << ' ' << fmt17(ws.weights[nu]);
        for (std::size_t j = 0; j < ws.m(); ++j) {
            out << ' ' << fmt17(ws.cols[j][nu]);
        }
        out << '\n';
    }
    finish_write(out, path);
}

reweight::WeightedSequence read_weights(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::size_t line_no = 0;
    std::vector<std::string> toks;
    if (!next_row(in, line_no, toks)) {
        fail(path, 1, "missing weight header");
    }
    if (toks.size() != 3 || toks[0] != "#") {
        fail(path, line_no, "malformed weight header, expected '# label m'");
    }
    reweight::WeightedSequence ws;
    ws.label = toks[1];
    const std::uint64_t m = parse_u64(toks[2], path, line_no);
    if (m == 0) {
        fail(path, line_no, "weight header has m = 0");
    }
    ws.cols.resize(m);
    while (next_row(in, line_no, toks)) {
        if (toks.size() != 2 + m) {
            fail(path, line_no, "expected " + std::to_string(2 + m) +
                                    " columns, got " + std::to_string(toks.size()));
        }
        const std::uint64_t nu = parse_u64(toks[0], path, line_no);
        if (nu != ws.weights.size() + 1) {
            fail(path, line_no, "sample index " + std::to_string(nu) +
                                    " out of order, expected " +
                                    std::to_string(ws.weights.size() + 1));
        }
        ws.weights.push_back(parse_double(toks[1], path, line_no));
        for (std::size_t j = 0; j < m; ++j) {
            ws.cols[j].push_back(parse_double(toks[2 + j], path, line_no));
        }
    }
    ws.n_steps = ws.weights.size();
    ws.validate();
    return ws;
}

void write_axes(const pca::CommonAxes& axes, const std::filesystem::path& path) {
    auto out = open_out(path);
    for (std::size_t k = 0; k < axes.l; ++k) {
        out << (k ? " " : "") << fmt17(axes.eigenvalues[k]);
    }
    out << '\n';
    for (std::size_t k = 0; k < axes.l; ++k) {
        const auto u = axes.axis(k);
        for (std::size_t i = 0; i < axes.m; ++i) {
            out << (i ? " " : "") << fmt17(u[i]);
        }
        out << '\n';
    }
    for (std::size_t i = 0; i < axes.m; ++i) {
        out << (i ? " " : "") << fmt17(axes.mean[i]);
    }
    out << '\n';
    finish_write(out, path);
}

pca::CommonAxes read_axes(const std::filesystem::path& path) {
    auto in = open_in(path);
    std::size_t line_no = 0;
    std::vector<std::string> toks;
    std::vector<std::vector<double>> rows;
    while (next_row(in, line_no, toks)) {
        std::vector<double> row;
        row.reserve(toks.size());
        for (const auto& tok : toks) {
            row.push_back(parse_double(tok, path, line_no));
        }
        rows.push_back(std::move(row));
    }
    if (rows.size() < 3) {
        fail(path, line_no, "axes file needs an eigenvalue line, eigenvector "
                            "lines, and a mean line");
    }
    pca::CommonAxes axes;
    axes.eigenvalues = rows.front();
    axes.l = axes.eigenvalues.size();
    if (rows.size() != axes.l + 2) {
        fail(path, line_no,
             std::to_string(axes.l) + " eigenvalues imply " +
                 std::to_string(axes.l + 2) + " lines, got " +
                 std::to_string(rows.size()));
    }
    axes.m = rows[1].size();
    for (std::size_t k = 1; k <= axes.l + 1; ++k) {
        if (rows[k].size() != axes.m) {
            fail(path, line_no, "inconsistent row width on line " +
                                    std::to_string(k + 1));
        }
    }
    for (std::size_t k = 0; k < axes.l; ++k) {
        axes.eigenvectors.insert(axes.eigenvectors.end(), rows[k + 1].begin(),
                                 rows[k + 1].end());
    }
    axes.mean = rows.back();
    return axes;
}

void write_histogram(const induced::PCHistogram& hist,
                     const std::filesystem::path& path) {
    const auto& g = hist.grid;
    if (g.dims() != 2) {
        throw InputError("histogram serialization requires a 2-D grid, got " +
                         std::to_string(g.dims()) + " dimensions");
    }
    auto out = open_out(path);
    out << "# grid " << fmt17(g.lo[0]) << ' ' << fmt17(g.hi[0]) << ' '
        << g.bins[0] << ' ' << fmt17(g.lo[1]) << ' ' << fmt17(g.hi[1]) << ' '
        << g.bins[1] << " out_of_range_mass " << fmt17(hist.out_of_range_mass)
        << '\n';
    out << "bin_i,bin_j,center_1,center_2,mass,neg_log_mass\n";
    for (std::size_t i = 0; i < g.bins[0]; ++i) {
        for (std::size_t j = 0; j < g.bins[1]; ++j) {
            const double mass = hist.masses[i * g.bins[1] + j];
            out << i << ',' << j << ',' << fmt17(g.center(0, i)) << ','
                << fmt17(g.center(1, j)) << ',' << fmt17(mass) << ','
                << fmt17(-std::log(mass)) << '\n';
        }
    }
    finish_write(out, path);
}

void write_scatter(
    std::span<const std::pair<std::string, std::vector<std::vector<double>>>>
        labeled_cols,
    const std::filesystem::path& path, std::size_t max_rows) {
    if (labeled_cols.empty() || max_rows == 0) {
        throw InputError("scatter output needs at least one point set and a "
                         "positive row budget");
    }
    const std::size_t m = labeled_cols.front().second.size();
    std::size_t total = 0;
    for (const auto& [label, cols] : labeled_cols) {
        check_label(label, "scatter");
        if (cols.size() != m || m == 0) {
            throw InputError("scatter point sets must share one positive "
                             "dimension");
        }
        total += cols[0].size();
    }
    const std::size_t stride = total <= max_rows ? 1 : (total + max_rows - 1) / max_rows;

    auto out = open_out(path);
    out << "label";
    for (std::size_t j = 0; j < m; ++j) {
        out << ",z_" << j + 1;
    }
    out << '\n';
    for (const auto& [label, cols] : labeled_cols) {
        for (std::size_t nu = 0; nu < cols[0].size(); nu += stride) {
            out << label;
            for (std::size_t j = 0; j < m; ++j) {
                out << ',' << fmt17(cols[j][nu]);
            }
            out << '\n';
        }
    }
    finish_write(out, path);
}

} // namespace cpca::io
