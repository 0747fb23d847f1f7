#include "cpca/errors.hpp"
#include "cpca/experiment.hpp"
#include "cpca/induced.hpp"
#include "cpca/io.hpp"
#include "cpca/kernels.hpp"
#include "cpca/pca.hpp"
#include "cpca/reweight.hpp"
#include "cpca/rng.hpp"
#include "cpca/sampler.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cpca;

namespace {

void ensure_dir(const fs::path& dir) {
    try {
        fs::create_directories(dir);
    } catch (const fs::filesystem_error& e) {
        throw IoError("cannot create output directory '" + dir.string() +
                      "': " + e.what());
    }
}

experiment::ExperimentConfig load_with_overrides(
    const std::string& config_path, const std::string& out_dir,
    const std::optional<std::uint64_t>& seed, const std::string& mode) {
    auto cfg = experiment::load_config(config_path);
    if (!out_dir.empty()) {
        cfg.output_dir = out_dir;
    }
    if (!mode.empty()) {
        cfg.mode = experiment::mode_from_name(mode);
    }
    if (seed) {
        for (std::size_t s = 0; s < cfg.systems.size(); ++s) {
            cfg.systems[s].sampler.seed = derive_seed(*seed, s);
        }
    }
    cfg.validate();
    return cfg;
}

void print_manifest(const experiment::RunManifest& man) {
    std::cout << man.mode << ": wrote " << man.files.size() << " files to "
              << man.output_dir.string() << " in " << man.total_seconds
              << " s\n";
    for (const auto& rep : man.systems) {
        std::cout << "  " << rep.label << ": acceptance " << rep.acceptance_rate
                  << ", weight ESS " << rep.weight_ess << " of "
                  << rep.n_samples << ", transitions [";
        for (std::size_t i = 0; i < rep.well_transitions.size(); ++i) {
            std::cout << (i ? " " : "") << rep.well_transitions[i];
        }
        std::cout << "]\n";
    }
    for (const auto& warning : man.warnings) {
        std::cout << "  warning: " << warning << "\n";
    }
}

std::string traj_file(const std::string& label) {
    return "traj_" + label + ".txt";
}
std::string weights_file(const std::string& label) {
    return "weights_" + label + ".txt";
}
std::string axes_file(const experiment::ExperimentConfig& cfg,
                      const std::string& label) {
    return cfg.mode == experiment::Mode::INDIVIDUAL_PCA
               ? "axes_" + label + ".txt"
               : "axes.txt";
}

void cmd_run(const experiment::ExperimentConfig& cfg) {
    print_manifest(experiment::run_experiment(cfg));
}

// Sampling stage alone: trajectories only, no weights or axes.
void cmd_sample(const experiment::ExperimentConfig& cfg) {
    ensure_dir(cfg.output_dir);
    for (const auto& entry : cfg.systems) {
        const auto scfg = experiment::resolve_sampler(cfg, entry);
        const auto traj = sampler::metropolis_sample(entry.spec, scfg);
        const auto path = cfg.output_dir / traj_file(entry.spec.label);
        io::write_trajectory(traj, entry.spec.m(), path);
        std::cout << path.string() << ": " << traj.size()
                  << " samples, acceptance " << traj.acceptance_rate << "\n";
    }
}

// Reweighting plus axes from stored trajectories.
void cmd_axes(const experiment::ExperimentConfig& cfg) {
    std::vector<reweight::WeightedSequence> seqs;
    seqs.reserve(cfg.systems.size());
    for (const auto& entry : cfg.systems) {
        const auto traj =
            io::read_trajectory(entry.spec, cfg.output_dir / traj_file(entry.spec.label));
        seqs.push_back(reweight::compute_weights(entry.spec, traj));
        io::write_weights(seqs.back(),
                          cfg.output_dir / weights_file(entry.spec.label));
    }
    if (cfg.mode == experiment::Mode::INDIVIDUAL_PCA) {
        for (std::size_t s = 0; s < seqs.size(); ++s) {
            const std::span<const reweight::WeightedSequence> one{&seqs[s], 1};
            auto axes = pca::build_axes(pca::composed_stats(one), cfg.l);
            if (!cfg.center_pc_scores) {
                axes.mean.assign(axes.m, 0.0);
            }
            const auto path =
                cfg.output_dir / axes_file(cfg, cfg.systems[s].spec.label);
            io::write_axes(axes, path);
            std::cout << path.string() << "\n";
        }
    } else {
        auto axes = pca::build_axes(pca::composed_stats(seqs, cfg.fractions), cfg.l);
        if (!cfg.center_pc_scores) {
            axes.mean.assign(axes.m, 0.0);
        }
        const auto path = cfg.output_dir / "axes.txt";
        io::write_axes(axes, path);
        std::cout << path.string() << "\n";
    }
}

// Induced histograms from stored weights and axes.
void cmd_hist(const experiment::ExperimentConfig& cfg) {
    if (cfg.l != 2) {
        throw ConfigError("hist needs l = 2, got l = " + std::to_string(cfg.l));
    }
    std::vector<reweight::WeightedSequence> seqs;
    seqs.reserve(cfg.systems.size());
    for (const auto& entry : cfg.systems) {
        const auto path = cfg.output_dir / weights_file(entry.spec.label);
        seqs.push_back(io::read_weights(path));
        if (seqs.back().label != entry.spec.label) {
            throw IoError("'" + path.string() + "' holds weights for system '" +
                          seqs.back().label + "', expected '" +
                          entry.spec.label + "'");
        }
    }
    const auto write_one = [&](const reweight::WeightedSequence& ws,
                               const pca::CommonAxes& axes,
                               const induced::PCGrid& grid,
                               const std::string& label) {
        const auto hist = induced::induced_histogram(ws, axes, grid);
        const auto path = cfg.output_dir / ("hist_" + label + ".csv");
        io::write_histogram(hist, path);
        std::cout << path.string() << "\n";
    };
    if (cfg.mode == experiment::Mode::INDIVIDUAL_PCA) {
        for (std::size_t s = 0; s < seqs.size(); ++s) {
            const auto& label = cfg.systems[s].spec.label;
            const auto axes = io::read_axes(cfg.output_dir / axes_file(cfg, label));
            const std::span<const reweight::WeightedSequence> one{&seqs[s], 1};
            write_one(seqs[s], axes, experiment::score_grid(cfg.grid, axes, one),
                      label);
        }
    } else {
        const auto axes = io::read_axes(cfg.output_dir / "axes.txt");
        const auto grid = experiment::score_grid(cfg.grid, axes, seqs);
        for (std::size_t s = 0; s < seqs.size(); ++s) {
            write_one(seqs[s], axes, grid, cfg.systems[s].spec.label);
        }
    }
}

void cmd_repro_fig1(const std::string& out_dir,
                    const std::optional<std::uint64_t>& seed) {
    auto base = experiment::parse_config(experiment::fig1_config_text());
    if (seed) {
        for (std::size_t s = 0; s < base.systems.size(); ++s) {
            base.systems[s].sampler.seed = derive_seed(*seed, s);
        }
    }
    const fs::path root = out_dir.empty() ? fs::path("out/fig1") : fs::path(out_dir);
    const struct {
        experiment::Mode mode;
        const char* sub;
        bool scatter;
    } runs[] = {
        {experiment::Mode::COMMON_AXES, "common", true},
        {experiment::Mode::INDIVIDUAL_PCA, "individual", false},
        {experiment::Mode::CANONICAL_BASELINE, "canonical", false},
    };
    for (const auto& r : runs) {
        auto cfg = base;
        cfg.mode = r.mode;
        cfg.scatter = r.scatter;
        cfg.output_dir = root / r.sub;
        cmd_run(cfg);
    }
}

// ---- fast invariant suite (`check`) ----------------------------------------

void check_ok(bool condition, const std::string& name) {
    if (!condition) {
        throw NumericalError("invariant check failed: " + name);
    }
    std::cout << "ok: " << name << "\n";
}

std::vector<double> random_vector(SplitMix64& r, std::size_t size, double lo,
                                  double hi) {
    std::vector<double> v(size);
    for (auto& x : v) {
        x = lo + (hi - lo) * r.uniform01();
    }
    return v;
}

void check_backend_equivalence(SplitMix64& r) {
    if (!kernels::backend_supported(kernels::Backend::avx2)) {
        std::cout << "ok: avx2 unavailable, scalar backend only\n";
        return;
    }
    const auto initial = kernels::active_backend();
    bool same = true;
    for (const std::size_t size : {1u, 5u, 64u, 1003u}) {
        const auto x = random_vector(r, size, -30.0, 30.0);
        const auto y = random_vector(r, size, -2.0, 2.0);
        std::vector<double> e_scalar(size), e_avx2(size);
        kernels::set_backend(kernels::Backend::scalar);
        const double sum_s = kernels::reduce_sum(x);
        const double dot_s = kernels::dot(x, y);
        kernels::exp_shifted(x, 1.25, e_scalar);
        kernels::set_backend(kernels::Backend::avx2);
        same = same && sum_s == kernels::reduce_sum(x);
        same = same && dot_s == kernels::dot(x, y);
        kernels::exp_shifted(x, 1.25, e_avx2);
        same = same && e_scalar == e_avx2;
    }
    kernels::set_backend(initial);
    check_ok(same, "scalar and avx2 backends agree bit for bit");
}

void check_weight_normalization(SplitMix64& r) {
    model::SystemSpec spec;
    spec.n = 2;
    spec.potential = model::HarmonicParams{{1.0, 2.0}};
    spec.beta_target = 1.0;
    spec.beta_lo = 0.25;
    spec.beta_hi = 1.0;
    spec.projection = {1, 2};
    spec.label = "check";
    sampler::SamplerConfig scfg;
    scfg.n_steps = 2000;
    scfg.burn_in = 500;
    scfg.seed = r.next_u64();
    const auto traj = sampler::metropolis_sample(spec, scfg);
    const auto ws = reweight::compute_weights(spec, traj);
    ws.validate();
    const double ess = reweight::effective_sample_size(ws);
    check_ok(ess >= 1.0 && ess <= static_cast<double>(ws.size()),
             "weights normalized, effective sample size in [1, N]");
}

void check_composition_identity(SplitMix64& r) {
    const std::size_t half = 64;
    reweight::WeightedSequence a, b;
    a.label = "a";
    b.label = "b";
    std::vector<std::vector<double>> pooled(3);
    for (auto* seq : {&a, &b}) {
        seq->cols.resize(3);
        for (std::size_t j = 0; j < 3; ++j) {
            seq->cols[j] = random_vector(r, half, -2.0, 2.0);
            pooled[j].insert(pooled[j].end(), seq->cols[j].begin(),
                             seq->cols[j].end());
        }
        seq->weights.assign(half, 1.0 / half);
        seq->n_steps = half;
    }
    const reweight::WeightedSequence seqs[] = {a, b};
    const auto stats = pca::composed_stats(seqs);
    const auto [mean, cov] = pca::single_sequence_stats(pooled);
    double worst = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        worst = std::max(worst, std::abs(stats.mean[i] - mean[i]));
    }
    for (std::size_t i = 0; i < 9; ++i) {
        worst = std::max(worst, std::abs(stats.covariance[i] - cov[i]));
    }
    check_ok(worst <= 1e-12,
             "composed stats match pooled stats for uniform weights");
}

void check_eigen(SplitMix64& r) {
    const std::size_t m = 6;
    std::vector<double> mat(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = 2.0 * r.uniform01() - 1.0;
            mat[i * m + j] = v;
            mat[j * m + i] = v;
        }
    }
    const auto eig = pca::symmetric_eigen(mat, m);
    double residual = 0.0;
    double ortho = 0.0;
    double trace = 0.0;
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        sum += eig.values[k];
        trace += mat[k * m + k];
        for (std::size_t i = 0; i < m; ++i) {
            double av = 0.0;
            double dot_ki = 0.0;
            for (std::size_t j = 0; j < m; ++j) {
                av += mat[i * m + j] * eig.vectors[k * m + j];
                dot_ki += eig.vectors[k * m + j] * eig.vectors[i * m + j];
            }
            residual = std::max(
                residual, std::abs(av - eig.values[k] * eig.vectors[k * m + i]));
            ortho = std::max(ortho, std::abs(dot_ki - (k == i ? 1.0 : 0.0)));
        }
    }
    check_ok(residual < 1e-10 && ortho < 1e-10 && std::abs(sum - trace) < 1e-10,
             "Jacobi eigensolve: residual, orthonormality, trace");
}

void check_histogram_bookkeeping(SplitMix64& r) {
    const std::size_t count = 4096;
    reweight::WeightedSequence ws;
    ws.label = "check";
    ws.cols.resize(2);
    ws.cols[0] = random_vector(r, count, -3.0, 3.0);
    ws.cols[1] = random_vector(r, count, -3.0, 3.0);
    ws.weights.assign(count, 1.0 / count);
    ws.n_steps = count;
    induced::PCGrid grid;
    grid.lo = {-2.0, -2.0};
    grid.hi = {2.0, 2.0};
    grid.bins = {16, 16};
    const auto hist = induced::reweighted_marginal(ws, {1, 2}, grid);
    double total = hist.out_of_range_mass;
    for (const double mass : hist.masses) {
        total += mass;
    }
    const auto coarse = induced::coarsen(hist, 4);
    bool additive = coarse.out_of_range_mass == hist.out_of_range_mass;
    for (std::size_t ci = 0; ci < 4 && additive; ++ci) {
        for (std::size_t cj = 0; cj < 4 && additive; ++cj) {
            double block = 0.0;
            for (std::size_t di = 0; di < 4; ++di) {
                for (std::size_t dj = 0; dj < 4; ++dj) {
                    block += hist.masses[(4 * ci + di) * 16 + (4 * cj + dj)];
                }
            }
            additive = block == coarse.masses[ci * 4 + cj];
        }
    }
    check_ok(std::abs(total - 1.0) <= 1e-10 && additive,
             "histogram mass conservation and exact refinement additivity");
}

void check_sampler_determinism(SplitMix64& r) {
    model::SystemSpec spec;
    spec.n = 1;
    spec.potential = model::QuarticChainParams{{1.0}, {0.0}, 0.0, 3.0};
    spec.beta_lo = 0.5;
    spec.beta_hi = 1.0;
    spec.projection = {1};
    spec.label = "check";
    sampler::SamplerConfig scfg;
    scfg.n_steps = 1000;
    scfg.seed = r.next_u64();
    const auto t1 = sampler::metropolis_sample(spec, scfg);
    const auto t2 = sampler::metropolis_sample(spec, scfg);
    check_ok(t1.xs == t2.xs && t1.ps == t2.ps && t1.energies == t2.energies,
             "sampler is deterministic for a fixed seed");
}

void cmd_check(std::uint64_t seed) {
    SplitMix64 r(seed);
    check_backend_equivalence(r);
    check_weight_normalization(r);
    check_composition_identity(r);
    check_eigen(r);
    check_histogram_bookkeeping(r);
    check_sampler_determinism(r);
    std::cout << "all invariants hold\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delocalized-ensemble sampling, reweighting, and common "
                 "principal axes"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string mode_arg;
    std::optional<std::uint64_t> seed;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--out", out_dir, "output directory override");
        sub->add_option("--seed", seed,
                        "base seed override; per-system seeds are derived");
        sub->add_option("--mode", mode_arg,
                        "mode override: common_axes, individual_pca, or "
                        "canonical_baseline");
    };

    auto* run = app.add_subcommand("run", "full pipeline: sample, reweight, "
                                          "axes, histograms, manifest");
    add_common(run);
    auto* sample = app.add_subcommand("sample", "sampling stage only");
    add_common(sample);
    auto* axes = app.add_subcommand(
        "axes", "weights and PC axes from stored trajectories");
    add_common(axes);
    auto* hist = app.add_subcommand(
        "hist", "induced histograms from stored weights and axes");
    add_common(hist);
    auto* check =
        app.add_subcommand("check", "fast randomized invariant suite");
    check->add_option("--seed", seed, "suite seed");
    auto* repro = app.add_subcommand(
        "repro-fig1", "bundled two-system experiment in all three modes");
    repro->add_option("--out", out_dir, "output root (default out/fig1)");
    repro->add_option("--seed", seed,
                      "base seed override; per-system seeds are derived");

    try {
        app.parse(argc, argv);
        const auto cfg = [&] {
            return load_with_overrides(config_path, out_dir, seed, mode_arg);
        };
        if (run->parsed()) {
            cmd_run(cfg());
        } else if (sample->parsed()) {
            cmd_sample(cfg());
        } else if (axes->parsed()) {
            cmd_axes(cfg());
        } else if (hist->parsed()) {
            cmd_hist(cfg());
        } else if (check->parsed()) {
            cmd_check(seed.value_or(12345));
        } else if (repro->parsed()) {
            cmd_repro_fig1(out_dir, seed);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
