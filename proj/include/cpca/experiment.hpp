#pragma once

#include "cpca/induced.hpp"
#include "cpca/model.hpp"
#include "cpca/pca.hpp"
#include "cpca/reweight.hpp"
#include "cpca/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

// Config-driven pipeline: sample every system, reweight, compose axes, emit
// histograms and a run manifest under output_dir.
namespace cpca::experiment {

enum class Mode { COMMON_AXES, INDIVIDUAL_PCA, CANONICAL_BASELINE };

std::string mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct SystemEntry {
    model::SystemSpec spec;
    sampler::SamplerConfig sampler;
    // Replace the configured step sizes by tuned ones (pilot chains on
    // derived seeds) before the production run.
    bool tune = false;
};

struct GridSettings {
    std::size_t bins = 60;
    // Explicit score-plane bounds; default is the data range padded by 10%.
    std::optional<std::vector<double>> lo;
    std::optional<std::vector<double>> hi;
};

struct ExperimentConfig {
    std::vector<SystemEntry> systems;
    std::size_t l = 2;
    std::optional<std::vector<double>> fractions;
    GridSettings grid;
    Mode mode = Mode::COMMON_AXES;
    std::filesystem::path output_dir = "out";
    bool center_pc_scores = true;
    // Concurrent per-system pipelines; 0 means hardware concurrency.
    std::size_t workers = 0;
    bool scatter = false;

    void validate() const;
};

struct SystemReport {
    std::string label;
    std::uint64_t seed = 0;
    std::string target;
    double step_size_x = 0.0;
    double step_size_p = 0.0;
    bool tuned = false;
    std::uint64_t n_samples = 0;
    double acceptance_rate = 0.0;
    // 1/sum(w^2) of the normalized weights.
    double weight_ess = 0.0;
    // Batch-means effective-sample estimate on the energy series.
    double chain_ess = 0.0;
    std::vector<std::uint64_t> well_transitions;
    double sample_seconds = 0.0;
    std::vector<std::string> files;
};

struct RunManifest {
    std::string mode;
    std::filesystem::path output_dir;
    // The fully normalized config as a JSON document.
    std::string config_echo;
    bool completed = false;
    std::string error;
    std::vector<double> fractions;
    std::vector<SystemReport> systems;
    std::vector<std::string> warnings;
    // Relative to output_dir; every listed file exists, even on abort.
    std::vector<std::string> files;
    double total_seconds = 0.0;
};

// Parses the JSON config document; unknown keys, type mismatches, and any
// violated module invariant are reported with the offending key path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Runs the configured pipeline and writes all artifacts plus manifest.json.
// On a module error the partial manifest still lands before the rethrow.
RunManifest run_experiment(const ExperimentConfig& cfg);

// The sampler configuration the pipeline runs for one system: target chosen
// by the mode (the canonical baseline also starts at d - b), then optional
// step-size tuning.
sampler::SamplerConfig resolve_sampler(const ExperimentConfig& cfg,
                                       const SystemEntry& entry);

// Score-plane grid for the induced histograms: explicit bounds if configured,
// otherwise the PC-score data range over the sequences padded by 10%.
induced::PCGrid score_grid(const GridSettings& gs, const pca::CommonAxes& axes,
                           std::span<const reweight::WeightedSequence> seqs);

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path);

// Projected points of several trajectories in one labeled CSV, thinned to at
// most max_rows.
void emit_scatter(std::span<const sampler::Trajectory> trajs,
                  std::span<const model::SystemSpec> specs,
                  const std::filesystem::path& path,
                  std::size_t max_rows = 50'000);

// The bundled Figure-1 experiment (two 4-DOF quartic chains): the same
// document as configs/fig1.cfg, embedded so `repro-fig1` needs no data files.
std::string fig1_config_text();

} // namespace cpca::experiment
