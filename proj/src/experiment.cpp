#include "cpca/experiment.hpp"

#include "cpca/errors.hpp"
#include "cpca/induced.hpp"
#include "cpca/io.hpp"
#include "cpca/pca.hpp"
#include "cpca/reweight.hpp"

#include "json.hpp"

#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <thread>
#include <variant>

namespace cpca::experiment {

using nlohmann::json;

std::string mode_name(Mode mode) {
    switch (mode) {
    case Mode::COMMON_AXES: return "common_axes";
    case Mode::INDIVIDUAL_PCA: return "individual_pca";
    case Mode::CANONICAL_BASELINE: return "canonical_baseline";
    }
    throw InputError("unreachable mode value");
}

Mode mode_from_name(const std::string& name) {
    if (name == "common_axes") return Mode::COMMON_AXES;
    if (name == "individual_pca") return Mode::INDIVIDUAL_PCA;
    if (name == "canonical_baseline") return Mode::CANONICAL_BASELINE;
    throw ConfigError("unknown mode '" + name + "' (expected common_axes, "
                      "individual_pca, or canonical_baseline)");
}

namespace {

std::string join_path(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
}

[[noreturn]] void key_error(const std::string& path, const std::string& msg) {
    throw ConfigError("config key '" + path + "' " + msg);
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            known = known || it.key() == k;
        }
        if (!known) {
            std::string expect;
            for (const char* k : allowed) {
                if (!expect.empty()) {
                    expect += ", ";
                }
                expect += k;
            }
            throw ConfigError("unknown config key '" + join_path(path, it.key()) +
                              "' (expected one of: " + expect + ")");
        }
    }
}

const json& require_key(const json& obj, const std::string& path,
                        const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
        key_error(join_path(path, key), "is required");
    }
    return *it;
}

double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) {
        key_error(path, "must be a number");
    }
    return v.get<double>();
}

std::uint64_t as_u64(const json& v, const std::string& path) {
    if (!v.is_number_unsigned()) {
        key_error(path, "must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

bool as_bool(const json& v, const std::string& path) {
    if (!v.is_boolean()) {
        key_error(path, "must be a boolean");
    }
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) {
        key_error(path, "must be a string");
    }
    return v.get<std::string>();
}

std::vector<double> as_dvec(const json& v, const std::string& path) {
    if (!v.is_array()) {
        key_error(path, "must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) {
            key_error(path, "must be an array of numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<std::size_t> as_uvec(const json& v, const std::string& path) {
    if (!v.is_array()) {
        key_error(path, "must be an array of nonnegative integers");
    }
    std::vector<std::size_t> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number_unsigned()) {
            key_error(path, "must be an array of nonnegative integers");
        }
        out.push_back(e.get<std::size_t>());
    }
    return out;
}

double opt_double(const json& obj, const std::string& path, const char* key,
                  double fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : as_double(*it, join_path(path, key));
}

std::uint64_t opt_u64(const json& obj, const std::string& path, const char* key,
                      std::uint64_t fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : as_u64(*it, join_path(path, key));
}

bool opt_bool(const json& obj, const std::string& path, const char* key,
              bool fallback) {
    const auto it = obj.find(key);
    return it == obj.end() ? fallback : as_bool(*it, join_path(path, key));
}

model::Potential parse_potential(const json& v, const std::string& path) {
    if (!v.is_object()) {
        key_error(path, "must be a table");
    }
    const std::string type = as_string(require_key(v, path, "type"),
                                       join_path(path, "type"));
    if (type == "quartic_chain") {
        check_keys(v, path, {"type", "b", "d", "k", "amplitude"});
        model::QuarticChainParams p;
        p.b = as_dvec(require_key(v, path, "b"), join_path(path, "b"));
        p.d = as_dvec(require_key(v, path, "d"), join_path(path, "d"));
        p.k = opt_double(v, path, "k", 0.0);
        p.amplitude = opt_double(v, path, "amplitude", 10.0);
        return p;
    }
    if (type == "harmonic") {
        check_keys(v, path, {"type", "omega"});
        return model::HarmonicParams{
            as_dvec(require_key(v, path, "omega"), join_path(path, "omega"))};
    }
    key_error(join_path(path, "type"),
              "must be 'quartic_chain' or 'harmonic', got '" + type + "'");
}

SystemEntry parse_system(const json& v, const std::string& path) {
    if (!v.is_object()) {
        key_error(path, "must be a table");
    }
    check_keys(v, path,
               {"label", "n", "potential", "beta_target", "beta_lo", "beta_hi",
                "projection", "sampler"});
    SystemEntry entry;
    auto& spec = entry.spec;
    spec.label = as_string(require_key(v, path, "label"), join_path(path, "label"));
    spec.n = as_u64(require_key(v, path, "n"), join_path(path, "n"));
    spec.potential =
        parse_potential(require_key(v, path, "potential"), join_path(path, "potential"));
    spec.beta_target = opt_double(v, path, "beta_target", 1.0);
    spec.beta_lo = opt_double(v, path, "beta_lo", spec.beta_target);
    spec.beta_hi = opt_double(v, path, "beta_hi", spec.beta_target);
    if (const auto it = v.find("projection"); it != v.end()) {
        spec.projection = as_uvec(*it, join_path(path, "projection"));
    } else {
        spec.projection.resize(spec.n);
        for (std::size_t i = 0; i < spec.n; ++i) {
            spec.projection[i] = i + 1;
        }
    }

    const auto& s = require_key(v, path, "sampler");
    const std::string spath = join_path(path, "sampler");
    if (!s.is_object()) {
        key_error(spath, "must be a table");
    }
    check_keys(s, spath,
               {"n_steps", "burn_in", "thin", "step_size_x", "step_size_p",
                "seed", "tune"});
    auto& sc = entry.sampler;
    sc.n_steps = as_u64(require_key(s, spath, "n_steps"), join_path(spath, "n_steps"));
    sc.burn_in = opt_u64(s, spath, "burn_in", 0);
    sc.thin = opt_u64(s, spath, "thin", 1);
    sc.step_size_x = opt_double(s, spath, "step_size_x", sc.step_size_x);
    sc.step_size_p = opt_double(s, spath, "step_size_p", sc.step_size_p);
    sc.seed = opt_u64(s, spath, "seed", 1);
    entry.tune = opt_bool(s, spath, "tune", false);
    return entry;
}

json potential_to_json(const model::Potential& pot) {
    json j;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, model::QuarticChainParams>) {
                j["type"] = "quartic_chain";
                j["b"] = p.b;
                j["d"] = p.d;
                j["k"] = p.k;
                j["amplitude"] = p.amplitude;
            } else {
                j["type"] = "harmonic";
                j["omega"] = p.omega;
            }
        },
        pot);
    return j;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["mode"] = mode_name(cfg.mode);
    j["l"] = cfg.l;
    j["output_dir"] = cfg.output_dir.string();
    j["center_pc_scores"] = cfg.center_pc_scores;
    j["workers"] = cfg.workers;
    j["scatter"] = cfg.scatter;
    if (cfg.fractions) {
        j["fractions"] = *cfg.fractions;
    }
    json grid;
    grid["bins"] = cfg.grid.bins;
    if (cfg.grid.lo) {
        grid["lo"] = *cfg.grid.lo;
        grid["hi"] = *cfg.grid.hi;
    }
    j["grid"] = grid;
    j["systems"] = json::array();
    for (const auto& entry : cfg.systems) {
        json s;
        s["label"] = entry.spec.label;
        s["n"] = entry.spec.n;
        s["potential"] = potential_to_json(entry.spec.potential);
        s["beta_target"] = entry.spec.beta_target;
        s["beta_lo"] = entry.spec.beta_lo;
        s["beta_hi"] = entry.spec.beta_hi;
        s["projection"] = entry.spec.projection;
        json sc;
        sc["n_steps"] = entry.sampler.n_steps;
        sc["burn_in"] = entry.sampler.burn_in;
        sc["thin"] = entry.sampler.thin;
        sc["step_size_x"] = entry.sampler.step_size_x;
        sc["step_size_p"] = entry.sampler.step_size_p;
        sc["seed"] = entry.sampler.seed;
        sc["tune"] = entry.tune;
        s["sampler"] = sc;
        j["systems"].push_back(s);
    }
    return j;
}

} // namespace

void ExperimentConfig::validate() const {
    if (systems.empty()) {
        throw ConfigError("config needs at least one system");
    }
    std::set<std::string> labels;
    for (const auto& entry : systems) {
        entry.spec.validate();
        entry.sampler.validate();
        const auto& label = entry.spec.label;
        if (label.empty()) {
            throw ConfigError("system labels must be nonempty");
        }
        for (const char c : label) {
            if (std::isspace(static_cast<unsigned char>(c)) || c == ',') {
                throw ConfigError("system label '" + label +
                                  "' contains whitespace or a comma");
            }
        }
        if (!labels.insert(label).second) {
            throw ConfigError("duplicate system label '" + label + "'");
        }
        if (entry.spec.m() != systems.front().spec.m()) {
            throw ConfigError("all systems must share one projection dimension, "
                              "got m=" + std::to_string(entry.spec.m()) +
                              " for system '" + label + "' vs m=" +
                              std::to_string(systems.front().spec.m()));
        }
    }
    const std::size_t m = systems.front().spec.m();
    if (l < 1 || l > m) {
        throw ConfigError("l must be between 1 and m=" + std::to_string(m) +
                          ", got " + std::to_string(l));
    }
    if (fractions) {
        if (fractions->size() != systems.size()) {
            throw ConfigError("fractions must list one entry per system");
        }
        double sum = 0.0;
        for (const double f : *fractions) {
            if (!(f > 0.0)) {
                throw ConfigError("fractions must be positive");
            }
            sum += f;
        }
        if (std::abs(sum - 1.0) > 1e-12) {
            throw ConfigError("fractions must sum to 1");
        }
    }
    if (grid.bins < 1) {
        throw ConfigError("grid.bins must be at least 1");
    }
    if (grid.lo.has_value() != grid.hi.has_value()) {
        throw ConfigError("grid.lo and grid.hi must be given together");
    }
    if (grid.lo) {
        if (grid.lo->size() != 2 || grid.hi->size() != 2) {
            throw ConfigError("grid.lo and grid.hi must have 2 entries each");
        }
        for (std::size_t k = 0; k < 2; ++k) {
            if (!((*grid.lo)[k] < (*grid.hi)[k])) {
                throw ConfigError("grid bounds must satisfy lo < hi");
            }
        }
    }
    if (output_dir.empty()) {
        throw ConfigError("output_dir must be nonempty");
    }
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config document must be a table");
    }
    check_keys(doc, "",
               {"mode", "l", "output_dir", "center_pc_scores", "workers",
                "scatter", "fractions", "grid", "systems"});

    ExperimentConfig cfg;
    if (const auto it = doc.find("mode"); it != doc.end()) {
        cfg.mode = mode_from_name(as_string(*it, "mode"));
    }
    cfg.l = opt_u64(doc, "", "l", cfg.l);
    if (const auto it = doc.find("output_dir"); it != doc.end()) {
        cfg.output_dir = as_string(*it, "output_dir");
    }
    cfg.center_pc_scores = opt_bool(doc, "", "center_pc_scores", true);
    cfg.workers = opt_u64(doc, "", "workers", 0);
    cfg.scatter = opt_bool(doc, "", "scatter", false);
    if (const auto it = doc.find("fractions"); it != doc.end()) {
        cfg.fractions = as_dvec(*it, "fractions");
    }
    if (const auto it = doc.find("grid"); it != doc.end()) {
        if (!it->is_object()) {
            key_error("grid", "must be a table");
        }
        check_keys(*it, "grid", {"bins", "lo", "hi"});
        cfg.grid.bins = opt_u64(*it, "grid", "bins", cfg.grid.bins);
        if (const auto lo = it->find("lo"); lo != it->end()) {
            cfg.grid.lo = as_dvec(*lo, "grid.lo");
        }
        if (const auto hi = it->find("hi"); hi != it->end()) {
            cfg.grid.hi = as_dvec(*hi, "grid.hi");
        }
    }
    const auto& systems = require_key(doc, "", "systems");
    if (!systems.is_array()) {
        key_error("systems", "must be an array of tables");
    }
    for (std::size_t i = 0; i < systems.size(); ++i) {
        cfg.systems.push_back(
            parse_system(systems[i], "systems[" + std::to_string(i) + "]"));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path.string() + "' for reading");
    }
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

void write_manifest(const RunManifest& manifest,
                    const std::filesystem::path& path) {
    json j;
    j["mode"] = manifest.mode;
    j["output_dir"] = manifest.output_dir.string();
    j["completed"] = manifest.completed;
    j["error"] = manifest.error;
    j["fractions"] = manifest.fractions;
    j["warnings"] = manifest.warnings;
    j["files"] = manifest.files;
    j["total_seconds"] = manifest.total_seconds;
    if (!manifest.config_echo.empty()) {
        j["config"] = json::parse(manifest.config_echo);
    }
    j["systems"] = json::array();
    for (const auto& rep : manifest.systems) {
        json s;
        s["label"] = rep.label;
        s["seed"] = rep.seed;
        s["target"] = rep.target;
        s["step_size_x"] = rep.step_size_x;
        s["step_size_p"] = rep.step_size_p;
        s["tuned"] = rep.tuned;
        s["n_samples"] = rep.n_samples;
        s["acceptance_rate"] = rep.acceptance_rate;
        s["weight_ess"] = rep.weight_ess;
        s["chain_ess"] = rep.chain_ess;
        s["well_transitions"] = rep.well_transitions;
        s["sample_seconds"] = rep.sample_seconds;
        s["files"] = rep.files;
        j["systems"].push_back(s);
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot open '" + path.string() + "' for writing");
    }
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) {
        throw IoError("write to '" + path.string() + "' failed");
    }
}

induced::PCGrid score_grid(const GridSettings& gs, const pca::CommonAxes& axes,
                           std::span<const reweight::WeightedSequence> seqs) {
    induced::PCGrid g;
    g.bins = {gs.bins, gs.bins};
    if (gs.lo) {
        g.lo = *gs.lo;
        g.hi = *gs.hi;
        return g;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> lo(axes.l, inf);
    std::vector<double> hi(axes.l, -inf);
    for (const auto& seq : seqs) {
        const auto scores = pca::pc_project_batch(axes, seq.cols);
        for (std::size_t k = 0; k < axes.l; ++k) {
            for (const double v : scores[k]) {
                lo[k] = std::min(lo[k], v);
                hi[k] = std::max(hi[k], v);
            }
        }
    }
    for (std::size_t k = 0; k < axes.l; ++k) {
        const double span = hi[k] - lo[k];
        if (span > 0.0) {
            lo[k] -= 0.1 * span;
            hi[k] += 0.1 * span;
        } else {
            lo[k] -= 0.5;
            hi[k] += 0.5;
        }
    }
    g.lo = std::move(lo);
    g.hi = std::move(hi);
    return g;
}

sampler::SamplerConfig resolve_sampler(const ExperimentConfig& cfg,
                                       const SystemEntry& entry) {
    auto scfg = entry.sampler;
    scfg.target = cfg.mode == Mode::CANONICAL_BASELINE
                      ? sampler::Target::CANONICAL
                      : sampler::Target::DELOCALIZED;
    if (cfg.mode == Mode::CANONICAL_BASELINE && !scfg.x0) {
        // Start inside one well so the baseline exhibits the trapping the
        // delocalized target is meant to cure.
        if (const auto* q =
                std::get_if<model::QuarticChainParams>(&entry.spec.potential)) {
            std::vector<double> x0(entry.spec.n);
            for (std::size_t i = 0; i < entry.spec.n; ++i) {
                x0[i] = q->d[i] - q->b[i];
            }
            scfg.x0 = std::move(x0);
        }
    }
    if (entry.tune) {
        scfg = sampler::tune_step_sizes(entry.spec, scfg);
    }
    return scfg;
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct SystemResult {
    reweight::WeightedSequence ws;
    SystemReport report;
    bool done = false;
};

SystemResult run_system(const ExperimentConfig& cfg, const SystemEntry& entry) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto scfg = resolve_sampler(cfg, entry);
    const auto traj = sampler::metropolis_sample(entry.spec, scfg);

    SystemResult res;
    auto& rep = res.report;
    const auto& label = entry.spec.label;
    const std::string traj_file = "traj_" + label + ".txt";
    io::write_trajectory(traj, entry.spec.m(), cfg.output_dir / traj_file);
    rep.files.push_back(traj_file);

    const auto diag = sampler::chain_diagnostics(entry.spec, traj);
    res.ws = reweight::compute_weights(entry.spec, traj);
    const std::string weight_file = "weights_" + label + ".txt";
    io::write_weights(res.ws, cfg.output_dir / weight_file);
    rep.files.push_back(weight_file);

    rep.label = label;
    rep.seed = scfg.seed;
    // Manifest entries use the same lowercase style as the mode field.
    std::string target = sampler::target_name(scfg.target);
    for (char& c : target) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    rep.target = target;
    rep.step_size_x = scfg.step_size_x;
    rep.step_size_p = scfg.step_size_p;
    rep.tuned = entry.tune;
    rep.n_samples = traj.size();
    rep.acceptance_rate = traj.acceptance_rate;
    rep.weight_ess = reweight::effective_sample_size(res.ws);
    rep.chain_ess = diag.effective_sample_estimate;
    rep.well_transitions = diag.well_transition_counts;
    rep.sample_seconds = seconds_since(t0);
    res.done = true;
    return res;
}

} // namespace

RunManifest run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    try {
        std::filesystem::create_directories(cfg.output_dir);
    } catch (const std::filesystem::filesystem_error& e) {
        throw IoError("cannot create output directory '" +
                      cfg.output_dir.string() + "': " + e.what());
    }

    RunManifest man;
    man.mode = mode_name(cfg.mode);
    man.output_dir = cfg.output_dir;
    man.config_echo = config_to_json(cfg).dump(2);

    const std::size_t count = cfg.systems.size();
    std::vector<SystemResult> results(count);
    std::vector<std::exception_ptr> failures(count);

    std::size_t workers = cfg.workers ? cfg.workers
                                      : std::thread::hardware_concurrency();
    workers = std::min(std::max<std::size_t>(workers, 1), count);
    std::atomic<std::size_t> cursor{0};
    const auto drain = [&] {
        for (std::size_t i; (i = cursor.fetch_add(1)) < count;) {
            try {
                results[i] = run_system(cfg, cfg.systems[i]);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        drain();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(drain);
        }
    }

    for (auto& res : results) {
        if (!res.done) {
            continue;
        }
        const auto& rep = res.report;
        if (rep.weight_ess < 0.01 * static_cast<double>(rep.n_samples)) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "system '%s': weight effective sample size %.1f is "
                          "below 1%% of N = %llu",
                          rep.label.c_str(), rep.weight_ess,
                          static_cast<unsigned long long>(rep.n_samples));
            man.warnings.push_back(buf);
        }
        man.systems.push_back(rep);
        man.files.insert(man.files.end(), rep.files.begin(), rep.files.end());
    }

    const auto abort_with = [&](std::exception_ptr err) {
        try {
            std::rethrow_exception(err);
        } catch (const std::exception& e) {
            man.error = e.what();
        } catch (...) {
            man.error = "unknown error";
        }
        man.completed = false;
        man.total_seconds = seconds_since(t0);
        write_manifest(man, cfg.output_dir / "manifest.json");
        std::rethrow_exception(err);
    };
    for (const auto& err : failures) {
        if (err) {
            abort_with(err);
        }
    }

    try {
        std::vector<reweight::WeightedSequence> seqs;
        seqs.reserve(count);
        for (auto& res : results) {
            seqs.push_back(std::move(res.ws));
        }

        bool skipped_hists = false;
        if (cfg.mode == Mode::INDIVIDUAL_PCA) {
            for (std::size_t s = 0; s < count; ++s) {
                const std::span<const reweight::WeightedSequence> one{&seqs[s], 1};
                const auto stats = pca::composed_stats(one);
                auto axes = pca::build_axes(stats, cfg.l);
                if (!cfg.center_pc_scores) {
                    axes.mean.assign(axes.m, 0.0);
                }
                const auto& label = cfg.systems[s].spec.label;
                const std::string axes_file = "axes_" + label + ".txt";
                io::write_axes(axes, cfg.output_dir / axes_file);
                man.files.push_back(axes_file);
                if (cfg.l == 2) {
                    const auto grid = score_grid(cfg.grid, axes, one);
                    const auto hist = induced::induced_histogram(seqs[s], axes, grid);
                    const std::string hist_file = "hist_" + label + ".csv";
                    io::write_histogram(hist, cfg.output_dir / hist_file);
                    man.files.push_back(hist_file);
                } else {
                    skipped_hists = true;
                }
            }
        } else {
            const auto stats = pca::composed_stats(seqs, cfg.fractions);
            man.fractions = stats.per_system_fractions;
            auto axes = pca::build_axes(stats, cfg.l);
            if (!cfg.center_pc_scores) {
                axes.mean.assign(axes.m, 0.0);
            }
            io::write_axes(axes, cfg.output_dir / "axes.txt");
            man.files.push_back("axes.txt");
            if (cfg.l == 2) {
                const auto grid = score_grid(cfg.grid, axes, seqs);
                for (std::size_t s = 0; s < count; ++s) {
                    const auto hist = induced::induced_histogram(seqs[s], axes, grid);
                    const std::string hist_file =
                        "hist_" + cfg.systems[s].spec.label + ".csv";
                    io::write_histogram(hist, cfg.output_dir / hist_file);
                    man.files.push_back(hist_file);
                }
            } else {
                skipped_hists = true;
            }
        }
        if (skipped_hists) {
            man.warnings.push_back("PC-plane histograms need l = 2, skipped");
        }

        if (cfg.scatter) {
            std::vector<std::pair<std::string, std::vector<std::vector<double>>>>
                labeled;
            labeled.reserve(count);
            for (std::size_t s = 0; s < count; ++s) {
                labeled.emplace_back(cfg.systems[s].spec.label, seqs[s].cols);
            }
            io::write_scatter(labeled, cfg.output_dir / "scatter.csv");
            man.files.push_back("scatter.csv");
        }
    } catch (...) {
        abort_with(std::current_exception());
    }

    man.completed = true;
    man.total_seconds = seconds_since(t0);
    write_manifest(man, cfg.output_dir / "manifest.json");
    return man;
}

void emit_scatter(std::span<const sampler::Trajectory> trajs,
                  std::span<const model::SystemSpec> specs,
                  const std::filesystem::path& path, std::size_t max_rows) {
    if (trajs.empty() || trajs.size() != specs.size()) {
        throw InputError("emit_scatter needs one system spec per trajectory");
    }
    std::vector<std::pair<std::string, std::vector<std::vector<double>>>> labeled;
    labeled.reserve(trajs.size());
    for (std::size_t s = 0; s < trajs.size(); ++s) {
        labeled.emplace_back(specs[s].label,
                             reweight::project_trajectory(specs[s], trajs[s]));
    }
    io::write_scatter(labeled, path, max_rows);
}

std::string fig1_config_text() {
    return R"({
  "mode": "common_axes",
  "l": 2,
  "output_dir": "out/fig1",
  "center_pc_scores": true,
  "scatter": true,
  "workers": 2,
  "grid": {"bins": 60},
  "systems": [
    {
      "label": "sys1",
      "n": 4,
      "potential": {
        "type": "quartic_chain",
        "b": [6.0, 1.0, 0.4, 0.4],
        "d": [0.0, 12.0, 19.0, 21.0],
        "k": 1e-5,
        "amplitude": 10.0
      },
      "beta_target": 1.0,
      "beta_lo": 0.2,
      "beta_hi": 1.0,
      "projection": [1, 2, 3],
      "sampler": {
        "n_steps": 550000,
        "burn_in": 50000,
        "thin": 1,
        "seed": 101,
        "tune": true
      }
    },
    {
      "label": "sys2",
      "n": 4,
      "potential": {
        "type": "quartic_chain",
        "b": [1.0, 4.0, 0.4, 0.4],
        "d": [0.0, 12.0, 19.0, 21.0],
        "k": 1e-5,
        "amplitude": 10.0
      },
      "beta_target": 1.0,
      "beta_lo": 0.2,
      "beta_hi": 1.0,
      "projection": [1, 2, 3],
      "sampler": {
        "n_steps": 550000,
        "burn_in": 50000,
        "thin": 1,
        "seed": 202,
        "tune": true
      }
    }
  ]
}
)";
}

} // namespace cpca::experiment
