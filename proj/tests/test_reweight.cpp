#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cpca/errors.hpp"
#include "cpca/reweight.hpp"
#include "cpca/sampler.hpp"

#include "helpers.hpp"

#include <cmath>
#include <cstddef>
#include <vector>

using namespace cpca;
using testutil::harmonic_spec;
using testutil::sys1_spec;

namespace {

// Long-double softmax of the log ratios, the reference the production
// pipeline is checked against.
std::vector<double> softmax_ref(const std::vector<long double>& lr) {
    long double mx = lr[0];
    for (long double v : lr) mx = std::max(mx, v);
    long double z = 0.0L;
    std::vector<long double> e(lr.size());
    for (std::size_t i = 0; i < lr.size(); ++i) {
        e[i] = expl(lr[i] - mx);
        z += e[i];
    }
    std::vector<double> out(lr.size());
    for (std::size_t i = 0; i < lr.size(); ++i) {
        out[i] = static_cast<double>(e[i] / z);
    }
    return out;
}

sampler::Trajectory short_chain(const model::SystemSpec& spec,
                                std::uint64_t n_steps, std::uint64_t seed,
                                sampler::Target target) {
    sampler::SamplerConfig cfg;
    cfg.n_steps = n_steps;
    cfg.seed = seed;
    cfg.target = target;
    return sampler::metropolis_sample(spec, cfg);
}

} // namespace

TEST_CASE("a degenerate density range makes every weight exactly uniform") {
    auto spec = sys1_spec();
    spec.beta_lo = spec.beta_hi = spec.beta_target;

    for (const auto target :
         {sampler::Target::DELOCALIZED, sampler::Target::CANONICAL}) {
        const auto traj = short_chain(spec, 4096, 5, target);
        const auto ws = reweight::compute_weights(spec, traj);
        const double want = 1.0 / static_cast<double>(traj.size());
        for (double w : ws.weights) CHECK(w == want);
    }
}

TEST_CASE("degenerate delocalized and canonical runs coincide bit for bit") {
    auto spec = sys1_spec();
    spec.beta_lo = spec.beta_hi = spec.beta_target;

    const auto a = short_chain(spec, 3000, 17, sampler::Target::DELOCALIZED);
    const auto b = short_chain(spec, 3000, 17, sampler::Target::CANONICAL);
    CHECK(a.xs == b.xs);
    CHECK(a.ps == b.ps);
    CHECK(a.energies == b.energies);

    const auto wa = reweight::compute_weights(spec, a);
    const auto wb = reweight::compute_weights(spec, b);
    CHECK(wa.weights == wb.weights);
    CHECK(reweight::reweighted_expectation(wa, wa.cols[0]) ==
          reweight::reweighted_expectation(wb, wb.cols[0]));
}

TEST_CASE("weights match a long-double softmax of the log ratios") {
    const auto spec = sys1_spec();
    const auto traj = short_chain(spec, 5000, 23, sampler::Target::DELOCALIZED);
    const auto ws = reweight::compute_weights(spec, traj);

    std::vector<long double> lr(traj.size());
    for (std::size_t nu = 0; nu < traj.size(); ++nu) {
        lr[nu] = model::log_weight_ratio_energy(spec, traj.energies[nu]);
    }
    const auto ref = softmax_ref(lr);
    for (std::size_t nu = 0; nu < traj.size(); ++nu) {
        CHECK(ws.weights[nu] == doctest::Approx(ref[nu]).epsilon(1e-13));
    }
}

TEST_CASE("two-point weights follow the analytic density ratio") {
    // With beta range [0.2, 1.0] and beta_target 1, the log ratio at energies
    // E1 = 1250 and E2 = 1251.25 differs by almost exactly log(e), so the
    // normalized pair is (e/(1+e), 1/(1+e)). The raw ratios underflow long
    // before this point; only the shifted log-space path survives.
    const auto spec = sys1_spec();
    const double e1 = 1250.0;
    const double e2 = 1251.25;
    const long double l1 = model::log_weight_ratio_energy(spec, e1);
    const long double l2 = model::log_weight_ratio_energy(spec, e2);
    CHECK(std::exp(static_cast<double>(l1)) == 0.0);

    sampler::Trajectory traj;
    traj.spec_label = spec.label;
    traj.n = spec.n;
    traj.target = sampler::Target::DELOCALIZED;
    traj.xs.assign(2 * spec.n, 0.0);
    traj.ps.assign(2 * spec.n, 0.0);
    traj.energies = {e1, e2};
    const auto ws = reweight::compute_weights(spec, traj);

    const auto ref = softmax_ref({l1, l2});
    CHECK(ws.weights[0] == doctest::Approx(ref[0]).epsilon(1e-14));
    CHECK(ws.weights[1] == doctest::Approx(ref[1]).epsilon(1e-14));

    const double e = std::exp(1.0);
    CHECK(ws.weights[0] == doctest::Approx(e / (1.0 + e)).epsilon(1e-3));
    CHECK(ws.weights[1] == doctest::Approx(1.0 / (1.0 + e)).epsilon(1e-3));
}

TEST_CASE("reweighted expectation") {
    SUBCASE("constant observables come back unchanged") {
        const auto ws = testutil::uniform_sequence(
            {std::vector<double>(257, 3.5)}, "c");
        CHECK(reweight::reweighted_expectation(ws, ws.cols[0]) == 3.5);
    }

    SUBCASE("uniform weights reproduce the plain mean") {
        SplitMix64 rng(77);
        const auto vals = testutil::random_vector(rng, 10001, -5.0, 5.0);
        const auto ws = testutil::uniform_sequence({vals}, "u");
        long double acc = 0.0L;
        for (double v : vals) acc += v;
        const double plain = static_cast<double>(acc / 10001.0L);
        CHECK(reweight::reweighted_expectation(ws, vals) ==
              doctest::Approx(plain).epsilon(1e-13));
    }

    SUBCASE("length mismatch and empty input throw") {
        const auto ws = testutil::uniform_sequence(
            {std::vector<double>{1.0, 2.0}}, "x");
        CHECK_THROWS_AS(
            reweight::reweighted_expectation(ws, std::vector<double>{1.0}),
            InputError);
        const reweight::WeightedSequence empty;
        CHECK_THROWS_WITH_AS(
            reweight::reweighted_expectation(empty, std::vector<double>{}),
            "reweighted_expectation: empty sequence", InputError);
    }
}

TEST_CASE("effective sample size") {
    SUBCASE("uniform weights give N") {
        const auto ws = testutil::uniform_sequence({std::vector<double>(640, 0.0)},
                                                   "u");
        CHECK(reweight::effective_sample_size(ws) ==
              doctest::Approx(640.0).epsilon(1e-12));
    }

    SUBCASE("a one-hot weight vector gives 1") {
        reweight::WeightedSequence ws;
        ws.label = "hot";
        ws.n_steps = 4;
        ws.cols = {{0.0, 0.0, 0.0, 0.0}};
        ws.weights = {0.0, 1.0, 0.0, 0.0};
        CHECK(reweight::effective_sample_size(ws) == 1.0);
    }

    SUBCASE("a 3:1 split gives 1.6 exactly") {
        reweight::WeightedSequence ws;
        ws.label = "split";
        ws.n_steps = 2;
        ws.cols = {{0.0, 0.0}};
        ws.weights = {0.75, 0.25};
        CHECK(reweight::effective_sample_size(ws) == 1.6);
    }
}

TEST_CASE("weights favor low energies when the target is the top of the range") {
    // With beta_target = beta_hi the ratio rho_BG / rho_R is strictly
    // decreasing in energy, so sorting samples by energy must sort their
    // weights the opposite way.
    const auto spec = sys1_spec();
    REQUIRE(spec.beta_target == spec.beta_hi);
    const auto traj = short_chain(spec, 2048, 31, sampler::Target::DELOCALIZED);
    const auto ws = reweight::compute_weights(spec, traj);
    for (std::size_t a = 0; a < traj.size(); a += 97) {
        for (std::size_t b = a + 1; b < traj.size(); b += 131) {
            if (traj.energies[a] == traj.energies[b]) continue;
            if (traj.energies[a] > traj.energies[b]) {
                CHECK(ws.weights[a] <= ws.weights[b]);
            } else {
                CHECK(ws.weights[a] >= ws.weights[b]);
            }
        }
    }
}

TEST_CASE("reweighted 1-D harmonic moments match the target Gaussian") {
    const auto spec = harmonic_spec({1.0}, 0.2, 1.0);
    sampler::SamplerConfig cfg;
    cfg.n_steps = 220000;
    cfg.burn_in = 20000;
    cfg.seed = 37;
    cfg.step_size_x = 2.5;
    cfg.step_size_p = 2.5;
    const auto traj = sampler::metropolis_sample(spec, cfg);
    const auto ws = reweight::compute_weights(spec, traj);

    const auto mean = testutil::weighted_block_mean(ws.cols[0], ws.weights);
    CHECK(std::abs(mean.value) < 3.0 * mean.se);

    std::vector<double> sq(ws.size());
    for (std::size_t nu = 0; nu < sq.size(); ++nu) {
        sq[nu] = ws.cols[0][nu] * ws.cols[0][nu];
    }
    const auto var = testutil::weighted_block_mean(sq, ws.weights);
    CHECK(std::abs(var.value - 1.0) < 3.0 * var.se);
}

TEST_CASE("projection keeps the named coordinates in order") {
    auto spec = harmonic_spec({1.0, 2.0, 3.0, 4.0}, 1.0, 1.0);
    spec.projection = {2, 4};
    const std::vector<double> x = {10.0, 20.0, 30.0, 40.0};
    const auto z = reweight::project_point(spec, x);
    REQUIRE(z.size() == 2);
    CHECK(z[0] == 20.0);
    CHECK(z[1] == 40.0);
    const std::vector<double> short_point = {1.0, 2.0};
    CHECK_THROWS_AS(reweight::project_point(spec, short_point), InputError);

    const auto traj = sampler::metropolis_sample(spec, [] {
        sampler::SamplerConfig c;
        c.n_steps = 300;
        c.seed = 3;
        return c;
    }());
    const auto cols = reweight::project_trajectory(spec, traj);
    REQUIRE(cols.size() == 2);
    const auto xc = traj.x_columns();
    CHECK(cols[0] == xc[1]);
    CHECK(cols[1] == xc[3]);
}

TEST_CASE("weighted sequence validation") {
    reweight::WeightedSequence ws;
    ws.label = "v";
    ws.n_steps = 3;
    ws.cols = {{1.0, 2.0, 3.0}};
    ws.weights = {0.25, 0.25, 0.5};
    CHECK_NOTHROW(ws.validate());

    SUBCASE("empty") {
        ws.cols = {{}};
        ws.weights = {};
        ws.n_steps = 0;
        CHECK_THROWS_WITH_AS(ws.validate(),
                             "weighted sequence 'v' is empty", InputError);
    }

    SUBCASE("step count mismatch") {
        ws.n_steps = 4;
        CHECK_THROWS_AS(ws.validate(), InputError);
    }

    SUBCASE("ragged column") {
        ws.cols.push_back({1.0});
        CHECK_THROWS_AS(ws.validate(), InputError);
    }

    SUBCASE("negative weight") {
        ws.weights = {-0.25, 0.75, 0.5};
        CHECK_THROWS_AS(ws.validate(), InputError);
    }

    SUBCASE("bad normalization") {
        ws.weights = {0.25, 0.25, 0.25};
        CHECK_THROWS_WITH_AS(
            ws.validate(),
            "weighted sequence 'v': weights do not sum to 1", InputError);
    }

    SUBCASE("half a million uniform weights still validate") {
        // This is the regime where a naive running sum drifts past 1e-12.
        const std::size_t n = 500000;
        ws.n_steps = n;
        ws.cols = {std::vector<double>(n, 0.0)};
        ws.weights.assign(n, 1.0 / static_cast<double>(n));
        CHECK_NOTHROW(ws.validate());
    }
}

TEST_CASE("compute_weights input errors") {
    const auto spec = sys1_spec();

    SUBCASE("dimension mismatch") {
        sampler::Trajectory traj;
        traj.spec_label = spec.label;
        traj.n = 3;
        traj.xs.assign(3, 0.0);
        traj.ps.assign(3, 0.0);
        traj.energies.assign(1, 0.0);
        CHECK_THROWS_AS(reweight::compute_weights(spec, traj), InputError);
    }

    SUBCASE("empty trajectory") {
        sampler::Trajectory traj;
        traj.spec_label = spec.label;
        traj.n = spec.n;
        CHECK_THROWS_AS(reweight::compute_weights(spec, traj), InputError);
    }

    SUBCASE("missing energy cache") {
        sampler::Trajectory traj;
        traj.spec_label = spec.label;
        traj.n = spec.n;
        traj.xs.assign(spec.n, 0.0);
        traj.ps.assign(spec.n, 0.0);
        CHECK_THROWS_AS(reweight::compute_weights(spec, traj), InputError);
    }
}
