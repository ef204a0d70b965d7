#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvt/analysis.hpp"
#include "mvt/errors.hpp"
#include "oracle_helpers.hpp"

using namespace mvt;

namespace {

TemplateSpec uniform_spec(int d, int n) {
    TemplateSpec spec;
    spec.variations.assign(d, n);
    return spec;
}

// Uniform-random assignment log drawn from a truth environment.
std::vector<LoggedImpression> synthetic_log(const SimulationTruth& truth,
                                            std::size_t steps, Rng& rng) {
    std::vector<LoggedImpression> log;
    log.reserve(steps);
    const TemplateSpec& spec = truth.spec();
    for (std::size_t t = 0; t < steps; ++t) {
        LoggedImpression row;
        row.layout.resize(spec.widget_count());
        for (int i = 0; i < spec.widget_count(); ++i) {
            row.layout[i] = rng.uniform_int(1, spec.variations[i]);
        }
        row.reward = truth.sample_reward(row.layout, {}, rng);
        log.push_back(std::move(row));
    }
    return log;
}

double spearman_rho(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<double> rank(n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<double>(i);
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = rank[i] - static_cast<double>(i);
        d2 += d * d;
    }
    return 1.0 - 6.0 * d2 / (static_cast<double>(n) * (n * n - 1.0));
}

}  // namespace

TEST_CASE("chi-square tail matches the recurrence oracle to 1e-9") {
    for (int df : {1, 2, 3, 5, 10, 50, 192, 500, 2000}) {
        for (double x : {1e-3, 0.5, 1.0, 3.841, 10.0, 42.0, 100.0}) {
            CAPTURE(df);
            CAPTURE(x);
            const double expected = oracle::chi2_upper_by_recurrence(x, df);
            CHECK(std::fabs(chi_square_upper_tail(x, df) - expected) < 1e-9);
        }
    }
}

TEST_CASE("student t upper tail frozen values") {
    CHECK(student_t_upper_tail(1.8331129326536337, 9) ==
          doctest::Approx(0.05).epsilon(1e-9));
    CHECK(student_t_upper_tail(2.5, 9) ==
          doctest::Approx(0.016930913841492853).epsilon(1e-10));
    CHECK(student_t_upper_tail(0.7, 17) ==
          doctest::Approx(0.24669809977168505).epsilon(1e-10));
}

TEST_CASE("paired t test direction") {
    const std::vector<double> high{0.30, 0.28, 0.33, 0.31, 0.29};
    const std::vector<double> low{0.10, 0.12, 0.09, 0.11, 0.13};
    CHECK(paired_t_test_greater(high, low) < 0.001);
    CHECK(paired_t_test_greater(low, high) > 0.999);
}

TEST_CASE("lrt") {
    SUBCASE("equal log likelihoods give statistic 0 and p 1") {
        const LrtResult r = lrt(-100.0, -100.0, 5);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("frozen quantile: statistic 3.841 at df 1 is p ~ 0.05") {
        const LrtResult r = lrt(-50.0, -50.0 + 3.841 / 2.0, 1);
        CHECK(r.statistic == doctest::Approx(3.841).epsilon(1e-12));
        CHECK(r.p_value == doctest::Approx(0.050013683763956804).epsilon(1e-9));
    }
    SUBCASE("p value decreases in the statistic at fixed df") {
        double last = 1.0;
        for (double stat : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
            const double p = lrt(0.0, stat / 2.0, 3).p_value;
            CHECK(p < last);
            last = p;
        }
    }
    SUBCASE("negative statistic beyond tolerance is a misuse error") {
        CHECK_THROWS_AS(lrt(-5.0, -6.0, 2), ValidationError);
        // Tiny negative within tolerance clamps to zero.
        const LrtResult r = lrt(-5.0, -5.0 - 1e-12, 2);
        CHECK(r.statistic == 0.0);
        CHECK(r.p_value == 1.0);
    }
}

TEST_CASE("fit_for_lrt") {
    const TemplateSpec spec = uniform_spec(3, 4);

    SUBCASE("empty data gives zero log likelihood and p 1") {
        const double ll1 = fit_for_lrt(ModelKind::mvt1(), spec, {});
        const double ll2 = fit_for_lrt(ModelKind::mvt2(), spec, {});
        CHECK(ll1 == 0.0);
        CHECK(ll2 == 0.0);
        const LrtResult r = lrt_between(ModelKind::mvt1(), ModelKind::mvt2(), spec, {});
        CHECK(r.p_value == 1.0);
    }
    SUBCASE("strong interactions favor the full model") {
        SimConfig cfg;
        cfg.spec = spec;
        cfg.alpha1 = 1.0;
        cfg.alpha2 = 2.0;
        cfg.algorithms = {AlgorithmConfig{}};
        Rng rng(404);
        const SimulationTruth truth(cfg, rng);
        const auto log = synthetic_log(truth, 8000, rng);
        const double ll1 = fit_for_lrt(ModelKind::mvt1(), spec, log);
        const double ll2 = fit_for_lrt(ModelKind::mvt2(), spec, log);
        CHECK(ll2 > ll1);
        const LrtResult r = lrt_between(ModelKind::mvt1(), ModelKind::mvt2(), spec, log);
        CHECK(r.df == 27);  // identifiable rank difference: 3 pairs * 3 * 3
        CHECK(r.p_value < 0.05);
    }
    SUBCASE("third order stays insignificant on pairwise-only data") {
        SimConfig cfg;
        cfg.spec = spec;
        cfg.alpha1 = 1.0;
        cfg.alpha2 = 1.0;
        cfg.algorithms = {AlgorithmConfig{}};
        int insignificant = 0;
        const int replicates = 20;
        for (int i = 0; i < replicates; ++i) {
            Rng rng(derive_seed(606, "lrt3", i));
            const SimulationTruth truth(cfg, rng);
            const auto log = synthetic_log(truth, 5000, rng);
            const LrtResult r =
                lrt_between(ModelKind::mvt2(), ModelKind::mvt3(), spec, log);
            if (r.p_value > 0.05) ++insignificant;
        }
        CHECK(insignificant >= replicates * 9 / 10);
    }
}

TEST_CASE("convergence series") {
    SUBCASE("constant plays give 1 everywhere") {
        History h;
        h.layout_ids.assign(1000, 7);
        h.rewards.assign(1000, 1);
        const auto series = convergence_series(h, 100);
        REQUIRE(series.size() == 10);
        for (double v : series) CHECK(v == 1.0);
    }
    SUBCASE("uniform plays match the multinomial mode oracle") {
        const int layouts = 48;
        const std::size_t window = 4800;
        History h;
        Rng rng(808);
        h.layout_ids.resize(window * 20);
        for (auto& id : h.layout_ids) {
            id = static_cast<std::uint32_t>(rng.uniform_below(layouts));
        }
        h.rewards.assign(h.layout_ids.size(), 1);
        const auto series = convergence_series(h, window);
        REQUIRE(series.size() == 20);
        double series_mean = 0.0;
        for (double v : series) {
            CHECK(v >= 1.0 / layouts);  // hard floor
            CHECK(v < 2.5 / layouts);
            series_mean += v;
        }
        series_mean /= series.size();

        // Independent multinomial mode simulation.
        Rng oracle_rng(909);
        double oracle_mean = 0.0;
        const int oracle_reps = 60;
        std::vector<int> counts(layouts);
        for (int rep = 0; rep < oracle_reps; ++rep) {
            std::fill(counts.begin(), counts.end(), 0);
            for (std::size_t i = 0; i < window; ++i) {
                ++counts[oracle_rng.uniform_below(layouts)];
            }
            oracle_mean += *std::max_element(counts.begin(), counts.end()) /
                           static_cast<double>(window);
        }
        oracle_mean /= oracle_reps;
        CHECK(series_mean == doctest::Approx(oracle_mean).epsilon(0.05));
    }
    SUBCASE("converging run has a rising trend") {
        SimConfig cfg;
        cfg.spec = uniform_spec(3, 4);
        cfg.alpha1 = 1.0;
        cfg.horizon = 20000;
        AlgorithmConfig mvt1_alg;
        mvt1_alg.kind = ModelKind::mvt1();
        cfg.algorithms = {mvt1_alg};
        Rng rng(derive_seed(42, "truth", 0));
        const SimulationTruth truth(cfg, rng);
        const History h = run_loop(cfg, truth, cfg.algorithms[0],
                                   derive_seed(42, "env", 0),
                                   derive_seed(42, "policy", 0, 0));
        const auto series = convergence_series(h, 1000);
        CHECK(spearman_rho(series) > 0.0);
        CHECK(series.back() > series.front());
    }
    SUBCASE("window bounds validated") {
        History h;
        h.layout_ids.assign(10, 0);
        h.rewards.assign(10, 1);
        CHECK_THROWS_AS(convergence_series(h, 0), ValidationError);
        CHECK_THROWS_AS(convergence_series(h, 11), ValidationError);
    }
}

TEST_CASE("normalized success") {
    CHECK(normalized_success(0.5, 0.5) == 0.0);
    CHECK(normalized_success(1.21 * 0.4, 0.4) == doctest::Approx(0.21));
    CHECK(normalized_success(1.44 * 0.25, 0.25) == doctest::Approx(0.44));
    CHECK_THROWS_AS(normalized_success(0.5, 0.0), ValidationError);
}

TEST_CASE("hill climb study") {
    SimConfig cfg;
    cfg.spec = uniform_spec(3, 4);
    cfg.alpha1 = 1.0;
    cfg.alpha2 = 1.0;
    cfg.horizon = 30000;
    AlgorithmConfig mvt2_alg;
    mvt2_alg.kind = ModelKind::mvt2();
    cfg.algorithms = {mvt2_alg};
    Rng truth_rng(derive_seed(7, "truth", 0));
    const SimulationTruth truth(cfg, truth_rng);

    SUBCASE("separable model reaches the global optimum at K >= D") {
        AlgorithmConfig mvt1;
        mvt1.kind = ModelKind::mvt1();
        const TrainedModel model = train_model(cfg, truth, mvt1, 11, 12);
        HillClimbStudyConfig study;
        study.step_budgets = {3, 6, 12};
        study.trials = 200;
        Rng rng(13);
        const auto rows =
            hill_climb_study(model.posteriors.front(), ModelKind::mvt1(), truth,
                             study, rng);
        REQUIRE(rows.size() == 3);
        for (const auto& row : rows) {
            CHECK(row.p_global == 1.0);
            CHECK(row.regret_converged <= row.regret_random);
        }
    }
    SUBCASE("trained mvt2: converged beats random for every grid point") {
        const TrainedModel model = train_model(cfg, truth, cfg.algorithms[0], 21, 22);
        HillClimbStudyConfig study;
        study.step_budgets = {2, 6, 18};
        study.restart_counts = {1, 3};
        study.trials = 300;
        Rng rng(23);
        const auto rows = hill_climb_study(model.posteriors.front(),
                                           ModelKind::mvt2(), truth, study, rng);
        REQUIRE(rows.size() == 6);
        for (const auto& row : rows) {
            CHECK(row.regret_converged <= row.regret_random);
            CHECK(row.mean_steps <= row.max_steps);
        }
        // More budget cannot hurt the global-hit rate (same S).
        CHECK(rows[4].p_global >= rows[0].p_global);
    }
    SUBCASE("restart formula holds on a degenerate posterior") {
        // Zero variance pins one surface, so restarts are exactly i.i.d.
        const TrainedModel model = train_model(cfg, truth, cfg.algorithms[0], 31, 32);
        const std::vector<double> means(model.posteriors.front().means().begin(),
                                        model.posteriors.front().means().end());
        const GaussianPosterior fixed(means,
                                      std::vector<double>(means.size(), 0.0));
        HillClimbStudyConfig study;
        study.step_budgets = {18};
        study.restart_counts = {1, 2, 5};
        study.trials = 2000;
        Rng rng(37);
        const auto rows =
            hill_climb_study(fixed, ModelKind::mvt2(), truth, study, rng);
        REQUIRE(rows.size() == 3);
        const double p1 = rows[0].p_global;
        if (p1 < 1.0) {
            CHECK(rows[1].p_global ==
                  doctest::Approx(1.0 - std::pow(1.0 - p1, 2)).epsilon(0.1));
            CHECK(rows[2].p_global ==
                  doctest::Approx(1.0 - std::pow(1.0 - p1, 5)).epsilon(0.1));
        }
    }
}
