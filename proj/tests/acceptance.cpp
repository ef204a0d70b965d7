// Acceptance suite: self-contained checks of the headline behaviors, one
// pass/fail line per criterion. Usage: acceptance [ids...] (default: all).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mvt/analysis.hpp"
#include "mvt/config.hpp"
#include "mvt/simulator.hpp"
#include "mvt/snapshot.hpp"
#include "oracle_helpers.hpp"

namespace fs = std::filesystem;
using namespace mvt;

namespace {

int jobs() {
    const unsigned hw = std::thread::hardware_concurrency();
    return static_cast<int>(std::min(8u, hw ? hw : 1u));
}

TemplateSpec uniform_spec(int d, int n, std::vector<int> context = {}) {
    TemplateSpec spec;
    spec.variations.assign(d, n);
    spec.context_cardinalities = std::move(context);
    return spec;
}

HillClimbConfig paper_hill_climb() {
    HillClimbConfig hc;
    hc.restarts = 5;
    hc.max_steps = 18;
    return hc;
}

// ---------------------------------------------------------------------------
// 1. Moment-matched update vs numerical quadrature, 1e-8 relative.
bool criterion_1(std::ostream& out) {
    std::vector<double> mu_grid, var_grid{0.01, 0.05};
    for (double mu = -3.0; mu <= 3.01; mu += 0.5) mu_grid.push_back(mu);
    for (double v = 0.1; v <= 1.001; v += 0.1) var_grid.push_back(v);

    double max_rel = 0.0;
    int points = 0;
    for (double mu : mu_grid) {
        for (double var : var_grid) {
            for (int r : {+1, -1}) {
                const GaussianPosterior before({mu}, {var});
                const GaussianPosterior after =
                    update(before, {FeatureVector({0}, 1), r});
                const auto truth = oracle::moment_match_by_quadrature(mu, var, r);
                const double mean_rel = std::fabs(after.means()[0] - truth.mean) /
                                        std::max(std::fabs(truth.mean), 1e-12);
                const double var_rel =
                    std::fabs(after.variances()[0] - truth.variance) /
                    std::max(truth.variance, 1e-12);
                max_rel = std::max({max_rel, mean_rel, var_rel});
                ++points;
            }
        }
    }
    out << "grid points " << points << ", max relative error " << max_rel;
    return points >= 100 && max_rel <= 1e-8;
}

// ---------------------------------------------------------------------------
// 2. Hill climb (S=5, K=18) vs exhaustive argmax on 100 random MVT2 surfaces.
bool criterion_2(std::ostream& out) {
    const TemplateSpec spec = uniform_spec(3, 8);
    const FeatureIndexer indexer(ModelKind::mvt2(), spec);
    Rng rng(20170814);

    int global_hits = 0;
    int local_optima = 0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial) {
        WeightSample sample;
        sample.values.resize(indexer.dimension());
        for (double& v : sample.values) v = rng.normal();

        double oracle_score = 0.0;
        exhaustive_argmax(sample, indexer, nullptr, kDefaultEnumerationCap,
                          &oracle_score);
        const SelectionTrace trace = hill_climb(sample, indexer, nullptr,
                                                paper_hill_climb(), rng, &oracle_score);
        if (trace.reached_global.value()) ++global_hits;

        const LayoutScorer scorer(indexer, sample.values, nullptr);
        const double score = scorer.full_score(trace.layout);
        bool is_local_optimum = true;
        for (int widget = 0; widget < 3 && is_local_optimum; ++widget) {
            for (int content = 1; content <= 8; ++content) {
                Layout probe = trace.layout;
                probe[widget] = content;
                if (scorer.full_score(probe) > score + 1e-9) {
                    is_local_optimum = false;
                    break;
                }
            }
        }
        if (is_local_optimum) ++local_optima;
    }
    out << "global optimum " << global_hits << "/100, verified local optima "
        << local_optima << "/100";
    return global_hits >= 85 && local_optima == trials;
}

// ---------------------------------------------------------------------------
// 3. Trained-model hill-climb quality at desk scale: 1000 climbs (S=1) over
//    10 independently trained MVT2 models.
bool criterion_3(std::ostream& out) {
    const int models = 10;
    const int trials_per_model = 100;

    double steps_sum = 0.0;
    std::size_t steps_n = 0;
    int global_hits = 0;
    double regret_random = 0.0, regret_converged = 0.0;
    for (int m = 0; m < models; ++m) {
        SimConfig cfg;
        cfg.spec = uniform_spec(3, 8);
        cfg.alpha1 = 1.0;
        cfg.alpha2 = 1.0;
        cfg.horizon = 100000;
        cfg.batch_period = 1000;
        cfg.seed = 471100 + m;
        AlgorithmConfig alg;
        alg.kind = ModelKind::mvt2();
        alg.hill_climb = paper_hill_climb();
        cfg.algorithms = {alg};

        Rng truth_rng(derive_seed(cfg.seed, "truth", 0));
        const SimulationTruth truth(cfg, truth_rng);
        const TrainedModel model =
            train_model(cfg, truth, alg, derive_seed(cfg.seed, "env", 0),
                        derive_seed(cfg.seed, "policy", 0, 0));

        HillClimbStudyConfig study;
        study.step_budgets = {18};
        study.restart_counts = {1};
        study.trials = trials_per_model;
        Rng study_rng(derive_seed(cfg.seed, "study"));
        const HillClimbStudyRow row =
            hill_climb_study(model.posteriors.front(), ModelKind::mvt2(), truth,
                             study, study_rng)
                .front();
        steps_sum += row.mean_steps * trials_per_model;
        steps_n += trials_per_model;
        global_hits += static_cast<int>(row.p_global * trials_per_model + 0.5);
        regret_random += row.regret_random;
        regret_converged += row.regret_converged;
    }
    const double mean_steps = steps_sum / static_cast<double>(steps_n);
    const double p_global = global_hits / static_cast<double>(steps_n);
    regret_random /= models;
    regret_converged /= models;

    out << "mean steps " << mean_steps << " (want [4,9]), p_global " << p_global
        << " (want [0.25,0.45]), regret random " << regret_random << " vs converged "
        << regret_converged;
    return mean_steps >= 4.0 && mean_steps <= 9.0 && p_global >= 0.25 &&
           p_global <= 0.45 && regret_converged * 2.0 <= regret_random;
}

// ---------------------------------------------------------------------------
// Shared runner for the ordering criteria.
ExperimentResult ordered_experiment(TemplateSpec spec, double alpha2, double alphac,
                                    std::vector<AlgorithmConfig> algorithms,
                                    std::uint64_t seed) {
    SimConfig cfg;
    cfg.spec = std::move(spec);
    cfg.alpha1 = 1.0;
    cfg.alpha2 = alpha2;
    cfg.alphac = alphac;
    cfg.horizon = 50000;
    cfg.batch_period = 1000;
    cfg.repetitions = 10;
    cfg.window = 2500;
    cfg.seed = seed;
    cfg.algorithms = std::move(algorithms);
    return run_experiment(cfg, jobs());
}

// 4. Interaction strength ordering (the alpha2 sweep endpoints).
bool criterion_4(std::ostream& out) {
    AlgorithmConfig mvt1;
    mvt1.kind = ModelKind::mvt1();
    mvt1.hill_climb = paper_hill_climb();
    AlgorithmConfig mvt2;
    mvt2.kind = ModelKind::mvt2();
    mvt2.hill_climb = paper_hill_climb();

    const ExperimentResult strong =
        ordered_experiment(uniform_spec(3, 8), 2.0, 0.0, {mvt1, mvt2}, 880001);
    const double p = paired_t_test_greater(strong.algorithms[0].final_local_regret,
                                           strong.algorithms[1].final_local_regret);

    const ExperimentResult none =
        ordered_experiment(uniform_spec(3, 8), 0.0, 0.0, {mvt1, mvt2}, 880002);
    const double mean1 = none.algorithms[0].final_local.mean;
    const double mean2 = none.algorithms[1].final_local.mean;

    out << "alpha2=2: mvt1 " << strong.algorithms[0].final_local.mean << " vs mvt2 "
        << strong.algorithms[1].final_local.mean << " (one-sided p " << p
        << "); alpha2=0: mvt1 " << mean1 << " <= mvt2 " << mean2;
    return p < 0.05 && mean1 <= mean2;
}

// 5. Complexity scaling: the per-layout bandit degrades faster in N.
bool criterion_5(std::ostream& out) {
    AlgorithmConfig mvt2;
    mvt2.kind = ModelKind::mvt2();
    mvt2.hill_climb = paper_hill_climb();
    AlgorithmConfig ndmab;
    ndmab.kind = ModelKind::nd_mab();
    ndmab.argmax = ArgmaxMode::Exhaustive;

    const ExperimentResult small =
        ordered_experiment(uniform_spec(3, 2), 1.0, 0.0, {mvt2, ndmab}, 880003);
    const ExperimentResult large =
        ordered_experiment(uniform_spec(3, 8), 1.0, 0.0, {mvt2, ndmab}, 880004);

    // Whole-run average regret: the exploration cost of 512 independent arms
    // is what grows with N (the trailing window alone can look converged).
    const double mvt2_degradation =
        large.algorithms[0].overall.mean - small.algorithms[0].overall.mean;
    const double ndmab_degradation =
        large.algorithms[1].overall.mean - small.algorithms[1].overall.mean;
    out << "N=2->8 regret degradation: ndmab " << ndmab_degradation << " vs mvt2 "
        << mvt2_degradation;
    return ndmab_degradation > mvt2_degradation;
}

// 6. Context crossover: modeling context pays off iff context matters.
bool criterion_6(std::ostream& out) {
    AlgorithmConfig mvt2;
    mvt2.kind = ModelKind::mvt2();
    mvt2.hill_climb = paper_hill_climb();
    AlgorithmConfig mvt2c;
    mvt2c.kind = ModelKind::mvt2c();
    mvt2c.hill_climb = paper_hill_climb();

    const TemplateSpec spec = uniform_spec(3, 4, {4});
    const ExperimentResult strong =
        ordered_experiment(spec, 1.0, 2.0, {mvt2, mvt2c}, 880005);
    const double strong_mvt2 = strong.algorithms[0].final_local.mean;
    const double strong_mvt2c = strong.algorithms[1].final_local.mean;

    const ExperimentResult zero =
        ordered_experiment(spec, 1.0, 0.0, {mvt2, mvt2c}, 880006);
    const double zero_mvt2 = zero.algorithms[0].final_local.mean;
    const double zero_mvt2c = zero.algorithms[1].final_local.mean;
    // "Advantage absent or reversed": either mvt2c is not better on the
    // means, or any edge is statistically insignificant.
    const double p_advantage = paired_t_test_greater(
        zero.algorithms[0].final_local_regret, zero.algorithms[1].final_local_regret);

    out << "alphac=2: mvt2c " << strong_mvt2c << " < mvt2 " << strong_mvt2
        << "; alphac=0: mvt2c " << zero_mvt2c << " vs mvt2 " << zero_mvt2
        << " (advantage p " << p_advantage << ")";
    return strong_mvt2c < strong_mvt2 &&
           (zero_mvt2c >= zero_mvt2 || p_advantage >= 0.05);
}

// ---------------------------------------------------------------------------
// 7. LRT calibration: near-nominal size on alpha2=0 data, full power at
//    alpha2=2.
bool criterion_7(std::ostream& out) {
    const TemplateSpec spec = uniform_spec(3, 8);
    const auto simulate_log = [&](double alpha2, std::uint64_t seed,
                                  std::vector<LoggedImpression>& log) {
        SimConfig cfg;
        cfg.spec = spec;
        cfg.alpha1 = 1.0;
        cfg.alpha2 = alpha2;
        cfg.algorithms = {AlgorithmConfig{}};
        Rng rng(seed);
        const SimulationTruth truth(cfg, rng);
        log.clear();
        log.reserve(20000);
        for (int t = 0; t < 20000; ++t) {
            LoggedImpression row;
            row.layout.resize(3);
            for (int i = 0; i < 3; ++i) row.layout[i] = rng.uniform_int(1, 8);
            row.reward = truth.sample_reward(row.layout, {}, rng);
            log.push_back(std::move(row));
        }
    };

    int null_rejections = 0;
    std::vector<LoggedImpression> log;
    for (int rep = 0; rep < 200; ++rep) {
        simulate_log(0.0, derive_seed(5150, "null", rep), log);
        if (lrt_between(ModelKind::mvt1(), ModelKind::mvt2(), spec, log).p_value <
            0.05) {
            ++null_rejections;
        }
    }
    const double null_rate = null_rejections / 200.0;

    int power_rejections = 0;
    for (int rep = 0; rep < 100; ++rep) {
        simulate_log(2.0, derive_seed(5150, "power", rep), log);
        if (lrt_between(ModelKind::mvt1(), ModelKind::mvt2(), spec, log).p_value <
            0.05) {
            ++power_rejections;
        }
    }
    const double power = power_rejections / 100.0;

    out << "null rejection rate " << null_rate << " (want [0.01,0.12]), power "
        << power << " (want >= 0.8)";
    return null_rate >= 0.01 && null_rate <= 0.12 && power >= 0.8;
}

// ---------------------------------------------------------------------------
// 8. Property suite.
bool criterion_8(std::ostream& out) {
    std::vector<std::string> failures;

    {  // per-step regret contributions never negative (incl. contextual env)
        SimConfig cfg;
        cfg.spec = uniform_spec(3, 4, {4});
        cfg.alpha1 = 1.0;
        cfg.alpha2 = 1.0;
        cfg.alphac = 1.0;
        cfg.horizon = 5000;
        AlgorithmConfig alg;
        alg.kind = ModelKind::mvt2c();
        cfg.algorithms = {alg};
        Rng rng(derive_seed(88, "truth", 0));
        const SimulationTruth truth(cfg, rng);
        const History h = run_loop(cfg, truth, alg, derive_seed(88, "env", 0),
                                   derive_seed(88, "policy", 0, 0));
        for (std::size_t t = 0; t < h.size(); ++t) {
            if (h.expected_optimal[t] < h.expected_chosen[t]) {
                failures.push_back("negative per-step regret");
                break;
            }
        }
    }
    {  // posterior variance monotonicity
        Rng rng(881);
        GaussianPosterior post(16);
        std::vector<double> previous(post.variances().begin(),
                                     post.variances().end());
        for (int i = 0; i < 2000; ++i) {
            std::vector<std::uint32_t> active;
            for (std::uint32_t j = 0; j < 16; ++j) {
                if (rng.uniform01() < 0.3) active.push_back(j);
            }
            if (active.empty()) active.push_back(0);
            post.apply({FeatureVector(std::move(active), 16),
                        rng.uniform01() < 0.6 ? 1 : -1});
            for (std::size_t j = 0; j < 16; ++j) {
                if (post.variances()[j] > previous[j] || post.variances()[j] <= 0.0) {
                    failures.push_back("variance not monotone");
                    i = 2000;
                    break;
                }
                previous[j] = post.variances()[j];
            }
        }
    }
    {  // hill-climb monotone ascent
        const TemplateSpec spec = uniform_spec(3, 8);
        const FeatureIndexer indexer(ModelKind::mvt2(), spec);
        Rng sample_rng(882);
        for (int trial = 0; trial < 200; ++trial) {
            WeightSample sample;
            sample.values.resize(indexer.dimension());
            for (double& v : sample.values) v = sample_rng.normal();
            const std::uint64_t seed = derive_seed(883, "climb", trial);
            Rng mirror(seed);
            Layout initial(3);
            for (int i = 0; i < 3; ++i) initial[i] = mirror.uniform_int(1, 8);
            Rng rng(seed);
            HillClimbConfig cfg;
            cfg.restarts = 1;
            const SelectionTrace trace = hill_climb(sample, indexer, nullptr, cfg, rng);
            const LayoutScorer scorer(indexer, sample.values, nullptr);
            if (trace.score < scorer.full_score(initial) - 1e-12) {
                failures.push_back("ascent violated");
                break;
            }
        }
    }
    {  // feature-index bijection on 50 random specs, every kind
        Rng rng(884);
        for (int trial = 0; trial < 50; ++trial) {
            TemplateSpec spec;
            const int d = rng.uniform_int(1, 5);
            for (int i = 0; i < d; ++i)
                spec.variations.push_back(rng.uniform_int(1, 6));
            const int l = rng.uniform_int(0, 2);
            for (int i = 0; i < l; ++i)
                spec.context_cardinalities.push_back(rng.uniform_int(1, 5));
            std::vector<ModelKind> kinds{ModelKind::mvt1(), ModelKind::mvt2(),
                                         ModelKind::mvt3(), ModelKind::nd_mab(),
                                         ModelKind::dmab(rng.uniform_int(0, d - 1))};
            if (l > 0) kinds.push_back(ModelKind::mvt2c());
            for (ModelKind kind : kinds) {
                const FeatureIndexer ix(kind, spec);
                const auto descriptors = oracle::all_descriptors(kind, spec);
                if (descriptors.size() != ix.dimension()) {
                    failures.push_back("descriptor count mismatch");
                    continue;
                }
                std::vector<char> seen(ix.dimension(), 0);
                for (const WeightDescriptor& desc : descriptors) {
                    const std::uint32_t index = ix.index_of(desc);
                    if (index >= ix.dimension() || seen[index] ||
                        !(ix.descriptor_of(index) == desc)) {
                        failures.push_back("bijection violated");
                        break;
                    }
                    seen[index] = 1;
                }
            }
        }
    }
    {  // byte-identical CLI rerun
        const fs::path dir = fs::temp_directory_path() / "mvt_acceptance_rerun";
        fs::remove_all(dir);
        fs::create_directories(dir);
        const auto write_config = [&](const std::string& name, const fs::path& out) {
            std::ofstream cfg(dir / name);
            cfg << R"({
  "template":    { "widgets": [8, 8, 8] },
  "environment": { "alpha1": 1.0, "alpha2": 1.0, "seed": 321 },
  "run":         { "T": 3000, "batch_period": 1000, "repetitions": 2,
                   "algorithms": ["mvt2", "ndmab"] },
  "output":      { "directory": ")"
                << out.string() << R"(" }
})";
        };
        write_config("a.json", dir / "out_a");
        write_config("b.json", dir / "out_b");
        const std::string cli = MVT_CLI_PATH;
        const auto run_cli = [&](const std::string& args) {
            return std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
        };
        const auto slurp = [](const fs::path& p) {
            std::ifstream in(p, std::ios::binary);
            std::ostringstream buffer;
            buffer << in.rdbuf();
            return buffer.str();
        };
        if (run_cli("simulate --config " + (dir / "a.json").string()) != 0 ||
            run_cli("simulate --config " + (dir / "b.json").string() + " --jobs 4") !=
                0) {
            failures.push_back("cli run failed");
        } else if (slurp(dir / "out_a" / "steps.csv").empty() ||
                   slurp(dir / "out_a" / "steps.csv") !=
                       slurp(dir / "out_b" / "steps.csv") ||
                   slurp(dir / "out_a" / "summary.csv") !=
                       slurp(dir / "out_b" / "summary.csv")) {
            failures.push_back("rerun not byte-identical");
        }
        fs::remove_all(dir);
    }

    if (failures.empty()) {
        out << "regret sign, variance monotonicity, ascent, bijection, rerun: all hold";
        return true;
    }
    out << failures.size() << " failure(s):";
    for (const std::string& f : failures) out << ' ' << f << ';';
    return false;
}

// ---------------------------------------------------------------------------
// 9. Realtime selection budget on the 48-layout promo template.
bool criterion_9(std::ostream& out) {
    TemplateSpec spec;
    spec.variations = {2, 3, 2, 2, 2};

    SimConfig cfg;
    cfg.spec = spec;
    cfg.alpha1 = 1.0;
    cfg.alpha2 = 1.0;
    cfg.horizon = 20000;
    cfg.batch_period = 1000;
    cfg.seed = 99;
    AlgorithmConfig alg;
    alg.kind = ModelKind::mvt2();
    alg.hill_climb = paper_hill_climb();
    cfg.algorithms = {alg};

    Rng truth_rng(derive_seed(cfg.seed, "truth", 0));
    const SimulationTruth truth(cfg, truth_rng);
    const TrainedModel model =
        train_model(cfg, truth, alg, derive_seed(cfg.seed, "env", 0),
                    derive_seed(cfg.seed, "policy", 0, 0));

    const fs::path path = fs::temp_directory_path() / "mvt_acceptance_snapshot.bin";
    save_snapshot({spec, ModelKind::mvt2(), model.posteriors}, path.string());
    const ModelSnapshot snapshot = load_snapshot(path.string());
    fs::remove(path);

    // The resident-model selection path of cmd_select, timed per call.
    const FeatureIndexer indexer(snapshot.kind, snapshot.spec);
    std::vector<double> micros;
    micros.reserve(1000);
    for (int call = 0; call < 1000; ++call) {
        Rng rng(derive_seed(7, "select", call));
        const auto start = std::chrono::steady_clock::now();
        const SelectionTrace trace =
            thompson_select(snapshot.posteriors.front(), indexer, nullptr,
                            ArgmaxMode::HillClimb, paper_hill_climb(), rng);
        const auto stop = std::chrono::steady_clock::now();
        if (trace.layout.size() != 5) return false;
        micros.push_back(
            std::chrono::duration<double, std::micro>(stop - start).count());
    }
    std::nth_element(micros.begin(), micros.begin() + 500, micros.end());
    const double median_us = micros[500];
    out << "median select latency " << median_us / 1000.0 << " ms over 1000 calls";
    return median_us < 10000.0;
}

struct Criterion {
    int id;
    const char* name;
    std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria = {
        {1, "posterior update matches quadrature oracle", criterion_1},
        {2, "hill climb recovers the exhaustive argmax", criterion_2},
        {3, "trained-model hill-climb quality", criterion_3},
        {4, "interaction-strength regret ordering", criterion_4},
        {5, "complexity scaling ordering", criterion_5},
        {6, "context crossover", criterion_6},
        {7, "LRT calibration and power", criterion_7},
        {8, "property suite", criterion_8},
        {9, "realtime selection budget", criterion_9},
    };

    std::vector<int> requested;
    for (int i = 1; i < argc; ++i) {
        requested.push_back(std::atoi(argv[i]));
    }

    bool all_pass = true;
    for (const Criterion& criterion : criteria) {
        if (!requested.empty() &&
            std::find(requested.begin(), requested.end(), criterion.id) ==
                requested.end()) {
            continue;
        }
        std::ostringstream detail;
        bool ok = false;
        try {
            ok = criterion.run(detail);
        } catch (const std::exception& e) {
            detail << "exception: " << e.what();
        }
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion.id << " ("
                  << criterion.name << "): " << detail.str() << std::endl;
        all_pass = all_pass && ok;
    }
    return all_pass ? 0 : 1;
}
