#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvt/simulator.hpp"

namespace mvt {

struct LrtResult {
    double statistic = 0.0;  // 2 * (ll_full - ll_restricted), clamped at 0
    int df = 1;
    double p_value = 1.0;
};

// Nested-model likelihood ratio test with df the parameter-count difference.
// Throws if the statistic is negative beyond numerical tolerance.
LrtResult lrt(double ll_restricted, double ll_full, int df);

// Raw impression log row, the input to offline fits: data collected under
// uniform-random layout assignment.
struct LoggedImpression {
    Layout layout;
    Context context;
    int reward = 1;  // +1 / -1
};

// Trains a fresh posterior on the log (multiple sequential passes) and
// returns the log likelihood of the data at the posterior means.
double fit_for_lrt(ModelKind kind, const TemplateSpec& spec,
                   std::span<const LoggedImpression> data, int passes = 5);

// Fits the restricted and full kinds and runs the test; df is the exact
// parameter-count difference.
LrtResult lrt_between(ModelKind restricted, ModelKind full, const TemplateSpec& spec,
                      std::span<const LoggedImpression> data, int passes = 5);

// Fraction of plays equal to the window's modal layout, one value per
// complete non-overlapping window. 1.0 means the algorithm always played the
// same arm within the window.
std::vector<double> convergence_series(const History& history, std::size_t window);

// Lift over a baseline success rate: rate / median_rate - 1.
double normalized_success(double rate, double median_rate);

struct HillClimbStudyConfig {
    std::vector<int> step_budgets;  // K grid
    std::vector<int> restart_counts = {1};
    int trials = 1000;
};

struct HillClimbStudyRow {
    int max_steps = 0;  // K
    int restarts = 0;   // S
    int trials = 0;
    double mean_steps = 0.0;  // widget steps per restart (a sweep is D steps)
    double sd_steps = 0.0;
    double p_global = 0.0;
    double regret_random = 0.0;
    double regret_converged = 0.0;
};

// Repeated hill climbs on fresh posterior samples, each scored against the
// exhaustive argmax of the same sample and against the truth's optimum:
// p_global is the fraction reaching the sample's global optimum,
// regret_random / regret_converged the mean truth regret of a uniform layout
// vs the returned one. Context-free models only.
std::vector<HillClimbStudyRow> hill_climb_study(const GaussianPosterior& posterior,
                                                ModelKind kind,
                                                const SimulationTruth& truth,
                                                const HillClimbStudyConfig& config,
                                                Rng& rng);

}  // namespace mvt
