#include "mvt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mvt/errors.hpp"

namespace mvt {

LrtResult lrt(double ll_restricted, double ll_full, int df) {
    if (df < 1) throw ValidationError("lrt requires df >= 1");
    double statistic = 2.0 * (ll_full - ll_restricted);
    const double tolerance =
        1e-7 * (std::fabs(ll_full) + std::fabs(ll_restricted)) + 1e-9;
    if (statistic < -tolerance) {
        throw ValidationError("negative LRT statistic: models are not nested "
                              "or fits are inconsistent");
    }
    statistic = std::max(statistic, 0.0);
    return {statistic, df, chi_square_upper_tail(statistic, df)};
}

double fit_for_lrt(ModelKind kind, const TemplateSpec& spec,
                   std::span<const LoggedImpression> data, int passes) {
    if (passes < 1) throw ValidationError("fit requires passes >= 1");
    const FeatureIndexer indexer(kind, spec);

    std::vector<Observation> observations;
    observations.reserve(data.size());
    for (const LoggedImpression& row : data) {
        const Context* ctx = kind.uses_context() ? &row.context : nullptr;
        observations.push_back({indexer.build(row.layout, ctx), row.reward});
    }

    GaussianPosterior posterior(indexer.dimension());
    for (int pass = 0; pass < passes; ++pass) {
        posterior.apply_batch(observations);
    }
    return log_likelihood(posterior.means(), observations);
}

LrtResult lrt_between(ModelKind restricted, ModelKind full, const TemplateSpec& spec,
                      std::span<const LoggedImpression> data, int passes) {
    // df is the identifiable-rank difference: indicator blocks are linearly
    // dependent, so the raw weight-count difference would overstate the
    // nested test's degrees of freedom and miscalibrate it.
    const auto rank_restricted = identifiable_rank(restricted, spec);
    const auto rank_full = identifiable_rank(full, spec);
    if (rank_full <= rank_restricted) {
        throw ValidationError("full model must strictly extend the restricted model");
    }
    const double ll_restricted = fit_for_lrt(restricted, spec, data, passes);
    const double ll_full = fit_for_lrt(full, spec, data, passes);
    return lrt(ll_restricted, ll_full, static_cast<int>(rank_full - rank_restricted));
}

std::vector<double> convergence_series(const History& history, std::size_t window) {
    if (window < 1 || window > history.size()) {
        throw ValidationError("convergence window out of range");
    }
    std::vector<double> series;
    series.reserve(history.size() / window);
    std::unordered_map<std::uint32_t, std::size_t> counts;
    for (std::size_t start = 0; start + window <= history.size(); start += window) {
        counts.clear();
        std::size_t modal = 0;
        for (std::size_t t = start; t < start + window; ++t) {
            modal = std::max(modal, ++counts[history.layout_ids[t]]);
        }
        series.push_back(static_cast<double>(modal) / static_cast<double>(window));
    }
    return series;
}

double normalized_success(double rate, double median_rate) {
    if (median_rate <= 0.0) {
        throw ValidationError("baseline rate must be positive");
    }
    return rate / median_rate - 1.0;
}

std::vector<HillClimbStudyRow> hill_climb_study(const GaussianPosterior& posterior,
                                                ModelKind kind,
                                                const SimulationTruth& truth,
                                                const HillClimbStudyConfig& config,
                                                Rng& rng) {
    if (config.trials < 1) throw ValidationError("study requires trials >= 1");
    if (kind.uses_context()) {
        throw ValidationError("hill climb study supports context-free models only");
    }
    const TemplateSpec& spec = truth.spec();
    const FeatureIndexer indexer(kind, spec);
    if (posterior.dimension() != indexer.dimension()) {
        throw ValidationError("posterior dimension does not match model kind");
    }
    // The truth's optimum for regret; the context is irrelevant for
    // context-free truths, cell 0 stands in.
    const double optimal = truth.optimal_reward_by_id(0);

    std::vector<HillClimbStudyRow> rows;
    WeightSample sample;
    sample.values.resize(posterior.dimension());
    for (int k : config.step_budgets) {
        for (int s : config.restart_counts) {
            HillClimbConfig hc;
            hc.max_steps = k;
            hc.restarts = s;
            HillClimbStudyRow row;
            row.max_steps = k;
            row.restarts = s;
            row.trials = config.trials;

            double steps_sum = 0.0, steps_sq = 0.0;
            std::size_t steps_n = 0;
            std::size_t global_hits = 0;
            double regret_random = 0.0, regret_converged = 0.0;
            for (int trial = 0; trial < config.trials; ++trial) {
                posterior.sample_into(sample.values, rng);
                double oracle_score = 0.0;
                exhaustive_argmax(sample, indexer, nullptr, kDefaultEnumerationCap,
                                  &oracle_score);
                const SelectionTrace trace =
                    hill_climb(sample, indexer, nullptr, hc, rng, &oracle_score);
                for (int st : trace.steps_per_restart) {
                    steps_sum += st;
                    steps_sq += static_cast<double>(st) * st;
                    ++steps_n;
                }
                if (trace.reached_global.value_or(false)) ++global_hits;

                Layout random_layout(spec.widget_count());
                for (int i = 0; i < spec.widget_count(); ++i) {
                    random_layout[i] = rng.uniform_int(1, spec.variations[i]);
                }
                regret_random +=
                    optimal - truth.expected_reward_by_id(
                                  layout_flat_id(spec, random_layout), 0);
                regret_converged +=
                    optimal - truth.expected_reward_by_id(
                                  layout_flat_id(spec, trace.layout), 0);
            }
            const double n = static_cast<double>(steps_n);
            row.mean_steps = steps_sum / n;
            row.sd_steps =
                std::sqrt(std::max(0.0, steps_sq / n - row.mean_steps * row.mean_steps));
            row.p_global = static_cast<double>(global_hits) / config.trials;
            row.regret_random = regret_random / config.trials;
            row.regret_converged = regret_converged / config.trials;
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace mvt
