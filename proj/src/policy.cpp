#include "mvt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "mvt/errors.hpp"

namespace mvt {
namespace {

constexpr double kScoreTolerance = 1e-9;

}  // namespace

std::string to_string(ArgmaxMode mode) {
    return mode == ArgmaxMode::Exhaustive ? "exhaustive" : "hillclimb";
}

std::optional<ArgmaxMode> parse_argmax_mode(const std::string& name) {
    if (name == "exhaustive") return ArgmaxMode::Exhaustive;
    if (name == "hillclimb") return ArgmaxMode::HillClimb;
    return std::nullopt;
}

std::string SelectionTrace::csv_header() {
    return "layout,score,evaluations,steps,reached_global";
}

std::string SelectionTrace::csv_row() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < layout.size(); ++i) {
        if (i) out << '-';
        out << layout[i];
    }
    out.precision(17);
    out << ',' << score << ',' << evaluations << ',' << total_steps() << ',';
    if (reached_global) out << (*reached_global ? "true" : "false");
    return out.str();
}

LayoutScorer::LayoutScorer(const FeatureIndexer& indexer,
                           std::span<const double> weights, const Context* context)
    : indexer_(&indexer), weights_(weights), context_(context) {
    if (weights.size() != indexer.dimension()) {
        throw ValidationError("weight sample dimension does not match model");
    }
    if (indexer.kind().uses_context()) {
        if (!context) throw ValidationError("contextual model requires a context");
        validate_context(indexer.spec(), *context);
    }
}

double LayoutScorer::full_score(const Layout& layout) const {
    const FeatureIndexer& ix = *indexer_;
    const TemplateSpec& spec = ix.spec();
    const int d = spec.widget_count();

    switch (ix.kind().family) {
        case ModelFamily::NdMab:
            return weights_[layout_flat_id(spec, layout)];
        case ModelFamily::DMabs:
            return weights_[0] + weights_[1 + (layout[ix.kind().widget] - 1)];
        default:
            break;
    }
    double score = weights_[ix.bias()];
    for (int i = 0; i < d; ++i) score += weights_[ix.first_order(i, layout[i])];
    if (ix.has_pairwise()) {
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k)
                score += weights_[ix.pairwise(j, layout[j], k, layout[k])];
    }
    if (ix.has_third_order()) {
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k)
                for (int t = k + 1; t < d; ++t)
                    score += weights_[ix.third_order(j, layout[j], k, layout[k], t,
                                                     layout[t])];
    }
    if (ix.has_context()) {
        const int l = spec.context_dims();
        for (int dim = 0; dim < l; ++dim)
            score += weights_[ix.context_main(dim, (*context_)[dim])];
        for (int i = 0; i < d; ++i)
            for (int dim = 0; dim < l; ++dim)
                score += weights_[ix.content_context(i, layout[i], dim, (*context_)[dim])];
    }
    return score;
}

double LayoutScorer::widget_contribution(const Layout& layout, int widget,
                                         int content) const {
    const FeatureIndexer& ix = *indexer_;
    const TemplateSpec& spec = ix.spec();
    const int d = spec.widget_count();

    switch (ix.kind().family) {
        case ModelFamily::NdMab: {
            // No decomposition across widgets; treat the whole score as the
            // contribution so the replace identity still holds.
            std::uint64_t id = 0;
            for (int i = 0; i < d; ++i) {
                const int c = (i == widget) ? content : layout[i];
                id = id * static_cast<std::uint64_t>(spec.variations[i]) +
                     static_cast<std::uint64_t>(c - 1);
            }
            return weights_[id];
        }
        case ModelFamily::DMabs:
            if (widget != ix.kind().widget) return 0.0;
            return weights_[1 + (content - 1)];
        default:
            break;
    }
    double score = weights_[ix.first_order(widget, content)];
    if (ix.has_pairwise()) {
        for (int k = 0; k < d; ++k) {
            if (k == widget) continue;
            score += (k < widget)
                         ? weights_[ix.pairwise(k, layout[k], widget, content)]
                         : weights_[ix.pairwise(widget, content, k, layout[k])];
        }
    }
    if (ix.has_third_order()) {
        for (int k = 0; k < d; ++k) {
            if (k == widget) continue;
            for (int t = k + 1; t < d; ++t) {
                if (t == widget) continue;
                int wj = widget, wk = k, wm = t;
                int ca = content, cb = layout[k], cc = layout[t];
                // Sort the three (widget, content) pairs by widget index.
                if (wj > wk) { std::swap(wj, wk); std::swap(ca, cb); }
                if (wk > wm) { std::swap(wk, wm); std::swap(cb, cc); }
                if (wj > wk) { std::swap(wj, wk); std::swap(ca, cb); }
                score += weights_[ix.third_order(wj, ca, wk, cb, wm, cc)];
            }
        }
    }
    if (ix.has_context()) {
        const int l = spec.context_dims();
        for (int dim = 0; dim < l; ++dim)
            score += weights_[ix.content_context(widget, content, dim, (*context_)[dim])];
    }
    return score;
}

Layout exhaustive_argmax(const WeightSample& sample, const FeatureIndexer& indexer,
                         const Context* context, std::uint64_t cap,
                         double* best_score) {
    const TemplateSpec& spec = indexer.spec();
    detail::check_enumeration_cap(spec, cap);
    if (sample.values.size() != indexer.dimension()) {
        throw ValidationError("weight sample dimension does not match model");
    }

    if (indexer.kind().family == ModelFamily::NdMab) {
        // Weights are already indexed by flat layout id in enumeration order.
        std::uint32_t best = 0;
        for (std::uint32_t id = 1; id < indexer.dimension(); ++id) {
            if (sample.values[id] > sample.values[best]) best = id;
        }
        if (best_score) *best_score = sample.values[best];
        return layout_from_flat_id(spec, best);
    }

    const LayoutScorer scorer(indexer, sample.values, context);
    Layout best;
    double best_value = 0.0;
    for (LayoutEnumerator it(spec); !it.done(); it.next()) {
        const double value = scorer.full_score(it.layout());
        if (best.empty() || value > best_value) {
            best = it.layout();
            best_value = value;
        }
    }
    if (best_score) *best_score = best_value;
    return best;
}

SelectionTrace hill_climb(const WeightSample& sample, const FeatureIndexer& indexer,
                          const Context* context, const HillClimbConfig& config,
                          Rng& rng, const double* global_optimum_score) {
    if (config.restarts < 1) throw ValidationError("hill climb requires restarts >= 1");
    const TemplateSpec& spec = indexer.spec();
    const LayoutScorer scorer(indexer, sample.values, context);
    const int d = spec.widget_count();
    const int max_steps = config.resolved_max_steps(d);
    if (max_steps < 1) throw ValidationError("hill climb requires max_steps >= 1");

    SelectionTrace trace;
    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);

    for (int restart = 0; restart < config.restarts; ++restart) {
        Layout layout(d);
        for (int i = 0; i < d; ++i) layout[i] = rng.uniform_int(1, spec.variations[i]);
        double current = scorer.full_score(layout);
        ++trace.evaluations;

        int steps = 0;
        bool done = false;
        while (!done && steps < max_steps) {
            // Fresh visit order per sweep; a sweep with no change is a local
            // optimum.
            for (int i = d - 1; i > 0; --i) {
                std::swap(order[i], order[static_cast<int>(rng.uniform_below(
                                        static_cast<std::uint64_t>(i) + 1))]);
            }
            bool changed = false;
            int visited = 0;
            for (int pos = 0; pos < d && steps < max_steps; ++pos, ++visited) {
                const int widget = order[pos];
                ++steps;
                const int incumbent = layout[widget];
                const double incumbent_part =
                    scorer.widget_contribution(layout, widget, incumbent);
                int best_content = incumbent;
                double best_value = current;
                for (int c = 1; c <= spec.variations[widget]; ++c) {
                    if (c == incumbent) continue;
                    const double value =
                        current - incumbent_part + scorer.widget_contribution(layout, widget, c);
                    ++trace.evaluations;
                    if (value > best_value) {
                        best_value = value;
                        best_content = c;
                    }
                }
                if (best_content != incumbent) {
                    layout[widget] = best_content;
                    current = best_value;
                    changed = true;
                }
            }
            // Only a complete unchanged sweep certifies a local optimum; a
            // sweep cut short by the step budget does not.
            if (config.early_stop && !changed && visited == d) done = true;
        }
        trace.steps_per_restart.push_back(steps);
        if (restart == 0 || current > trace.score) {
            trace.layout = layout;
            trace.score = current;
        }
    }
    if (global_optimum_score) {
        trace.reached_global =
            trace.score >= *global_optimum_score -
                               kScoreTolerance * std::max(1.0, std::fabs(*global_optimum_score));
    }
    return trace;
}

SelectionTrace thompson_select(const GaussianPosterior& posterior,
                               const FeatureIndexer& indexer, const Context* context,
                               ArgmaxMode mode, const HillClimbConfig& config,
                               Rng& rng) {
    const WeightSample sample = posterior.sample(rng);
    if (mode == ArgmaxMode::HillClimb) {
        return hill_climb(sample, indexer, context, config, rng);
    }
    SelectionTrace trace;
    trace.layout = exhaustive_argmax(sample, indexer, context,
                                     kDefaultEnumerationCap, &trace.score);
    trace.evaluations = indexer.spec().layout_count();
    return trace;
}

Layout exhaustive_argmax(const WeightSample& sample, const TemplateSpec& spec,
                         ModelKind kind, const Context* context, std::uint64_t cap,
                         double* best_score) {
    return exhaustive_argmax(sample, FeatureIndexer(kind, spec), context, cap,
                             best_score);
}

SelectionTrace hill_climb(const WeightSample& sample, const TemplateSpec& spec,
                          ModelKind kind, const Context* context,
                          const HillClimbConfig& config, Rng& rng,
                          const double* global_optimum_score) {
    return hill_climb(sample, FeatureIndexer(kind, spec), context, config, rng,
                      global_optimum_score);
}

SelectionTrace thompson_select(const GaussianPosterior& posterior,
                               const TemplateSpec& spec, ModelKind kind,
                               const Context* context, ArgmaxMode mode,
                               const HillClimbConfig& config, Rng& rng) {
    return thompson_select(posterior, FeatureIndexer(kind, spec), context, mode,
                           config, rng);
}

Layout dmabs_select(std::span<const GaussianPosterior> posteriors,
                    const TemplateSpec& spec, Rng& rng) {
    const int d = spec.widget_count();
    if (static_cast<int>(posteriors.size()) != d) {
        throw ValidationError("dmabs_select requires one posterior per widget");
    }
    Layout layout(d);
    for (int i = 0; i < d; ++i) {
        const int n = spec.variations[i];
        if (posteriors[i].dimension() != static_cast<std::size_t>(1 + n)) {
            throw ValidationError("per-widget posterior has wrong dimension");
        }
        const WeightSample sample = posteriors[i].sample(rng);
        int best = 1;
        for (int c = 2; c <= n; ++c) {
            if (sample.values[1 + (c - 1)] > sample.values[1 + (best - 1)]) best = c;
        }
        layout[i] = best;
    }
    return layout;
}

}  // namespace mvt
