#include "mvt/simulator.hpp"

#include <atomic>
#include <cmath>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include "mvt/errors.hpp"
#include "mvt/probit.hpp"

namespace mvt {

void SimConfig::validate() const {
    spec.validate();
    if (alpha1 < 0 || alpha2 < 0 || alphac < 0) {
        throw ValidationError("alpha parameters must be non-negative");
    }
    if (alphac > 0 && spec.context_dims() < 1) {
        throw ValidationError("alphac > 0 requires at least one context dimension");
    }
    if (horizon < 0) throw ValidationError("T must be non-negative");
    if (batch_period < 1) throw ValidationError("batch_period must be positive");
    if (repetitions < 1) throw ValidationError("repetitions must be positive");
    if (window < 1) throw ValidationError("window must be positive");
    if (algorithms.empty()) throw ValidationError("at least one algorithm required");
    for (const AlgorithmConfig& a : algorithms) {
        if (a.uniform_random) continue;
        if (a.kind.family == ModelFamily::Mvt2c && spec.context_dims() < 1) {
            throw ValidationError("mvt2c requires at least one context dimension");
        }
        if (a.kind.family == ModelFamily::DMabs && !a.kind.is_dmabs_ensemble()) {
            throw ValidationError("per-widget dmab kinds are internal; use dmabs");
        }
    }
}

double truth_beta(const TemplateSpec& spec, double alpha1, double alpha2,
                  double alphac) {
    const double d = spec.widget_count();
    const double l = spec.context_dims();
    const double pairs = d * (d - 1) / 2.0;
    return std::sqrt(1.0 + alpha1 * alpha1 * d + alpha2 * alpha2 * pairs +
                     alphac * alphac * l + alphac * alphac * d * l);
}

SimulationTruth::SimulationTruth(const SimConfig& config, Rng& rng) {
    const FeatureIndexer indexer = init_shape(config);
    weights_.resize(indexer.dimension());
    for (double& w : weights_) w = rng.normal();
    init_tables(config, indexer);
}

SimulationTruth::SimulationTruth(const SimConfig& config, std::vector<double> weights) {
    const FeatureIndexer indexer = init_shape(config);
    if (weights.size() != indexer.dimension()) {
        throw ValidationError("truth weight vector has the wrong dimension");
    }
    weights_ = std::move(weights);
    init_tables(config, indexer);
}

FeatureIndexer SimulationTruth::init_shape(const SimConfig& config) {
    config.validate();
    spec_ = config.spec;
    const bool contextual = config.alphac > 0 && spec_.context_dims() > 0;
    kind_ = contextual ? ModelKind::mvt2c() : ModelKind::mvt2();
    beta_ = truth_beta(spec_, config.alpha1, config.alpha2, config.alphac);
    return FeatureIndexer(kind_, spec_);
}

void SimulationTruth::init_tables(const SimConfig& config,
                                  const FeatureIndexer& indexer) {

    // Fold the per-class alpha and the 1/beta normalization into the weights
    // once; scoring is then a plain sparse sum.
    scaled_weights_.resize(weights_.size());
    for (std::uint32_t i = 0; i < weights_.size(); ++i) {
        const WeightDescriptor desc = indexer.descriptor_of(i);
        double alpha = 1.0;
        if (std::holds_alternative<weight::FirstOrder>(desc)) {
            alpha = config.alpha1;
        } else if (std::holds_alternative<weight::Pairwise>(desc)) {
            alpha = config.alpha2;
        } else if (std::holds_alternative<weight::ContextMain>(desc) ||
                   std::holds_alternative<weight::ContentContext>(desc)) {
            alpha = config.alphac;
        }
        scaled_weights_[i] = alpha * weights_[i] / beta_;
    }

    // Desk-scale environments admit a full (context, layout) reward table and
    // the exhaustive optimum it implies.
    layout_count_ = static_cast<std::size_t>(spec_.layout_count());
    const std::size_t contexts = static_cast<std::size_t>(spec_.context_count());
    if (layout_count_ > kDefaultEnumerationCap) {
        throw CapExceededError("simulation truth requires an enumerable layout space");
    }
    if (contexts * layout_count_ > (std::size_t{1} << 26)) {
        throw CapExceededError("context * layout table too large to precompute");
    }

    reward_table_.resize(contexts * layout_count_);
    optimal_reward_.assign(contexts, 0.0);
    optimal_layout_.assign(contexts, 0);
    const bool truth_uses_context = kind_.uses_context();
    for (std::uint32_t c = 0; c < contexts; ++c) {
        const Context ctx = context_from_flat_id(spec_, c);
        const LayoutScorer scorer(indexer, scaled_weights_,
                                  truth_uses_context ? &ctx : nullptr);
        std::uint32_t id = 0;
        double best = -1.0;
        std::uint32_t best_id = 0;
        for (LayoutEnumerator it(spec_); !it.done(); it.next(), ++id) {
            const double p = normal_cdf(scorer.full_score(it.layout()));
            reward_table_[table_slot(id, c)] = p;
            if (p > best) {
                best = p;
                best_id = id;
            }
        }
        optimal_reward_[c] = best;
        optimal_layout_[c] = best_id;
    }
}

double SimulationTruth::expected_reward(const Layout& layout,
                                        const Context& context) const {
    validate_layout(spec_, layout);
    validate_context(spec_, context);
    return expected_reward_by_id(layout_flat_id(spec_, layout),
                                 context_flat_id(spec_, context));
}

double SimulationTruth::optimal_reward(const Context& context) const {
    validate_context(spec_, context);
    return optimal_reward_[context_flat_id(spec_, context)];
}

int SimulationTruth::sample_reward_by_id(std::uint32_t layout_id,
                                         std::uint32_t context_id, Rng& rng) const {
    const double p = expected_reward_by_id(layout_id, context_id);
    return rng.uniform01() < p ? 1 : -1;
}

int SimulationTruth::sample_reward(const Layout& layout, const Context& context,
                                   Rng& rng) const {
    validate_layout(spec_, layout);
    validate_context(spec_, context);
    return sample_reward_by_id(layout_flat_id(spec_, layout),
                               context_flat_id(spec_, context), rng);
}

double regret(const History& history) {
    if (history.size() == 0) return 0.0;
    return local_regret(history, 1, history.size());
}

double local_regret(const History& history, std::size_t t0, std::size_t t1) {
    if (t0 < 1 || t0 > t1 || t1 > history.size()) {
        throw ValidationError("local regret window out of range");
    }
    double total = 0.0;
    for (std::size_t t = t0 - 1; t < t1; ++t) {
        const double reward01 = history.rewards[t] > 0 ? 1.0 : 0.0;
        total += history.expected_optimal[t] - reward01;
    }
    return total / static_cast<double>(t1 - t0 + 1);
}

double final_local_regret(const History& history, int window) {
    if (history.size() == 0) return 0.0;
    const std::size_t w = std::min<std::size_t>(window, history.size());
    return local_regret(history, history.size() - w + 1, history.size());
}

namespace {

// Per-algorithm learner state inside the loop.
class Agent {
public:
    virtual ~Agent() = default;
    virtual Layout select(const Context* context, Rng& rng) = 0;
    virtual void observe(const Layout& layout, const Context* context, int reward) = 0;
    virtual void train() = 0;
    virtual std::vector<GaussianPosterior> posteriors() const { return {}; }
};

class BlipAgent : public Agent {
public:
    BlipAgent(ModelKind kind, const TemplateSpec& spec, ArgmaxMode argmax,
              const HillClimbConfig& hc)
        : indexer_(kind, spec),
          posterior_(indexer_.dimension()),
          argmax_(argmax),
          hill_climb_(hc) {
        sample_.values.resize(indexer_.dimension());
    }

    Layout select(const Context* context, Rng& rng) override {
        const Context* ctx = indexer_.kind().uses_context() ? context : nullptr;
        posterior_.sample_into(sample_.values, rng);
        if (argmax_ == ArgmaxMode::HillClimb) {
            return hill_climb(sample_, indexer_, ctx, hill_climb_, rng).layout;
        }
        return exhaustive_argmax(sample_, indexer_, ctx);
    }

    void observe(const Layout& layout, const Context* context, int reward) override {
        const Context* ctx = indexer_.kind().uses_context() ? context : nullptr;
        pending_.push_back({indexer_.build(layout, ctx), reward});
    }

    void train() override {
        posterior_.apply_batch(pending_);
        pending_.clear();
    }

    std::vector<GaussianPosterior> posteriors() const override { return {posterior_}; }

private:
    FeatureIndexer indexer_;
    GaussianPosterior posterior_;
    ArgmaxMode argmax_;
    HillClimbConfig hill_climb_;
    WeightSample sample_;
    std::vector<Observation> pending_;
};

class DmabsAgent : public Agent {
public:
    explicit DmabsAgent(const TemplateSpec& spec) : spec_(&spec) {
        const int d = spec.widget_count();
        indexers_.reserve(d);
        for (int i = 0; i < d; ++i) {
            indexers_.emplace_back(ModelKind::dmab(i), spec);
            posteriors_.emplace_back(indexers_.back().dimension());
        }
        pending_.resize(d);
    }

    Layout select(const Context*, Rng& rng) override {
        return dmabs_select(posteriors_, *spec_, rng);
    }

    void observe(const Layout& layout, const Context*, int reward) override {
        // Every widget's model sees the impression, each through its own
        // two-feature view; there is no shared error signal.
        for (std::size_t i = 0; i < indexers_.size(); ++i) {
            pending_[i].push_back({indexers_[i].build(layout), reward});
        }
    }

    void train() override {
        for (std::size_t i = 0; i < posteriors_.size(); ++i) {
            posteriors_[i].apply_batch(pending_[i]);
            pending_[i].clear();
        }
    }

    std::vector<GaussianPosterior> posteriors() const override { return posteriors_; }

private:
    const TemplateSpec* spec_;
    std::vector<FeatureIndexer> indexers_;
    std::vector<GaussianPosterior> posteriors_;
    std::vector<std::vector<Observation>> pending_;
};

class RandomAgent : public Agent {
public:
    explicit RandomAgent(const TemplateSpec& spec) : spec_(&spec) {}

    Layout select(const Context*, Rng& rng) override {
        Layout layout(spec_->widget_count());
        for (int i = 0; i < spec_->widget_count(); ++i) {
            layout[i] = rng.uniform_int(1, spec_->variations[i]);
        }
        return layout;
    }
    void observe(const Layout&, const Context*, int) override {}
    void train() override {}

private:
    const TemplateSpec* spec_;
};

std::unique_ptr<Agent> make_agent(const SimConfig& config,
                                  const AlgorithmConfig& algorithm) {
    if (algorithm.uniform_random) {
        return std::make_unique<RandomAgent>(config.spec);
    }
    if (algorithm.kind.is_dmabs_ensemble()) {
        return std::make_unique<DmabsAgent>(config.spec);
    }
    return std::make_unique<BlipAgent>(algorithm.kind, config.spec, algorithm.argmax,
                                       algorithm.hill_climb);
}

History run_agent_loop(const SimConfig& config, const SimulationTruth& truth,
                       Agent& agent, std::uint64_t env_seed,
                       std::uint64_t policy_seed, bool fold_remainder) {
    const TemplateSpec& spec = config.spec;
    Rng env_rng(env_seed);
    Rng policy_rng(policy_seed);

    History history;
    const auto t_total = static_cast<std::size_t>(config.horizon);
    history.layout_ids.reserve(t_total);
    history.context_ids.reserve(t_total);
    history.rewards.reserve(t_total);
    history.expected_chosen.reserve(t_total);
    history.expected_optimal.reserve(t_total);

    const int l = spec.context_dims();
    Context context(l);
    for (std::size_t t = 1; t <= t_total; ++t) {
        for (int dim = 0; dim < l; ++dim) {
            context[dim] = env_rng.uniform_int(1, spec.context_cardinalities[dim]);
        }
        const std::uint32_t context_id = context_flat_id(spec, context);

        const Layout layout = agent.select(&context, policy_rng);
        const std::uint32_t layout_id = layout_flat_id(spec, layout);
        const int reward = truth.sample_reward_by_id(layout_id, context_id, env_rng);

        history.layout_ids.push_back(layout_id);
        history.context_ids.push_back(context_id);
        history.rewards.push_back(static_cast<std::int8_t>(reward));
        history.expected_chosen.push_back(truth.expected_reward_by_id(layout_id, context_id));
        history.expected_optimal.push_back(truth.optimal_reward_by_id(context_id));

        agent.observe(layout, &context, reward);
        if (t % static_cast<std::size_t>(config.batch_period) == 0) {
            agent.train();
        }
    }
    if (fold_remainder) agent.train();
    return history;
}

}  // namespace

History run_loop(const SimConfig& config, const SimulationTruth& truth,
                 const AlgorithmConfig& algorithm, std::uint64_t env_seed,
                 std::uint64_t policy_seed) {
    config.validate();
    std::unique_ptr<Agent> agent = make_agent(config, algorithm);
    return run_agent_loop(config, truth, *agent, env_seed, policy_seed, false);
}

TrainedModel train_model(const SimConfig& config, const SimulationTruth& truth,
                         const AlgorithmConfig& algorithm, std::uint64_t env_seed,
                         std::uint64_t policy_seed) {
    config.validate();
    std::unique_ptr<Agent> agent = make_agent(config, algorithm);
    TrainedModel model;
    model.history = run_agent_loop(config, truth, *agent, env_seed, policy_seed, true);
    model.kind = algorithm.uniform_random ? ModelKind::mvt2() : algorithm.kind;
    model.posteriors = agent->posteriors();
    return model;
}

ExperimentResult run_experiment(const SimConfig& config, int jobs,
                                const RunSink& sink) {
    config.validate();
    if (jobs < 1) jobs = 1;

    const std::size_t reps = static_cast<std::size_t>(config.repetitions);
    const std::size_t algs = config.algorithms.size();

    std::vector<SimulationTruth> truths;
    truths.reserve(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        Rng truth_rng(derive_seed(config.seed, "truth", r));
        truths.emplace_back(config, truth_rng);
    }

    ExperimentResult out;
    out.algorithms.resize(algs);
    for (std::size_t a = 0; a < algs; ++a) {
        out.algorithms[a].label = config.algorithms[a].label();
    }

    const auto run_one = [&](std::size_t a, std::size_t r) {
        return run_loop(config, truths[r], config.algorithms[a],
                        derive_seed(config.seed, "env", r),
                        derive_seed(config.seed, "policy", a, r));
    };
    // Consumes a finished run in deterministic order and drops its history.
    const auto consume = [&](std::size_t a, std::size_t r, History&& h) {
        if (sink) sink(a, static_cast<int>(r), h);
        AlgorithmSummary& summary = out.algorithms[a];
        summary.final_local_regret.push_back(final_local_regret(h, config.window));
        summary.overall_regret.push_back(regret(h));
        h = History{};
    };

    const std::size_t total = algs * reps;
    if (jobs == 1 || total == 1) {
        for (std::size_t a = 0; a < algs; ++a)
            for (std::size_t r = 0; r < reps; ++r) consume(a, r, run_one(a, r));
    } else {
        std::vector<History> results(total);
        std::vector<char> ready(total, 0);
        std::mutex mutex;
        std::condition_variable cv;
        std::atomic<std::size_t> next{0};
        const auto worker = [&] {
            for (;;) {
                const std::size_t task = next.fetch_add(1);
                if (task >= total) return;
                History h = run_one(task / reps, task % reps);
                {
                    std::lock_guard lock(mutex);
                    results[task] = std::move(h);
                    ready[task] = 1;
                }
                cv.notify_all();
            }
        };
        std::vector<std::thread> pool;
        const std::size_t n_threads = std::min<std::size_t>(jobs, total);
        pool.reserve(n_threads);
        for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (std::size_t task = 0; task < total; ++task) {
            History h;
            {
                std::unique_lock lock(mutex);
                cv.wait(lock, [&] { return ready[task] != 0; });
                h = std::move(results[task]);
            }
            consume(task / reps, task % reps, std::move(h));
        }
        for (auto& th : pool) th.join();
    }

    for (AlgorithmSummary& summary : out.algorithms) {
        summary.final_local = mean_stderr(summary.final_local_regret);
        summary.overall = mean_stderr(summary.overall_regret);
    }
    return out;
}

}  // namespace mvt
