#include "mvt/blip.hpp"

#include <cmath>

#include "mvt/errors.hpp"
#include "mvt/probit.hpp"

namespace mvt {
namespace {

void check_dimension(const GaussianPosterior& posterior, const FeatureVector& f) {
    if (f.dimension() != posterior.dimension()) {
        throw ValidationError("feature vector dimension does not match posterior");
    }
}

void check_reward(int reward) {
    if (reward != 1 && reward != -1) {
        throw ValidationError("reward must be +1 or -1");
    }
}

}  // namespace

GaussianPosterior::GaussianPosterior(std::vector<double> means,
                                     std::vector<double> variances)
    : means_(std::move(means)), variances_(std::move(variances)) {
    if (means_.size() != variances_.size()) {
        throw ValidationError("means and variances must have equal length");
    }
    for (double v : variances_) {
        if (!(v >= 0.0)) {
            throw ValidationError("variances must be non-negative");
        }
    }
}

double GaussianPosterior::predict(const FeatureVector& features) const {
    check_dimension(*this, features);
    double mean = 0.0, var = 0.0;
    for (std::uint32_t i : features.active()) {
        mean += means_[i];
        var += variances_[i];
    }
    return normal_cdf(mean / std::sqrt(1.0 + var));
}

WeightSample GaussianPosterior::sample(Rng& rng) const {
    WeightSample s;
    s.values.resize(means_.size());
    sample_into(s.values, rng);
    return s;
}

void GaussianPosterior::sample_into(std::span<double> out, Rng& rng) const {
    if (out.size() != means_.size()) {
        throw ValidationError("sample buffer dimension does not match posterior");
    }
    for (std::size_t i = 0; i < means_.size(); ++i) {
        out[i] = means_[i] + std::sqrt(variances_[i]) * rng.normal();
    }
}

void GaussianPosterior::apply(const Observation& obs) {
    check_dimension(*this, obs.features);
    check_reward(obs.reward);
    const double r = static_cast<double>(obs.reward);

    double mean = 0.0, var = 0.0;
    for (std::uint32_t i : obs.features.active()) {
        mean += means_[i];
        var += variances_[i];
    }
    const double total_sd = std::sqrt(1.0 + var);
    const double t = r * mean / total_sd;
    const double v = inverse_mills(t);
    const double w = mills_w(t);
    if (!std::isfinite(v) || !std::isfinite(w)) {
        throw ValidationError("non-finite probit update intermediate");
    }
    for (std::uint32_t i : obs.features.active()) {
        means_[i] += r * (variances_[i] / total_sd) * v;
        variances_[i] *= 1.0 - (variances_[i] / (1.0 + var)) * w;
    }
}

void GaussianPosterior::apply_batch(std::span<const Observation> batch) {
    for (const Observation& obs : batch) {
        apply(obs);
    }
}

GaussianPosterior update(const GaussianPosterior& posterior, const Observation& obs) {
    GaussianPosterior next = posterior;
    next.apply(obs);
    return next;
}

GaussianPosterior batch_update(const GaussianPosterior& posterior,
                               std::span<const Observation> batch) {
    GaussianPosterior next = posterior;
    next.apply_batch(batch);
    return next;
}

double log_likelihood(std::span<const double> means,
                      std::span<const Observation> data) {
    double total = 0.0;
    for (const Observation& obs : data) {
        check_reward(obs.reward);
        double score = 0.0;
        for (std::uint32_t i : obs.features.active()) {
            score += means[i];
        }
        total += log_normal_cdf(obs.reward * score);
    }
    return total;
}

}  // namespace mvt
