#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvt/features.hpp"
#include "mvt/rng.hpp"

namespace mvt {

// One labeled impression: active features and a binary reward in {+1, -1}.
struct Observation {
    FeatureVector features;
    int reward = 1;
};

// A single draw of all model weights from the posterior.
struct WeightSample {
    std::vector<double> values;
};

// Factored Gaussian belief over the M model weights. Fresh posteriors start
// at the N(0, 1) prior per coordinate. Value semantics give the
// single-writer / many-reader snapshot contract: readers hold a copy (or read
// a stable instance) while a writer produces the next snapshot.
class GaussianPosterior {
public:
    GaussianPosterior() = default;
    explicit GaussianPosterior(std::size_t dimension)
        : means_(dimension, 0.0), variances_(dimension, 1.0) {}
    // Explicit moments; variances must be >= 0 (zero only for degenerate
    // hand-built fixtures, updates keep them strictly positive).
    GaussianPosterior(std::vector<double> means, std::vector<double> variances);

    std::size_t dimension() const { return means_.size(); }
    std::span<const double> means() const { return means_; }
    std::span<const double> variances() const { return variances_; }

    // Posterior-predictive success probability Phi(m / sqrt(1 + s^2)) with
    // m, s^2 the summed active means/variances; the unit term is the probit
    // noise.
    double predict(const FeatureVector& features) const;

    // Independent per-coordinate draws; deterministic given the rng state.
    WeightSample sample(Rng& rng) const;
    // Same draw into a caller-owned buffer of matching size.
    void sample_into(std::span<double> out, Rng& rng) const;

    // Moment-matched (assumed density filtering) probit update. Touches only
    // the active coordinates; their variances strictly decrease.
    void apply(const Observation& obs);
    void apply_batch(std::span<const Observation> batch);

private:
    std::vector<double> means_;
    std::vector<double> variances_;
};

// Functional forms of the update operations (snapshot in, snapshot out).
GaussianPosterior update(const GaussianPosterior& posterior, const Observation& obs);
GaussianPosterior batch_update(const GaussianPosterior& posterior,
                               std::span<const Observation> batch);

// Sum of log Phi(r * score) over the data at fixed point weights.
double log_likelihood(std::span<const double> means,
                      std::span<const Observation> data);

}  // namespace mvt
