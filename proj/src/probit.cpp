#include "mvt/probit.hpp"

#include <cmath>

namespace mvt {
namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Threshold below which Phi is evaluated through the Mills ratio. erfc keeps
// full relative precision well past this point, so the two branches agree to
// ~1e-15 around the switch.
constexpr double kTailCut = -12.0;

// Mills ratio R(z) = Phi(-z) / pdf(z) for z > 0, by the Laplace continued
// fraction R(z) = 1 / (z + 1 / (z + 2 / (z + 3 / ...))), evaluated backward.
// Converges to machine precision for z >= 8 at this depth.
double mills_ratio_tail(double z) {
    double f = 0.0;
    for (int n = 96; n >= 1; --n) {
        f = static_cast<double>(n) / (z + f);
    }
    return 1.0 / (z + f);
}

}  // namespace

double normal_pdf(double x) {
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    if (x >= kTailCut) {
        return 0.5 * std::erfc(-x * kInvSqrt2);
    }
    return normal_pdf(x) * mills_ratio_tail(-x);
}

double log_normal_cdf(double x) {
    if (x >= kTailCut) {
        return std::log(0.5 * std::erfc(-x * kInvSqrt2));
    }
    // log pdf(x) + log R(-x); exact where Phi itself would underflow.
    return -0.5 * x * x - kLogSqrt2Pi + std::log(mills_ratio_tail(-x));
}

double inverse_mills(double t) {
    if (t >= kTailCut) {
        return normal_pdf(t) / normal_cdf(t);
    }
    return 1.0 / mills_ratio_tail(-t);
}

double mills_w(double t) {
    const double v = inverse_mills(t);
    return v * (v + t);
}

}  // namespace mvt
