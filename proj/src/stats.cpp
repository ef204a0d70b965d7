#include "mvt/stats.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "mvt/errors.hpp"

namespace mvt {

double chi_square_upper_tail(double x, double df) {
    if (x <= 0.0) return 1.0;
    const boost::math::chi_squared_distribution<double> dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double student_t_upper_tail(double t, double df) {
    const boost::math::students_t_distribution<double> dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

MeanStderr mean_stderr(std::span<const double> values) {
    MeanStderr out;
    out.n = values.size();
    if (out.n == 0) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(out.n);
    if (out.n < 2) return out;
    double ss = 0.0;
    for (double v : values) {
        const double d = v - out.mean;
        ss += d * d;
    }
    const double sample_var = ss / static_cast<double>(out.n - 1);
    out.stderr_ = std::sqrt(sample_var / static_cast<double>(out.n));
    return out;
}

double paired_t_test_greater(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw ValidationError("paired t-test requires two equal-length samples, n >= 2");
    }
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const MeanStderr d = mean_stderr(diff);
    if (d.stderr_ == 0.0) {
        return d.mean > 0.0 ? 0.0 : 1.0;
    }
    const double t = d.mean / d.stderr_;
    return student_t_upper_tail(t, static_cast<double>(a.size() - 1));
}

}  // namespace mvt
