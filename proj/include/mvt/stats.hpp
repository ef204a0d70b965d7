#pragma once

#include <cstddef>
#include <span>

namespace mvt {

// Upper-tail probability P(X > x) for a chi-square variable with df degrees
// of freedom, i.e. the regularized upper incomplete gamma Q(df/2, x/2).
double chi_square_upper_tail(double x, double df);

// One-sided upper-tail probability P(T > t) for Student's t with df degrees
// of freedom.
double student_t_upper_tail(double t, double df);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;  // standard error of the mean
    std::size_t n = 0;
};

MeanStderr mean_stderr(std::span<const double> values);

// One-sided paired t-test p-value for H1: mean(a - b) > 0.
double paired_t_test_greater(std::span<const double> a, std::span<const double> b);

}  // namespace mvt
