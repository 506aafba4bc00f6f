#pragma once

#include <string>
#include <vector>

namespace mova {

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
};

double mean(const std::vector<double>& xs);

// Sample variance with the n-1 denominator.
double sample_variance(const std::vector<double>& xs);

// Regularised incomplete beta I_x(a, b), evaluated with a continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Two-tailed p for a t statistic with the given degrees of freedom.
double student_t_two_tailed_p(double t, double df);

// Unequal-variance two-sample t test. Degenerate inputs resolve explicitly:
// identical constant samples give t=0, p=1; constant samples with different
// means give an infinite t and p=0. Fewer than two values per side is an
// error.
WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b);

// "***" below 0.001, "**" below 0.01, "*" below 0.05, otherwise empty.
// Boundary values do not earn the star.
std::string significance_stars(double p);

} // namespace mova
