#pragma once

namespace fsdea {

double normal_cdf(double x);

/// Regularized lower incomplete gamma P(a, x).
double gamma_p(double a, double x);
/// Regularized incomplete beta I_x(a, b).
double beta_inc(double a, double b, double x);

/// Upper-tail probability of a chi-squared variate with df degrees of freedom.
double chi2_sf(double x, double df);

/// Two-sided p-value of a Student-t statistic with df degrees of freedom.
double t_pvalue(double t, double df);

/// One-sided Kolmogorov-Smirnov limiting distribution Q(x) = P(D > x / sqrt(n)).
double ks_sf(double x);

}  // namespace fsdea
