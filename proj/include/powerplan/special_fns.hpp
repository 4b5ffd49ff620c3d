#pragma once

// Distribution kernel: standard normal, chi-squared and symmetric F(nu, nu)
// laws, built on the regularized incomplete gamma and beta functions.
//
// Every function is pure and thread-safe. Arguments outside the domain raise
// powerplan::Error with ErrorKind::domain.

namespace powerplan::special {

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------
double std_normal_pdf(double z);
double std_normal_cdf(double z);
// Upper tail 1 - Phi(z), computed without cancellation.
double std_normal_sf(double z);
double std_normal_quantile(double p);

// ---------------------------------------------------------------------------
// Regularized incomplete functions
// ---------------------------------------------------------------------------

// P(a, x) and Q(a, x) = 1 - P(a, x). Series below x = a + 1, continued
// fraction above.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// I_x(a, b). The caller passes y = 1 - x as well so that upper-tail arguments
// keep full precision.
double beta_inc(double a, double b, double x, double y);

// log(x^a e^-x / Gamma(a)), stable for large a.
double log_gamma_kernel(double a, double x);
// log(x^a y^b / B(a, b)) with y = 1 - x, stable for large a + b.
double log_beta_kernel(double a, double b, double x, double y);

// ---------------------------------------------------------------------------
// Chi-squared with nu degrees of freedom
// ---------------------------------------------------------------------------
double chi2_pdf(double x, double nu);
double chi2_cdf(double x, double nu);
double chi2_sf(double x, double nu);
double chi2_quantile(double p, double nu);
// d/dx log pdf, used for second derivatives of quantiles.
double chi2_log_pdf_slope(double x, double nu);

// ---------------------------------------------------------------------------
// F distribution with symmetric degrees of freedom (nu, nu)
// ---------------------------------------------------------------------------
double f_pdf(double x, double nu);
double f_cdf(double x, double nu);
double f_sf(double x, double nu);
double f_quantile(double p, double nu);

}  // namespace powerplan::special
