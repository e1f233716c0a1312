#pragma once

#include "marginlab/dataset.hpp"
#include "marginlab/predictor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace marginlab {

struct GaussianSpec {
    Vector mean;
    double sigma = 1.0;  // isotropic, shared across source/target
};

enum class Chi2Method { ClosedForm, MonteCarlo };

struct DensityPair {
    GaussianSpec source;
    GaussianSpec target;
    double chi2 = 0.0;
    Chi2Method chi2_method = Chi2Method::ClosedForm;
    double chi2_stderr = 0.0;  // Monte Carlo only
};

struct GenBoundReport {
    double term_I = 0.0;
    double term_II = 0.0;
    double epsilon = 0.0;
    double total = 0.0;
    double gamma_used = 0.0;
    double C_sup_norm = 0.0;
    int H = 1;
    Eigen::Index n = 0;
    double delta = 0.05;
};

/// Prop 1 right-hand side: 2 (log n + D_KL(p||w) + M) / (||theta|| gamma*).
/// Compared by the caller against observed dir_gap^2.
double prop1_direction_bound(Eigen::Index n, double kl, double M, double norm_theta,
                             double gamma_star);

struct FenchelCheck {
    double numeric = 0.0;      // sup_u <p,u> - g(u) by gradient ascent
    double closed_form = 0.0;  // log n + D_KL(p||w)
    double abs_diff = 0.0;
};

/// Both routes to the conjugate of g(u) = log (1/n) sum_i w_i exp(u_i).
FenchelCheck fenchel_identity_check(const Vector& p, const WeightVector& w);

/// Prop 3 finite-step floor c gamma* / tau^{alpha/r}, tau in (1, 2].
double finite_step_margin_floor(double tau, double alpha, double r, double gamma_star, double c);

/// Chi-squared divergence D(P_t||P_s) for the generator pair. Closed form
/// needs equal covariances; other pairs fall back to Monte Carlo.
double chi2_divergence(DensityPair& pair, long mc_samples = 1000000, unsigned seed = 0);

/// Finite-sample weighted Rademacher bound
/// C (sqrt(2 log(2) H) + 1) prod_frobenius sqrt((1/n) sum eta_i^2) / sqrt(n).
double weighted_rademacher_bound(const Dataset& data, int H, double prod_frobenius, double C);

GenBoundReport generalization_bound(const Dataset& data, const Predictor& pred, const Vector& theta,
                                    double gamma, double delta, const DensityPair& pair,
                                    double C_sup_norm);

struct GammaSweep {
    double gamma_opt = 0.0;
    double total_at_opt = 0.0;
    std::vector<GenBoundReport> curve;
};

/// Minimizes the Theorem-1 total over the observed margins plus a 100-point
/// log grid; ties go to the smaller gamma.
GammaSweep optimal_gamma_sweep(const Dataset& data, const Predictor& pred, const Vector& theta,
                               double delta, const DensityPair& pair, double C_sup_norm);

void save_sweep_csv(const GammaSweep& sweep, const std::string& path);

}  // namespace marginlab
