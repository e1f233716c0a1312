#include "marginlab/bounds.hpp"

#include "marginlab/risk.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>

namespace marginlab {

double prop1_direction_bound(Eigen::Index n, double kl, double M, double norm_theta,
                             double gamma_star) {
    if (!(norm_theta > 0.0) || !(gamma_star > 0.0))
        throw DomainError("prop1_direction_bound: norm and margin must be positive");
    return 2.0 * (std::log(static_cast<double>(n)) + kl + M) / (norm_theta * gamma_star);
}

FenchelCheck fenchel_identity_check(const Vector& p, const WeightVector& w) {
    if (p.size() != w.size()) throw StructuralError("fenchel_identity_check: length mismatch");
    // zero entries of p push the optimal u_i to -inf; restrict to the support
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) support.push_back(i);
    const Eigen::Index k = static_cast<Eigen::Index>(support.size());
    const double n = static_cast<double>(p.size());

    Vector ps(k), ws(k);
    for (Eigen::Index j = 0; j < k; ++j) {
        ps(j) = p(support[static_cast<std::size_t>(j)]);
        ws(j) = w(support[static_cast<std::size_t>(j)]);
    }

    auto g = [&](const Vector& u) {
        double m = u.maxCoeff();
        double s = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) s += ws(j) * std::exp(u(j) - m);
        return m + std::log(s / n);
    };
    auto h = [&](const Vector& u) { return ps.dot(u) - g(u); };  // concave

    // gradient ascent with backtracking to gradient norm 1e-10
    Vector u = Vector::Zero(k);
    for (int it = 0; it < 100000; ++it) {
        double m = u.maxCoeff();
        Vector e(k);
        double s = 0.0;
        for (Eigen::Index j = 0; j < k; ++j) {
            e(j) = ws(j) * std::exp(u(j) - m);
            s += e(j);
        }
        Vector grad = ps - e / s;
        if (grad.norm() <= 1e-10) break;
        double h0 = h(u), t = 4.0;
        while (t > 1e-14 && h(u + t * grad) < h0 + 0.25 * t * grad.squaredNorm()) t *= 0.5;
        if (h(u + t * grad) - h0 < 1e-18 * std::max(1.0, std::abs(h0))) break;  // stalled at round-off
        u += t * grad;
    }

    FenchelCheck out;
    out.numeric = h(u);
    out.closed_form = std::log(n) + generalized_kl(p, w);
    out.abs_diff = std::abs(out.numeric - out.closed_form);
    return out;
}

double finite_step_margin_floor(double tau, double alpha, double r, double gamma_star, double c) {
    if (!(tau > 1.0) || tau > 2.0) throw DomainError("finite_step_margin_floor: tau must be in (1, 2]");
    if (!(c >= 0.1) || !(c < 1.0)) throw DomainError("finite_step_margin_floor: c must be in [0.1, 1)");
    return c * gamma_star / std::pow(tau, alpha / r);
}

namespace {

double gaussian_log_ratio(const GaussianSpec& src, const GaussianSpec& tgt, const Vector& x) {
    // equal isotropic covariance quotient, log p_t(x) - log p_s(x)
    double s2 = src.sigma * src.sigma;
    return (-(x - tgt.mean).squaredNorm() + (x - src.mean).squaredNorm()) / (2.0 * s2);
}

}  // namespace

double chi2_divergence(DensityPair& pair, long mc_samples, unsigned seed) {
    bool closed_ok = pair.source.sigma == pair.target.sigma;
    if (pair.chi2_method == Chi2Method::ClosedForm && closed_ok) {
        double s2 = pair.source.sigma * pair.source.sigma;
        double m2 = (pair.target.mean - pair.source.mean).squaredNorm() / s2;
        pair.chi2 = std::expm1(m2);
        pair.chi2_stderr = 0.0;
        return pair.chi2;
    }
    // Monte Carlo (also the fallback when the closed form is unsupported):
    // (1/m) sum eta(X_j)^2 - 1 over X_j ~ P_s
    pair.chi2_method = Chi2Method::MonteCarlo;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Eigen::Index d = pair.source.mean.size();
    double sum = 0.0, sumsq = 0.0;
    for (long j = 0; j < mc_samples; ++j) {
        Vector x(d);
        for (Eigen::Index i = 0; i < d; ++i)
            x(i) = pair.source.mean(i) + pair.source.sigma * gauss(rng);
        double eta2 = std::exp(2.0 * gaussian_log_ratio(pair.source, pair.target, x));
        sum += eta2;
        sumsq += eta2 * eta2;
    }
    double mean = sum / static_cast<double>(mc_samples);
    double var = std::max(0.0, sumsq / static_cast<double>(mc_samples) - mean * mean);
    pair.chi2 = mean - 1.0;
    pair.chi2_stderr = std::sqrt(var / static_cast<double>(mc_samples));
    return pair.chi2;
}

double weighted_rademacher_bound(const Dataset& data, int H, double prod_frobenius, double C) {
    if (!data.has_ratios()) throw DomainError("weighted_rademacher_bound: density ratios required");
    if (prod_frobenius < 0.0) throw DomainError("weighted_rademacher_bound: negative norm product");
    double n = static_cast<double>(data.size());
    double second_moment = data.ratios().squaredNorm() / n;
    return C * (std::sqrt(2.0 * std::log(2.0) * H) + 1.0) * prod_frobenius *
           std::sqrt(second_moment) / std::sqrt(n);
}

GenBoundReport generalization_bound(const Dataset& data, const Predictor& pred, const Vector& theta,
                                    double gamma, double delta, const DensityPair& pair,
                                    double C_sup_norm) {
    if (!data.has_ratios()) throw DomainError("generalization_bound: density ratios required");
    if (!(gamma > 0.0) || gamma >= 4.0 * C_sup_norm)
        throw DomainError("generalization_bound: gamma must lie in (0, 4C)");
    double norm = theta.norm();
    if (!(norm > 0.0)) throw DomainError("generalization_bound: theta must be nonzero");

    GenBoundReport rep;
    rep.gamma_used = gamma;
    rep.C_sup_norm = C_sup_norm;
    rep.n = data.size();
    rep.delta = delta;
    const auto* mlp = dynamic_cast<const HomogeneousMLP*>(&pred);
    rep.H = mlp ? mlp->depth() : 1;

    double n = static_cast<double>(data.size());
    double scale = std::pow(norm, pred.alpha());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        double m = data.label(i) * pred.forward(theta, data.sample(i)) / scale;
        if (m < gamma) acc += data.ratios()(i);
    }
    rep.term_I = acc / n;
    rep.term_II = C_sup_norm * std::sqrt(pair.chi2 + 1.0) /
                  (gamma * std::pow(static_cast<double>(rep.H), (rep.H - 1) / 2.0) * std::sqrt(n));
    // the log log term counts scale-grid levels and is never negative; clamp
    // so gamma in (2C, 4C) does not take sqrt of a negative number
    rep.epsilon = std::sqrt(std::max(0.0, std::log(std::log2(4.0 * C_sup_norm / gamma))) / n) +
                  std::sqrt(std::log(1.0 / delta) / n);
    rep.total = rep.term_I + rep.term_II + rep.epsilon;
    return rep;
}

GammaSweep optimal_gamma_sweep(const Dataset& data, const Predictor& pred, const Vector& theta,
                               double delta, const DensityPair& pair, double C_sup_norm) {
    double norm = theta.norm();
    double scale = std::pow(norm, pred.alpha());

    std::vector<double> candidates;
    double smallest_pos = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        double m = data.label(i) * pred.forward(theta, data.sample(i)) / scale;
        if (m > 0.0) {
            candidates.push_back(m);
            smallest_pos = std::min(smallest_pos, m);
        }
    }
    if (!std::isfinite(smallest_pos)) smallest_pos = 1e-3 * C_sup_norm;
    double lo = smallest_pos / 10.0, hi = 4.0 * C_sup_norm * (1.0 - 1e-6);
    for (int k = 0; k < 100; ++k)
        candidates.push_back(lo * std::pow(hi / lo, k / 99.0));
    std::sort(candidates.begin(), candidates.end());

    GammaSweep sweep;
    double best = std::numeric_limits<double>::infinity();
    for (double gamma : candidates) {
        if (!(gamma > 0.0) || gamma >= 4.0 * C_sup_norm) continue;
        GenBoundReport rep = generalization_bound(data, pred, theta, gamma, delta, pair, C_sup_norm);
        sweep.curve.push_back(rep);
        if (rep.total < best) {  // ascending candidates: strict < keeps the smaller gamma on ties
            best = rep.total;
            sweep.gamma_opt = gamma;
            sweep.total_at_opt = rep.total;
        }
    }
    return sweep;
}

void save_sweep_csv(const GammaSweep& sweep, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot write sweep file: " + path);
    out << std::setprecision(17);
    out << "gamma,term_I,term_II,epsilon,total\n";
    for (const auto& r : sweep.curve)
        out << r.gamma_used << "," << r.term_I << "," << r.term_II << "," << r.epsilon << ","
            << r.total << "\n";
}

}  // namespace marginlab
