#include "marginlab/risk.hpp"

#include <cmath>

namespace marginlab {

namespace {

Vector sample_margins(const Predictor& pred, const Vector& theta, const Dataset& data) {
    Vector u(data.size());
    for (Eigen::Index i = 0; i < data.size(); ++i)
        u(i) = data.label(i) * pred.forward(theta, data.sample(i));
    return u;
}

void check_inputs(const Predictor& pred, const Vector& theta, const Dataset& data,
                  const WeightVector& w, double lambda, double r) {
    if (theta.size() != pred.param_dim())
        throw StructuralError("weighted_risk: theta dimension mismatch");
    if (data.dim() != pred.input_dim())
        throw StructuralError("weighted_risk: data dimension mismatch");
    if (w.size() != data.size())
        throw StructuralError("weighted_risk: weight count mismatch");
    if (!theta.allFinite()) throw NumericError("weighted_risk: non-finite theta");
    if (lambda < 0.0) throw DomainError("weighted_risk: lambda must be >= 0");
    if (!(r > 0.0)) throw DomainError("weighted_risk: r must be > 0");
}

// log-sum-exp with max shift; -inf entries are allowed.
double logsumexp(const Vector& v) {
    double m = v.maxCoeff();
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += std::exp(v(i) - m);
    return m + std::log(s);
}

}  // namespace

double log_loss(LossKind loss, double u) {
    if (loss == LossKind::Exponential) return -u;
    // logistic: ell(u) = log(1 + exp(-u))
    if (u > 33.0) {
        // ell = z(1 - z/2 + z^2/3 - ...) with z = exp(-u) tiny
        double z = std::exp(-u);
        return -u + std::log1p(-z / 2.0 + z * z / 3.0);
    }
    double ell = u > 0.0 ? std::log1p(std::exp(-u)) : -u + std::log1p(std::exp(u));
    return std::log(ell);
}

double log_neg_dloss(LossKind loss, double u) {
    if (loss == LossKind::Exponential) return -u;
    // logistic: -ell'(u) = 1/(1 + exp(u)), log = -softplus(u)
    return u > 0.0 ? -(u + std::log1p(std::exp(-u))) : -std::log1p(std::exp(u));
}

double log_data_risk(const Vector& margins, const WeightVector& w, LossKind loss) {
    Vector terms(margins.size());
    for (Eigen::Index i = 0; i < margins.size(); ++i)
        terms(i) = std::log(w(i)) + log_loss(loss, margins(i));
    return logsumexp(terms) - std::log(static_cast<double>(margins.size()));
}

RiskValue weighted_risk(const Predictor& pred, const Vector& theta, const Dataset& data,
                        const WeightVector& w, LossKind loss, double lambda, double r) {
    check_inputs(pred, theta, data, w, lambda, r);
    double lr = log_data_risk(sample_margins(pred, theta, data), w, loss);
    if (lambda > 0.0) {
        double norm = theta.norm();
        if (norm > 0.0) {
            double log_reg = std::log(lambda) + r * std::log(norm);
            double m = std::max(lr, log_reg);
            lr = m + std::log(std::exp(lr - m) + std::exp(log_reg - m));
        }
    }
    RiskValue out;
    out.log_risk = lr;
    out.underflowed = lr < -745.0;
    out.risk = out.underflowed ? 0.0 : std::exp(lr);
    return out;
}

Vector weighted_risk_gradient(const Predictor& pred, const Vector& theta, const Dataset& data,
                              const WeightVector& w, LossKind loss, double lambda, double r) {
    check_inputs(pred, theta, data, w, lambda, r);
    double log_n = std::log(static_cast<double>(data.size()));
    Vector grad = Vector::Zero(pred.param_dim());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        double u = data.label(i) * pred.forward(theta, data.sample(i));
        // coefficient w_i (-ell'(u_i)) / n, exponentiated from log space
        double c = std::exp(std::log(w(i)) + log_neg_dloss(loss, u) - log_n);
        if (c != 0.0)
            grad -= c * data.label(i) * pred.grad_theta(theta, data.sample(i));
    }
    if (lambda > 0.0) {
        double norm = theta.norm();
        if (norm > 0.0) grad += (lambda * r * std::pow(norm, r - 2.0)) * theta;
    }
    return grad;
}

Vector gradient_over_risk(const Predictor& pred, const Vector& theta, const Dataset& data,
                          const WeightVector& w, LossKind loss) {
    check_inputs(pred, theta, data, w, 0.0, 2.0);
    Vector u = sample_margins(pred, theta, data);
    double lr = log_data_risk(u, w, loss);
    double log_n = std::log(static_cast<double>(data.size()));
    Vector ratio = Vector::Zero(pred.param_dim());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        double c = std::exp(std::log(w(i)) + log_neg_dloss(loss, u(i)) - log_n - lr);
        if (c != 0.0)
            ratio -= c * data.label(i) * pred.grad_theta(theta, data.sample(i));
    }
    return ratio;
}

double generalized_kl(const Vector& p, const WeightVector& w) {
    if (p.size() != w.size()) throw StructuralError("generalized_kl: length mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        if (p(i) < -1e-9) throw DomainError("generalized_kl: negative probability entry");
        sum += p(i);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("generalized_kl: p does not sum to 1");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) kl += p(i) * std::log(p(i) / w(i));
    return kl;
}

}  // namespace marginlab
