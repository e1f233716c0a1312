#include "marginlab/geometry.hpp"

#include "marginlab/risk.hpp"
#include "marginlab/simplex.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

namespace marginlab {

namespace {

constexpr double kSepLPThreshold = 1e-8;   // LP optimum above this => separable sample
constexpr double kHullNormThreshold = 1e-7; // hull point norm below this => non-separable

}  // namespace

MarginCertificate max_margin_linear(const Dataset& data, double gap_tol, long max_iters) {
    const Eigen::Index n = data.size(), d = data.dim();
    // columns a_i = y_i x_i; minimize ||A p||^2 over the simplex
    Matrix A(d, n);
    for (Eigen::Index i = 0; i < n; ++i)
        A.col(i) = data.label(i) * data.sample(i).transpose();

    Vector p = Vector::Zero(n);
    p(0) = 1.0;
    Vector q = A.col(0);

    MarginCertificate cert;
    for (long it = 0; it < max_iters; ++it) {
        double norm = q.norm();
        if (norm <= kHullNormThreshold) {
            cert.separable = false;
            cert.gamma_star = norm;
            cert.p_star = p;
            cert.duality_gap = 0.0;
            cert.near_threshold = true;
            return cert;
        }
        Vector scores = A.transpose() * q;  // a_i' q
        Eigen::Index fw;
        double min_score = scores.minCoeff(&fw);
        // certificate gap: ||q|| minus the worst margin of q/||q||
        double gap = norm - min_score / norm;
        if (gap <= gap_tol) break;

        // away vertex: worst active atom
        Eigen::Index away = -1;
        double max_score = -std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) {
            if (p(i) > 0.0 && scores(i) > max_score) {
                max_score = scores(i);
                away = i;
            }
        }

        double fw_gap = q.squaredNorm() - min_score;
        double away_gap = max_score - q.squaredNorm();
        if (fw_gap >= away_gap || away < 0) {
            Vector dq = A.col(fw) - q;
            double denom = dq.squaredNorm();
            if (denom <= 0.0) break;
            double tau = std::clamp(-q.dot(dq) / denom, 0.0, 1.0);
            if (tau == 0.0) break;
            p *= (1.0 - tau);
            p(fw) += tau;
            q += tau * dq;
        } else {
            Vector dq = q - A.col(away);
            double denom = dq.squaredNorm();
            if (denom <= 0.0) break;
            double tau_max = p(away) / (1.0 - p(away) + 1e-300);
            double tau = std::clamp(-q.dot(dq) / denom, 0.0, tau_max);
            if (tau == 0.0) break;
            p *= (1.0 + tau);
            p(away) -= tau;
            if (p(away) < 1e-16) p(away) = 0.0;
            q += tau * dq;
        }
    }

    double norm = q.norm();
    cert.p_star = p;
    cert.gamma_star = norm;
    if (norm <= kHullNormThreshold) {
        cert.separable = false;
        cert.near_threshold = true;
        return cert;
    }
    cert.separable = true;
    cert.theta_star = q / norm;
    double min_margin = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        min_margin = std::min(min_margin, data.label(i) * data.sample(i).dot(cert.theta_star));
    cert.duality_gap = std::max(0.0, norm - min_margin);
    cert.near_threshold = norm <= 10.0 * kHullNormThreshold;
    return cert;
}

namespace {

// max y_i theta'x_i s.t. y_j theta'x_j >= 0 for all j, ||theta||_inf <= 1,
// as an LP over theta = u - v with u, v in [0, 1]^d.
LPResult per_sample_lp(const Dataset& data, Eigen::Index i) {
    Eigen::Index n = data.size(), d = data.dim();
    Matrix A(n + 2 * d, 2 * d);
    Vector b(n + 2 * d);
    for (Eigen::Index j = 0; j < n; ++j) {
        Eigen::RowVectorXd row = -data.label(j) * data.sample(j);
        A.block(j, 0, 1, d) = row;
        A.block(j, d, 1, d) = -row;
        b(j) = 0.0;
    }
    A.block(n, 0, 2 * d, 2 * d) = Matrix::Identity(2 * d, 2 * d);
    b.segment(n, 2 * d).setOnes();
    Vector c(2 * d);
    c.head(d) = data.label(i) * data.sample(i).transpose();
    c.tail(d) = -c.head(d);
    return simplex_maximize(A, b, c);
}

}  // namespace

SeparabilitySplit maximal_separable_subset(const Dataset& data) {
    SeparabilitySplit split;
    split.witness_theta = Vector::Zero(data.dim());
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        LPResult lp = per_sample_lp(data, i);
        if (lp.status != LPStatus::Optimal) {
            std::ostringstream msg;
            msg << "maximal_separable_subset: LP did not converge at sample " << i;
            throw NumericError(msg.str());
        }
        if (lp.objective > kSepLPThreshold) {
            split.sep_indices.push_back(i);
            split.witness_theta += lp.x.head(data.dim()) - lp.x.tail(data.dim());
        } else {
            split.nonsep_indices.push_back(i);
        }
    }
    if (!split.sep_indices.empty()) {
        MarginCertificate c = max_margin_linear(data.subset(split.sep_indices));
        split.gamma_sep = c.gamma_star;
    }
    return split;
}

Matrix span_basis(const Dataset& data, const std::vector<Eigen::Index>& indices) {
    const Eigen::Index d = data.dim();
    Matrix basis(d, 0);
    for (Eigen::Index i : indices) {
        Vector v = data.sample(i).transpose();
        // modified Gram-Schmidt, twice
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index k = 0; k < basis.cols(); ++k)
                v -= basis.col(k).dot(v) * basis.col(k);
        double norm = v.norm();
        if (norm > 1e-10) {
            basis.conservativeResize(Eigen::NoChange, basis.cols() + 1);
            basis.col(basis.cols() - 1) = v / norm;
        }
    }
    return basis;
}

Vector project_span(const Vector& theta, const Matrix& basis) {
    if (basis.rows() != theta.size())
        throw StructuralError("project_span: dimension mismatch");
    Matrix gram = basis.transpose() * basis;
    if ((gram - Matrix::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff() > 1e-9)
        throw DomainError("project_span: basis is not orthonormal");
    return basis * (basis.transpose() * theta);
}

RestrictedOptimum nonsep_optimum(const Dataset& data, const std::vector<Eigen::Index>& nonsep,
                                 const WeightVector& w, LossKind loss, Eigen::Index n_total,
                                 std::optional<Vector> start) {
    if (nonsep.empty()) throw DomainError("nonsep_optimum: non-separable set is empty");
    if (n_total == 0) n_total = data.size();
    Matrix basis = span_basis(data, nonsep);
    const Eigen::Index k = basis.cols();
    const double inv_n = 1.0 / static_cast<double>(n_total);

    // reduced features z_i = B' x_i
    Matrix Z(static_cast<Eigen::Index>(nonsep.size()), k);
    Vector y(static_cast<Eigen::Index>(nonsep.size())), wv(static_cast<Eigen::Index>(nonsep.size()));
    for (std::size_t r = 0; r < nonsep.size(); ++r) {
        Z.row(static_cast<Eigen::Index>(r)) = data.sample(nonsep[r]) * basis;
        y(static_cast<Eigen::Index>(r)) = data.label(nonsep[r]);
        wv(static_cast<Eigen::Index>(r)) = w(nonsep[r]);
    }

    auto value = [&](const Vector& z) {
        double s = 0.0;
        for (Eigen::Index r = 0; r < Z.rows(); ++r) {
            double u = y(r) * Z.row(r).dot(z);
            s += wv(r) * std::exp(log_loss(loss, u));
        }
        return inv_n * s;
    };
    auto grad_hess = [&](const Vector& z, Vector& g, Matrix& H) {
        g.setZero();
        H.setZero();
        for (Eigen::Index r = 0; r < Z.rows(); ++r) {
            double u = y(r) * Z.row(r).dot(z);
            double dl, d2l;  // ell', ell''
            if (loss == LossKind::Exponential) {
                dl = -std::exp(-u);
                d2l = std::exp(-u);
            } else {
                double s = 1.0 / (1.0 + std::exp(-u));  // sigmoid(u)
                dl = -(1.0 - s);
                d2l = s * (1.0 - s);
            }
            Vector xi = y(r) * Z.row(r).transpose();
            g += inv_n * wv(r) * dl * xi;
            H += inv_n * wv(r) * d2l * xi * xi.transpose();
        }
    };

    Vector z = start ? Vector(basis.transpose() * *start) : Vector::Zero(k);
    Vector g(k);
    Matrix H(k, k);
    for (int it = 0; it < 500; ++it) {
        grad_hess(z, g, H);
        if (g.norm() <= 1e-10) break;
        Eigen::LDLT<Matrix> ldlt(H);
        if (ldlt.info() != Eigen::Success)
            throw NumericError("nonsep_optimum: restricted Hessian factorization failed");
        Vector step = ldlt.solve(-g);
        if (!step.allFinite()) {
            std::ostringstream msg;
            msg << "nonsep_optimum: restricted Hessian numerically singular, rcond~"
                << (H.norm() > 0 ? g.norm() / H.norm() : 0.0);
            throw NumericError(msg.str());
        }
        double f0 = value(z), slope = g.dot(step);
        double t = 1.0;
        while (t > 1e-12 && value(z + t * step) > f0 + 0.25 * t * slope) t *= 0.5;
        z += t * step;
    }
    grad_hess(z, g, H);

    RestrictedOptimum out;
    out.theta_tilde = basis * z;
    out.optim_residual = g.norm();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(H);
    out.strong_convexity_omega = eig.eigenvalues().minCoeff();
    out.log_risk = std::log(value(z));
    return out;
}

std::string certificate_report(const MarginCertificate& cert) {
    std::ostringstream out;
    out.precision(12);
    out << "[certificate]\n";
    out << "separable = " << (cert.separable ? "true" : "false") << "\n";
    out << "gamma_star = " << cert.gamma_star << "\n";
    out << "duality_gap = " << cert.duality_gap << "\n";
    if (cert.near_threshold) out << "warning = verdict near separability threshold\n";
    if (cert.separable) {
        out << "theta_star =";
        for (Eigen::Index i = 0; i < cert.theta_star.size(); ++i) out << " " << cert.theta_star(i);
        out << "\n";
    }
    out << "p_star =";
    for (Eigen::Index i = 0; i < cert.p_star.size(); ++i) out << " " << cert.p_star(i);
    out << "\n";
    return out.str();
}

std::string split_report(const SeparabilitySplit& split) {
    std::ostringstream out;
    out.precision(12);
    out << "[separability_split]\n";
    out << "sep =";
    for (auto i : split.sep_indices) out << " " << i;
    out << "\nnonsep =";
    for (auto i : split.nonsep_indices) out << " " << i;
    out << "\ngamma_sep = " << split.gamma_sep << "\n";
    out << "witness_theta =";
    for (Eigen::Index i = 0; i < split.witness_theta.size(); ++i) out << " " << split.witness_theta(i);
    out << "\n";
    return out.str();
}

}  // namespace marginlab
