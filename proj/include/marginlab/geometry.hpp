#pragma once

#include "marginlab/dataset.hpp"

#include <optional>
#include <vector>

namespace marginlab {

struct MarginCertificate {
    bool separable = false;
    Vector theta_star;       // unit vector, set only when separable
    double gamma_star = 0.0; // ||sum p_i y_i x_i|| at the solution
    Vector p_star;           // dual simplex point
    double duality_gap = 0.0;
    bool near_threshold = false; // verdict within 10x of the separability cutoff
};

struct SeparabilitySplit {
    std::vector<Eigen::Index> sep_indices;
    std::vector<Eigen::Index> nonsep_indices;
    Vector witness_theta;    // sum of per-sample LP optima over sep
    double gamma_sep = 0.0;  // max margin restricted to the sep subset
};

struct RestrictedOptimum {
    Vector theta_tilde;             // ambient coordinates, inside the span
    double strong_convexity_omega = 0.0;
    double optim_residual = 0.0;    // restricted gradient norm at the solution
    double log_risk = 0.0;          // weighted risk at theta_tilde (nonsep samples, full-n scaling)
};

/// Hard-margin certificate via Frank-Wolfe with away steps on
/// min_{p in simplex} ||sum_i p_i y_i x_i||. Data with hull norm <= 1e-7 is
/// declared non-separable.
MarginCertificate max_margin_linear(const Dataset& data, double gap_tol = 1e-8,
                                    long max_iters = 100000);

class WeightVector;
enum class LossKind;

/// Greedy maximal separable subset: sample i is separable iff the LP
///   max y_i theta'x_i  s.t.  y_j theta'x_j >= 0 for all j, ||theta||_inf <= 1
/// has optimum > 1e-8.
SeparabilitySplit maximal_separable_subset(const Dataset& data);

/// Minimizes the weighted risk of the non-separable samples over
/// span{x_i : i in nonsep} by damped Newton, to gradient norm <= 1e-10.
/// Risk uses 1/n_total scaling so values compose with the full-data risk.
RestrictedOptimum nonsep_optimum(const Dataset& data, const std::vector<Eigen::Index>& nonsep,
                                 const WeightVector& w, LossKind loss,
                                 Eigen::Index n_total = 0,
                                 std::optional<Vector> start = std::nullopt);

/// Orthonormal basis (columns) for span{x_i : i in indices}, modified
/// Gram-Schmidt with re-orthogonalization, rank tolerance 1e-10.
Matrix span_basis(const Dataset& data, const std::vector<Eigen::Index>& indices);

/// Orthogonal projection onto the column span of an orthonormal basis.
Vector project_span(const Vector& theta, const Matrix& basis);

// key-value block serialization consumed by the harness
std::string certificate_report(const MarginCertificate& cert);
std::string split_report(const SeparabilitySplit& split);

}  // namespace marginlab
