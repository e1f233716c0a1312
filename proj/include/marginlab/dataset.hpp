#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>
#include <string>

namespace marginlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Structural problems (shape mismatches, bad labels) are distinct from
// numeric ones (non-finite inputs) and from domain errors (inputs outside
// an operation's stated domain).
struct StructuralError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

/// Binary-labeled samples, optionally annotated with density ratios
/// eta(x_i) = p_t(x_i) / p_s(x_i) for covariate-shift scenarios.
class Dataset {
  public:
    Dataset(Matrix features, Vector labels,
            std::optional<Vector> density_ratios = std::nullopt);

    Eigen::Index size() const { return features_.rows(); }
    Eigen::Index dim() const { return features_.cols(); }

    const Matrix& features() const { return features_; }
    const Vector& labels() const { return labels_; }
    bool has_ratios() const { return ratios_.has_value(); }
    const Vector& ratios() const;

    Eigen::RowVectorXd sample(Eigen::Index i) const { return features_.row(i); }
    double label(Eigen::Index i) const { return labels_(i); }

    /// Rows restricted to an index subset, ratios carried along.
    Dataset subset(const std::vector<Eigen::Index>& indices) const;

    // CSV with header x0,...,x{d-1},y[,eta].
    static Dataset load_csv(const std::string& path);
    void save_csv(const std::string& path) const;

  private:
    Matrix features_;
    Vector labels_;
    std::optional<Vector> ratios_;
};

/// Per-sample importance weights, boxed in [1/M, M].
class WeightVector {
  public:
    WeightVector(Vector w, double bound_M);

    /// Convenience: all-ones weights (M = 1).
    static WeightVector uniform(Eigen::Index n);

    const Vector& raw() const { return w_; }
    double bound() const { return bound_M_; }
    Eigen::Index size() const { return w_.size(); }
    double operator()(Eigen::Index i) const { return w_(i); }

    /// Normalized view (sums to 1); the stored weights stay raw.
    Vector normalized() const { return w_ / w_.sum(); }

  private:
    Vector w_;
    double bound_M_;
};

enum class LossKind { Exponential, Logistic };

struct RiskValue {
    double log_risk = 0.0;
    double risk = 0.0;        // exp(log_risk); 0 when underflowed
    bool underflowed = false; // log_risk < -745
};

}  // namespace marginlab
