#pragma once

#include "marginlab/dataset.hpp"

#include <memory>
#include <vector>

namespace marginlab {

enum class Activation { ReLU, Square };

struct MarginReading {
    double gamma_tilde = 0.0;
    Eigen::Index argmin_index = 0;
    double norm_theta = 0.0;
    double alpha = 1.0;
};

/// Positively homogeneous predictor f(theta, x) with exact gradients.
class Predictor {
  public:
    virtual ~Predictor() = default;

    virtual Eigen::Index param_dim() const = 0;
    virtual Eigen::Index input_dim() const = 0;
    /// Homogeneity degree: f(c theta, x) = c^alpha f(theta, x) for c > 0.
    virtual double alpha() const = 0;

    virtual double forward(const Vector& theta, const Eigen::RowVectorXd& x) const = 0;
    /// d f / d theta. ReLU kinks use subgradient with activation'(0) = 0.
    virtual Vector grad_theta(const Vector& theta, const Eigen::RowVectorXd& x) const = 0;

    virtual Vector initial_theta(unsigned seed) const = 0;
    virtual std::unique_ptr<Predictor> clone() const = 0;
};

class LinearPredictor final : public Predictor {
  public:
    explicit LinearPredictor(Eigen::Index d);

    Eigen::Index param_dim() const override { return d_; }
    Eigen::Index input_dim() const override { return d_; }
    double alpha() const override { return 1.0; }

    double forward(const Vector& theta, const Eigen::RowVectorXd& x) const override;
    Vector grad_theta(const Vector& theta, const Eigen::RowVectorXd& x) const override;

    /// Linear training starts at the origin.
    Vector initial_theta(unsigned) const override { return Vector::Zero(d_); }
    std::unique_ptr<Predictor> clone() const override { return std::make_unique<LinearPredictor>(d_); }

  private:
    Eigen::Index d_;
};

/// Bias-free feedforward net W_H sigma(W_{H-1} sigma(... sigma(W_1 x))),
/// parameters flattened layer by layer, row-major.
class HomogeneousMLP final : public Predictor {
  public:
    /// layer_dims = [d, h1, ..., h_{H-1}, 1], depth H = layer_dims.size()-1.
    HomogeneousMLP(std::vector<Eigen::Index> layer_dims, Activation act = Activation::ReLU,
                   double init_scale = 1.0);

    Eigen::Index param_dim() const override { return param_dim_; }
    Eigen::Index input_dim() const override { return layer_dims_.front(); }
    int depth() const { return static_cast<int>(layer_dims_.size()) - 1; }
    double alpha() const override;
    Activation activation() const { return act_; }
    const std::vector<Eigen::Index>& layer_dims() const { return layer_dims_; }

    double forward(const Vector& theta, const Eigen::RowVectorXd& x) const override;
    Vector grad_theta(const Vector& theta, const Eigen::RowVectorXd& x) const override;

    Vector initial_theta(unsigned seed) const override;
    std::unique_ptr<Predictor> clone() const override;

    /// View of layer h (0-based) inside a flat parameter vector.
    Eigen::Map<const Matrix> layer(const Vector& theta, int h) const;
    std::vector<double> layer_frobenius_norms(const Vector& theta) const;

  private:
    std::vector<Eigen::Index> layer_dims_;
    std::vector<Eigen::Index> offsets_;
    Eigen::Index param_dim_;
    Activation act_;
    double init_scale_;
};

/// min_i y_i f(theta, x_i) / ||theta||^alpha, ties broken by lowest index.
MarginReading normalized_margin(const Predictor& pred, const Vector& theta, const Dataset& data);

/// Per-layer rescale W_h -> W_h * g / ||W_h||_F with g the geometric mean of
/// the layer Frobenius norms. Function values are preserved exactly and each
/// rebalanced layer norm is at most 1/sqrt(H) when ||theta|| = 1.
Vector frobenius_rebalance(const HomogeneousMLP& mlp, const Vector& theta);

// Flat text format, one layer per block, row-major, 17 significant digits.
void save_parameters(const Predictor& pred, const Vector& theta, const std::string& path);
Vector load_parameters(const Predictor& pred, const std::string& path);

}  // namespace marginlab
