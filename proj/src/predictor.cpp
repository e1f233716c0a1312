#include "marginlab/predictor.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

namespace marginlab {

namespace {

double act_value(Activation a, double u) {
    switch (a) {
        case Activation::ReLU: return u > 0.0 ? u : 0.0;
        case Activation::Square: return u * u;
    }
    return 0.0;
}

double act_deriv(Activation a, double u) {
    switch (a) {
        case Activation::ReLU: return u > 0.0 ? 1.0 : 0.0;
        case Activation::Square: return 2.0 * u;
    }
    return 0.0;
}

}  // namespace

LinearPredictor::LinearPredictor(Eigen::Index d) : d_(d) {
    if (d < 1) throw StructuralError("LinearPredictor: d >= 1 required");
}

double LinearPredictor::forward(const Vector& theta, const Eigen::RowVectorXd& x) const {
    if (theta.size() != d_ || x.size() != d_)
        throw StructuralError("LinearPredictor::forward: dimension mismatch");
    return x * theta;
}

Vector LinearPredictor::grad_theta(const Vector& theta, const Eigen::RowVectorXd& x) const {
    if (theta.size() != d_ || x.size() != d_)
        throw StructuralError("LinearPredictor::grad_theta: dimension mismatch");
    return x.transpose();
}

HomogeneousMLP::HomogeneousMLP(std::vector<Eigen::Index> layer_dims, Activation act, double init_scale)
    : layer_dims_(std::move(layer_dims)), act_(act), init_scale_(init_scale) {
    if (layer_dims_.size() < 2) throw StructuralError("HomogeneousMLP: need at least one layer");
    if (layer_dims_.back() != 1) throw StructuralError("HomogeneousMLP: output dimension must be 1");
    for (auto d : layer_dims_)
        if (d < 1) throw StructuralError("HomogeneousMLP: layer dims must be positive");
    offsets_.resize(layer_dims_.size() - 1);
    Eigen::Index off = 0;
    for (std::size_t h = 0; h + 1 < layer_dims_.size(); ++h) {
        offsets_[h] = off;
        off += layer_dims_[h + 1] * layer_dims_[h];
    }
    param_dim_ = off;
}

double HomogeneousMLP::alpha() const {
    // ReLU is 1-homogeneous so the net has degree H; the square activation
    // doubles the degree at every hidden layer, giving 2^H - 1.
    int H = depth();
    if (act_ == Activation::ReLU) return static_cast<double>(H);
    return std::ldexp(1.0, H) - 1.0;
}

Eigen::Map<const Matrix> HomogeneousMLP::layer(const Vector& theta, int h) const {
    // stored row-major; Eigen map is column-major over the transposed shape
    Eigen::Index rows = layer_dims_[h + 1], cols = layer_dims_[h];
    return Eigen::Map<const Matrix>(theta.data() + offsets_[h], cols, rows);
}

double HomogeneousMLP::forward(const Vector& theta, const Eigen::RowVectorXd& x) const {
    if (theta.size() != param_dim_ || x.size() != layer_dims_.front())
        throw StructuralError("HomogeneousMLP::forward: dimension mismatch");
    int H = depth();
    Vector a = x.transpose();
    for (int h = 0; h < H; ++h) {
        Vector z = layer(theta, h).transpose() * a;
        if (h + 1 < H)
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = act_value(act_, z(i));
        a = std::move(z);
    }
    return a(0);
}

Vector HomogeneousMLP::grad_theta(const Vector& theta, const Eigen::RowVectorXd& x) const {
    if (theta.size() != param_dim_ || x.size() != layer_dims_.front())
        throw StructuralError("HomogeneousMLP::grad_theta: dimension mismatch");
    int H = depth();
    std::vector<Vector> acts(H + 1);   // post-activation inputs per layer
    std::vector<Vector> pre(H);        // pre-activation outputs
    acts[0] = x.transpose();
    for (int h = 0; h < H; ++h) {
        pre[h] = layer(theta, h).transpose() * acts[h];
        if (h + 1 < H) {
            acts[h + 1] = pre[h];
            for (Eigen::Index i = 0; i < acts[h + 1].size(); ++i)
                acts[h + 1](i) = act_value(act_, acts[h + 1](i));
        } else {
            acts[h + 1] = pre[h];
        }
    }

    Vector grad = Vector::Zero(param_dim_);
    Vector delta = Vector::Ones(1);  // d f / d pre[H-1]
    for (int h = H - 1; h >= 0; --h) {
        // dW_h: delta * acts[h]^T, row-major flattening
        Eigen::Index out = layer_dims_[h + 1], in = layer_dims_[h];
        for (Eigen::Index r = 0; r < out; ++r)
            for (Eigen::Index c = 0; c < in; ++c)
                grad(offsets_[h] + r * in + c) = delta(r) * acts[h](c);
        if (h > 0) {
            Vector back = layer(theta, h) * delta;  // (in) = W_h^T-major map * delta
            for (Eigen::Index i = 0; i < back.size(); ++i)
                back(i) *= act_deriv(act_, pre[h - 1](i));
            delta = std::move(back);
        }
    }
    return grad;
}

Vector HomogeneousMLP::initial_theta(unsigned seed) const {
    std::mt19937_64 rng(seed);
    Vector theta(param_dim_);
    int H = depth();
    for (int h = 0; h < H; ++h) {
        double sd = init_scale_ / std::sqrt(static_cast<double>(layer_dims_[h]));
        std::normal_distribution<double> gauss(0.0, sd);
        Eigen::Index count = layer_dims_[h + 1] * layer_dims_[h];
        for (Eigen::Index k = 0; k < count; ++k) theta(offsets_[h] + k) = gauss(rng);
    }
    return theta;
}

std::unique_ptr<Predictor> HomogeneousMLP::clone() const {
    return std::make_unique<HomogeneousMLP>(layer_dims_, act_, init_scale_);
}

std::vector<double> HomogeneousMLP::layer_frobenius_norms(const Vector& theta) const {
    std::vector<double> norms;
    for (int h = 0; h < depth(); ++h) norms.push_back(layer(theta, h).norm());
    return norms;
}

MarginReading normalized_margin(const Predictor& pred, const Vector& theta, const Dataset& data) {
    double norm = theta.norm();
    if (!(norm > 0.0)) throw DomainError("normalized_margin: ||theta|| must be positive");
    MarginReading out;
    out.norm_theta = norm;
    out.alpha = pred.alpha();
    double scale = std::pow(norm, out.alpha);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_i = 0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
        double m = data.label(i) * pred.forward(theta, data.sample(i)) / scale;
        if (m < best) {
            best = m;
            best_i = i;
        }
    }
    out.gamma_tilde = best;
    out.argmin_index = best_i;
    return out;
}

Vector frobenius_rebalance(const HomogeneousMLP& mlp, const Vector& theta) {
    if (std::abs(theta.norm() - 1.0) > 1e-9)
        throw DomainError("frobenius_rebalance: ||theta|| must be 1");
    auto norms = mlp.layer_frobenius_norms(theta);
    int H = mlp.depth();
    double log_g = 0.0;
    for (double v : norms) {
        if (v == 0.0) throw DomainError("frobenius_rebalance: zero layer");
        log_g += std::log(v);
    }
    double g = std::exp(log_g / H);
    Vector out = theta;
    Eigen::Index off = 0;
    const auto& dims = mlp.layer_dims();
    for (int h = 0; h < H; ++h) {
        Eigen::Index count = dims[h + 1] * dims[h];
        out.segment(off, count) *= g / norms[static_cast<std::size_t>(h)];
        off += count;
    }
    return out;
}

void save_parameters(const Predictor& pred, const Vector& theta, const std::string& path) {
    if (theta.size() != pred.param_dim())
        throw StructuralError("save_parameters: dimension mismatch");
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot write parameter file: " + path);
    out << std::setprecision(17);
    if (auto* mlp = dynamic_cast<const HomogeneousMLP*>(&pred)) {
        const auto& dims = mlp->layer_dims();
        Eigen::Index off = 0;
        for (int h = 0; h < mlp->depth(); ++h) {
            out << "layer " << dims[h + 1] << " " << dims[h] << "\n";
            for (Eigen::Index r = 0; r < dims[h + 1]; ++r) {
                for (Eigen::Index c = 0; c < dims[h]; ++c)
                    out << theta(off + r * dims[h] + c) << (c + 1 < dims[h] ? " " : "");
                out << "\n";
            }
            off += dims[h + 1] * dims[h];
        }
    } else {
        out << "layer 1 " << theta.size() << "\n";
        for (Eigen::Index i = 0; i < theta.size(); ++i)
            out << theta(i) << (i + 1 < theta.size() ? " " : "");
        out << "\n";
    }
}

Vector load_parameters(const Predictor& pred, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open parameter file: " + path);
    Vector theta(pred.param_dim());
    Eigen::Index off = 0;
    std::string tok;
    while (in >> tok) {
        if (tok == "layer") {
            Eigen::Index r, c;
            in >> r >> c;
            continue;
        }
        if (off >= theta.size()) throw StructuralError("parameter file has too many values");
        theta(off++) = std::stod(tok);
    }
    if (off != theta.size()) throw StructuralError("parameter file has too few values");
    return theta;
}

}  // namespace marginlab
