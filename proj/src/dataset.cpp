#include "marginlab/dataset.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

namespace marginlab {

Dataset::Dataset(Matrix features, Vector labels, std::optional<Vector> density_ratios)
    : features_(std::move(features)), labels_(std::move(labels)), ratios_(std::move(density_ratios)) {
    if (features_.rows() < 1 || features_.cols() < 1)
        throw StructuralError("Dataset: need n >= 1 and d >= 1");
    if (labels_.size() != features_.rows())
        throw StructuralError("Dataset: label count does not match row count");
    if (!features_.allFinite())
        throw NumericError("Dataset: non-finite feature entry");
    for (Eigen::Index i = 0; i < labels_.size(); ++i) {
        if (labels_(i) != 1.0 && labels_(i) != -1.0)
            throw StructuralError("Dataset: labels must be exactly -1 or +1");
    }
    if (ratios_) {
        if (ratios_->size() != features_.rows())
            throw StructuralError("Dataset: ratio count does not match row count");
        for (Eigen::Index i = 0; i < ratios_->size(); ++i) {
            double e = (*ratios_)(i);
            if (!(e > 0.0) || !std::isfinite(e))
                throw NumericError("Dataset: density ratios must be positive and finite");
        }
    }
}

const Vector& Dataset::ratios() const {
    if (!ratios_) throw DomainError("Dataset: density ratios not present");
    return *ratios_;
}

Dataset Dataset::subset(const std::vector<Eigen::Index>& indices) const {
    Matrix x(static_cast<Eigen::Index>(indices.size()), dim());
    Vector y(static_cast<Eigen::Index>(indices.size()));
    std::optional<Vector> eta;
    if (ratios_) eta = Vector(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t k = 0; k < indices.size(); ++k) {
        Eigen::Index i = indices[k];
        if (i < 0 || i >= size()) throw StructuralError("Dataset::subset: index out of range");
        x.row(static_cast<Eigen::Index>(k)) = features_.row(i);
        y(static_cast<Eigen::Index>(k)) = labels_(i);
        if (eta) (*eta)(static_cast<Eigen::Index>(k)) = (*ratios_)(i);
    }
    return Dataset(std::move(x), std::move(y), std::move(eta));
}

Dataset Dataset::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw StructuralError("cannot open dataset file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw StructuralError("empty dataset file: " + path);

    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) header.push_back(tok);
    }
    bool has_eta = !header.empty() && header.back() == "eta";
    Eigen::Index d = static_cast<Eigen::Index>(header.size()) - 1 - (has_eta ? 1 : 0);
    if (d < 1) throw StructuralError("dataset header must be x0,...,y[,eta]");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) row.push_back(std::stod(tok));
        if (static_cast<Eigen::Index>(row.size()) != static_cast<Eigen::Index>(header.size()))
            throw StructuralError("dataset row width does not match header");
        rows.push_back(std::move(row));
    }
    Eigen::Index n = static_cast<Eigen::Index>(rows.size());
    if (n < 1) throw StructuralError("dataset has no rows");

    Matrix x(n, d);
    Vector y(n);
    std::optional<Vector> eta;
    if (has_eta) eta = Vector(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rows[i][j];
        y(i) = rows[i][d];
        if (has_eta) (*eta)(i) = rows[i][d + 1];
    }
    return Dataset(std::move(x), std::move(y), std::move(eta));
}

void Dataset::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw StructuralError("cannot write dataset file: " + path);
    out << std::setprecision(17);
    for (Eigen::Index j = 0; j < dim(); ++j) out << "x" << j << ",";
    out << "y";
    if (ratios_) out << ",eta";
    out << "\n";
    for (Eigen::Index i = 0; i < size(); ++i) {
        for (Eigen::Index j = 0; j < dim(); ++j) out << features_(i, j) << ",";
        out << labels_(i);
        if (ratios_) out << "," << (*ratios_)(i);
        out << "\n";
    }
}

WeightVector::WeightVector(Vector w, double bound_M) : w_(std::move(w)), bound_M_(bound_M) {
    if (bound_M_ < 1.0) throw StructuralError("WeightVector: bound M must be >= 1");
    for (Eigen::Index i = 0; i < w_.size(); ++i) {
        // small slack so clamp(eta, 1/M, M) survives rounding
        if (!(w_(i) >= 1.0 / bound_M_ * (1 - 1e-12)) || !(w_(i) <= bound_M_ * (1 + 1e-12)))
            throw StructuralError("WeightVector: entry outside [1/M, M]");
    }
}

WeightVector WeightVector::uniform(Eigen::Index n) {
    return WeightVector(Vector::Ones(n), 1.0);
}

}  // namespace marginlab
