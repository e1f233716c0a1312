#include "marginlab/simplex.hpp"

#include <cmath>
#include <vector>

namespace marginlab {

namespace {

constexpr double kPivotTol = 1e-10;

// Tableau layout: T is (m+1) x (ncols+1). Row i < m holds constraint i with
// the rhs in the last column; row m holds reduced costs with -objective in
// the corner. basis[i] is the variable basic in row i.
struct Tableau {
    Matrix T;
    std::vector<Eigen::Index> basis;
    Eigen::Index m, ncols;

    void pivot(Eigen::Index row, Eigen::Index col) {
        T.row(row) /= T(row, col);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i == row) continue;
            double f = T(i, col);
            if (f != 0.0) T.row(i) -= f * T.row(row);
        }
        basis[static_cast<std::size_t>(row)] = col;
    }

    // Bland: entering = lowest-index column with negative reduced cost;
    // leaving = min ratio, ties broken by lowest basic variable index.
    LPStatus run(long& iters_left) {
        while (iters_left-- > 0) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < ncols; ++j) {
                if (T(m, j) < -kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) return LPStatus::Optimal;
            Eigen::Index leave = -1;
            double best_ratio = 0.0;
            for (Eigen::Index i = 0; i < m; ++i) {
                if (T(i, enter) <= kPivotTol) continue;
                double ratio = T(i, ncols) / T(i, enter);
                if (leave < 0 || ratio < best_ratio - kPivotTol ||
                    (std::abs(ratio - best_ratio) <= kPivotTol &&
                     basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                    leave = i;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return LPStatus::Unbounded;
            pivot(leave, enter);
        }
        return LPStatus::IterationLimit;
    }
};

}  // namespace

LPResult simplex_maximize(const Matrix& A, const Vector& b, const Vector& c, long max_iterations) {
    Eigen::Index m = A.rows(), n = A.cols();
    if (b.size() != m || c.size() != n)
        throw StructuralError("simplex_maximize: shape mismatch");

    // Columns: n structural, m slacks, then artificials for rows with b < 0.
    std::vector<Eigen::Index> neg_rows;
    for (Eigen::Index i = 0; i < m; ++i)
        if (b(i) < 0.0) neg_rows.push_back(i);
    Eigen::Index n_art = static_cast<Eigen::Index>(neg_rows.size());
    Eigen::Index ncols = n + m + n_art;

    Tableau tab;
    tab.m = m;
    tab.ncols = ncols;
    tab.T = Matrix::Zero(m + 1, ncols + 1);
    tab.basis.resize(static_cast<std::size_t>(m));

    for (Eigen::Index i = 0; i < m; ++i) {
        double sign = b(i) < 0.0 ? -1.0 : 1.0;
        tab.T.block(i, 0, 1, n) = sign * A.row(i);
        tab.T(i, n + i) = sign;  // slack
        tab.T(i, ncols) = sign * b(i);
        tab.basis[static_cast<std::size_t>(i)] = n + i;
    }
    for (Eigen::Index k = 0; k < n_art; ++k) {
        Eigen::Index i = neg_rows[static_cast<std::size_t>(k)];
        tab.T(i, n + m + k) = 1.0;
        tab.basis[static_cast<std::size_t>(i)] = n + m + k;
    }

    long iters = max_iterations;
    LPResult out;

    if (n_art > 0) {
        // Phase 1: minimize the sum of artificials.
        for (Eigen::Index k = 0; k < n_art; ++k) tab.T(m, n + m + k) = 1.0;
        for (Eigen::Index k = 0; k < n_art; ++k)
            tab.T.row(m) -= tab.T.row(neg_rows[static_cast<std::size_t>(k)]);
        LPStatus st = tab.run(iters);
        if (st != LPStatus::Optimal) {
            out.status = st;
            return out;
        }
        if (tab.T(m, ncols) < -1e-8) {
            out.status = LPStatus::Infeasible;
            return out;
        }
        // Drive any artificial still basic (at zero level) out of the basis.
        for (Eigen::Index i = 0; i < m; ++i) {
            if (tab.basis[static_cast<std::size_t>(i)] < n + m) continue;
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < n + m; ++j) {
                if (std::abs(tab.T(i, j)) > kPivotTol) {
                    enter = j;
                    break;
                }
            }
            if (enter >= 0) tab.pivot(i, enter);
        }
        // Strip artificial columns from further consideration.
        tab.T.middleCols(n + m, n_art).setZero();
    }

    // Phase 2: minimize -c'x.
    tab.T.row(m).setZero();
    tab.T.block(m, 0, 1, n) = -c.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index bj = tab.basis[static_cast<std::size_t>(i)];
        double f = tab.T(m, bj);
        if (f != 0.0) tab.T.row(m) -= f * tab.T.row(i);
    }
    LPStatus st = tab.run(iters);
    out.status = st;
    if (st != LPStatus::Optimal) return out;

    out.x = Vector::Zero(n);
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::Index bj = tab.basis[static_cast<std::size_t>(i)];
        if (bj < n) out.x(bj) = tab.T(i, ncols);
    }
    out.objective = c.dot(out.x);
    return out;
}

}  // namespace marginlab
