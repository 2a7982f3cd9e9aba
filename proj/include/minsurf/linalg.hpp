#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace minsurf::linalg {

/// Determinant that is exactly alternating in its columns.
///
/// Columns are sorted into a canonical (lexicographic) order, the determinant
/// of the sorted matrix is taken by partially pivoted LU, and the sign of the
/// sorting permutation is applied. Swapping two columns of the input therefore
/// flips the sign of the result bit-for-bit. Repeated columns give exactly 0.
inline double determinant(const Eigen::MatrixXd& a) {
    const auto n = a.cols();
    if (n == 0) return 1.0;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    auto less = [&](Eigen::Index p, Eigen::Index q) {
        for (Eigen::Index r = 0; r < a.rows(); ++r) {
            if (a(r, p) < a(r, q)) return true;
            if (a(r, p) > a(r, q)) return false;
        }
        return false;
    };
    std::sort(order.begin(), order.end(), less);
    for (std::size_t k = 1; k < order.size(); ++k)
        if (!less(order[k - 1], order[k])) return 0.0;

    // parity of `order` by cycle decomposition
    std::vector<bool> seen(order.size(), false);
    bool odd = false;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (seen[k]) continue;
        std::size_t len = 0;
        for (std::size_t j = k; !seen[j]; j = static_cast<std::size_t>(order[j])) {
            seen[j] = true;
            ++len;
        }
        if (len % 2 == 0) odd = !odd;
    }

    Eigen::MatrixXd sorted(a.rows(), n);
    for (Eigen::Index k = 0; k < n; ++k) sorted.col(k) = a.col(order[static_cast<std::size_t>(k)]);
    double det;
    switch (n) {
    case 1: det = sorted(0, 0); break;
    case 2: det = sorted(0, 0) * sorted(1, 1) - sorted(0, 1) * sorted(1, 0); break;
    default: det = sorted.partialPivLu().determinant(); break;
    }
    return odd ? -det : det;
}

/// Singular values in descending order.
inline Eigen::VectorXd singular_values(const Eigen::MatrixXd& a) {
    if (a.size() == 0) return {};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    return svd.singularValues();
}

} // namespace minsurf::linalg
