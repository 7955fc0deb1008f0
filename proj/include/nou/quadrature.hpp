#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nou/linalg.hpp"

namespace nou {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Hermite rule in probabilists' normalization: sum w_i f(z_i)
/// approximates E[f(Z)] for Z ~ N(0,1). Nodes via Golub-Welsch on the
/// Jacobi matrix of the monic Hermite recurrence.
inline QuadratureRule gauss_hermite(int order) {
    if (order < 1) throw std::invalid_argument("gauss_hermite: order < 1");
    Matrix j = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        double b = std::sqrt(static_cast<double>(k));
        j(k, k - 1) = b;
        j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(j);
    QuadratureRule r;
    r.nodes.resize(order);
    r.weights.resize(order);
    for (int i = 0; i < order; ++i) {
        r.nodes[i] = es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.weights[i] = v * v;  // total mass 1
    }
    return r;
}

/// Gauss-Legendre rule on [a,b]: sum w_i f(x_i) approximates the integral.
inline QuadratureRule gauss_legendre(int order, double a, double b) {
    if (order < 1) throw std::invalid_argument("gauss_legendre: order < 1");
    Matrix j = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
        double kk = static_cast<double>(k);
        double c = kk / std::sqrt(4.0 * kk * kk - 1.0);
        j(k, k - 1) = c;
        j(k - 1, k) = c;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(j);
    QuadratureRule r;
    r.nodes.resize(order);
    r.weights.resize(order);
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
        r.nodes[i] = mid + half * es.eigenvalues()(i);
        double v = es.eigenvectors()(0, i);
        r.weights[i] = 2.0 * v * v * half;
    }
    return r;
}

/// Tensorized Gauss-Hermite over n axes; walks all order^n node tuples and
/// calls f(z, w) with z in R^n and the product weight.
template <typename F>
void for_each_hermite_node(int n, int order, F&& f) {
    QuadratureRule r1 = gauss_hermite(order);
    std::vector<int> idx(n, 0);
    Vector z(n);
    while (true) {
        double w = 1.0;
        for (int i = 0; i < n; ++i) {
            z(i) = r1.nodes[idx[i]];
            w *= r1.weights[idx[i]];
        }
        f(z, w);
        int i = 0;
        for (; i < n; ++i) {
            if (++idx[i] < order) break;
            idx[i] = 0;
        }
        if (i == n) break;
    }
}

}  // namespace nou
