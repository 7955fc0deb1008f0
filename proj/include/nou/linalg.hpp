#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

namespace nou {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

/// Operator 2-norm (largest singular value).
inline double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return m.jacobiSvd().singularValues()(0);
}

inline double min_singular_value(const Matrix& m) {
    auto sv = m.jacobiSvd().singularValues();
    return sv(sv.size() - 1);
}

/// Symmetric square root of a symmetric PSD matrix via eigendecomposition.
/// Eigenvalues in [-clip_tol, 0) are clipped to 0; anything more negative is a
/// hard error.
inline Matrix symmetric_sqrt(const Matrix& s, double clip_tol = 1e-12) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    Vector ev = es.eigenvalues();
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (ev(i) < -clip_tol)
            throw std::runtime_error("symmetric_sqrt: matrix is not PSD (eigenvalue " +
                                     std::to_string(ev(i)) + ")");
        if (ev(i) < 0.0) ev(i) = 0.0;
    }
    return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

/// Numerical rank at absolute singular-value threshold tol.
inline int numerical_rank(const CMatrix& m, double tol) {
    if (m.size() == 0) return 0;
    auto sv = m.jacobiSvd().singularValues();
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > tol) ++r;
    return r;
}

/// Scaling-and-squaring matrix exponential with Pade(6) core. Used as an
/// independent oracle against the ODE propagator, so deliberately kept free of
/// any shared integration code.
inline Matrix expm_pade(const Matrix& a) {
    const int n = static_cast<int>(a.rows());
    double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
    int squarings = 0;
    Matrix as = a;
    if (norm > 0.5) {
        squarings = std::max(0, static_cast<int>(std::ceil(std::log2(norm / 0.5))));
        as /= std::pow(2.0, squarings);
    }
    // Pade coefficients for degree 6
    const double c[] = {1.0, 0.5, 5.0 / 44.0, 1.0 / 66.0, 1.0 / 792.0,
                        1.0 / 15840.0, 1.0 / 665280.0};
    Matrix a2 = as * as;
    Matrix a4 = a2 * a2;
    Matrix a6 = a4 * a2;
    Matrix i = Matrix::Identity(n, n);
    Matrix u = as * (c[1] * i + c[3] * a2 + c[5] * a4);
    Matrix v = c[0] * i + c[2] * a2 + c[4] * a4 + c[6] * a6;
    Matrix r = (v - u).partialPivLu().solve(v + u);
    for (int k = 0; k < squarings; ++k) r = r * r;
    return r;
}

}  // namespace nou
