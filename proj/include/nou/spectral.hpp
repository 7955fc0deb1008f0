#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nou/kernel.hpp"
#include "nou/measures.hpp"

namespace nou {

// ---------------------------------------------------------------------------
// Spectral structure of the period map V(t) = P_{t-T,t} and of the
// space-time generator's degree-<=1 eigenvalue lattice.
// ---------------------------------------------------------------------------

struct AnalyticEigenpair {
    Complex lambda;
    Polynomial eigenfunction;  // degree-1, possibly complex coefficients
};

/// Degree-1 eigenpairs of V(t): for each eigenpair (lambda, c) of the adjoint
/// monodromy, the eigenfunction <c, x> + <c, g(t,t-T)> / (lambda - 1).
inline std::vector<AnalyticEigenpair> linear_eigenpairs(const Propagator& prop, double t) {
    if (!prop.field().periodic())
        throw std::invalid_argument("linear_eigenpairs: field is aperiodic");
    double T = *prop.field().period;
    TransitionKernel k = transition_kernel(prop, t - T, t);
    const int n = prop.field().dim;
    Eigen::EigenSolver<Matrix> es(k.U.transpose());
    std::vector<AnalyticEigenpair> out;
    for (int j = 0; j < n; ++j) {
        Complex lambda = es.eigenvalues()(j);
        CVector c = es.eigenvectors().col(j);
        Polynomial phi(n);
        Complex cg = 0.0;
        for (int i = 0; i < n; ++i) {
            phi += Polynomial::variable(n, i, c(i));
            cg += c(i) * k.g(i);
        }
        phi += Polynomial::constant(n, cg / (lambda - 1.0));
        out.push_back({lambda, std::move(phi)});
    }
    std::sort(out.begin(), out.end(), [](const AnalyticEigenpair& a, const AnalyticEigenpair& b) {
        return std::abs(a.lambda) > std::abs(b.lambda);
    });
    return out;
}

/// || V(t) phi - lambda phi ||_{L2(nu_t)}, exact for polynomial phi.
inline double eigen_residual(const Propagator& prop, const EntranceLaw& law, double t,
                             Complex lambda, const Polynomial& phi) {
    double T = *prop.field().period;
    TransitionKernel k = transition_kernel(prop, t - T, t);
    Observable v = apply_kernel(k, Observable(phi));
    Polynomial resid = std::get<Polynomial>(v) - phi * lambda;
    return l2_norm(law.law, resid);
}

/// Numerical-rank semisimplicity test: rank(lambda I - M) == rank((lambda I - M)^2).
inline bool semisimplicity(const Matrix& m, Complex lambda, double tol) {
    Eigen::EigenSolver<Matrix> es(m);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < es.eigenvalues().size(); ++i)
        best = std::min(best, std::abs(es.eigenvalues()(i) - lambda));
    double scale = std::max(1.0, spectral_norm(m));
    if (best > tol * scale)
        throw std::invalid_argument("semisimplicity: lambda is not an eigenvalue of M");
    return Propagator::is_semisimple(m, lambda, tol * scale);
}

// --- orthonormal polynomial basis of L2(nu_t): tensor Hermite in whitened
// coordinates ---

namespace detail {

inline Polynomial hermite_probabilists(int k) {
    Polynomial hm1 = Polynomial::constant(1, 1.0);
    if (k == 0) return hm1;
    Polynomial h = Polynomial::variable(1, 0);
    Polynomial z = Polynomial::variable(1, 0);
    for (int j = 1; j < k; ++j) {
        Polynomial next = z * h - hm1 * Complex(static_cast<double>(j));
        hm1 = h;
        h = next;
    }
    return h;
}

}  // namespace detail

/// Multi-indices with total degree <= d over n variables, sorted by degree
/// then lexicographically. Index 0 is always the constant.
inline std::vector<MultiIndex> basis_indices(int n, int d) {
    std::vector<MultiIndex> out;
    MultiIndex a(n, 0);
    std::function<void(int, int)> walk = [&](int pos, int remaining) {
        if (pos == n) {
            out.push_back(a);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            a[pos] = v;
            walk(pos + 1, remaining - v);
        }
        a[pos] = 0;
    };
    walk(0, d);
    std::sort(out.begin(), out.end(), [](const MultiIndex& x, const MultiIndex& y) {
        int dx = total_degree(x), dy = total_degree(y);
        if (dx != dy) return dx < dy;
        return x < y;
    });
    return out;
}

/// Orthonormal basis polynomials of L2(N(mean, cov)): normalized tensor
/// Hermite composed with the symmetric-square-root whitening map.
inline std::vector<Polynomial> hermite_basis(const GaussianMeasure& law,
                                             const std::vector<MultiIndex>& indices) {
    const int n = law.dim();
    Matrix root = symmetric_sqrt(law.cov);
    Eigen::LLT<Matrix> llt(law.cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("hermite_basis: degenerate covariance");
    // inverse symmetric square root
    Eigen::SelfAdjointEigenSolver<Matrix> es(law.cov);
    Matrix inv_root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                      es.eigenvectors().transpose();
    Vector shift = -inv_root * law.mean;

    std::vector<Polynomial> basis;
    for (const MultiIndex& a : indices) {
        Polynomial p = Polynomial::constant(n, 1.0);
        for (int i = 0; i < n; ++i) {
            if (a[i] == 0) continue;
            Polynomial h1 = detail::hermite_probabilists(a[i]);
            // lift the univariate polynomial to variable i
            Matrix sel = Matrix::Zero(1, n);
            sel(0, i) = 1.0;
            Polynomial hi = h1.compose_affine(sel, Vector::Zero(1));
            double norm = 1.0;
            for (int k = 2; k <= a[i]; ++k) norm *= k;
            p = p * (hi * Complex(1.0 / std::sqrt(norm)));
        }
        basis.push_back(p.compose_affine(inv_root, shift));
    }
    return basis;
}

struct SpectralReport {
    double t = 0.0;
    int degree = 0;
    double r0 = 0.0;
    std::vector<MultiIndex> indices;
    std::vector<Complex> galerkin_eigs;        // sorted by decreasing modulus
    std::vector<CVector> galerkin_vectors;     // basis coordinates, same order
    std::vector<AnalyticEigenpair> analytic_pairs;
    std::vector<double> analytic_residuals;
    Matrix v_matrix;
    bool unit_eigenvalue_unique = false;
    bool moduli_bounded = false;
    bool nonunit_below_r0 = false;
};

/// Galerkin matrix of V(t) in the orthonormal Hermite basis; entries are
/// exact (polynomial kernel action + exact Gaussian inner products), so the
/// only error source is the kernel ODE.
inline SpectralReport galerkin_spectrum(const Propagator& prop, const EntranceLaw& law, double t,
                                        int degree) {
    if (!prop.field().periodic())
        throw std::invalid_argument("galerkin_spectrum: field is aperiodic");
    if (degree > 8) throw std::invalid_argument("galerkin_spectrum: degree > 8 unsupported");
    Eigen::SelfAdjointEigenSolver<Matrix> cond(law.law.cov);
    if (cond.eigenvalues().minCoeff() < 1e-12 * std::max(1.0, cond.eigenvalues().maxCoeff()))
        throw std::runtime_error(
            "galerkin_spectrum: measure covariance too ill-conditioned; lower the degree");

    double T = *prop.field().period;
    TransitionKernel kern = transition_kernel(prop, t - T, t);
    SpectralReport rep;
    rep.t = t;
    rep.degree = degree;
    rep.r0 = prop.floquet().r0;
    rep.indices = basis_indices(prop.field().dim, degree);
    std::vector<Polynomial> basis = hermite_basis(law.law, rep.indices);
    const int m = static_cast<int>(basis.size());
    Matrix v(m, m);
    for (int j = 0; j < m; ++j) {
        Polynomial vb = std::get<Polynomial>(apply_kernel(kern, Observable(basis[j])));
        for (int i = 0; i < m; ++i) v(i, j) = l2_inner(law.law, vb, basis[i]);
    }
    rep.v_matrix = v;
    Eigen::EigenSolver<Matrix> es(v);
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(es.eigenvalues()(a)) > std::abs(es.eigenvalues()(b));
    });
    for (int i : order) {
        rep.galerkin_eigs.push_back(es.eigenvalues()(i));
        rep.galerkin_vectors.push_back(es.eigenvectors().col(i));
    }

    rep.analytic_pairs = linear_eigenpairs(prop, t);
    for (const auto& pair : rep.analytic_pairs)
        rep.analytic_residuals.push_back(
            eigen_residual(prop, law, t, pair.lambda, pair.eigenfunction));

    int near_one = 0;
    for (int i = 0; i < m; ++i) {
        if (std::abs(rep.galerkin_eigs[i] - 1.0) < 1e-6) {
            ++near_one;
            // eigenvector concentrated on the constant basis function
            CVector vcol = rep.galerkin_vectors[i];
            double head = std::abs(vcol(0));
            double tail = std::sqrt(std::max(0.0, vcol.squaredNorm() - head * head));
            if (tail > 1e-6 * head) near_one = 100;  // fail marker
        }
    }
    rep.unit_eigenvalue_unique = (near_one == 1);
    rep.moduli_bounded = true;
    rep.nonunit_below_r0 = true;
    for (const Complex& ev : rep.galerkin_eigs) {
        if (std::abs(ev) > 1.0 + 1e-8) rep.moduli_bounded = false;
        if (std::abs(ev - 1.0) >= 1e-6 && std::abs(ev) > rep.r0 + 1e-6)
            rep.nonunit_below_r0 = false;
    }
    return rep;
}

struct LatticePoint {
    Complex lambda;
    bool semisimple = true;
    bool from_multiplier = false;  // false: pure imaginary branch 2 pi i k / T
};

/// Degree-<=1 eigenvalue lattice of the space-time generator in the periodic
/// case: { 2 pi i k / T } and { log(mu_j)/T + 2 pi i k / T } for the Floquet
/// multipliers mu_j (principal branch), truncated at |Im| <= im_cutoff.
inline std::vector<LatticePoint> gsharp_lattice(const Propagator& prop, double im_cutoff) {
    if (!prop.field().periodic())
        throw std::invalid_argument("gsharp_lattice: field is aperiodic");
    double T = *prop.field().period;
    Propagator::FloquetData fd = prop.floquet();
    std::vector<LatticePoint> out;
    double spacing = 2.0 * M_PI / T;
    for (long k = 0; k * spacing <= im_cutoff; ++k) {
        out.push_back({Complex(0.0, k * spacing), true, false});
        if (k > 0) out.push_back({Complex(0.0, -k * spacing), true, false});
    }
    for (size_t j = 0; j < fd.multipliers.size(); ++j) {
        Complex base = std::log(fd.multipliers[j]) / T;  // principal branch
        for (long k = -static_cast<long>(im_cutoff / spacing) - 1;
             k <= static_cast<long>(im_cutoff / spacing) + 1; ++k) {
            Complex lam = base + Complex(0.0, k * spacing);
            if (std::abs(lam.imag()) > im_cutoff + 1e-12) continue;
            bool dup = false;
            for (const auto& p : out)
                if (std::abs(p.lambda - lam) < 1e-12) dup = true;
            if (!dup) out.push_back({lam, fd.semisimple[j], true});
        }
    }
    std::sort(out.begin(), out.end(), [](const LatticePoint& a, const LatticePoint& b) {
        if (a.lambda.real() != b.lambda.real()) return a.lambda.real() > b.lambda.real();
        return a.lambda.imag() < b.lambda.imag();
    });
    return out;
}

struct AutonomousSpectrum {
    std::vector<Complex> points;      // sum n_j lambda_j + 2 pi i k / T
    std::vector<double> line_real_parts;  // vertical lines of the aperiodic-space generator
};

/// Closed-form spectrum enumeration for constant A: all sums of eigenvalues of
/// A with multiplicities summing to <= n_cutoff, shifted along 2 pi i Z / T.
inline AutonomousSpectrum autonomous_spectrum(const Matrix& a, double T, int n_cutoff,
                                              int k_cutoff) {
    Eigen::EigenSolver<Matrix> es(a);
    std::vector<Complex> eigs(es.eigenvalues().data(),
                              es.eigenvalues().data() + es.eigenvalues().size());
    const int r = static_cast<int>(eigs.size());
    std::vector<Complex> sums;
    std::vector<int> n(r, 0);
    std::function<void(int, int)> walk = [&](int pos, int remaining) {
        if (pos == r) {
            Complex s = 0.0;
            for (int j = 0; j < r; ++j) s += static_cast<double>(n[j]) * eigs[j];
            sums.push_back(s);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            n[pos] = v;
            walk(pos + 1, remaining - v);
        }
        n[pos] = 0;
    };
    walk(0, n_cutoff);

    AutonomousSpectrum out;
    auto push_unique = [](std::vector<Complex>& vec, Complex v) {
        for (const Complex& w : vec)
            if (std::abs(w - v) < 1e-10) return;
        vec.push_back(v);
    };
    double spacing = 2.0 * M_PI / T;
    for (const Complex& s : sums)
        for (int k = -k_cutoff; k <= k_cutoff; ++k)
            push_unique(out.points, s + Complex(0.0, k * spacing));
    for (const Complex& s : sums) {
        bool found = false;
        for (double re : out.line_real_parts)
            if (std::abs(re - s.real()) < 1e-10) found = true;
        if (!found) out.line_real_parts.push_back(s.real());
    }
    std::sort(out.points.begin(), out.points.end(), [](Complex x, Complex y) {
        if (x.real() != y.real()) return x.real() > y.real();
        return x.imag() < y.imag();
    });
    std::sort(out.line_real_parts.begin(), out.line_real_parts.end(), std::greater<double>());
    return out;
}

}  // namespace nou
