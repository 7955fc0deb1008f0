#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nou/linalg.hpp"

namespace nou {

/// Time-dependent coefficient data of the drift/diffusion family
///   dX = (A(t)X + f(t)) dt + B(t) dW.
/// Immutable after construction; evaluation is pure.
struct CoefficientField {
    int dim = 1;
    std::function<Matrix(double)> A;
    std::function<Matrix(double)> B;
    std::function<Vector(double)> f;
    std::optional<double> period;
    double mu0 = 1.0;    // declared ellipticity lower bound: sigma_min(B(t)) >= mu0
    double normC = 1.0;  // declared sup_t ||B(t)||
    double normA = 1.0;  // declared sup_t ||A(t)||
    double normf = 0.0;  // declared sup_t |f(t)|
    std::string name = "custom";

    bool periodic() const { return period.has_value(); }
};

inline void check_time(double t) {
    if (!std::isfinite(t)) throw std::domain_error("coefficient eval: non-finite time");
}

/// (A(t), B(t), f(t))
inline std::tuple<Matrix, Matrix, Vector> eval(const CoefficientField& field, double t) {
    check_time(t);
    return {field.A(t), field.B(t), field.f(t)};
}

struct CertificateReport {
    double min_sigma_B = 0.0;
    double max_norm_B = 0.0;
    double max_norm_A = 0.0;
    double max_norm_f = 0.0;
    double periodicity_residual = 0.0;  // max over grid of ||coef(t+T)-coef(t)||
    bool mu0_ok = false;
    bool normC_ok = false;
    bool bounds_ok = false;
    bool periodicity_ok = true;
    bool pass = false;
};

/// Grid certification of the declared constants. sup/inf over continuous time
/// is not computable; the report documents the grid actually used.
inline CertificateReport certify(const CoefficientField& field, const std::vector<double>& grid,
                                 double tol = 1e-9) {
    if (grid.empty()) throw std::invalid_argument("certify: empty grid");
    CertificateReport r;
    r.min_sigma_B = std::numeric_limits<double>::infinity();
    for (double t : grid) {
        check_time(t);
        Matrix a = field.A(t), b = field.B(t);
        Vector fv = field.f(t);
        r.min_sigma_B = std::min(r.min_sigma_B, min_singular_value(b));
        r.max_norm_B = std::max(r.max_norm_B, spectral_norm(b));
        r.max_norm_A = std::max(r.max_norm_A, spectral_norm(a));
        r.max_norm_f = std::max(r.max_norm_f, fv.norm());
        if (field.periodic()) {
            double T = *field.period;
            double res = spectral_norm(field.A(t + T) - a);
            res = std::max(res, spectral_norm(field.B(t + T) - b));
            res = std::max(res, (field.f(t + T) - fv).norm());
            r.periodicity_residual = std::max(r.periodicity_residual, res);
        }
    }
    r.mu0_ok = r.min_sigma_B >= field.mu0 - tol;
    r.normC_ok = r.max_norm_B <= field.normC + tol;
    r.bounds_ok = r.max_norm_A <= field.normA + tol && r.max_norm_f <= field.normf + tol;
    r.periodicity_ok = !field.periodic() || r.periodicity_residual <= 1e-10;
    r.pass = r.mu0_ok && r.normC_ok && r.bounds_ok && r.periodicity_ok;
    return r;
}

// ---------------------------------------------------------------------------
// Builtin fields. Closed-form data so tests have analytic ground truth.
// ---------------------------------------------------------------------------

/// Constant coefficients A, B, f. Declaring a period is allowed (any T works
/// for constant data) and enables the Floquet route.
inline CoefficientField make_autonomous(const Matrix& a, const Matrix& b, const Vector& f,
                                        std::optional<double> period = std::nullopt) {
    CoefficientField c;
    c.dim = static_cast<int>(a.rows());
    c.A = [a](double) { return a; };
    c.B = [b](double) { return b; };
    c.f = [f](double) { return f; };
    c.period = period;
    c.mu0 = min_singular_value(b);
    c.normC = spectral_norm(b);
    c.normA = spectral_norm(a);
    c.normf = f.norm();
    c.name = "autonomous";
    return c;
}

inline CoefficientField make_scalar_autonomous(double a, double b, double f = 0.0,
                                               std::optional<double> period = 1.0) {
    Matrix am(1, 1), bm(1, 1);
    am(0, 0) = a;
    bm(0, 0) = b;
    Vector fv(1);
    fv(0) = f;
    CoefficientField c = make_autonomous(am, bm, fv, period);
    c.name = "scalar_autonomous";
    return c;
}

/// a(t) = a0 + a1 sin t, constant b and f; period 2*pi.
inline CoefficientField make_scalar_periodic(double a0 = -1.0, double a1 = 1.0, double b = 1.0,
                                             double f = 0.0) {
    CoefficientField c;
    c.dim = 1;
    c.A = [a0, a1](double t) {
        Matrix m(1, 1);
        m(0, 0) = a0 + a1 * std::sin(t);
        return m;
    };
    Matrix bm(1, 1);
    bm(0, 0) = b;
    c.B = [bm](double) { return bm; };
    Vector fv(1);
    fv(0) = f;
    c.f = [fv](double) { return fv; };
    c.period = 2.0 * M_PI;
    c.mu0 = std::abs(b);
    c.normC = std::abs(b);
    c.normA = std::abs(a0) + std::abs(a1);
    c.normf = std::abs(f);
    c.name = "scalar_periodic";
    return c;
}

/// A = [[-1, w], [-w, -1]] (normal, spiral decay), B = I, f = 0, period 1.
inline CoefficientField make_rotation_decay(double w = 2.0) {
    Matrix a(2, 2);
    a << -1.0, w, -w, -1.0;
    CoefficientField c = make_autonomous(a, Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
    c.name = "rotation_decay";
    return c;
}

/// A = [[-1, 1], [0, -1]] (non-semisimple monodromy), B = I, f = 0, period 1.
inline CoefficientField make_nonnormal_jordan() {
    Matrix a(2, 2);
    a << -1.0, 1.0, 0.0, -1.0;
    CoefficientField c = make_autonomous(a, Matrix::Identity(2, 2), Vector::Zero(2), 1.0);
    c.name = "nonnormal_jordan";
    return c;
}

/// Aperiodic scalar field a(t) = -1 - 0.5/(1+t^2), b = 1, f = 0.
inline CoefficientField make_aperiodic_decay() {
    CoefficientField c;
    c.dim = 1;
    c.A = [](double t) {
        Matrix m(1, 1);
        m(0, 0) = -1.0 - 0.5 / (1.0 + t * t);
        return m;
    };
    Matrix bm = Matrix::Identity(1, 1);
    c.B = [bm](double) { return bm; };
    Vector fv = Vector::Zero(1);
    c.f = [fv](double) { return fv; };
    c.mu0 = 1.0;
    c.normC = 1.0;
    c.normA = 1.5;
    c.normf = 0.0;
    c.name = "aperiodic_decay";
    return c;
}

/// Finite Fourier family: entrywise
///   coef(t) = c0 + sum_k ( ck[k] cos(2 pi (k+1) t / T) + sk[k] sin(2 pi (k+1) t / T) ).
struct FourierSeries {
    Matrix c0;
    std::vector<Matrix> cos_coef;
    std::vector<Matrix> sin_coef;
    double period = 2.0 * M_PI;

    Matrix operator()(double t) const {
        Matrix m = c0;
        for (size_t k = 0; k < cos_coef.size(); ++k)
            m += cos_coef[k] * std::cos(2.0 * M_PI * (k + 1) * t / period);
        for (size_t k = 0; k < sin_coef.size(); ++k)
            m += sin_coef[k] * std::sin(2.0 * M_PI * (k + 1) * t / period);
        return m;
    }
};

inline CoefficientField make_fourier(const FourierSeries& a, const FourierSeries& b,
                                     const FourierSeries& f, double period, double mu0,
                                     double normC, double normA, double normf) {
    CoefficientField c;
    c.dim = static_cast<int>(a.c0.rows());
    c.A = [a](double t) { return a(t); };
    c.B = [b](double t) { return b(t); };
    c.f = [f](double t) { return Vector(f(t).col(0)); };
    c.period = period;
    c.mu0 = mu0;
    c.normC = normC;
    c.normA = normA;
    c.normf = normf;
    c.name = "fourier";
    return c;
}

}  // namespace nou
