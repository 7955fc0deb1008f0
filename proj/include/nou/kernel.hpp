#pragma once

#include <cmath>

#include "nou/measures.hpp"
#include "nou/observable.hpp"
#include "nou/quadrature.hpp"

namespace nou {

namespace detail {

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f;
}

/// Gaussian smoothing of a polynomial: E[phi(y + xi)], xi ~ N(0, Q), as a
/// polynomial in y, via the Taylor/Wick expansion
///   E[phi(y+xi)] = sum_beta E[xi^beta]/beta! D^beta phi(y).
inline Polynomial smooth_polynomial(const Polynomial& phi, const Matrix& q) {
    const int n = phi.nvars();
    CentralMomentTable table(q);
    Polynomial out(n);
    // enumerate even multi-indices up to deg(phi)
    int d = phi.degree();
    std::vector<MultiIndex> stack;
    MultiIndex beta(n, 0);
    std::function<void(int, int)> walk = [&](int pos, int remaining) {
        if (pos == n) {
            double mom = table.moment(beta);
            if (mom != 0.0 || total_degree(beta) == 0) {
                Polynomial term = phi;
                double denom = 1.0;
                for (int i = 0; i < n; ++i) {
                    for (int k = 0; k < beta[i]; ++k) term = term.differentiate(i);
                    denom *= factorial(beta[i]);
                }
                if (!term.empty()) out += term * Complex(mom / denom);
            }
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            beta[pos] = v;
            walk(pos + 1, remaining - v);
        }
        beta[pos] = 0;
    };
    walk(0, d);
    return out;
}

}  // namespace detail

/// Closed-form kernel action on polynomial/exponential observables:
///   P phi(x) = E[phi(U x + g + xi)], xi ~ N(0, Q).
inline Observable apply_kernel(const TransitionKernel& kern, const Observable& phi) {
    if (std::holds_alternative<Polynomial>(phi)) {
        const Polynomial& p = std::get<Polynomial>(phi);
        Polynomial smoothed = detail::smooth_polynomial(p, kern.Q);
        return smoothed.compose_affine(kern.U, kern.g);
    }
    if (std::holds_alternative<ComplexExponential>(phi)) {
        const auto& e = std::get<ComplexExponential>(phi);
        ComplexExponential out;
        out.k = kern.U.transpose() * e.k;
        out.amplitude = e.amplitude * std::exp(Complex(-0.5 * e.k.dot(kern.Q * e.k),
                                                       e.k.dot(kern.g)));
        return out;
    }
    if (std::holds_alternative<RealExponential>(phi)) {
        const auto& e = std::get<RealExponential>(phi);
        RealExponential out;
        out.k = kern.U.transpose() * e.k;
        out.amplitude = e.amplitude * std::exp(e.k.dot(kern.g) + 0.5 * e.k.dot(kern.Q * e.k));
        return out;
    }
    throw std::invalid_argument("apply_kernel: generic observables need kernel_expectation");
}

/// E[phi(Y)], Y ~ N(mean, cov): closed form where available, Gauss-Hermite in
/// whitened coordinates y = mean + cov^{1/2} z otherwise (n <= 3).
inline Complex gaussian_mean(const GaussianMeasure& m, const Observable& phi,
                             int quad_order = 40) {
    if (quad_order < 1) throw std::invalid_argument("gaussian_mean: quad_order < 1");
    if (std::holds_alternative<Polynomial>(phi))
        return gaussian_expectation(std::get<Polynomial>(phi), m.mean, m.cov);
    if (std::holds_alternative<ComplexExponential>(phi)) {
        const auto& e = std::get<ComplexExponential>(phi);
        return e.amplitude *
               std::exp(Complex(-0.5 * e.k.dot(m.cov * e.k), e.k.dot(m.mean)));
    }
    if (std::holds_alternative<RealExponential>(phi)) {
        const auto& e = std::get<RealExponential>(phi);
        return e.amplitude * std::exp(e.k.dot(m.mean) + 0.5 * e.k.dot(m.cov * e.k));
    }
    const auto& g = std::get<GenericObservable>(phi);
    const int n = m.dim();
    if (n > 3) throw std::invalid_argument("gaussian_mean: generic quadrature limited to n <= 3");
    Matrix root = symmetric_sqrt(m.cov);
    double acc = 0.0;
    for_each_hermite_node(n, quad_order, [&](const Vector& z, double w) {
        acc += w * g.f(m.mean + root * z);
    });
    return acc;
}

/// P_{s,t} phi evaluated at the start point x.
inline Complex kernel_expectation(const TransitionKernel& kern, const Observable& phi,
                                  const Vector& x, int quad_order = 40) {
    GaussianMeasure law;
    law.mean = kern.U * x + kern.g;
    law.cov = kern.Q;
    return gaussian_mean(law, phi, quad_order);
}

inline Complex mean_functional(const EntranceLaw& law, const Observable& phi,
                               int quad_order = 40) {
    return gaussian_mean(law.law, phi, quad_order);
}

/// L(t) phi(x) = 1/2 Tr(B B* D^2 phi) + <A x + f, D phi>.
inline Complex apply_generator(const CoefficientField& field, double t, const Observable& phi,
                               const Vector& x) {
    Matrix a = field.A(t), b = field.B(t);
    Vector f = field.f(t);
    Matrix bbt = b * b.transpose();
    Vector drift = a * x + f;
    const int n = field.dim;
    if (std::holds_alternative<Polynomial>(phi)) {
        const Polynomial& p = std::get<Polynomial>(phi);
        Complex out = 0.0;
        for (int i = 0; i < n; ++i) {
            Polynomial di = p.differentiate(i);
            out += drift(i) * di.evaluate(x);
            for (int j = 0; j < n; ++j)
                out += 0.5 * bbt(i, j) * di.differentiate(j).evaluate(x);
        }
        return out;
    }
    if (std::holds_alternative<ComplexExponential>(phi)) {
        const auto& e = std::get<ComplexExponential>(phi);
        Complex val = evaluate(phi, x);
        Complex ik(0.0, 1.0);
        return val * (ik * drift.dot(e.k) - 0.5 * e.k.dot(bbt * e.k));
    }
    if (std::holds_alternative<RealExponential>(phi)) {
        const auto& e = std::get<RealExponential>(phi);
        Complex val = evaluate(phi, x);
        return val * (drift.dot(e.k) + 0.5 * e.k.dot(bbt * e.k));
    }
    const auto& g = std::get<GenericObservable>(phi);
    if (!g.smooth)
        throw std::invalid_argument("apply_generator: generic observable must be smooth");
    double h = 1e-5 * (1.0 + x.norm());
    double out = 0.0;
    for (int i = 0; i < n; ++i) {
        Vector ei = Vector::Zero(n);
        ei(i) = 1.0;
        out += drift(i) * (g.f(x + h * ei) - g.f(x - h * ei)) / (2.0 * h);
        for (int j = 0; j < n; ++j) {
            if (bbt(i, j) == 0.0) continue;
            Vector ej = Vector::Zero(n);
            ej(j) = 1.0;
            double second =
                (g.f(x + h * ei + h * ej) - g.f(x + h * ei - h * ej) -
                 g.f(x - h * ei + h * ej) + g.f(x - h * ei - h * ej)) /
                (4.0 * h * h);
            out += 0.5 * bbt(i, j) * second;
        }
    }
    return out;
}

/// ( int |phi|^p dm )^{1/p}. Exact for |e^{i<k,x>}| and real exponentials and
/// for polynomials at p = 2; Gauss-Hermite quadrature otherwise.
inline double lp_norm(const GaussianMeasure& m, const Observable& phi, double p,
                      int quad_order = 40) {
    if (p < 1.0) throw std::invalid_argument("lp_norm: p < 1");
    if (std::holds_alternative<ComplexExponential>(phi))
        return std::abs(std::get<ComplexExponential>(phi).amplitude);
    if (std::holds_alternative<RealExponential>(phi)) {
        const auto& e = std::get<RealExponential>(phi);
        return std::abs(e.amplitude) *
               std::exp(e.k.dot(m.mean) + 0.5 * p * e.k.dot(m.cov * e.k));
    }
    if (std::holds_alternative<Polynomial>(phi) && p == 2.0) {
        const Polynomial& q = std::get<Polynomial>(phi);
        Complex sq = gaussian_expectation(q * q.conjugate(), m.mean, m.cov);
        return std::sqrt(std::max(0.0, sq.real()));
    }
    const int n = m.dim();
    Matrix root = symmetric_sqrt(m.cov);
    double acc = 0.0;
    for_each_hermite_node(n, quad_order, [&](const Vector& z, double w) {
        acc += w * std::pow(std::abs(evaluate(phi, m.mean + root * z)), p);
    });
    return std::pow(acc, 1.0 / p);
}

/// Exact L2(m) norm of a polynomial.
inline double l2_norm(const GaussianMeasure& m, const Polynomial& p) {
    Complex sq = gaussian_expectation(p * p.conjugate(), m.mean, m.cov);
    return std::sqrt(std::max(0.0, sq.real()));
}

inline double l2_inner(const GaussianMeasure& m, const Polynomial& a, const Polynomial& b) {
    return gaussian_expectation(a * b.conjugate(), m.mean, m.cov).real();
}

}  // namespace nou
