#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nou/kernel.hpp"
#include "nou/measures.hpp"

namespace nou {

// ---------------------------------------------------------------------------
// Log-Sobolev inequality for nu_t with the nonautonomous d/dt rho correction,
// the exponent path p(s,t), and hypercontractivity of P_{s,t}.
// ---------------------------------------------------------------------------

/// kappa(t) = || Q^{1/2}(t,-inf) B^{*-1}(t) ||^2 (spectral norm squared).
inline double kappa_constant(const CoefficientField& field, const EntranceLaw& law) {
    Matrix root = symmetric_sqrt(law.law.cov);
    Matrix binv_t = field.B(law.t).transpose().partialPivLu().inverse();
    double s = spectral_norm(root * binv_t);
    return s * s;
}

/// c(p,t) = p/(p-1) * kappa(t).
inline double log_sobolev_constant(const CoefficientField& field, const EntranceLaw& law,
                                   double p) {
    if (p <= 1.0) throw std::invalid_argument("log_sobolev_constant: p <= 1");
    return p / (p - 1.0) * kappa_constant(field, law);
}

namespace detail {

/// Symbolic L(t) phi = 1/2 Tr(B B* D^2 phi) + <A x + f, D phi> for polynomial phi.
inline Polynomial generator_polynomial(const CoefficientField& field, double t,
                                       const Polynomial& phi) {
    const int n = field.dim;
    Matrix a = field.A(t), b = field.B(t);
    Vector f = field.f(t);
    Matrix bbt = b * b.transpose();
    Polynomial out(n);
    for (int i = 0; i < n; ++i) {
        Polynomial di = phi.differentiate(i);
        Polynomial drift = Polynomial::constant(n, f(i));
        for (int j = 0; j < n; ++j)
            if (a(i, j) != 0.0) drift += Polynomial::variable(n, j, a(i, j));
        out += drift * di;
        for (int j = 0; j < n; ++j)
            if (bbt(i, j) != 0.0) out += di.differentiate(j) * Complex(0.5 * bbt(i, j));
    }
    return out;
}

/// d/dt log rho as an explicit quadratic polynomial in x.
inline Polynomial dtlogrho_polynomial(const CoefficientField& field, const EntranceLaw& law) {
    const int n = field.dim;
    Vector linear;
    double constant;
    Matrix quad = dtlogrho_quadratic(field, law, linear, constant);
    Polynomial out = Polynomial::constant(n, constant);
    for (int i = 0; i < n; ++i) {
        if (linear(i) != 0.0) out += Polynomial::variable(n, i, linear(i));
        for (int j = 0; j < n; ++j)
            if (quad(i, j) != 0.0)
                out += Polynomial::variable(n, i) * Polynomial::variable(n, j) *
                       Complex(quad(i, j));
    }
    return out;
}

}  // namespace detail

/// Residual of the quadratic-form identity
///   int phi L phi d nu_t + 1/2 int |B* grad phi|^2 d nu_t
///     - 1/2 int phi^2 (d/dt log rho) d nu_t = 0,
/// evaluated exactly through Gaussian moments for polynomial phi.
inline double verify_quadratic_form(const CoefficientField& field, const EntranceLaw& law,
                                    const Polynomial& phi) {
    const int n = field.dim;
    double t = law.t;
    Polynomial lphi = detail::generator_polynomial(field, t, phi);
    double term1 = gaussian_expectation(phi * lphi, law.law.mean, law.law.cov).real();
    Matrix b = field.B(t);
    Polynomial grad_sq(n);
    for (int i = 0; i < n; ++i) {
        Polynomial comp(n);  // (B* grad phi)_i = sum_j B(j,i) d_j phi
        for (int j = 0; j < n; ++j)
            if (b(j, i) != 0.0) comp += phi.differentiate(j) * Complex(b(j, i));
        grad_sq += comp * comp;
    }
    double term2 = gaussian_expectation(grad_sq, law.law.mean, law.law.cov).real();
    Polynomial rho_term = phi * phi * detail::dtlogrho_polynomial(field, law);
    double term3 = gaussian_expectation(rho_term, law.law.mean, law.law.cov).real();
    return std::abs(term1 + 0.5 * term2 - 0.5 * term3);
}

struct LogSobReport {
    double lhs = 0.0;     // int |phi|^p log|phi| d nu_t
    double rhs = 0.0;     // ||phi||^p log||phi|| + c(p,t)(Dirichlet + rho terms)
    double margin = 0.0;  // rhs - lhs
    double c = 0.0;
    bool converged = true;  // order-doubling stability (exact closed forms count as stable)
};

/// Entropy inequality
///   int |phi|^p log|phi| d nu_t <= ||phi||_p^p log||phi||_p
///     + c(p,t) ( Re<-L phi, phi_p> + 1/p int |phi|^p d/dt rho dx ),
/// phi_p = |phi|^{p-2} phi. Integrals by Gauss-Hermite under nu_t, checked by
/// doubling the order; exponential observables go through exact Gaussian
/// tilting instead (their integrands grow like e^{c|x|}, which amplifies the
/// relative error of the extreme-node Hermite weights beyond order ~150).
inline LogSobReport verify_log_sobolev(const CoefficientField& field, const EntranceLaw& law,
                                       double p, const Observable& phi, int quad_order = 128) {
    if (p <= 1.0 || p > 6.0) throw std::invalid_argument("verify_log_sobolev: p outside (1, 6]");
    const int n = field.dim;
    if (n > 3) throw std::invalid_argument("verify_log_sobolev: quadrature limited to n <= 3");

    if (std::holds_alternative<RealExponential>(phi)) {
        // phi = A e^{<k,x>}: every integral is a polynomial moment of the
        // tilted Gaussian N(mu + p Sigma k, Sigma) scaled by
        //   m_p = |A|^p exp(p<k,mu> + p^2 k' Sigma k / 2).
        const RealExponential& re = std::get<RealExponential>(phi);
        double aa = std::abs(re.amplitude);
        if (aa == 0.0) throw std::invalid_argument("verify_log_sobolev: phi vanishes");
        const Vector& mu = law.law.mean;
        const Matrix& sig = law.law.cov;
        Vector mu_p = mu + p * (sig * re.k);
        double mp = std::pow(aa, p) *
                    std::exp(p * re.k.dot(mu) + 0.5 * p * p * re.k.dot(sig * re.k));
        Matrix bbt = field.B(law.t);
        bbt = bbt * bbt.transpose();
        Polynomial dtrho = detail::dtlogrho_polynomial(field, law);
        LogSobReport rep;
        rep.converged = true;
        rep.c = log_sobolev_constant(field, law, p);
        rep.lhs = mp * (std::log(aa) + re.k.dot(mu_p));
        // Re<-L phi, phi_p> = -m_p E'[ <k, A x + f> + k' B B' k / 2 ]
        double dirichlet =
            -mp * (re.k.dot(field.A(law.t) * mu_p + field.f(law.t)) +
                   0.5 * re.k.dot(bbt * re.k));
        double rho_term = mp * gaussian_expectation(dtrho, mu_p, sig).real();
        rep.rhs = mp * std::log(mp) / p + rep.c * (dirichlet + rho_term / p);
        rep.margin = rep.rhs - rep.lhs;
        return rep;
    }

    // pointwise -L phi
    std::function<Complex(const Vector&)> neg_lphi;
    if (std::holds_alternative<Polynomial>(phi)) {
        Polynomial lp = detail::generator_polynomial(field, law.t, std::get<Polynomial>(phi));
        neg_lphi = [lp](const Vector& x) { return -lp.evaluate(x); };
    } else {
        neg_lphi = [&field, &law, &phi](const Vector& x) {
            return -apply_generator(field, law.t, phi, x);
        };
    }
    Polynomial dtrho = detail::dtlogrho_polynomial(field, law);
    Matrix root = symmetric_sqrt(law.law.cov);

    auto integrate = [&](int order, double& entropy, double& mass, double& dirichlet,
                         double& rho_term) {
        entropy = mass = dirichlet = rho_term = 0.0;
        for_each_hermite_node(n, order, [&](const Vector& z, double w) {
            Vector x = law.law.mean + root * z;
            Complex v = evaluate(phi, x);
            double av = std::abs(v);
            double avp = std::pow(av, p);
            mass += w * avp;
            if (av > 1e-300) {
                entropy += w * avp * std::log(av);
                Complex phi_p = std::pow(av, p - 2.0) * v;
                dirichlet += w * (neg_lphi(x) * std::conj(phi_p)).real();
            }
            rho_term += w * avp * dtrho.evaluate(x).real();
        });
    };

    double e1, m1, d1, r1, e2, m2, d2, r2;
    integrate(quad_order, e1, m1, d1, r1);
    integrate(2 * quad_order, e2, m2, d2, r2);

    LogSobReport rep;
    auto stable = [](double a, double b) {
        return std::abs(a - b) <= 1e-7 * std::max(1.0, std::abs(b));
    };
    rep.converged = stable(e1, e2) && stable(m1, m2) && stable(d1, d2) && stable(r1, r2);
    if (m2 <= 0.0) throw std::invalid_argument("verify_log_sobolev: phi vanishes");
    rep.c = log_sobolev_constant(field, law, p);
    rep.lhs = e2;
    double norm_term = m2 * std::log(m2) / p;  // ||phi||^p log||phi||
    rep.rhs = norm_term + rep.c * (d2 + r2 / p);
    rep.margin = rep.rhs - rep.lhs;
    return rep;
}

struct HyperPlan {
    double t = 0.0;
    double q = 2.0;
    std::vector<double> s_grid;
    std::vector<double> kappa;     // kappa(s) at the grid points
    std::vector<double> p_closed;  // 1 + (q-1) exp( int_s^t kappa^{-1} )
    std::vector<double> p_ode;     // backward RK4 of p' = -(p-1)/kappa(s)
    double max_route_gap = 0.0;
    bool routes_agree = false;
};

namespace detail {

/// int_s^t kappa(r)^{-1} dr by composite Gauss-Legendre.
inline double kappa_inverse_integral(const CoefficientField& field, EntranceCache& cache,
                                     double s, double t) {
    if (s >= t) return 0.0;
    int panels = std::max(1, static_cast<int>(std::ceil((t - s) / 0.5)));
    double acc = 0.0;
    for (int i = 0; i < panels; ++i) {
        double a = s + (t - s) * i / panels;
        double b = s + (t - s) * (i + 1) / panels;
        QuadratureRule rule = gauss_legendre(10, a, b);
        for (int j = 0; j < static_cast<int>(rule.nodes.size()); ++j)
            acc += rule.weights[j] / kappa_constant(field, cache.at(rule.nodes[j]));
    }
    return acc;
}

}  // namespace detail

/// Exponent path p(s,t) by the closed form and, independently, by the reduced
/// ODE p' = -(p-1)/kappa(s) integrated backward from p(t) = q.
inline HyperPlan exponent_path(const CoefficientField& field, EntranceCache& cache, double t,
                               double q, std::vector<double> s_grid) {
    if (q <= 1.0) throw std::invalid_argument("exponent_path: q <= 1");
    std::sort(s_grid.begin(), s_grid.end(), std::greater<double>());
    if (!s_grid.empty() && s_grid.front() > t)
        throw std::invalid_argument("exponent_path: grid point beyond t");
    HyperPlan plan;
    plan.t = t;
    plan.q = q;

    auto kappa_at = [&](double r) {
        double k = kappa_constant(field, cache.at(r));
        if (k <= 0.0) throw std::runtime_error("exponent_path: nonpositive kappa");
        return k;
    };

    double p = q, cursor = t;
    for (double s : s_grid) {
        // ODE leg cursor -> s
        double len = cursor - s;
        if (len > 0.0) {
            long steps = std::max<long>(1, static_cast<long>(std::ceil(len / 1.25e-3)));
            double h = len / steps;
            auto f = [&](double r, double pv) { return (pv - 1.0) / kappa_at(r); };
            double r = cursor;
            for (long i = 0; i < steps; ++i) {
                // backward in s: dp/d(-s) = (p-1)/kappa
                double k1 = f(r, p);
                double k2 = f(r - 0.5 * h, p + 0.5 * h * k1);
                double k3 = f(r - 0.5 * h, p + 0.5 * h * k2);
                double k4 = f(r - h, p + h * k3);
                p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                r = cursor - (i + 1) * h;
            }
            cursor = s;
        }
        plan.s_grid.push_back(s);
        plan.kappa.push_back(kappa_at(s));
        plan.p_ode.push_back(p);
        plan.p_closed.push_back(
            1.0 + (q - 1.0) * std::exp(detail::kappa_inverse_integral(field, cache, s, t)));
    }
    for (size_t i = 0; i < plan.s_grid.size(); ++i)
        plan.max_route_gap =
            std::max(plan.max_route_gap, std::abs(plan.p_ode[i] - plan.p_closed[i]));
    plan.routes_agree = plan.max_route_gap <= 1e-8;
    return plan;
}

/// p(s,t) >= 1 + (q-1) e^{2 c0 (s-t)} on the plan grid.
inline bool exponent_lower_bound_ok(const HyperPlan& plan, double c0, double slack = 1e-12) {
    for (size_t i = 0; i < plan.s_grid.size(); ++i) {
        double bound = 1.0 + (plan.q - 1.0) * std::exp(2.0 * c0 * (plan.s_grid[i] - plan.t));
        if (plan.p_closed[i] < bound - slack) return false;
    }
    return true;
}

struct HyperMargin {
    double s = 0.0;
    double p = 0.0;
    double lhs = 0.0;  // ||P_{s,t} phi||_{L^{p}(nu_s)}
    double rhs = 0.0;  // ||phi||_{L^q(nu_t)}
    double margin = 0.0;
};

/// || P_{s,t} phi ||_{L^{p(s,t)}(nu_s)} <= || phi ||_{L^q(nu_t)} along the plan.
inline std::vector<HyperMargin> verify_hypercontractivity(const Propagator& prop,
                                                          EntranceCache& cache,
                                                          const HyperPlan& plan,
                                                          const Observable& phi,
                                                          int quad_order = 48) {
    std::vector<HyperMargin> out;
    double rhs = lp_norm(cache.at(plan.t).law, phi, plan.q, quad_order);
    for (size_t i = 0; i < plan.s_grid.size(); ++i) {
        double s = plan.s_grid[i];
        HyperMargin hm;
        hm.s = s;
        hm.p = plan.p_closed[i];
        hm.rhs = rhs;
        if (s == plan.t) {
            hm.lhs = rhs;
        } else {
            TransitionKernel kern = transition_kernel(prop, s, plan.t);
            Observable image = apply_kernel(kern, phi);
            hm.lhs = lp_norm(cache.at(s).law, image, hm.p, quad_order);
        }
        hm.margin = hm.rhs - hm.lhs;
        out.push_back(hm);
    }
    return out;
}

struct AlphaDerivative {
    double alpha = 0.0;
    double analytic = 0.0;
    double finite_difference = 0.0;
};

/// alpha(s) = ||P_{s,t} phi||_{L^{p(s)}(nu_s)} with the theorem's exponent
/// choice p'(s) = -(p-1)/kappa(s). The analytic derivative is the three-term
/// formula (time derivative of u, d/ds rho term, p' entropy term); the finite
/// difference re-evaluates alpha at s +- h including the drift of p and nu_s.
inline AlphaDerivative alpha_derivative(const Propagator& prop, EntranceCache& cache, double t,
                                        double q, double s, const Observable& phi,
                                        int quad_order = 60) {
    const CoefficientField& field = prop.field();
    const int n = field.dim;
    auto p_of = [&](double sv) {
        return 1.0 + (q - 1.0) * std::exp(detail::kappa_inverse_integral(field, cache, sv, t));
    };
    auto alpha_of = [&](double sv) {
        double pv = p_of(sv);
        if (sv == t) return lp_norm(cache.at(t).law, phi, pv, quad_order);
        TransitionKernel kern = transition_kernel(prop, sv, t);
        return lp_norm(cache.at(sv).law, apply_kernel(kern, phi), pv, quad_order);
    };

    double p = p_of(s);
    double pprime = -(p - 1.0) / kappa_constant(field, cache.at(s));
    const EntranceLaw& law = cache.at(s);
    TransitionKernel kern = transition_kernel(prop, s, t);
    Observable u = apply_kernel(kern, phi);

    AlphaDerivative out;
    out.alpha = lp_norm(law.law, u, p, quad_order);
    if (out.alpha <= 0.0) throw std::invalid_argument("alpha_derivative: alpha vanishes");

    // Kolmogorov backward equation: d/ds P_{s,t} phi = -L(s) P_{s,t} phi.
    Matrix root = symmetric_sqrt(law.law.cov);
    double t1 = 0.0, t2 = 0.0, entropy = 0.0;
    for_each_hermite_node(n, quad_order, [&](const Vector& z, double w) {
        Vector x = law.law.mean + root * z;
        Complex uv = evaluate(u, x);
        double au = std::abs(uv);
        if (au <= 1e-300) return;
        Complex u_p = std::pow(au, p - 2.0) * uv;
        Complex dsu = -apply_generator(field, s, u, x);
        t1 += w * (dsu * std::conj(u_p)).real();
        double aup = std::pow(au, p);
        t2 += w * aup * density_time_logderivative(field, law, x);
        entropy += w * aup * std::log(au);
    });
    double bracket = t1 + t2 / p +
                     (pprime / p) * (entropy - std::pow(out.alpha, p) * std::log(out.alpha));
    out.analytic = std::pow(out.alpha, 1.0 - p) * bracket;

    double h = 1e-4;
    out.finite_difference = (alpha_of(std::min(s + h, t)) - alpha_of(s - h)) /
                            (std::min(s + h, t) - (s - h));
    return out;
}

}  // namespace nou
