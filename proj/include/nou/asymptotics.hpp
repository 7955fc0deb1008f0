#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "nou/kernel.hpp"
#include "nou/measures.hpp"
#include "nou/spectral.hpp"

namespace nou {

// ---------------------------------------------------------------------------
// Exponential decay of P_{s,t}(phi - M_t phi), sharpness, the global rate c0,
// and the Poincare inequality for the measure family nu_t.
// ---------------------------------------------------------------------------

/// || psi - c ||_{L2(m)} for psi in the closed-form observable family.
inline double l2_norm_centered(const GaussianMeasure& m, const Observable& psi, Complex c) {
    double norm_sq;
    if (std::holds_alternative<Polynomial>(psi)) {
        Polynomial p = std::get<Polynomial>(psi) - Polynomial::constant(m.dim(), c);
        return l2_norm(m, p);
    }
    norm_sq = lp_norm(m, psi, 2.0);
    norm_sq *= norm_sq;
    Complex mean = gaussian_mean(m, psi);
    double val = norm_sq - 2.0 * (std::conj(c) * mean).real() + std::norm(c);
    return std::sqrt(std::max(0.0, val));
}

struct DecayCurve {
    double t = 0.0;
    std::vector<double> lags;
    std::vector<double> norms;  // ||P_{t-lag,t}(phi - M_t phi)||_{L2(nu_{t-lag})}
    double fitted_rate = 0.0;
    bool rate_defined = false;
};

/// Exact decay curve of the centered kernel image; the rate is a least-squares
/// fit of log-norm vs lag over the tail half of the grid, where the
/// transient constants have died out.
inline DecayCurve decay_curve(const Propagator& prop, EntranceCache& cache, double t,
                              const Observable& phi, const std::vector<double>& lag_grid) {
    DecayCurve curve;
    curve.t = t;
    Complex mphi = gaussian_mean(cache.at(t).law, phi);
    for (double lag : lag_grid) {
        if (lag <= 0.0) throw std::invalid_argument("decay_curve: lags must be positive");
        TransitionKernel kern = transition_kernel(prop, t - lag, t);
        Observable image = apply_kernel(kern, phi);
        // P_{s,t}(phi - M_t phi) = P_{s,t} phi - M_t phi
        double norm = l2_norm_centered(cache.at(t - lag).law, image, mphi);
        curve.lags.push_back(lag);
        curve.norms.push_back(norm);
    }
    size_t half = curve.lags.size() / 2;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    size_t count = 0;
    for (size_t i = half; i < curve.lags.size(); ++i) {
        if (curve.norms[i] <= 1e-300) continue;
        double x = curve.lags[i], y = std::log(curve.norms[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++count;
    }
    double det = count * sxx - sx * sx;
    if (count >= 2 && std::abs(det) > 1e-14) {
        curve.fitted_rate = (count * sxy - sx * sy) / det;
        curve.rate_defined = true;
    }
    return curve;
}

struct SharpnessReport {
    bool top_semisimple = true;
    // semisimple route: per-k deviation |norm(k) - r0^k ||phi|||, one row per
    // eigenfunction with |lambda| = r0
    std::vector<double> exact_rate_deviation;
    bool exact_rate_ok = false;
    // non-semisimple route: norm(k) / r0^k for the coordinate observable with
    // the strongest growth
    std::vector<double> jordan_ratios;
    double jordan_slope = 0.0;
    double jordan_slope_target = 0.0;
    bool jordan_growth_ok = false;
};

/// Sharpness of the decay rate omega0. Semisimple top multiplier: the
/// degree-1 eigenfunction decays at exactly r0^k over k periods. Jordan top
/// multiplier: the ratio norm(k)/r0^k grows linearly, so no finite constant
/// works at the rate omega0 itself.
inline SharpnessReport verify_sharpness(const Propagator& prop, EntranceCache& cache, double t,
                                        int k_max = 20) {
    if (!prop.field().periodic())
        throw std::invalid_argument("verify_sharpness: field is aperiodic");
    double T = *prop.field().period;
    Propagator::FloquetData fd = prop.floquet();
    SharpnessReport rep;
    for (size_t j = 0; j < fd.multipliers.size(); ++j)
        if (std::abs(std::abs(fd.multipliers[j]) - fd.r0) < 1e-10 && !fd.semisimple[j])
            rep.top_semisimple = false;

    const GaussianMeasure& nu_t = cache.at(t).law;
    std::vector<AnalyticEigenpair> pairs = linear_eigenpairs(prop, t);

    if (rep.top_semisimple) {
        rep.exact_rate_ok = true;
        for (const auto& pair : pairs) {
            if (std::abs(std::abs(pair.lambda) - fd.r0) > 1e-10) continue;
            double base = l2_norm(nu_t, pair.eigenfunction);
            for (int k = 1; k <= std::min(k_max, 8); ++k) {
                TransitionKernel kern = transition_kernel(prop, t - k * T, t);
                Observable image = apply_kernel(kern, Observable(pair.eigenfunction));
                Complex mphi = gaussian_mean(nu_t, Observable(pair.eigenfunction));
                double norm = l2_norm_centered(cache.at(t - k * T).law, image, mphi);
                double dev = std::abs(norm - std::pow(fd.r0, k) * base);
                rep.exact_rate_deviation.push_back(dev);
                if (dev > 1e-8 * std::max(1.0, base)) rep.exact_rate_ok = false;
            }
        }
        return rep;
    }

    // Jordan route: sweep coordinate observables, keep the fastest-growing one
    const int n = prop.field().dim;
    double best_final = -1.0;
    int best_i = 0;
    std::vector<std::vector<double>> all(n);
    for (int i = 0; i < n; ++i) {
        Polynomial xi = Polynomial::variable(n, i);
        Complex mphi = gaussian_mean(nu_t, Observable(xi));
        for (int k = 1; k <= k_max; ++k) {
            TransitionKernel kern = transition_kernel(prop, t - k * T, t);
            Observable image = apply_kernel(kern, Observable(xi));
            double norm = l2_norm_centered(cache.at(t - k * T).law, image, mphi);
            all[i].push_back(norm / std::pow(fd.r0, k));
        }
        if (all[i].back() > best_final) {
            best_final = all[i].back();
            best_i = i;
        }
    }
    rep.jordan_ratios = all[best_i];
    int half = k_max / 2;
    rep.jordan_slope = (rep.jordan_ratios[k_max - 1] - rep.jordan_ratios[half - 1]) /
                       static_cast<double>(k_max - half);

    // target slope: the eigen-direction component psi0 = (V phi - lambda phi)/lambda
    Polynomial phi = Polynomial::variable(n, best_i);
    TransitionKernel period = transition_kernel(prop, t - T, t);
    Polynomial vphi = std::get<Polynomial>(apply_kernel(period, Observable(phi)));
    Complex lambda = fd.multipliers.front();
    Polynomial psi0 = (vphi - phi * lambda) * (1.0 / lambda);
    rep.jordan_slope_target = 0.9 * l2_norm(nu_t, psi0);

    bool increasing = true;
    for (size_t k = 1; k < rep.jordan_ratios.size(); ++k)
        if (rep.jordan_ratios[k] <= rep.jordan_ratios[k - 1] - 1e-12) increasing = false;
    rep.jordan_growth_ok = increasing && rep.jordan_slope >= rep.jordan_slope_target;
    return rep;
}

struct DecayProfile {
    double omega0 = 0.0;
    double r0 = 0.0;
    double mu0 = 0.0;
    double C = 0.0;
    double c0 = 0.0;
    std::vector<double> omega_grid;
    std::vector<double> M_values;
};

/// Default omega grid in (omega0, 0): omega0 * (1 - delta) with delta
/// log-spaced from delta_min (hugging omega0, where normal systems attain the
/// infimum) out to 0.99 (deep interior, where nonnormal systems do).
inline std::vector<double> default_omega_grid(double omega0, int count = 32,
                                              double delta_min = 1e-9, double delta_max = 0.99) {
    if (omega0 >= 0.0) throw std::invalid_argument("default_omega_grid: omega0 must be negative");
    std::vector<double> grid;
    double l0 = std::log(delta_min), l1 = std::log(delta_max);
    for (int i = 0; i < count; ++i) {
        double delta = std::exp(l0 + (l1 - l0) * i / (count - 1.0));
        grid.push_back(omega0 * (1.0 - delta));
    }
    return grid;
}

/// c0 = inf over the grid of omega mu0^2 / (M(omega)^2 C^2); the infimum over
/// all omega in (omega0, 0) is approximated by the recorded grid.
inline DecayProfile compute_c0(const Propagator& prop, const std::vector<double>& omega_grid) {
    if (omega_grid.empty()) throw std::invalid_argument("compute_c0: empty omega grid");
    const CoefficientField& field = prop.field();
    DecayProfile prof;
    prof.mu0 = field.mu0;
    prof.C = field.normC;
    std::vector<double> s_grid, gap_grid;
    if (field.periodic()) {
        double T = *field.period;
        prof.omega0 = prop.floquet().omega0;
        prof.r0 = prop.floquet().r0;
        for (int i = 0; i < 8; ++i) s_grid.push_back(i * T / 8.0);
    } else {
        for (int i = 0; i < 8; ++i) s_grid.push_back(i * 2.5);
        prof.omega0 = prop.estimate_growth_bound(20.0, s_grid);
        prof.r0 = std::exp(prof.omega0);
    }
    for (double g = 0.25; g <= 20.0; g *= 1.5) gap_grid.push_back(g);
    prof.c0 = 0.0;
    for (double omega : omega_grid) {
        double m = prop.estimate_M(omega, s_grid, gap_grid);
        prof.omega_grid.push_back(omega);
        prof.M_values.push_back(m);
        double value = omega * prof.mu0 * prof.mu0 / (m * m * prof.C * prof.C);
        prof.c0 = std::min(prof.c0, value);
    }
    return prof;
}

struct DecayMargin {
    double lag = 0.0;
    double norm = 0.0;
    double bound = 0.0;
    double margin = 0.0;  // bound - norm, must be >= -1e-9
};

/// Global bound ||P_{s,t}(phi - M_t phi)|| <= e^{c0 (t-s)} ||phi||_{L2(nu_t)}.
inline std::vector<DecayMargin> verify_global_decay(const Propagator& prop, EntranceCache& cache,
                                                    double t, const Observable& phi,
                                                    const std::vector<double>& lag_grid,
                                                    double c0) {
    std::vector<DecayMargin> out;
    const GaussianMeasure& nu_t = cache.at(t).law;
    double phi_norm = lp_norm(nu_t, phi, 2.0);
    Complex mphi = gaussian_mean(nu_t, phi);
    for (double lag : lag_grid) {
        TransitionKernel kern = transition_kernel(prop, t - lag, t);
        Observable image = apply_kernel(kern, phi);
        DecayMargin m;
        m.lag = lag;
        m.norm = l2_norm_centered(cache.at(t - lag).law, image, mphi);
        m.bound = std::exp(c0 * lag) * phi_norm;
        m.margin = m.bound - m.norm;
        out.push_back(m);
    }
    return out;
}

struct PoincareMargin {
    double t = 0.0;
    double variance = 0.0;
    double dirichlet = 0.0;  // int |D phi|^2 d nu_t
    double constant = 0.0;   // M(omega)^2 C^2 / (2 |omega|)
    double margin = 0.0;     // constant * dirichlet - variance
};

namespace detail {

/// int |D phi|^2 d m, exact for polynomials, closed form for real exponentials.
inline double dirichlet_integral(const GaussianMeasure& m, const Observable& phi) {
    const int n = m.dim();
    if (std::holds_alternative<Polynomial>(phi)) {
        const Polynomial& p = std::get<Polynomial>(phi);
        Polynomial sq(n);
        for (int i = 0; i < n; ++i) {
            Polynomial d = p.differentiate(i);
            sq += d * d.conjugate();
        }
        return gaussian_expectation(sq, m.mean, m.cov).real();
    }
    if (std::holds_alternative<RealExponential>(phi)) {
        const auto& e = std::get<RealExponential>(phi);
        double l2 = lp_norm(m, phi, 2.0);
        return e.k.squaredNorm() * l2 * l2;
    }
    throw std::invalid_argument("dirichlet_integral: unsupported observable");
}

}  // namespace detail

/// Per-slice Poincare inequality Var(phi) <= M(omega)^2 C^2 / (2 |omega|) *
/// int |D phi|^2 d nu_t, for omega in (omega0, 0). The constant carries
/// |omega|: with the literal signed omega the right-hand side would be
/// negative and the inequality vacuous.
inline std::vector<PoincareMargin> verify_poincare(const Propagator& prop, EntranceCache& cache,
                                                   const std::vector<double>& t_grid,
                                                   const Observable& phi, double omega,
                                                   double m_omega) {
    if (omega >= 0.0) throw std::invalid_argument("verify_poincare: omega must be negative");
    double c = prop.field().normC;
    double constant = m_omega * m_omega * c * c / (2.0 * std::abs(omega));
    std::vector<PoincareMargin> out;
    for (double t : t_grid) {
        const GaussianMeasure& nu = cache.at(t).law;
        PoincareMargin pm;
        pm.t = t;
        double l2 = lp_norm(nu, phi, 2.0);
        Complex mean = gaussian_mean(nu, phi);
        pm.variance = std::max(0.0, l2 * l2 - std::norm(mean));
        pm.dirichlet = detail::dirichlet_integral(nu, phi);
        pm.constant = constant;
        pm.margin = constant * pm.dirichlet - pm.variance;
        out.push_back(pm);
    }
    return out;
}

/// (Pi u)(t) = M_t u(t, .): projection onto x-constant functions, evaluated
/// on a time grid. Idempotent by construction.
inline std::vector<Complex> project_pi(EntranceCache& cache,
                                       const std::function<Observable(double)>& u,
                                       const std::vector<double>& t_grid) {
    std::vector<Complex> out;
    for (double t : t_grid) out.push_back(gaussian_mean(cache.at(t).law, u(t)));
    return out;
}

}  // namespace nou
