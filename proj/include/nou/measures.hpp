#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "nou/propagator.hpp"

namespace nou {

struct GaussianMeasure {
    Vector mean;
    Matrix cov;

    int dim() const { return static_cast<int>(mean.size()); }
};

/// Gaussian transition law of the linear SDE between times s and t:
/// starting at x, the state at t is N(U x + g, Q).
struct TransitionKernel {
    double s = 0.0, t = 0.0;
    Matrix U;
    Vector g;
    Matrix Q;
};

/// Chain two kernels: first covers s -> r, second covers r -> t.
inline TransitionKernel compose(const TransitionKernel& first, const TransitionKernel& second) {
    TransitionKernel k;
    k.s = first.s;
    k.t = second.t;
    k.U = second.U * first.U;
    k.g = second.U * first.g + second.g;
    k.Q = symmetrize(second.U * first.Q * second.U.transpose() + second.Q);
    return k;
}

namespace detail {

/// Joint RK4 sweep of U' = AU, g' = Ag + f, Q' = AQ + QA* + BB* from (I,0,0).
inline TransitionKernel integrate_kernel(const CoefficientField& field, double s, double t,
                                         double step) {
    const int n = field.dim;
    TransitionKernel k;
    k.s = s;
    k.t = t;
    k.U = Matrix::Identity(n, n);
    k.g = Vector::Zero(n);
    k.Q = Matrix::Zero(n, n);
    if (t <= s) return k;
    long steps = std::max<long>(1, static_cast<long>(std::ceil((t - s) / step)));
    double h = (t - s) / steps;
    auto deriv = [&](double r, const Matrix& u, const Vector& g, const Matrix& q, Matrix& du,
                     Vector& dg, Matrix& dq) {
        Matrix a = field.A(r), b = field.B(r);
        du = a * u;
        dg = a * g + field.f(r);
        dq = a * q + q * a.transpose() + b * b.transpose();
    };
    Matrix du1, du2, du3, du4, dq1, dq2, dq3, dq4;
    Vector dg1, dg2, dg3, dg4;
    double r = s;
    for (long i = 0; i < steps; ++i) {
        deriv(r, k.U, k.g, k.Q, du1, dg1, dq1);
        deriv(r + 0.5 * h, k.U + 0.5 * h * du1, k.g + 0.5 * h * dg1, k.Q + 0.5 * h * dq1, du2,
              dg2, dq2);
        deriv(r + 0.5 * h, k.U + 0.5 * h * du2, k.g + 0.5 * h * dg2, k.Q + 0.5 * h * dq2, du3,
              dg3, dq3);
        deriv(r + h, k.U + h * du3, k.g + h * dg3, k.Q + h * dq3, du4, dg4, dq4);
        k.U += (h / 6.0) * (du1 + 2.0 * du2 + 2.0 * du3 + du4);
        k.g += (h / 6.0) * (dg1 + 2.0 * dg2 + 2.0 * dg3 + dg4);
        k.Q = symmetrize(k.Q + (h / 6.0) * (dq1 + 2.0 * dq2 + 2.0 * dq3 + dq4));
        r = s + (i + 1) * h;
    }
    return k;
}

inline TransitionKernel kernel_power(const TransitionKernel& period_kernel, long k) {
    const int n = static_cast<int>(period_kernel.U.rows());
    TransitionKernel result;
    result.s = period_kernel.s;
    result.t = period_kernel.s;
    result.U = Matrix::Identity(n, n);
    result.g = Vector::Zero(n);
    result.Q = Matrix::Zero(n, n);
    TransitionKernel base = period_kernel;
    double T = period_kernel.t - period_kernel.s;
    long covered = 0, span = 1;
    while (k > 0) {
        if (k & 1) {
            result = compose(result, base);
            covered += span;
            result.t = result.s + covered * T;
        }
        base = compose(base, base);
        span *= 2;
        k >>= 1;
    }
    return result;
}

}  // namespace detail

/// (U(t,s), g(t,s), Q(t,s)). For periodic fields and t-s > 2T the period
/// kernel is composed by binary powers so long horizons stay cheap.
inline TransitionKernel transition_kernel(const Propagator& prop, double s, double t) {
    if (s > t) throw std::invalid_argument("transition_kernel: requires s <= t");
    const CoefficientField& field = prop.field();
    double step = prop.step();
    if (field.periodic() && t - s > 2.0 * *field.period) {
        double T = *field.period;
        long k = static_cast<long>(std::floor((t - s) / T)) - 1;
        TransitionKernel per = detail::integrate_kernel(field, s, s + T, step);
        TransitionKernel pow = detail::kernel_power(per, k);
        TransitionKernel tail = detail::integrate_kernel(field, s + k * T, t, step);
        TransitionKernel out = compose(pow, tail);
        out.s = s;
        out.t = t;
        return out;
    }
    return detail::integrate_kernel(field, s, t, step);
}

enum class EntranceConstruction { periodic_fixed_point, truncation };

/// The distinguished Gaussian measure at time t: mean g(t,-inf), covariance
/// Q(t,-inf).
struct EntranceLaw {
    double t = 0.0;
    GaussianMeasure law;
    EntranceConstruction construction = EntranceConstruction::truncation;
    double truncation_error = 0.0;
};

/// Periodic route: Stein fixed point Q = M Q M* + R summed as the convergent
/// series. Aperiodic route: start the kernel at t - L with L doubled until the
/// law stops moving.
inline EntranceLaw entrance_law(const Propagator& prop, double t, double tol = 1e-12) {
    const CoefficientField& field = prop.field();
    const int n = field.dim;
    EntranceLaw out;
    out.t = t;
    if (field.periodic()) {
        double T = *field.period;
        Propagator::FloquetData fd = prop.floquet();
        if (fd.omega0 >= 0.0)
            throw std::runtime_error("entrance_law: growth bound is nonnegative, no entrance law");
        TransitionKernel k = transition_kernel(prop, t - T, t);
        Matrix m = k.U;
        Matrix q = Matrix::Zero(n, n);
        Matrix term = k.Q;
        Matrix mj = Matrix::Identity(n, n);
        double term_norm = spectral_norm(term);
        int guard = 0;
        while (term_norm >= tol && guard < 100000) {
            q += term;
            mj = m * mj;
            term = mj * k.Q * mj.transpose();
            term_norm = spectral_norm(term);
            ++guard;
        }
        Matrix imm = Matrix::Identity(n, n) - m;
        if (std::abs(imm.determinant()) < 1e-14)
            throw std::runtime_error("entrance_law: I - monodromy singular");
        out.law.mean = imm.partialPivLu().solve(k.g);
        out.law.cov = symmetrize(q);
        out.construction = EntranceConstruction::periodic_fixed_point;
        out.truncation_error = term_norm / std::max(1e-300, 1.0 - fd.r0 * fd.r0);
        return out;
    }
    double L = 10.0;
    TransitionKernel prev = transition_kernel(prop, t - L, t);
    for (int iter = 0; iter < 10; ++iter) {
        L *= 2.0;
        TransitionKernel next = transition_kernel(prop, t - L, t);
        double diff = spectral_norm(next.Q - prev.Q) + (next.g - prev.g).norm();
        if (diff < tol && spectral_norm(next.U) * spectral_norm(next.U) < tol) {
            out.law.mean = next.g;
            out.law.cov = symmetrize(next.Q);
            out.construction = EntranceConstruction::truncation;
            out.truncation_error = diff;
            return out;
        }
        prev = next;
    }
    throw std::runtime_error("entrance_law: truncation route did not converge");
}

/// Alternate construction of the periodic covariance fixed point: direct
/// linear solve of the vectorized Stein system. Cross-check only.
inline Matrix stein_direct_solve(const Matrix& m, const Matrix& r) {
    const int n = static_cast<int>(m.rows());
    Matrix kron = Matrix::Identity(n * n, n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            kron.block(i * n, j * n, n, n) -= m(i, j) * m;
    Vector rv(n * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) rv(j * n + i) = r(i, j);
    Vector qv = kron.partialPivLu().solve(rv);
    Matrix q(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) q(i, j) = qv(j * n + i);
    return symmetrize(q);
}

inline double log_density(const GaussianMeasure& m, const Vector& x) {
    const int n = m.dim();
    Eigen::LLT<Matrix> llt(m.cov);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("log_density: covariance not positive definite");
    Vector d = x - m.mean;
    Vector w = llt.matrixL().solve(d);
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
    return -0.5 * n * std::log(2.0 * M_PI) - logdet - 0.5 * w.squaredNorm();
}

/// d/dt log rho(x,t) for the entrance-law density, in closed form from the
/// mean/covariance flow g' = A g + f, Q' = A Q + Q A* + B B*.
inline double density_time_logderivative(const CoefficientField& field, const EntranceLaw& law,
                                         const Vector& x) {
    double t = law.t;
    Matrix a = field.A(t), b = field.B(t);
    const Matrix& q = law.law.cov;
    const Vector& g = law.law.mean;
    Vector gdot = a * g + field.f(t);
    Matrix qdot = a * q + q * a.transpose() + b * b.transpose();
    Eigen::LLT<Matrix> llt(q);
    if (llt.info() != Eigen::Success)
        throw std::runtime_error("density_time_logderivative: singular covariance");
    Vector d = x - g;
    Vector qinv_d = llt.solve(d);
    Matrix qinv_qdot = llt.solve(qdot);
    return -0.5 * qinv_qdot.trace() + llt.solve(gdot).dot(d) +
           0.5 * qinv_d.dot(qdot * qinv_d);
}

/// Quadratic polynomial x -> d/dt log rho(x, t); exact ingredient for the
/// closed-form log-Sobolev and quadratic-form integrals.
inline Matrix dtlogrho_quadratic(const CoefficientField& field, const EntranceLaw& law,
                                 Vector& linear, double& constant) {
    double t = law.t;
    Matrix a = field.A(t), b = field.B(t);
    const Matrix& q = law.law.cov;
    const Vector& g = law.law.mean;
    Vector gdot = a * g + field.f(t);
    Matrix qdot = a * q + q * a.transpose() + b * b.transpose();
    Eigen::LLT<Matrix> llt(q);
    Matrix qinv_qdot_qinv = llt.solve(llt.solve(qdot).transpose());
    Vector qinv_gdot = llt.solve(gdot);
    // dlogrho = -1/2 tr(Q^-1 Qdot) + <Q^-1 gdot, x-g> + 1/2 <Q^-1 Qdot Q^-1 (x-g), x-g>
    Matrix quad = 0.5 * symmetrize(qinv_qdot_qinv);
    linear = qinv_gdot - 2.0 * quad * g;
    constant = -0.5 * llt.solve(qdot).trace() - qinv_gdot.dot(g) + g.dot(quad * g);
    return quad;
}

/// Memo table for entrance laws keyed by quantized time; safe for concurrent
/// readers.
class EntranceCache {
  public:
    explicit EntranceCache(const Propagator& prop, double tol = 1e-12)
        : prop_(&prop), tol_(tol) {}

    const EntranceLaw& at(double t) {
        long key = std::lround(t * 1e9);
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            double tq = key / 1e9;
            it = cache_.emplace(key, entrance_law(*prop_, tq, tol_)).first;
        }
        return it->second;
    }

    const Propagator& propagator() const { return *prop_; }

  private:
    const Propagator* prop_;
    double tol_;
    std::mutex mu_;
    std::map<long, EntranceLaw> cache_;
};

}  // namespace nou
