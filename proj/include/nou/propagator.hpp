#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "nou/coefficients.hpp"
#include "nou/linalg.hpp"

namespace nou {

/// Evolution operator of xi' = A(t) xi, integrated with classical RK4 at a
/// fixed base step. The step is chosen from the declared bound on ||A|| and
/// halved (Richardson probe) until a step-halving comparison is below ode_tol.
class Propagator {
  public:
    explicit Propagator(CoefficientField field, double ode_tol = 1e-10, double step = 0.0)
        : field_(std::move(field)), ode_tol_(ode_tol) {
        step_ = step > 0.0 ? step : std::min(1e-2, 0.1 / std::max(field_.normA, 1e-12));
        calibrate();
    }

    const CoefficientField& field() const { return field_; }
    double ode_tol() const { return ode_tol_; }
    double step() const { return step_; }

    /// U(t,s) for s <= t.
    Matrix propagate(double s, double t) const {
        if (s > t) throw std::invalid_argument("propagate: requires s <= t");
        if (field_.periodic() && t - s > 2.0 * *field_.period) {
            double T = *field_.period;
            long k = static_cast<long>(std::floor((t - s) / T)) - 1;
            Matrix m = integrate(s, s + T);
            Matrix mk = matrix_power(m, k);
            return integrate(s + k * T, t) * mk;
        }
        return integrate(s, t);
    }

    struct FloquetData {
        Matrix monodromy;
        std::vector<Complex> multipliers;  // sorted by decreasing modulus
        std::vector<bool> semisimple;
        double r0 = 0.0;
        double omega0 = 0.0;
    };

    FloquetData floquet() const {
        if (!field_.periodic()) throw std::invalid_argument("floquet: field is aperiodic");
        double T = *field_.period;
        FloquetData fd;
        fd.monodromy = integrate(0.0, T);
        Eigen::EigenSolver<Matrix> es(fd.monodromy);
        std::vector<Complex> mult(es.eigenvalues().data(),
                                  es.eigenvalues().data() + es.eigenvalues().size());
        std::sort(mult.begin(), mult.end(),
                  [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });
        fd.multipliers = mult;
        fd.r0 = std::abs(mult.front());
        fd.omega0 = std::log(fd.r0) / T;
        double tol = 1e-8 * std::max(1.0, spectral_norm(fd.monodromy));
        for (Complex mu : mult) fd.semisimple.push_back(is_semisimple(fd.monodromy, mu, tol));
        return fd;
    }

    /// Exact route (Floquet) for periodic fields; grid estimate of
    /// max_s log||U(s+horizon,s)|| / horizon otherwise.
    double estimate_growth_bound(double horizon, const std::vector<double>& grid) const {
        if (field_.periodic()) return floquet().omega0;
        if (grid.empty()) throw std::invalid_argument("estimate_growth_bound: empty grid");
        if (horizon <= 0.0) throw std::invalid_argument("estimate_growth_bound: horizon <= 0");
        double best = -std::numeric_limits<double>::infinity();
        for (double s : grid)
            best = std::max(best, std::log(spectral_norm(propagate(s, s + horizon))) / horizon);
        return best;
    }

    /// Grid lower estimate of M(omega) = sup_{s<=t} ||U(t,s)|| e^{-omega (t-s)}.
    double estimate_M(double omega, const std::vector<double>& s_grid,
                      const std::vector<double>& gap_grid) const {
        if (s_grid.empty() || gap_grid.empty())
            throw std::invalid_argument("estimate_M: empty grid");
        double w0 = field_.periodic()
                        ? floquet().omega0
                        : estimate_growth_bound(20.0, s_grid);
        if (omega <= w0)
            throw std::invalid_argument("estimate_M: omega must exceed the growth bound");
        double best = 1.0;  // gap 0 contributes ||I|| = 1
        for (double s : s_grid)
            for (double gap : gap_grid) {
                if (gap <= 0.0) continue;
                best = std::max(best,
                                spectral_norm(propagate(s, s + gap)) * std::exp(-omega * gap));
            }
        return best;
    }

    static bool is_semisimple(const Matrix& m, Complex lambda, double tol) {
        CMatrix shifted = m.cast<Complex>();
        shifted.diagonal().array() -= lambda;
        return numerical_rank(shifted, tol) == numerical_rank(shifted * shifted, tol);
    }

  private:
    void calibrate() {
        double probe = field_.periodic() ? *field_.period : 1.0;
        for (int iter = 0; iter < 12; ++iter) {
            Matrix coarse = integrate(0.0, probe);
            double h = step_;
            step_ = h / 2.0;
            Matrix fine = integrate(0.0, probe);
            if (spectral_norm(coarse - fine) < ode_tol_) {
                // keep the halved step; the comparison bounds its own error
                return;
            }
        }
    }

    Matrix integrate(double s, double t) const {
        const int n = field_.dim;
        Matrix u = Matrix::Identity(n, n);
        if (t <= s) return u;
        long steps = std::max<long>(1, static_cast<long>(std::ceil((t - s) / step_)));
        double h = (t - s) / steps;
        double r = s;
        for (long i = 0; i < steps; ++i) {
            Matrix k1 = field_.A(r) * u;
            Matrix k2 = field_.A(r + 0.5 * h) * (u + 0.5 * h * k1);
            Matrix k3 = field_.A(r + 0.5 * h) * (u + 0.5 * h * k2);
            Matrix k4 = field_.A(r + h) * (u + h * k3);
            u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            r = s + (i + 1) * h;
        }
        return u;
    }

    static Matrix matrix_power(const Matrix& m, long k) {
        Matrix result = Matrix::Identity(m.rows(), m.cols());
        Matrix base = m;
        while (k > 0) {
            if (k & 1) result = result * base;
            base = base * base;
            k >>= 1;
        }
        return result;
    }

    CoefficientField field_;
    double ode_tol_;
    double step_;
};

}  // namespace nou
