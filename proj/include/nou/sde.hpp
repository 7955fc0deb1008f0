#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>

#include "nou/kernel.hpp"
#include "nou/measures.hpp"

namespace nou {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d4be2b9b1d5b3dULL;
    return z ^ (z >> 31);
}

/// Per-path Gaussian stream: splitmix-derived seed feeds a Box-Muller pair
/// generator, so the draw sequence depends only on (seed, path), never on
/// scheduling.
class GaussianStream {
  public:
    GaussianStream(std::uint64_t seed, std::uint64_t path) {
        std::uint64_t s = seed ^ (0x51c4bf1e9a2c7deaULL * (path + 1));
        state_ = splitmix64(s);
        if (state_ == 0) state_ = 1;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform(), u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

  private:
    double uniform() {
        // (0,1], never 0 so log is safe
        std::uint64_t v = splitmix64(state_);
        return (static_cast<double>(v >> 11) + 1.0) * 0x1.0p-53;
    }
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace detail

struct PathEnsemble {
    double s = 0.0, t = 0.0;
    Vector x0;
    double dt = 0.0;
    int n_paths = 0;
    std::uint64_t seed = 0;
    Matrix terminal_samples;  // n_paths x n
};

/// Euler-Maruyama with Gaussian increments; additive noise makes the diffusion
/// term exact, drift bias is O(dt).
inline PathEnsemble simulate(const CoefficientField& field, double s, double t, const Vector& x0,
                             double dt, int n_paths, std::uint64_t seed) {
    if (!(s < t)) throw std::invalid_argument("simulate: requires s < t");
    if (dt <= 0.0 || dt > (t - s) / 10.0)
        throw std::invalid_argument("simulate: dt must be in (0, (t-s)/10]");
    if (n_paths < 2) throw std::invalid_argument("simulate: n_paths < 2");
    const int n = field.dim;
    long steps = static_cast<long>(std::ceil((t - s) / dt));
    double h = (t - s) / steps;
    double sqrt_h = std::sqrt(h);

    PathEnsemble ens;
    ens.s = s;
    ens.t = t;
    ens.x0 = x0;
    ens.dt = dt;
    ens.n_paths = n_paths;
    ens.seed = seed;
    ens.terminal_samples.resize(n_paths, n);

    for (int p = 0; p < n_paths; ++p) {
        detail::GaussianStream rng(seed, static_cast<std::uint64_t>(p));
        Vector x = x0;
        double r = s;
        for (long i = 0; i < steps; ++i) {
            Matrix b = field.B(r);
            Vector dw(n);
            for (int j = 0; j < n; ++j) dw(j) = rng.normal() * sqrt_h;
            x += h * (field.A(r) * x + field.f(r)) + b * dw;
            r = s + (i + 1) * h;
        }
        ens.terminal_samples.row(p) = x.transpose();
    }
    return ens;
}

/// Exact transition sampler: draws from N(Ux+g, Q) directly. A second oracle;
/// disagreement with Euler-Maruyama beyond CLT bands indicates an integrator
/// bug.
inline PathEnsemble simulate_exact(const TransitionKernel& kern, const Vector& x0, int n_paths,
                                   std::uint64_t seed) {
    if (n_paths < 2) throw std::invalid_argument("simulate_exact: n_paths < 2");
    const int n = static_cast<int>(x0.size());
    PathEnsemble ens;
    ens.s = kern.s;
    ens.t = kern.t;
    ens.x0 = x0;
    ens.dt = 0.0;
    ens.n_paths = n_paths;
    ens.seed = seed;
    ens.terminal_samples.resize(n_paths, n);
    Vector mean = kern.U * x0 + kern.g;
    Matrix root = symmetric_sqrt(kern.Q);
    for (int p = 0; p < n_paths; ++p) {
        detail::GaussianStream rng(seed, static_cast<std::uint64_t>(p));
        Vector z(n);
        for (int j = 0; j < n; ++j) z(j) = rng.normal();
        ens.terminal_samples.row(p) = (mean + root * z).transpose();
    }
    return ens;
}

struct McEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

inline McEstimate mc_expectation(const PathEnsemble& ens, const Observable& phi) {
    const int m = ens.n_paths;
    double sum = 0.0, sumsq = 0.0;
    for (int p = 0; p < m; ++p) {
        double v = evaluate(phi, ens.terminal_samples.row(p).transpose()).real();
        sum += v;
        sumsq += v * v;
    }
    McEstimate out;
    out.estimate = sum / m;
    double var = std::max(0.0, sumsq / m - out.estimate * out.estimate);
    out.stderr_ = std::sqrt(var / m);
    return out;
}

inline Vector mc_mean(const PathEnsemble& ens) {
    return ens.terminal_samples.colwise().mean().transpose();
}

inline Matrix mc_covariance(const PathEnsemble& ens) {
    Matrix centered = ens.terminal_samples.rowwise() - ens.terminal_samples.colwise().mean();
    return centered.transpose() * centered / (ens.n_paths - 1.0);
}

inline void dump_csv(const PathEnsemble& ens, const std::string& path) {
    std::ofstream out(path);
    const int n = static_cast<int>(ens.terminal_samples.cols());
    out << "path_id";
    for (int j = 0; j < n; ++j) out << ",x_" << (j + 1);
    out << "\n";
    out.precision(17);
    for (int p = 0; p < ens.n_paths; ++p) {
        out << p;
        for (int j = 0; j < n; ++j) out << "," << ens.terminal_samples(p, j);
        out << "\n";
    }
}

}  // namespace nou
