#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <variant>
#include <vector>

#include "nou/linalg.hpp"

namespace nou {

using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& a) {
    int d = 0;
    for (int v : a) d += v;
    return d;
}

/// Dense-map multivariate polynomial with complex coefficients, n <= 3 in
/// practice. Closed under the kernel action, differentiation and affine
/// substitution, which keeps the spectral and decay computations exact.
class Polynomial {
  public:
    Polynomial() = default;
    explicit Polynomial(int nvars) : n_(nvars) {}

    static Polynomial constant(int nvars, Complex c) {
        Polynomial p(nvars);
        if (c != 0.0) p.coef_[MultiIndex(nvars, 0)] = c;
        return p;
    }
    static Polynomial variable(int nvars, int i, Complex scale = 1.0) {
        Polynomial p(nvars);
        MultiIndex a(nvars, 0);
        a[i] = 1;
        p.coef_[a] = scale;
        return p;
    }

    int nvars() const { return n_; }
    const std::map<MultiIndex, Complex>& coefficients() const { return coef_; }
    bool empty() const { return coef_.empty(); }

    int degree() const {
        int d = 0;
        for (const auto& [a, c] : coef_)
            if (c != 0.0) d = std::max(d, total_degree(a));
        return d;
    }

    void add_term(const MultiIndex& a, Complex c) {
        Complex& v = coef_[a];
        v += c;
        if (v == 0.0) coef_.erase(a);
    }

    Polynomial& operator+=(const Polynomial& o) {
        for (const auto& [a, c] : o.coef_) add_term(a, c);
        return *this;
    }
    Polynomial& operator-=(const Polynomial& o) {
        for (const auto& [a, c] : o.coef_) add_term(a, -c);
        return *this;
    }
    Polynomial& operator*=(Complex s) {
        if (s == 0.0) {
            coef_.clear();
            return *this;
        }
        for (auto& [a, c] : coef_) c *= s;
        return *this;
    }
    friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
    friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
    friend Polynomial operator*(Polynomial a, Complex s) { return a *= s; }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        Polynomial r(a.n_);
        for (const auto& [ia, ca] : a.coef_)
            for (const auto& [ib, cb] : b.coef_) {
                MultiIndex m(a.n_);
                for (int i = 0; i < a.n_; ++i) m[i] = ia[i] + ib[i];
                r.add_term(m, ca * cb);
            }
        return r;
    }

    Polynomial differentiate(int i) const {
        Polynomial r(n_);
        for (const auto& [a, c] : coef_) {
            if (a[i] == 0) continue;
            MultiIndex m = a;
            m[i] -= 1;
            r.add_term(m, c * static_cast<double>(a[i]));
        }
        return r;
    }

    Complex evaluate(const Vector& x) const {
        Complex s = 0.0;
        for (const auto& [a, c] : coef_) {
            Complex term = c;
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < a[i]; ++k) term *= x(i);
            s += term;
        }
        return s;
    }

    Polynomial conjugate() const {
        Polynomial r(n_);
        for (const auto& [a, c] : coef_) r.coef_[a] = std::conj(c);
        return r;
    }

    /// Substitute x_i <- sum_j L(i,j) y_j + b(i). Output polynomial in y.
    Polynomial compose_affine(const Matrix& l, const Vector& b) const {
        const int m = static_cast<int>(l.cols());
        std::vector<Polynomial> subst;
        for (int i = 0; i < n_; ++i) {
            Polynomial s = Polynomial::constant(m, b(i));
            for (int j = 0; j < m; ++j)
                if (l(i, j) != 0.0) s += Polynomial::variable(m, j, l(i, j));
            subst.push_back(std::move(s));
        }
        Polynomial r(m);
        for (const auto& [a, c] : coef_) {
            Polynomial term = Polynomial::constant(m, c);
            for (int i = 0; i < n_; ++i)
                for (int k = 0; k < a[i]; ++k) term = term * subst[i];
            r += term;
        }
        return r;
    }

  private:
    int n_ = 0;
    std::map<MultiIndex, Complex> coef_;
};

/// Central Gaussian moments E[xi^alpha], xi ~ N(0, Q), by covariance-pairing
/// recursion. Memoized per call set.
class CentralMomentTable {
  public:
    explicit CentralMomentTable(Matrix q) : q_(std::move(q)) {}

    double moment(const MultiIndex& a) {
        if (total_degree(a) % 2 == 1) return 0.0;
        if (total_degree(a) == 0) return 1.0;
        auto it = cache_.find(a);
        if (it != cache_.end()) return it->second;
        int j = 0;
        while (a[j] == 0) ++j;
        MultiIndex rest = a;
        rest[j] -= 1;
        double s = 0.0;
        for (int i = 0; i < static_cast<int>(a.size()); ++i) {
            if (rest[i] == 0 || q_(j, i) == 0.0) continue;
            MultiIndex sub = rest;
            sub[i] -= 1;
            s += q_(j, i) * rest[i] * moment(sub);
        }
        cache_[a] = s;
        return s;
    }

  private:
    Matrix q_;
    std::map<MultiIndex, double> cache_;
};

/// E[p(X)], X ~ N(mean, cov); exact.
inline Complex gaussian_expectation(const Polynomial& p, const Vector& mean, const Matrix& cov) {
    Polynomial shifted = p.compose_affine(Matrix::Identity(p.nvars(), p.nvars()), mean);
    CentralMomentTable table(cov);
    Complex s = 0.0;
    for (const auto& [a, c] : shifted.coefficients()) s += c * table.moment(a);
    return s;
}

// ---------------------------------------------------------------------------
// Observable: the function family the kernel acts on in closed form.
// ---------------------------------------------------------------------------

/// amplitude * exp(i <k, x>)
struct ComplexExponential {
    Complex amplitude = 1.0;
    Vector k;
};

/// amplitude * exp(<k, x>)
struct RealExponential {
    double amplitude = 1.0;
    Vector k;
};

struct GenericObservable {
    std::function<double(const Vector&)> f;
    bool smooth = false;
};

using Observable = std::variant<Polynomial, ComplexExponential, RealExponential, GenericObservable>;

inline int observable_dim(const Observable& obs) {
    return std::visit(
        [](const auto& o) -> int {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Polynomial>) return o.nvars();
            else if constexpr (std::is_same_v<T, GenericObservable>) return -1;
            else return static_cast<int>(o.k.size());
        },
        obs);
}

inline Complex evaluate(const Observable& obs, const Vector& x) {
    return std::visit(
        [&](const auto& o) -> Complex {
            using T = std::decay_t<decltype(o)>;
            if constexpr (std::is_same_v<T, Polynomial>) return o.evaluate(x);
            else if constexpr (std::is_same_v<T, ComplexExponential>)
                return o.amplitude * std::exp(Complex(0.0, o.k.dot(x)));
            else if constexpr (std::is_same_v<T, RealExponential>)
                return o.amplitude * std::exp(o.k.dot(x));
            else return o.f(x);
        },
        obs);
}

}  // namespace nou
