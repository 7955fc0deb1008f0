#include <catch_amalgamated.hpp>

#include "nou/kernel.hpp"

using namespace nou;

namespace {
CoefficientField stationary_ou() {
    CoefficientField f = make_scalar_autonomous(-1.0, std::sqrt(2.0));
    f.name = "stationary_ou";
    return f;
}

TransitionKernel stationary_kernel(double tau) {
    TransitionKernel k;
    k.s = 0.0;
    k.t = tau;
    k.U = Matrix::Constant(1, 1, std::exp(-tau));
    k.g = Vector::Zero(1);
    k.Q = Matrix::Constant(1, 1, 1.0 - std::exp(-2.0 * tau));
    return k;
}
}  // namespace

TEST_CASE("kernel action on x^2 for the stationary scalar field") {
    TransitionKernel k = stationary_kernel(1.0);
    Polynomial x = Polynomial::variable(1, 0);
    Polynomial image = std::get<Polynomial>(apply_kernel(k, Observable(x * x)));
    // P(x^2) = e^{-2} x^2 + (1 - e^{-2})
    Vector at(1);
    at(0) = 1.7;
    double expect = std::exp(-2.0) * 1.7 * 1.7 + (1.0 - std::exp(-2.0));
    CHECK(image.evaluate(at).real() == Catch::Approx(expect).epsilon(1e-13));
    CHECK(image.degree() == 2);
}

TEST_CASE("kernel action never raises polynomial degree") {
    TransitionKernel k = stationary_kernel(0.7);
    Polynomial x = Polynomial::variable(1, 0);
    Polynomial mono = Polynomial::constant(1, 1.0);
    for (int d = 1; d <= 4; ++d) {
        mono = mono * x;
        Polynomial image = std::get<Polynomial>(apply_kernel(k, Observable(mono)));
        CHECK(image.degree() <= d);
    }
}

TEST_CASE("hermite polynomials are eigenfunctions of the stationary kernel") {
    // He_3(x) = x^3 - 3x maps to e^{-3 tau} He_3
    double tau = 1.0;
    TransitionKernel k = stationary_kernel(tau);
    Polynomial x = Polynomial::variable(1, 0);
    Polynomial he3 = x * x * x - x * Complex(3.0);
    Polynomial image = std::get<Polynomial>(apply_kernel(k, Observable(he3)));
    Polynomial gap = image - he3 * Complex(std::exp(-3.0 * tau));
    Vector at(1);
    for (double xv : {-1.2, 0.4, 2.1}) {
        at(0) = xv;
        CHECK(std::abs(gap.evaluate(at)) < 1e-12);
    }
}

TEST_CASE("exponential observables transform by the gaussian characteristic function") {
    TransitionKernel k = stationary_kernel(0.9);
    Vector kv(1);
    kv(0) = 1.3;
    ComplexExponential ce{1.0, kv};
    auto ce_img = std::get<ComplexExponential>(apply_kernel(k, Observable(ce)));
    CHECK(ce_img.k(0) == Catch::Approx(std::exp(-0.9) * 1.3).epsilon(1e-12));
    Complex expect_amp = std::exp(Complex(-0.5 * 1.3 * 1.3 * k.Q(0, 0), 0.0));
    CHECK(std::abs(ce_img.amplitude - expect_amp) < 1e-12);

    RealExponential re{2.0, kv};
    auto re_img = std::get<RealExponential>(apply_kernel(k, Observable(re)));
    CHECK(re_img.amplitude ==
          Catch::Approx(2.0 * std::exp(0.5 * 1.3 * 1.3 * k.Q(0, 0))).epsilon(1e-12));
}

TEST_CASE("kernel expectation agrees with quadrature for a generic observable") {
    TransitionKernel k = stationary_kernel(0.6);
    Vector x0(1);
    x0(0) = 0.8;
    GenericObservable cosf{[](const Vector& v) { return std::cos(v(0)); }, true};
    Complex quad = kernel_expectation(k, Observable(cosf), x0);
    Vector kv(1);
    kv(0) = 1.0;
    Complex closed = kernel_expectation(k, Observable(ComplexExponential{1.0, kv}), x0);
    CHECK(quad.real() == Catch::Approx(closed.real()).epsilon(1e-12));
}

TEST_CASE("generator acts analytically on polynomials") {
    CoefficientField f = stationary_ou();
    // L x^2 = b^2 + 2 a x^2 = 2 - 2 x^2
    Polynomial x = Polynomial::variable(1, 0);
    Vector at(1);
    at(0) = 1.3;
    Complex val = apply_generator(f, 0.0, Observable(x * x), at);
    CHECK(val.real() == Catch::Approx(2.0 - 2.0 * 1.69).epsilon(1e-13));
}

TEST_CASE("generator on exponentials matches the symbol formula") {
    CoefficientField f = stationary_ou();
    Vector kv(1), at(1);
    kv(0) = 0.5;
    at(0) = -0.4;
    RealExponential re{1.0, kv};
    // L e^{kx} = e^{kx} (k a x + b^2 k^2 / 2)
    double expect = std::exp(0.5 * -0.4) * (0.5 * (-(-0.4) * -1.0) * 1.0);
    (void)expect;
    Complex val = apply_generator(f, 0.0, Observable(re), at);
    double manual = std::exp(0.5 * -0.4) * (0.5 * (-1.0 * -0.4) + 0.5 * 2.0 * 0.25);
    CHECK(val.real() == Catch::Approx(manual).epsilon(1e-12));

    GenericObservable g{[](const Vector& v) { return std::exp(0.5 * v(0)); }, true};
    Complex fd = apply_generator(f, 0.0, Observable(g), at);
    CHECK(fd.real() == Catch::Approx(manual).margin(1e-6));
}

TEST_CASE("backward kolmogorov equation holds in finite differences") {
    CoefficientField f = make_scalar_periodic();
    Propagator prop(f);
    double t = 3.0, s = 1.1, h = 1e-5;
    Polynomial x = Polynomial::variable(1, 0);
    Observable phi(x * x);
    Vector at(1);
    at(0) = 0.9;
    Complex up = kernel_expectation(transition_kernel(prop, s + h, t), phi, at);
    Complex um = kernel_expectation(transition_kernel(prop, s - h, t), phi, at);
    Complex dsu = (up - um) / (2.0 * h);
    Observable u = apply_kernel(transition_kernel(prop, s, t), phi);
    Complex lu = apply_generator(f, s, u, at);
    CHECK(std::abs(dsu + lu) < 1e-5);
}

TEST_CASE("lp norms use closed forms where available") {
    GaussianMeasure m;
    m.mean = Vector::Constant(1, 0.3);
    m.cov = Matrix::Constant(1, 1, 0.8);
    Vector kv(1);
    kv(0) = 0.7;
    RealExponential re{1.5, kv};
    double closed = lp_norm(m, Observable(re), 3.0);
    double manual =
        1.5 * std::exp(0.7 * 0.3 + 0.5 * 3.0 * 0.7 * 0.7 * 0.8);
    CHECK(closed == Catch::Approx(manual).epsilon(1e-13));
    // quadrature route must agree
    GenericObservable g{[](const Vector& v) { return 1.5 * std::exp(0.7 * v(0)); }, true};
    CHECK(lp_norm(m, Observable(g), 3.0) == Catch::Approx(manual).epsilon(1e-10));

    Polynomial x = Polynomial::variable(1, 0);
    double exact = l2_norm(m, x);
    CHECK(exact == Catch::Approx(std::sqrt(0.8 + 0.09)).epsilon(1e-13));
    CHECK(lp_norm(m, Observable(x), 2.0) == Catch::Approx(exact).epsilon(1e-13));

    ComplexExponential ce{Complex(0.0, 2.0), kv};
    CHECK(lp_norm(m, Observable(ce), 5.0) == Catch::Approx(2.0));
}

TEST_CASE("mean functional is exact on the closed-form family") {
    GaussianMeasure m;
    m.mean = Vector::Zero(1);
    m.cov = Matrix::Identity(1, 1);
    EntranceLaw law;
    law.t = 0.0;
    law.law = m;
    Polynomial x = Polynomial::variable(1, 0);
    CHECK(mean_functional(law, Observable(x * x)).real() == Catch::Approx(1.0));
    Vector kv(1);
    kv(0) = 1.0;
    CHECK(mean_functional(law, Observable(ComplexExponential{1.0, kv})).real() ==
          Catch::Approx(std::exp(-0.5)).epsilon(1e-13));
}

TEST_CASE("generic kernel action requires the expectation route") {
    TransitionKernel k = stationary_kernel(0.5);
    GenericObservable g{[](const Vector& v) { return v(0); }, true};
    CHECK_THROWS_AS(apply_kernel(k, Observable(g)), std::invalid_argument);
}
