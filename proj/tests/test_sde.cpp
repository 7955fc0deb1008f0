#include <catch_amalgamated.hpp>

#include "nou/sde.hpp"

using namespace nou;

namespace {
CoefficientField stationary_ou() {
    CoefficientField f = make_scalar_autonomous(-1.0, std::sqrt(2.0));
    f.name = "stationary_ou";
    return f;
}
}  // namespace

TEST_CASE("simulation is deterministic in the seed") {
    CoefficientField f = stationary_ou();
    Vector x0 = Vector::Ones(1);
    PathEnsemble a = simulate(f, 0.0, 1.0, x0, 1e-2, 50, 42);
    PathEnsemble b = simulate(f, 0.0, 1.0, x0, 1e-2, 50, 42);
    CHECK((a.terminal_samples - b.terminal_samples).cwiseAbs().maxCoeff() == 0.0);
    PathEnsemble c = simulate(f, 0.0, 1.0, x0, 1e-2, 50, 43);
    CHECK((a.terminal_samples - c.terminal_samples).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("per-path substreams are schedule independent") {
    CoefficientField f = stationary_ou();
    Vector x0 = Vector::Ones(1);
    PathEnsemble big = simulate(f, 0.0, 1.0, x0, 1e-2, 50, 42);
    PathEnsemble small = simulate(f, 0.0, 1.0, x0, 1e-2, 10, 42);
    CHECK((big.terminal_samples.topRows(10) - small.terminal_samples).cwiseAbs().maxCoeff() ==
          0.0);
}

TEST_CASE("noiseless simulation collapses to the drift ODE") {
    CoefficientField f = make_scalar_autonomous(-1.0, 0.0);
    f.mu0 = 0.0;
    Vector x0 = Vector::Ones(1);
    double dt = 1e-3;
    PathEnsemble ens = simulate(f, 0.0, 1.0, x0, dt, 16, 9);
    double target = std::exp(-1.0);
    for (int p = 0; p < ens.n_paths; ++p) {
        CHECK(std::abs(ens.terminal_samples(p, 0) - target) < 5.0 * dt);
        CHECK(ens.terminal_samples(p, 0) == ens.terminal_samples(0, 0));
    }
}

TEST_CASE("euler terminal statistics sit inside the CLT bands") {
    CoefficientField f = stationary_ou();
    Propagator prop(f);
    Vector x0 = Vector::Ones(1);
    double s = 0.0, t = 1.0;
    TransitionKernel k = transition_kernel(prop, s, t);
    PathEnsemble ens = simulate(f, s, t, x0, 1e-3, 20000, 2024);

    double analytic_mean = k.U(0, 0) * x0(0) + k.g(0);
    double se_mean = std::sqrt(k.Q(0, 0) / ens.n_paths);
    double bias = 2e-3;  // O(dt) drift bias allowance
    CHECK(std::abs(mc_mean(ens)(0) - analytic_mean) < 4.0 * se_mean + bias);

    double q = k.Q(0, 0);
    double se_var = q * std::sqrt(2.0 / (ens.n_paths - 1.0));
    CHECK(std::abs(mc_covariance(ens)(0, 0) - q) < 4.0 * se_var + 4e-3);
}

TEST_CASE("exact transition sampler matches the analytic law and the euler sampler") {
    CoefficientField f = stationary_ou();
    Propagator prop(f);
    Vector x0 = Vector::Ones(1);
    TransitionKernel k = transition_kernel(prop, 0.0, 1.0);
    PathEnsemble exact = simulate_exact(k, x0, 20000, 99);
    double analytic_mean = k.U(0, 0) * x0(0) + k.g(0);
    double se = std::sqrt(k.Q(0, 0) / exact.n_paths);
    CHECK(std::abs(mc_mean(exact)(0) - analytic_mean) < 4.0 * se);

    PathEnsemble euler = simulate(f, 0.0, 1.0, x0, 1e-3, 20000, 2024);
    CHECK(std::abs(mc_mean(exact)(0) - mc_mean(euler)(0)) < 8.0 * se + 2e-3);
}

TEST_CASE("mc expectation of the constant observable is exact") {
    CoefficientField f = stationary_ou();
    Vector x0 = Vector::Zero(1);
    PathEnsemble ens = simulate(f, 0.0, 1.0, x0, 1e-2, 100, 5);
    McEstimate est = mc_expectation(ens, Observable(Polynomial::constant(1, 1.0)));
    CHECK(est.estimate == Catch::Approx(1.0));
    CHECK(est.stderr_ == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("mc expectation of x^2 agrees with the kernel oracle") {
    CoefficientField f = stationary_ou();
    Propagator prop(f);
    Vector x0 = Vector::Ones(1);
    TransitionKernel k = transition_kernel(prop, 0.0, 1.0);
    PathEnsemble ens = simulate(f, 0.0, 1.0, x0, 1e-3, 20000, 7);
    Polynomial x = Polynomial::variable(1, 0);
    McEstimate est = mc_expectation(ens, Observable(x * x));
    double oracle = kernel_expectation(k, Observable(x * x), x0).real();
    CHECK(std::abs(est.estimate - oracle) < 4.0 * est.stderr_ + 4e-3);
}

TEST_CASE("weak bias shrinks linearly in the step size") {
    // tiny noise so the drift bias dominates the monte-carlo error
    CoefficientField f = make_scalar_autonomous(-1.0, 0.01);
    Vector x0 = Vector::Ones(1);
    double exact = std::exp(-1.0);
    auto bias_at = [&](double dt) {
        PathEnsemble ens = simulate(f, 0.0, 1.0, x0, dt, 10000, 31);
        return std::abs(mc_mean(ens)(0) - exact);
    };
    double b1 = bias_at(1e-2), b2 = bias_at(5e-3), b4 = bias_at(2.5e-3);
    CHECK(b1 > b2);
    CHECK(b2 > b4);
    CHECK(b1 / b4 > 2.5);
    CHECK(b1 / b4 < 6.0);
}

TEST_CASE("csv dump carries the sample table") {
    CoefficientField f = stationary_ou();
    PathEnsemble ens = simulate(f, 0.0, 1.0, Vector::Zero(1), 1e-2, 5, 1);
    std::string path = "sde_dump_test.csv";
    dump_csv(ens, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "path_id,x_1");
    int rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 5);
    std::remove(path.c_str());
}

TEST_CASE("simulation validates its arguments") {
    CoefficientField f = stationary_ou();
    Vector x0 = Vector::Zero(1);
    CHECK_THROWS_AS(simulate(f, 1.0, 0.0, x0, 1e-2, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate(f, 0.0, 1.0, x0, 0.5, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate(f, 0.0, 1.0, x0, 1e-2, 1, 1), std::invalid_argument);
}
