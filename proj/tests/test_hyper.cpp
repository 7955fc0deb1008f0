#include <catch_amalgamated.hpp>

#include "nou/hyper.hpp"

using namespace nou;

namespace {
CoefficientField stationary_ou() {
    CoefficientField f = make_scalar_autonomous(-1.0, std::sqrt(2.0));
    f.name = "stationary_ou";
    return f;
}
}  // namespace

TEST_CASE("kappa of the scalar fields is one half regardless of the noise scale") {
    for (double b : {0.3, 1.0, std::sqrt(2.0), 4.0}) {
        // Q(t,-inf) = b^2/2, so Q^{1/2} B^{-1} = 1/sqrt(2) for every b
        Propagator prop(make_scalar_autonomous(-1.0, b));
        EntranceLaw law = entrance_law(prop, 0.0);
        CHECK(kappa_constant(prop.field(), law) == Catch::Approx(0.5).epsilon(1e-9));
    }
    Propagator prop(stationary_ou());
    EntranceLaw law = entrance_law(prop, 0.0);
    CHECK(log_sobolev_constant(prop.field(), law, 2.0) == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(log_sobolev_constant(prop.field(), law, 4.0) ==
          Catch::Approx(2.0 / 3.0).epsilon(1e-9));
    CHECK_THROWS_AS(log_sobolev_constant(prop.field(), law, 1.0), std::invalid_argument);
}

TEST_CASE("quadratic form identity holds exactly on polynomials") {
    Propagator prop(stationary_ou());
    EntranceLaw law = entrance_law(prop, 0.0);
    Polynomial x = Polynomial::variable(1, 0);
    // int x Lx = -1, 1/2 int |B* dx|^2 = 1, d/dt rho = 0
    CHECK(verify_quadratic_form(prop.field(), law, x) < 1e-9);
    CHECK(verify_quadratic_form(prop.field(), law, Polynomial::constant(1, 3.0)) < 1e-12);
    CHECK(verify_quadratic_form(prop.field(), law, x * x + x) < 1e-9);

    Propagator per(make_scalar_periodic());
    EntranceCache cache(per);
    for (double t : {0.0, 1.3, 4.4}) {
        const EntranceLaw& lt = cache.at(t);
        CHECK(verify_quadratic_form(per.field(), lt, x * x) < 1e-7);
        CHECK(verify_quadratic_form(per.field(), lt, x * x * x - x) < 1e-7);
    }

    Propagator rot(make_rotation_decay());
    EntranceLaw lr = entrance_law(rot, 0.0);
    Polynomial x1 = Polynomial::variable(2, 0), x2 = Polynomial::variable(2, 1);
    CHECK(verify_quadratic_form(rot.field(), lr, x1 * x2 + x1) < 1e-9);
}

TEST_CASE("stationary log-sobolev at p = 2 is the classical inequality") {
    Propagator prop(stationary_ou());
    EntranceLaw law = entrance_law(prop, 0.0);
    Polynomial x = Polynomial::variable(1, 0);
    LogSobReport rep = verify_log_sobolev(prop.field(), law, 2.0, Observable(x * x + Polynomial::constant(1, 1.0)));
    CHECK(rep.converged);
    CHECK(rep.c == Catch::Approx(1.0).epsilon(1e-9));
    CHECK(rep.margin >= 0.0);

    // constants saturate the inequality
    LogSobReport flat =
        verify_log_sobolev(prop.field(), law, 2.0, Observable(Polynomial::constant(1, 2.0)));
    CHECK(flat.converged);
    CHECK(std::abs(flat.margin) < 1e-10);

    CHECK_THROWS_AS(verify_log_sobolev(prop.field(), law, 1.0, Observable(x)),
                    std::invalid_argument);
    CHECK_THROWS_AS(verify_log_sobolev(prop.field(), law, 7.0, Observable(x)),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        verify_log_sobolev(prop.field(), law, 2.0, Observable(Polynomial::constant(1, 0.0))),
        std::invalid_argument);
}

TEST_CASE("log-sobolev margins stay nonnegative along the periodic slices") {
    Propagator prop(make_scalar_periodic());
    EntranceCache cache(prop);
    Polynomial x = Polynomial::variable(1, 0);
    Vector kv(1);
    kv(0) = 0.5;
    std::vector<Observable> family = {Observable(x * x + Polynomial::constant(1, 2.0)), Observable(x * x + x + Polynomial::constant(1, 1.5)),
                                      Observable(RealExponential{1.0, kv})};
    for (double t : {0.0, 2.0, 5.0})
        for (double p : {1.5, 2.0, 4.0})
            for (const Observable& phi : family) {
                LogSobReport rep = verify_log_sobolev(prop.field(), cache.at(t), p, phi);
                INFO("t=" << t << " p=" << p);
                CHECK(rep.converged);
                CHECK(rep.margin >= -1e-6);
            }
}

TEST_CASE("exponent path of the stationary field matches the nelson exponent") {
    Propagator prop(stationary_ou());
    EntranceCache cache(prop);
    double t = 0.0, q = 2.0;
    std::vector<double> grid = {t, -0.25, -0.5, -1.0, -2.0};
    HyperPlan plan = exponent_path(prop.field(), cache, t, q, grid);
    REQUIRE(plan.s_grid.size() == grid.size());
    CHECK(plan.s_grid.front() == t);
    for (size_t i = 0; i < plan.s_grid.size(); ++i) {
        double s = plan.s_grid[i];
        CHECK(plan.kappa[i] == Catch::Approx(0.5).epsilon(1e-9));
        double expect = 1.0 + (q - 1.0) * std::exp(2.0 * (t - s));
        CHECK(std::abs(plan.p_closed[i] - expect) < 1e-8);
        CHECK(std::abs(plan.p_ode[i] - expect) < 1e-8);
    }
    CHECK(plan.routes_agree);
    CHECK(plan.p_closed.front() == Catch::Approx(q));

    CHECK(exponent_lower_bound_ok(plan, -1.0 + 1e-9));
    CHECK_FALSE(exponent_lower_bound_ok(plan, -1.5));

    CHECK_THROWS_AS(exponent_path(prop.field(), cache, t, 1.0, grid), std::invalid_argument);
    CHECK_THROWS_AS(exponent_path(prop.field(), cache, t, q, {0.5}), std::invalid_argument);
}

TEST_CASE("exponent path routes agree for the periodic field") {
    Propagator prop(make_scalar_periodic());
    EntranceCache cache(prop);
    std::vector<double> grid;
    for (int i = 0; i <= 6; ++i) grid.push_back(2.0 - 0.5 * i);
    HyperPlan plan = exponent_path(prop.field(), cache, 2.0, 2.0, grid);
    CHECK(plan.routes_agree);
    for (size_t i = 1; i < plan.p_closed.size(); ++i)
        CHECK(plan.p_closed[i] > plan.p_closed[i - 1]);  // grows backward in time
}

TEST_CASE("exponential observables saturate hypercontractivity") {
    Propagator prop(stationary_ou());
    EntranceCache cache(prop);
    double t = 0.0;
    std::vector<double> grid = {t, -0.5, -1.0, -2.0};
    HyperPlan plan = exponent_path(prop.field(), cache, t, 2.0, grid);
    Vector kv(1);
    kv(0) = 0.7;
    auto margins =
        verify_hypercontractivity(prop, cache, plan, Observable(RealExponential{1.0, kv}));
    for (const HyperMargin& m : margins) {
        CHECK(m.margin >= -1e-9);
        CHECK(m.margin <= 1e-8 * m.rhs);  // equality case of the inequality
    }
}

TEST_CASE("hypercontractivity holds for polynomial observables") {
    for (const CoefficientField& f : {stationary_ou(), make_scalar_periodic()}) {
        Propagator prop(f);
        EntranceCache cache(prop);
        double t = f.name == "stationary_ou" ? 0.0 : 3.0;
        std::vector<double> grid = {t, t - 0.4, t - 1.0, t - 2.0};
        HyperPlan plan = exponent_path(prop.field(), cache, t, 2.0, grid);
        Polynomial x = Polynomial::variable(1, 0);
        for (const Observable& phi : {Observable(x * x + Polynomial::constant(1, 1.0)), Observable(x + Polynomial::constant(1, 3.0))}) {
            auto margins = verify_hypercontractivity(prop, cache, plan, phi);
            INFO(f.name);
            for (const HyperMargin& m : margins) CHECK(m.margin >= -1e-5);
        }
    }
}

TEST_CASE("derivative of the hypercontractivity functional is nonnegative") {
    Propagator prop(stationary_ou());
    EntranceCache cache(prop);
    Polynomial x = Polynomial::variable(1, 0);
    AlphaDerivative ad = alpha_derivative(prop, cache, 0.0, 2.0, -0.5, Observable(x * x + Polynomial::constant(1, 2.0)));
    CHECK(ad.alpha > 0.0);
    CHECK(std::abs(ad.analytic - ad.finite_difference) <=
          1e-4 * std::max(1.0, std::abs(ad.analytic)));
    CHECK(ad.analytic >= -1e-9);

    // constants: alpha is flat in s
    AlphaDerivative flat =
        alpha_derivative(prop, cache, 0.0, 2.0, -0.5, Observable(Polynomial::constant(1, 2.0)));
    CHECK(std::abs(flat.analytic) < 1e-9);

    Propagator per(make_scalar_periodic());
    EntranceCache pcache(per);
    AlphaDerivative pd = alpha_derivative(per, pcache, 2.0, 2.0, 1.2, Observable(x * x + Polynomial::constant(1, 2.0)));
    CHECK(std::abs(pd.analytic - pd.finite_difference) <=
          1e-4 * std::max(1.0, std::abs(pd.analytic)));
    CHECK(pd.analytic >= -1e-9);
}
