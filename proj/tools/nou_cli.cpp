// Command-line driver: runs the verification suites for the nonautonomous
// Ornstein-Uhlenbeck library and emits deterministic JSON reports plus CSV
// curves. Timings go to stderr so report.json is byte-identical across runs.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nou/nou.hpp"

using nlohmann::ordered_json;

namespace {

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct Settings {
    std::string experiment = "all";
    std::string field = "scalar_periodic";
    std::string out_dir = ".";
    std::uint64_t seed = 12345;
    double tol_scale = 1.0;
    double ode_tol = 1e-10;
    double entrance_tol = 1e-12;
    int quad_order = 128;
};

struct CheckList {
    ordered_json checks = ordered_json::array();
    bool all_pass = true;

    void add(const std::string& name, bool pass, double value, double threshold) {
        ordered_json c;
        c["name"] = name;
        c["pass"] = pass;
        c["value"] = fmt17(value);
        c["threshold"] = fmt17(threshold);
        checks.push_back(c);
        all_pass = all_pass && pass;
    }
    void le(const std::string& name, double value, double threshold) {
        add(name, value <= threshold, value, threshold);
    }
    void ge(const std::string& name, double value, double threshold) {
        add(name, value >= threshold, value, threshold);
    }
};

nou::CoefficientField make_field(const std::string& name) {
    if (name == "scalar_autonomous") return nou::make_scalar_autonomous(-1.0, 1.0);
    if (name == "stationary_ou") {
        nou::CoefficientField f = nou::make_scalar_autonomous(-1.0, std::sqrt(2.0));
        f.name = "stationary_ou";
        return f;
    }
    if (name == "scalar_periodic") return nou::make_scalar_periodic();
    if (name == "rotation_decay") return nou::make_rotation_decay();
    if (name == "nonnormal_jordan") return nou::make_nonnormal_jordan();
    if (name == "aperiodic_decay") return nou::make_aperiodic_decay();
    throw CLI::ValidationError("--field", "unknown field '" + name + "'");
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v;
    for (int i = 0; i < n; ++i) v.push_back(a + (b - a) * i / (n - 1.0));
    return v;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    for (size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
    out << "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << fmt17(row[i]);
        out << "\n";
    }
}

// --- suites ----------------------------------------------------------------

CheckList suite_certify(const Settings& cfg, const nou::CoefficientField& field) {
    CheckList cl;
    double span = field.periodic() ? 2.0 * *field.period : 20.0;
    nou::CertificateReport rep = nou::certify(field, linspace(0.0, span, 64));
    cl.add("ellipticity-bound", rep.mu0_ok, rep.min_sigma_B, field.mu0);
    cl.add("diffusion-norm-bound", rep.normC_ok, rep.max_norm_B, field.normC);
    cl.add("drift-norm-bounds", rep.bounds_ok, rep.max_norm_A, field.normA);
    cl.add("periodicity", rep.periodicity_ok, rep.periodicity_residual, 1e-10 * cfg.tol_scale);
    return cl;
}

CheckList suite_propagate(const Settings& cfg, const nou::CoefficientField& field) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> uni(0.0, field.periodic() ? 3.0 * *field.period : 10.0);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        double a = uni(rng), b = uni(rng), c = uni(rng);
        double s = std::min({a, b, c}), t = std::max({a, b, c});
        double r = a + b + c - s - t;
        worst = std::max(worst, nou::spectral_norm(prop.propagate(s, t) -
                                                   prop.propagate(r, t) * prop.propagate(s, r)));
    }
    cl.le("cocycle-residual", worst, 1e-9 * cfg.tol_scale);

    // Liouville: det U(t,s) = exp(int tr A)
    double s0 = 0.0, t0 = field.periodic() ? *field.period : 2.0;
    nou::Matrix u = prop.propagate(s0, t0);
    nou::QuadratureRule gl = nou::gauss_legendre(40, s0, t0);
    double tr = 0.0;
    for (size_t i = 0; i < gl.nodes.size(); ++i) tr += gl.weights[i] * field.A(gl.nodes[i]).trace();
    cl.le("liouville-determinant",
          std::abs(u.determinant() - std::exp(tr)) / std::abs(std::exp(tr)),
          1e-8 * cfg.tol_scale);

    if (field.name == "autonomous" || field.name == "scalar_autonomous" ||
        field.name == "stationary_ou" || field.name == "rotation_decay" ||
        field.name == "nonnormal_jordan") {
        nou::Matrix a0 = field.A(0.0);
        double gap = nou::spectral_norm(prop.propagate(0.0, 1.7) - nou::expm_pade(1.7 * a0));
        cl.le("matrix-exponential-agreement", gap, 1e-9 * cfg.tol_scale);
    }
    return cl;
}

CheckList suite_kernel(const Settings& cfg, const nou::CoefficientField& field) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    double s = 0.3, t = field.periodic() ? 0.3 + 0.7 * *field.period : 2.1;
    nou::TransitionKernel k = nou::transition_kernel(prop, s, t);

    // quadrature of the defining integrals g = int U(t,r) f(r) dr,
    // Q = int U(t,r) B B* U*(t,r) dr
    nou::QuadratureRule gl = nou::gauss_legendre(60, s, t);
    nou::Vector g_quad = nou::Vector::Zero(field.dim);
    nou::Matrix q_quad = nou::Matrix::Zero(field.dim, field.dim);
    for (size_t i = 0; i < gl.nodes.size(); ++i) {
        double r = gl.nodes[i];
        nou::Matrix u = prop.propagate(r, t);
        nou::Matrix b = field.B(r);
        g_quad += gl.weights[i] * u * field.f(r);
        q_quad += gl.weights[i] * u * b * b.transpose() * u.transpose();
    }
    double scale = std::max(1.0, nou::spectral_norm(k.Q));
    cl.le("kernel-mean-integral", (k.g - g_quad).norm() / scale, 1e-8 * cfg.tol_scale);
    cl.le("kernel-covariance-integral", nou::spectral_norm(k.Q - q_quad) / scale,
          1e-8 * cfg.tol_scale);

    if (field.name == "stationary_ou") {
        double q_exact = 1.0 - std::exp(-2.0 * (t - s));
        cl.le("scalar-closed-form", std::abs(k.Q(0, 0) - q_exact), 1e-9 * cfg.tol_scale);
    }

    // Chapman-Kolmogorov via kernel composition
    double mid = 0.5 * (s + t);
    nou::TransitionKernel k1 = nou::transition_kernel(prop, s, mid);
    nou::TransitionKernel k2 = nou::transition_kernel(prop, mid, t);
    nou::TransitionKernel kc = nou::compose(k1, k2);
    double comp = nou::spectral_norm(kc.U - k.U) + (kc.g - k.g).norm() +
                  nou::spectral_norm(kc.Q - k.Q);
    cl.le("chapman-kolmogorov", comp, 1e-8 * cfg.tol_scale);
    return cl;
}

CheckList suite_measures(const Settings& cfg, const nou::CoefficientField& field) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    double t = field.periodic() ? 0.4 * *field.period : 1.0;
    nou::EntranceLaw law_t = nou::entrance_law(prop, t, cfg.entrance_tol);

    if (field.periodic()) {
        double T = *field.period;
        nou::TransitionKernel per = nou::transition_kernel(prop, t - T, t);
        nou::Matrix direct = nou::stein_direct_solve(per.U, per.Q);
        cl.le("stein-direct-vs-series", nou::spectral_norm(direct - law_t.law.cov),
              1e-9 * cfg.tol_scale);
    }

    // flow property: push nu_s through the kernel, land on nu_t
    double s = t - 1.3;
    nou::EntranceLaw law_s = nou::entrance_law(prop, s, cfg.entrance_tol);
    nou::TransitionKernel k = nou::transition_kernel(prop, s, t);
    nou::Vector mean_push = k.U * law_s.law.mean + k.g;
    nou::Matrix cov_push = k.U * law_s.law.cov * k.U.transpose() + k.Q;
    cl.le("flow-property",
          (mean_push - law_t.law.mean).norm() +
              nou::spectral_norm(cov_push - law_t.law.cov),
          1e-8 * cfg.tol_scale);

    // invariance for a polynomial observable
    nou::Polynomial phi = nou::Polynomial::variable(field.dim, 0);
    phi = phi * phi + nou::Polynomial::constant(field.dim, 1.0);
    nou::Observable phi_obs(phi);
    nou::Observable pphi = nou::apply_kernel(k, phi_obs);
    nou::Complex lhs = nou::gaussian_mean(law_s.law, pphi);
    nou::Complex rhs = nou::gaussian_mean(law_t.law, phi_obs);
    cl.le("invariance-identity", std::abs(lhs - rhs), 1e-7 * cfg.tol_scale);
    return cl;
}

CheckList suite_oracle(const Settings& cfg, const nou::CoefficientField& field,
                       const std::string& out_dir) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    double s = 0.0, t = 1.0;
    nou::Vector x0 = nou::Vector::Ones(field.dim);
    nou::TransitionKernel k = nou::transition_kernel(prop, s, t);

    nou::PathEnsemble em = nou::simulate(field, s, t, x0, 1e-3, 20000, cfg.seed);
    nou::PathEnsemble ex = nou::simulate_exact(k, x0, 20000, cfg.seed + 1);
    nou::dump_csv(em, out_dir + "/oracle_euler_samples.csv");

    nou::Vector analytic_mean = k.U * x0 + k.g;
    nou::Vector m_em = nou::mc_mean(em);
    nou::Matrix c_em = nou::mc_covariance(em);
    double band = 4.0 * std::sqrt(k.Q.diagonal().maxCoeff() / em.n_paths) + 4.0 * 1e-3;
    cl.le("euler-mean-band", (m_em - analytic_mean).norm(), band * field.dim);
    cl.le("euler-covariance-band", nou::spectral_norm(c_em - k.Q),
          8.0 * nou::spectral_norm(k.Q) / std::sqrt(static_cast<double>(em.n_paths)) + 4e-3);
    cl.le("exact-sampler-mean-band", (nou::mc_mean(ex) - analytic_mean).norm(),
          band * field.dim);
    return cl;
}

CheckList suite_spectrum(const Settings& cfg, const nou::CoefficientField& field,
                         const std::string& out_dir) {
    CheckList cl;
    if (!field.periodic()) {
        cl.add("periodic-only-suite-skipped", true, 0.0, 0.0);
        return cl;
    }
    nou::Propagator prop(field, cfg.ode_tol);
    nou::EntranceCache cache(prop, cfg.entrance_tol);
    double t = 0.25 * *field.period;
    const nou::EntranceLaw& law = cache.at(t);
    nou::SpectralReport rep = nou::galerkin_spectrum(prop, law, t, 4);

    cl.add("unit-eigenvalue-unique", rep.unit_eigenvalue_unique, 1.0, 1.0);
    cl.add("moduli-bounded-by-one", rep.moduli_bounded, 1.0, 1.0);
    cl.add("nonunit-moduli-below-r0", rep.nonunit_below_r0, 1.0, 1.0);
    double worst_resid = 0.0;
    for (double r : rep.analytic_residuals) worst_resid = std::max(worst_resid, r);
    cl.le("degree-one-eigenpair-residual", worst_resid, 1e-8 * cfg.tol_scale);

    std::vector<std::vector<double>> rows;
    for (const nou::Complex& ev : rep.galerkin_eigs) rows.push_back({ev.real(), ev.imag()});
    write_csv(out_dir + "/spectrum_eigs.csv", {"re", "im"}, rows);

    std::vector<nou::LatticePoint> lat = nou::gsharp_lattice(prop, 5.0);
    std::vector<std::vector<double>> lrows;
    for (const auto& p : lat)
        lrows.push_back({p.lambda.real(), p.lambda.imag(), p.semisimple ? 1.0 : 0.0});
    write_csv(out_dir + "/gsharp_lattice.csv", {"re", "im", "semisimple"}, lrows);
    cl.add("lattice-nonempty", !lat.empty(), static_cast<double>(lat.size()), 1.0);
    return cl;
}

CheckList suite_decay(const Settings& cfg, const nou::CoefficientField& field,
                      const std::string& out_dir) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    nou::EntranceCache cache(prop, cfg.entrance_tol);
    double t = field.periodic() ? 2.0 * *field.period : 5.0;

    nou::Observable phi(nou::Polynomial::variable(field.dim, 0));
    nou::DecayCurve curve = nou::decay_curve(prop, cache, t, phi, linspace(0.5, 10.0, 20));
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < curve.lags.size(); ++i)
        rows.push_back({curve.lags[i], curve.norms[i]});
    write_csv(out_dir + "/decay_curve.csv", {"lag", "norm"}, rows);
    cl.add("decay-rate-defined", curve.rate_defined, curve.fitted_rate, 0.0);

    nou::DecayProfile prof = nou::compute_c0(
        prop, nou::default_omega_grid(field.periodic() ? prop.floquet().omega0
                                                       : prop.estimate_growth_bound(
                                                             20.0, linspace(0.0, 17.5, 8))));
    cl.le("c0-negative", prof.c0, -1e-12);
    cl.le("c0-above-omega0", prof.omega0 - prof.c0, 1e-6 + std::abs(prof.omega0));

    double worst_margin = 0.0;
    bool first = true;
    std::vector<std::vector<double>> mrows;
    for (const nou::DecayMargin& m :
         nou::verify_global_decay(prop, cache, t, phi, linspace(1.0, 20.0, 20), prof.c0)) {
        if (first || m.margin < worst_margin) worst_margin = m.margin;
        first = false;
        mrows.push_back({m.lag, m.norm, m.bound, m.margin});
    }
    write_csv(out_dir + "/decay_margins.csv", {"lag", "norm", "bound", "margin"}, mrows);
    cl.ge("global-bound-margin", worst_margin, -1e-9 * cfg.tol_scale);

    if (field.periodic()) {
        nou::SharpnessReport sharp = nou::verify_sharpness(prop, cache, t);
        if (sharp.top_semisimple)
            cl.add("sharpness-exact-rate", sharp.exact_rate_ok, 1.0, 1.0);
        else
            cl.add("sharpness-jordan-growth", sharp.jordan_growth_ok, sharp.jordan_slope,
                   sharp.jordan_slope_target);
    }
    return cl;
}

CheckList suite_poincare(const Settings& cfg, const nou::CoefficientField& field) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    nou::EntranceCache cache(prop, cfg.entrance_tol);
    double omega0 = field.periodic()
                        ? prop.floquet().omega0
                        : prop.estimate_growth_bound(20.0, linspace(0.0, 17.5, 8));
    double omega = omega0 * (1.0 - 1e-9);
    std::vector<double> s_grid = linspace(0.0, field.periodic() ? *field.period : 10.0, 8);
    std::vector<double> gap_grid;
    for (double g = 0.25; g <= 20.0; g *= 1.5) gap_grid.push_back(g);
    double m_omega = prop.estimate_M(omega, s_grid, gap_grid);

    std::vector<nou::Observable> family;
    family.emplace_back(nou::Polynomial::variable(field.dim, 0));
    nou::Polynomial sq = nou::Polynomial::variable(field.dim, 0);
    family.emplace_back(sq * sq);
    double worst = 0.0;
    bool first = true;
    for (const nou::Observable& phi : family)
        for (const nou::PoincareMargin& pm :
             nou::verify_poincare(prop, cache, s_grid, phi, omega, m_omega)) {
            if (first || pm.margin < worst) worst = pm.margin;
            first = false;
        }
    cl.ge("poincare-margin", worst, -1e-8 * cfg.tol_scale);
    return cl;
}

CheckList suite_logsob(const Settings& cfg, const nou::CoefficientField& field) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    nou::EntranceCache cache(prop, cfg.entrance_tol);
    double t = field.periodic() ? 0.3 * *field.period : 1.0;
    const nou::EntranceLaw& law = cache.at(t);

    nou::Polynomial x = nou::Polynomial::variable(field.dim, 0);
    nou::Polynomial phi_q = x * x + nou::Polynomial::constant(field.dim, 2.0);
    cl.le("quadratic-form-residual", nou::verify_quadratic_form(field, law, phi_q),
          1e-7 * cfg.tol_scale);

    double worst = 0.0;
    bool conv = true, first = true;
    for (double p : {1.5, 2.0, 4.0}) {
        nou::LogSobReport rep =
            nou::verify_log_sobolev(field, law, p, nou::Observable(phi_q), cfg.quad_order);
        conv = conv && rep.converged;
        if (first || rep.margin < worst) worst = rep.margin;
        first = false;
    }
    cl.add("quadrature-converged", conv, 1.0, 1.0);
    cl.ge("log-sobolev-margin", worst, -1e-6 * cfg.tol_scale);
    return cl;
}

CheckList suite_hyper(const Settings& cfg, const nou::CoefficientField& field,
                      const std::string& out_dir) {
    CheckList cl;
    nou::Propagator prop(field, cfg.ode_tol);
    nou::EntranceCache cache(prop, cfg.entrance_tol);
    double t = field.periodic() ? 0.5 * *field.period : 2.0;
    double q = 2.0;
    std::vector<double> s_grid = linspace(t - 2.0, t, 5);
    nou::HyperPlan plan = nou::exponent_path(field, cache, t, q, s_grid);
    cl.le("exponent-ode-vs-closed-form", plan.max_route_gap, 1e-8 * cfg.tol_scale);

    nou::DecayProfile prof = nou::compute_c0(
        prop, nou::default_omega_grid(field.periodic() ? prop.floquet().omega0
                                                       : prop.estimate_growth_bound(
                                                             20.0, linspace(0.0, 17.5, 8))));
    cl.add("exponent-lower-bound", nou::exponent_lower_bound_ok(plan, prof.c0), 1.0, 1.0);

    nou::Vector kvec = nou::Vector::Zero(field.dim);
    kvec(0) = 1.0;
    nou::RealExponential re{1.0, kvec};
    double worst_cf = 0.0;
    bool first = true;
    std::vector<std::vector<double>> rows;
    for (const nou::HyperMargin& hm :
         nou::verify_hypercontractivity(prop, cache, plan, nou::Observable(re))) {
        if (first || hm.margin < worst_cf) worst_cf = hm.margin;
        first = false;
        rows.push_back({hm.s, hm.p, hm.lhs, hm.rhs, hm.margin});
    }
    write_csv(out_dir + "/hyper_margins.csv", {"s", "p", "lhs", "rhs", "margin"}, rows);
    cl.ge("hypercontractivity-closed-form-margin", worst_cf, -1e-9 * cfg.tol_scale);

    nou::AlphaDerivative ad =
        nou::alpha_derivative(prop, cache, t, q, t - 1.0, nou::Observable(re));
    double rel = std::abs(ad.analytic - ad.finite_difference) /
                 std::max(1.0, std::abs(ad.finite_difference));
    cl.le("alpha-derivative-fd-agreement", rel, 1e-4 * cfg.tol_scale);
    cl.ge("alpha-derivative-nonnegative", ad.analytic, -1e-9 * cfg.tol_scale);
    return cl;
}

struct SuiteEntry {
    std::string name;
    std::string description;
    std::string property;
};

const std::vector<SuiteEntry>& registry() {
    static const std::vector<SuiteEntry> reg = {
        {"certify", "grid certification of the declared coefficient bounds",
         "uniform-ellipticity-and-boundedness"},
        {"decay", "exponential decay curves, sharpness, c0 and the global bound",
         "sharp-exponential-convergence-rate"},
        {"hyper", "exponent path and hypercontractivity of the evolution operator",
         "hypercontractivity-with-explicit-exponent"},
        {"kernel", "transition kernel (U, g, Q) against the defining integrals",
         "gaussian-transition-kernel-formulas"},
        {"logsob", "log-Sobolev inequality and the quadratic-form identity",
         "logarithmic-sobolev-inequality"},
        {"measures", "entrance law constructions, flow property and invariance",
         "evolution-system-of-measures"},
        {"oracle", "Monte-Carlo simulation against analytic kernel statistics",
         "stochastic-simulation-cross-check"},
        {"poincare", "per-slice Poincare inequality with the explicit constant",
         "poincare-inequality"},
        {"propagate", "propagator cocycle, Liouville and matrix-exponential checks",
         "evolution-operator-cocycle-law"},
        {"spectrum", "Poincare-operator eigenstructure and eigenvalue lattices",
         "periodic-evolution-operator-spectrum"},
    };
    return reg;
}

CheckList run_suite(const std::string& name, const Settings& cfg,
                    const nou::CoefficientField& field) {
    if (name == "certify") return suite_certify(cfg, field);
    if (name == "propagate") return suite_propagate(cfg, field);
    if (name == "kernel") return suite_kernel(cfg, field);
    if (name == "measures") return suite_measures(cfg, field);
    if (name == "oracle") return suite_oracle(cfg, field, cfg.out_dir);
    if (name == "spectrum") return suite_spectrum(cfg, field, cfg.out_dir);
    if (name == "decay") return suite_decay(cfg, field, cfg.out_dir);
    if (name == "poincare") return suite_poincare(cfg, field);
    if (name == "logsob") return suite_logsob(cfg, field);
    if (name == "hyper") return suite_hyper(cfg, field, cfg.out_dir);
    throw CLI::ValidationError("--experiment", "unknown experiment '" + name + "'");
}

void apply_config_kv(Settings& cfg, const std::string& key, const std::string& value) {
    if (key == "ode_tol")
        cfg.ode_tol = std::stod(value);
    else if (key == "entrance_tol")
        cfg.entrance_tol = std::stod(value);
    else if (key == "quad_order")
        cfg.quad_order = std::stoi(value);
    else if (key == "field")
        cfg.field = value;
    else if (key == "experiment")
        cfg.experiment = value;
    else if (key == "seed")
        cfg.seed = std::stoull(value);
    else if (key == "tol_scale")
        cfg.tol_scale = std::stod(value);
    else
        throw std::runtime_error("config: unknown key '" + key + "'");
}

void load_config(Settings& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    size_t first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        ordered_json j = ordered_json::parse(text);
        for (auto& [key, value] : j.items()) {
            if (value.is_string())
                apply_config_kv(cfg, key, value.get<std::string>());
            else
                apply_config_kv(cfg, key, value.dump());
        }
        return;
    }
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        size_t h = line.find('#');
        if (h != std::string::npos) line = line.substr(0, h);
        size_t a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        apply_config_kv(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

void validate(const Settings& cfg) {
    if (cfg.ode_tol <= 0.0) throw std::runtime_error("config: ode_tol must be positive");
    if (cfg.entrance_tol <= 0.0) throw std::runtime_error("config: entrance_tol must be positive");
    if (cfg.quad_order < 1) throw std::runtime_error("config: quad_order must be positive");
    if (cfg.tol_scale <= 0.0) throw std::runtime_error("config: tol_scale must be positive");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verification driver for the nonautonomous Ornstein-Uhlenbeck library"};
    Settings cfg;
    std::string config_path;
    bool list = false;
    app.add_option("--experiment", cfg.experiment, "suite name or 'all'");
    app.add_option("--field", cfg.field,
                   "builtin coefficient field (scalar_autonomous, stationary_ou, "
                   "scalar_periodic, rotation_decay, nonnormal_jordan, aperiodic_decay)");
    app.add_option("--config", config_path, "key=value or JSON config file");
    app.add_option("--out-dir", cfg.out_dir, "output directory for report.json and CSV files");
    app.add_option("--seed", cfg.seed, "RNG seed for the Monte-Carlo suite");
    app.add_option("--tol-scale", cfg.tol_scale, "multiplier applied to all check thresholds");
    app.add_flag("--list-experiments", list, "print the experiment registry and exit");

    try {
        app.parse(argc, argv);
        if (list) {
            for (const SuiteEntry& e : registry())
                std::cout << e.name << "  " << e.description << "  [" << e.property << "]\n";
            return 0;
        }
        if (!config_path.empty()) load_config(cfg, config_path);
        validate(cfg);

        std::filesystem::create_directories(cfg.out_dir);
        nou::CoefficientField field = make_field(cfg.field);
        std::vector<std::string> names;
        if (cfg.experiment == "all")
            for (const SuiteEntry& e : registry()) names.push_back(e.name);
        else
            names.push_back(cfg.experiment);

        ordered_json report;
        report["version"] = "1.0";
        report["experiment"] = cfg.experiment;
        report["field"] = cfg.field;
        report["seed"] = std::to_string(cfg.seed);
        report["tol_scale"] = fmt17(cfg.tol_scale);
        report["suites"] = ordered_json::array();
        bool all_pass = true;
        for (const std::string& name : names) {
            auto start = std::chrono::steady_clock::now();
            CheckList cl = run_suite(name, cfg, field);
            double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
            std::cerr << "[timing] " << name << ": " << ms << " ms\n";
            ordered_json s;
            s["name"] = name;
            s["pass"] = cl.all_pass;
            s["checks"] = cl.checks;
            report["suites"].push_back(s);
            all_pass = all_pass && cl.all_pass;
            if (!cl.all_pass) {
                for (const auto& c : cl.checks)
                    if (!c["pass"].get<bool>())
                        std::cerr << "FAIL " << name << "/" << c["name"].get<std::string>()
                                  << " value=" << c["value"].get<std::string>() << "\n";
            }
        }
        report["pass"] = all_pass;
        std::ofstream out(cfg.out_dir + "/report.json");
        out << report.dump(2) << "\n";
        return all_pass ? 0 : 1;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
