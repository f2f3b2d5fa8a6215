#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "fbmctrl/fbm.hpp"
#include "fbmctrl/fcalc.hpp"
#include "fbmctrl/numerics.hpp"
#include "fbmctrl/rng.hpp"

using namespace fbmctrl;
using fbm::HurstParam;
using fbm::TimeGrid;
using fcalc::SampledFunction;

TEST_CASE("h_norm_sq of constants matches T^2H") {
    const HurstParam h(0.75);
    const TimeGrid g1(1.0, 16);
    CHECK(fcalc::h_norm_sq(SampledFunction::constant(g1, 1.0), h) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(fcalc::h_norm_sq(SampledFunction::constant(g1, 0.0), h) == 0.0);
    const TimeGrid g2(2.0, 16);
    CHECK(fcalc::h_norm_sq(SampledFunction::constant(g2, 1.0), h) ==
          doctest::Approx(2.8284271).epsilon(1e-8));
}

TEST_CASE("quadrature exactness for constants at random (T, H)") {
    std::mt19937_64 eng(2024);
    std::uniform_real_distribution<double> ut(0.2, 3.0), uh(0.55, 0.95);
    for (int trial = 0; trial < 10; ++trial) {
        const double t_end = ut(eng), hv = uh(eng);
        const TimeGrid g(t_end, 7 + trial);
        const double got = fcalc::h_norm_sq(SampledFunction::constant(g, 1.0), HurstParam(hv));
        CHECK(std::abs(got - std::pow(t_end, 2.0 * hv)) <= 1e-8 * std::pow(t_end, 2.0 * hv));
    }
}

TEST_CASE("h_inner of disjoint indicators equals the increment covariance") {
    const HurstParam h(0.75);
    const TimeGrid g(2.0, 32);
    const auto f = SampledFunction::from(g, [](double t) { return t < 1.0 ? 1.0 : 0.0; });
    const auto gg = SampledFunction::from(g, [](double t) { return t < 1.0 ? 0.0 : 1.0; });
    CHECK(fcalc::h_inner(f, gg, h) == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-8));
    CHECK(fcalc::h_inner(f, f, h) == doctest::Approx(fcalc::h_norm_sq(f, h)).epsilon(1e-14));
    CHECK(fcalc::h_inner(f, SampledFunction::constant(g, 0.0), h) == 0.0);
}

TEST_CASE("h_inner grid mismatch") {
    const HurstParam h(0.75);
    const TimeGrid a(1.0, 4), b(1.0, 8);
    CHECK_THROWS_AS(fcalc::h_inner(SampledFunction::constant(a, 1.0),
                                   SampledFunction::constant(b, 1.0), h),
                    std::invalid_argument);
}

TEST_CASE("bilinearity, symmetry, Cauchy-Schwarz on random integrands") {
    const HurstParam h(0.65);
    const TimeGrid g(1.5, 24);
    std::mt19937_64 eng(7);
    std::normal_distribution<double> nd;
    auto rand_fn = [&]() {
        std::vector<double> v(g.n_nodes());
        for (double& x : v) x = nd(eng);
        return SampledFunction(g, std::move(v));
    };
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = rand_fn(), q = rand_fn(), r = rand_fn();
        const double a = nd(eng), b = nd(eng);
        std::vector<double> comb(g.n_nodes());
        for (int k = 0; k < g.n_nodes(); ++k) comb[k] = a * f[k] + b * q[k];
        const double lhs = fcalc::h_inner(SampledFunction(g, comb), r, h);
        const double rhs = a * fcalc::h_inner(f, r, h) + b * fcalc::h_inner(q, r, h);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
        CHECK(fcalc::h_inner(f, q, h) == doctest::Approx(fcalc::h_inner(q, f, h)).epsilon(1e-12));
        const double ip = fcalc::h_inner(f, q, h);
        CHECK(ip * ip <= fcalc::h_norm_sq(f, h) * fcalc::h_norm_sq(q, h) * (1.0 + 1e-12));
    }
}

TEST_CASE("gram matrices of random families are positive semidefinite") {
    const HurstParam h(0.8);
    const TimeGrid g(1.0, 12);
    std::mt19937_64 eng(11);
    std::normal_distribution<double> nd;
    const int fam = 5;
    std::vector<SampledFunction> fs;
    for (int i = 0; i < fam; ++i) {
        std::vector<double> v(g.n_nodes());
        for (double& x : v) x = nd(eng);
        fs.emplace_back(g, std::move(v));
    }
    std::vector<double> gram(fam * fam);
    for (int i = 0; i < fam; ++i)
        for (int j = 0; j < fam; ++j) gram[i * fam + j] = fcalc::h_inner(fs[i], fs[j], h);

    // smallest eigenvalue by inverse power iteration on (G + shift I)
    // is overkill here; a Cholesky attempt with a tiny lift is enough
    std::vector<double> lifted = gram;
    for (int i = 0; i < fam; ++i) lifted[i * fam + i] += 1e-9;
    CHECK_NOTHROW(fbm::cholesky_lower(lifted, fam));
}

TEST_CASE("wiener integral telescopes and is linear") {
    const TimeGrid g(1.0, 64);
    const auto ens = fbm::sample_cholesky(g, HurstParam(0.75), 16, 5);
    const auto one = SampledFunction::constant(g, 1.0);
    const auto zero = SampledFunction::constant(g, 0.0);
    for (int i = 0; i < ens.n_paths; ++i) {
        CHECK(fcalc::wiener_integral(one, ens.path(i)) ==
              doctest::Approx(ens.value(i, g.n_steps)).epsilon(1e-13));
        CHECK(fcalc::wiener_integral(zero, ens.path(i)) == 0.0);
    }
    // linearity in f, path by path
    std::mt19937_64 eng(3);
    std::normal_distribution<double> nd;
    std::vector<double> va(g.n_nodes()), vb(g.n_nodes()), vc(g.n_nodes());
    for (int k = 0; k < g.n_nodes(); ++k) {
        va[k] = nd(eng);
        vb[k] = nd(eng);
        vc[k] = 2.0 * va[k] - 3.0 * vb[k];
    }
    const SampledFunction fa(g, va), fb(g, vb), fc(g, vc);
    for (int i = 0; i < ens.n_paths; ++i) {
        const double lhs = fcalc::wiener_integral(fc, ens.path(i));
        const double rhs = 2.0 * fcalc::wiener_integral(fa, ens.path(i)) -
                           3.0 * fcalc::wiener_integral(fb, ens.path(i));
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));
    }
}

TEST_CASE("wiener integral variance matches the norm for constant f") {
    const TimeGrid g(1.0, 64);
    const auto ens = fbm::sample_cholesky(g, HurstParam(0.75), 200000, 17);
    const auto one = SampledFunction::constant(g, 1.0);
    std::vector<double> ints(ens.n_paths);
    for (int i = 0; i < ens.n_paths; ++i) ints[i] = fcalc::wiener_integral(one, ens.path(i));
    CHECK(std::abs(sample_variance(ints) - 1.0) <= 0.015);
}

TEST_CASE("check_isometry passes and its detector trips on corrupted data") {
    const TimeGrid g(1.0, 64);
    const auto ens = fbm::sample_cholesky(g, HurstParam(0.75), 200000, 23);
    const auto one = SampledFunction::constant(g, 1.0);
    const auto rep = fcalc::check_isometry(one, ens, 4.0);
    CHECK(rep.pass);
    CHECK(rep.analytic == doctest::Approx(1.0).epsilon(1e-10));

    // corrupting the analytic value by x1.2 must fail the same gate
    const double corrupted = rep.analytic * 1.2;
    const double z = (rep.mc_estimate - corrupted) / (corrupted * std::sqrt(2.0 / (ens.n_paths - 1)));
    CHECK(std::abs(z) > 4.0);

    const auto j = rep.to_json();
    CHECK(j.contains("quantity"));
    CHECK(j.contains("mc_estimate"));
    CHECK(j.contains("analytic"));
    CHECK(j.contains("std_error"));
    CHECK(j.contains("z"));
    CHECK(j.contains("pass"));
}

TEST_CASE("isometry for the ramp, with an MC quadrature cross-check of the norm") {
    const double hv = 0.7;
    const HurstParam h(hv);
    const TimeGrid g(1.0, 64);
    const auto ramp = SampledFunction::from(g, [](double t) { return t; });
    const double analytic = fcalc::h_norm_sq(ramp, h);

    // Monte Carlo quadrature of the double integral for the same
    // piecewise-constant integrand (1e6 uniform points)
    SubstreamRng rng(1234, 0);
    const long n_mc = 1000000;
    std::vector<double> vals(n_mc);
    const double dt = g.dt();
    auto f_pc = [&](double t) { return g.node(static_cast<int>(t / dt)); };
    for (long i = 0; i < n_mc; ++i) {
        const double s = rng.uniform(), t = rng.uniform();
        if (s == t) {
            vals[i] = 0.0;
            continue;
        }
        vals[i] = f_pc(s) * f_pc(t) * fbm::kernel_phi(t, s, h);
    }
    const double mc = mean(vals);
    const double se = standard_error(vals);
    CHECK(std::abs(mc - analytic) <= 4.0 * se);

    // continuous-ramp closed form 1/(2H+2) is approached as the grid refines
    const TimeGrid fine(1.0, 512);
    const auto fine_ramp = SampledFunction::from(fine, [](double t) { return t; });
    CHECK(std::abs(fcalc::h_norm_sq(fine_ramp, h) - 1.0 / (2.0 * hv + 2.0)) <= 3e-3);

    // the sampled ramp satisfies the isometry against the cell-exact norm
    const auto ens = fbm::sample_cholesky(g, h, 200000, 29);
    CHECK(fcalc::check_isometry(ramp, ens, 4.0).pass);
}

TEST_CASE("integration by parts, deterministic integrands") {
    const TimeGrid g2(2.0, 32);
    const auto ens2 = fbm::sample_cholesky(g2, HurstParam(0.75), 100000, 31);
    const auto f = SampledFunction::from(g2, [](double t) { return t < 1.0 ? 1.0 : 0.0; });
    const auto q = SampledFunction::from(g2, [](double t) { return t < 1.0 ? 0.0 : 1.0; });
    const auto rep = fcalc::check_ibp_deterministic(f, q, ens2, 4.0);
    CHECK(rep.pass);
    CHECK(rep.analytic == doctest::Approx(std::sqrt(2.0) - 1.0).epsilon(1e-8));

    const TimeGrid g(1.0, 32);
    const auto ens = fbm::sample_cholesky(g, HurstParam(0.75), 100000, 37);
    const auto one = SampledFunction::constant(g, 1.0);
    const auto same = fcalc::check_ibp_deterministic(one, one, ens, 4.0);
    CHECK(same.pass);
    CHECK(same.analytic == doctest::Approx(1.0).epsilon(1e-10));

    const auto zero = SampledFunction::constant(g, 0.0);
    const auto z = fcalc::check_ibp_deterministic(one, zero, ens, 4.0);
    CHECK(z.pass);
    CHECK(z.mc_estimate == 0.0);
    CHECK(z.analytic == 0.0);
}

TEST_CASE("q_weight integrates the kernel across cells exactly") {
    const HurstParam h(0.75);
    const TimeGrid g(1.0, 8);
    const auto one = SampledFunction::constant(g, 1.0);
    const auto w = fcalc::q_weight(one, h);
    // integral of phi_H(s, t) ds over [0, T] = H (t^(2H-1) + (T-t)^(2H-1))
    for (int k = 0; k <= g.n_steps; ++k) {
        const double t = g.node(k);
        const double expected =
            0.75 * (std::pow(t, 0.5) + std::pow(1.0 - t, 0.5));
        CHECK(w[k] == doctest::Approx(expected).epsilon(1e-12));
    }
}
