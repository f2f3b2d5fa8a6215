#include "fbmctrl/fcalc.hpp"

#include <cmath>
#include <stdexcept>

#include "fbmctrl/numerics.hpp"

namespace fbmctrl::fcalc {

SampledFunction::SampledFunction(fbm::TimeGrid g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.n_nodes())
        throw std::invalid_argument("SampledFunction: need one value per node");
    for (double x : values)
        if (!std::isfinite(x)) throw std::invalid_argument("SampledFunction: non-finite value");
}

SampledFunction SampledFunction::constant(const fbm::TimeGrid& g, double c) {
    return SampledFunction(g, std::vector<double>(g.n_nodes(), c));
}

SampledFunction SampledFunction::from(const fbm::TimeGrid& g,
                                      const std::function<double(double)>& f) {
    std::vector<double> v(g.n_nodes());
    for (int k = 0; k < g.n_nodes(); ++k) v[k] = f(g.node(k));
    return SampledFunction(g, std::move(v));
}

double kernel_cell_integral(double t, double a, double b, fbm::HurstParam h) {
    const double H = h.value;
    const double e = 2.0 * H - 1.0;
    auto piece = [&](double x) {
        const double d = t - x;
        return std::copysign(std::pow(std::abs(d), e), d);
    };
    return H * (piece(a) - piece(b));
}

namespace {

// R(u,v) = double integral of phi_H over [0,u] x [0,v]; the rectangle
// integral follows by inclusion-exclusion, which absorbs the diagonal
// singularity exactly.
inline double corner(double u, double v, double twoH) {
    return 0.5 * (std::pow(u, twoH) + std::pow(v, twoH) - std::pow(std::abs(u - v), twoH));
}

}  // namespace

std::vector<double> increment_gram(const fbm::TimeGrid& grid, fbm::HurstParam h) {
    const int n = grid.n_steps;
    const double twoH = 2.0 * h.value;
    std::vector<double> w(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double a = grid.node(i), b = grid.node(i + 1);
            const double c = grid.node(j), d = grid.node(j + 1);
            const double val = corner(b, d, twoH) - corner(a, d, twoH) -
                               corner(b, c, twoH) + corner(a, c, twoH);
            w[static_cast<std::size_t>(i) * n + j] = val;
            w[static_cast<std::size_t>(j) * n + i] = val;
        }
    }
    return w;
}

double h_inner(const SampledFunction& f, const SampledFunction& g, fbm::HurstParam h) {
    if (!(f.grid == g.grid)) throw std::invalid_argument("h_inner: grid mismatch");
    const int n = f.grid.n_steps;
    const std::vector<double> w = increment_gram(f.grid, h);
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            terms.push_back(f[i] * g[j] * w[static_cast<std::size_t>(i) * n + j]);
    return compensated_sum(terms);
}

double h_norm_sq(const SampledFunction& f, fbm::HurstParam h) {
    const double v = h_inner(f, f, h);
    return v < 0.0 ? 0.0 : v;
}

double wiener_integral(const SampledFunction& f, std::span<const double> path) {
    if (static_cast<int>(path.size()) != f.grid.n_nodes())
        throw std::invalid_argument("wiener_integral: grid mismatch");
    double s = 0.0, c = 0.0;
    for (int k = 0; k < f.grid.n_steps; ++k) {
        const double x = f[k] * (path[k + 1] - path[k]);
        const double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    return s + c;
}

SampledFunction q_weight(const SampledFunction& q, fbm::HurstParam h) {
    const int n = q.grid.n_steps;
    std::vector<double> w(q.grid.n_nodes(), 0.0);
    for (int k = 0; k < q.grid.n_nodes(); ++k) {
        const double t = q.grid.node(k);
        std::vector<double> terms(n);
        for (int j = 0; j < n; ++j)
            terms[j] = q[j] * kernel_cell_integral(t, q.grid.node(j), q.grid.node(j + 1), h);
        w[k] = compensated_sum(terms);
    }
    return SampledFunction(q.grid, std::move(w));
}

nlohmann::ordered_json CheckReport::to_json() const {
    return nlohmann::ordered_json{{"quantity", quantity},
                                  {"mc_estimate", mc_estimate},
                                  {"analytic", analytic},
                                  {"std_error", std_error},
                                  {"z", z},
                                  {"pass", pass}};
}

CheckReport check_isometry(const SampledFunction& f, const fbm::FbmEnsemble& ensemble,
                           double tol_sigmas) {
    if (!(f.grid == ensemble.grid))
        throw std::invalid_argument("check_isometry: grid mismatch");
    const int n_paths = ensemble.n_paths;
    std::vector<double> ints(n_paths);
    for (int i = 0; i < n_paths; ++i) ints[i] = wiener_integral(f, ensemble.path(i));

    CheckReport r;
    r.quantity = "isometry_variance";
    r.mc_estimate = sample_variance(ints);
    r.analytic = h_norm_sq(f, ensemble.h);
    // variance of the sample variance of a Gaussian: 2 sigma^4 / (N - 1)
    r.std_error = r.analytic * std::sqrt(2.0 / (n_paths - 1));
    r.z = r.std_error > 0.0 ? (r.mc_estimate - r.analytic) / r.std_error
                            : (r.mc_estimate == r.analytic ? 0.0 : INFINITY);
    r.pass = std::abs(r.z) <= tol_sigmas;
    return r;
}

CheckReport check_ibp_deterministic(const SampledFunction& g1, const SampledFunction& g2,
                                    const fbm::FbmEnsemble& ensemble, double tol_sigmas) {
    if (!(g1.grid == ensemble.grid) || !(g2.grid == ensemble.grid))
        throw std::invalid_argument("check_ibp_deterministic: grid mismatch");
    const int n_paths = ensemble.n_paths;
    std::vector<double> prods(n_paths);
    for (int i = 0; i < n_paths; ++i) {
        const auto p = ensemble.path(i);
        prods[i] = wiener_integral(g1, p) * wiener_integral(g2, p);
    }
    CheckReport r;
    r.quantity = "ibp_cross_moment";
    r.mc_estimate = mean(prods);
    r.analytic = h_inner(g1, g2, ensemble.h);
    r.std_error = standard_error(prods);
    if (r.std_error > 0.0)
        r.z = (r.mc_estimate - r.analytic) / r.std_error;
    else
        r.z = (r.mc_estimate == r.analytic) ? 0.0 : INFINITY;
    r.pass = std::abs(r.z) <= tol_sigmas;
    return r;
}

}  // namespace fbmctrl::fcalc
