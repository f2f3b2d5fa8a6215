#include "fbmctrl/adjoint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fbmctrl/numerics.hpp"

namespace fbmctrl::adjoint {

SegmentGrid segment_grid(double t_end, double delta) {
    if (!(t_end > 0.0)) throw std::invalid_argument("segment_grid: t_end must be positive");
    if (!(delta > 0.0)) throw std::invalid_argument("segment_grid: delta must be positive");
    const int n = static_cast<int>(std::ceil(t_end / delta - 1e-12));
    SegmentGrid g;
    for (int j = n - 1; j >= 0; --j) {
        const double hi = t_end - j * delta;
        const double lo = std::max(t_end - (j + 1) * delta, 0.0);
        g.segments.push_back({lo, hi});
    }
    return g;
}

TerminalCondition TerminalCondition::constant(double value) {
    TerminalCondition t;
    t.kind = Kind::Constant;
    t.c = value;
    return t;
}

TerminalCondition TerminalCondition::deterministic_fn(std::function<double(double)> f) {
    TerminalCondition t;
    t.kind = Kind::DeterministicFn;
    t.fn = std::move(f);
    return t;
}

TerminalCondition TerminalCondition::centered_state() {
    TerminalCondition t;
    t.kind = Kind::CenteredState;
    return t;
}

double CellPoly::eval(double t) const {
    const double tau = t - t0;
    double acc = 0.0;
    for (int j = static_cast<int>(coef.size()) - 1; j >= 0; --j) acc = acc * tau + coef[j];
    return acc;
}

double BsdeSolution::eval(double t) const {
    if (!is_deterministic)
        throw std::logic_error("BsdeSolution::eval: particle solution has no pointwise evaluator");
    const double dt = grid.dt();
    int m = static_cast<int>(std::floor(t / dt));
    m = std::clamp(m, 0, grid.n_steps - 1);
    return cells[m].eval(t);
}

double BsdeSolution::p_at(int particle, int node) const {
    if (is_deterministic) return p[node];
    return p_particles[static_cast<std::size_t>(particle) * grid.n_nodes() + node];
}

double BsdeSolution::p_mean(int node) const {
    if (is_deterministic) return p[node];
    std::vector<double> col(n_particles);
    for (int i = 0; i < n_particles; ++i) col[i] = p_at(i, node);
    return mean(col);
}

double BsdeSolution::fit_noise_floor() const {
    if (diagnostics.empty()) return 0.0;
    std::vector<double> se;
    se.reserve(diagnostics.size());
    for (const auto& d : diagnostics) se.push_back(d.fit_std_error);
    return mean(se);
}

void BsdeSolution::dump_csv(std::ostream& os) const {
    std::ostringstream buf;
    buf.precision(17);
    if (is_deterministic) {
        os << "t,p\n";
        for (int k = 0; k < grid.n_nodes(); ++k) buf << grid.node(k) << ',' << p[k] << '\n';
    } else {
        os << "particle_id,t,p\n";
        for (int i = 0; i < n_particles; ++i)
            for (int k = 0; k < grid.n_nodes(); ++k)
                buf << i << ',' << grid.node(k) << ',' << p_at(i, k) << '\n';
    }
    os << buf.str();
}

nlohmann::ordered_json BsdeSolution::diagnostics_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& d : diagnostics)
        arr.push_back(nlohmann::ordered_json{{"node", d.node},
                                             {"r2", d.r2},
                                             {"cond", d.cond},
                                             {"fit_std_error", d.fit_std_error}});
    return nlohmann::ordered_json{{"method", method}, {"nodes", arr}};
}

BsdeSolution solve_deterministic(const fbm::TimeGrid& grid, double delta,
                                 const TerminalCondition& terminal,
                                 const fcalc::SampledFunction& coeff) {
    if (!(coeff.grid == grid))
        throw std::invalid_argument("solve_deterministic: coeff grid mismatch");
    if (!(delta > 0.0)) throw std::invalid_argument("solve_deterministic: delta must be positive");

    double xi = 0.0;
    switch (terminal.kind) {
        case TerminalCondition::Kind::Constant:
            xi = terminal.c;
            break;
        case TerminalCondition::Kind::DeterministicFn:
            xi = terminal.fn(grid.t_end);
            break;
        case TerminalCondition::Kind::CenteredState:
            throw std::invalid_argument(
                "solve_deterministic: CenteredState terminal is random; use solve_lsmc");
    }

    const int n = grid.n_steps;
    const double dt = grid.dt();
    const bool delayed_part = delta < grid.t_end - 1e-12 * std::max(1.0, grid.t_end);
    int kd = 0;
    if (delayed_part) {
        kd = static_cast<int>(std::lround(delta / dt));
        if (kd < 1 || std::abs(kd * dt - delta) > 1e-9 * std::max(1.0, delta))
            throw std::invalid_argument("solve_deterministic: delta must be grid-aligned");
    }

    BsdeSolution sol;
    sol.grid = grid;
    sol.is_deterministic = true;
    sol.method = "deterministic-segment-recursion";
    sol.p.assign(grid.n_nodes(), 0.0);
    sol.q.assign(grid.n_nodes(), 0.0);
    sol.q_computed = true;
    sol.cells.resize(n);
    sol.p[n] = xi;

    for (int m = n - 1; m >= 0; --m) {
        CellPoly& cell = sol.cells[m];
        cell.t0 = grid.node(m);
        const double right = sol.p[m + 1];
        if (!delayed_part || m + kd >= n) {
            // drift switched off by the indicator: p constant on this cell
            cell.coef = {right};
        } else {
            // p(t) = p(t_{m+1}) + int_t^{t_{m+1}} coeff(s+delta) p(s+delta) ds;
            // the source cell m+kd shares the local variable tau = s - t_m.
            const CellPoly& src = sol.cells[m + kd];
            const double cval = coeff[m + kd];
            std::vector<double> anti(src.coef.size() + 1, 0.0);
            for (std::size_t j = 0; j < src.coef.size(); ++j)
                anti[j + 1] = cval * src.coef[j] / static_cast<double>(j + 1);
            double anti_dt = 0.0;
            for (int j = static_cast<int>(anti.size()) - 1; j >= 0; --j)
                anti_dt = anti_dt * dt + anti[j];
            cell.coef.assign(anti.size(), 0.0);
            cell.coef[0] = right + anti_dt;
            for (std::size_t j = 1; j < anti.size(); ++j) cell.coef[j] = -anti[j];
        }
        sol.p[m] = cell.coef[0];
    }
    return sol;
}

int basis_dimension(int degree) {
    // monomials of total degree <= degree in 3 variables
    return (degree + 1) * (degree + 2) * (degree + 3) / 6;
}

namespace {

// Ridge regression of y on the monomial basis of (x1, x2, x3); features are
// centered and scaled, near-constant columns dropped, so an intercept is
// implicit and fitted values preserve the target mean.
struct NodeRegression {
    std::vector<double> fitted;
    double r2 = 0.0;
    double cond = 0.0;
    double fit_std_error = 0.0;
};

NodeRegression regress(const std::vector<double>& x1, const std::vector<double>& x2,
                       const std::vector<double>& x3, const std::vector<double>& y,
                       int degree, double ridge, int node) {
    const int n_obs = static_cast<int>(y.size());
    std::vector<std::array<int, 3>> expo;
    for (int a = 0; a <= degree; ++a)
        for (int b = 0; a + b <= degree; ++b)
            for (int c = 0; a + b + c <= degree; ++c)
                if (a + b + c > 0) expo.push_back({a, b, c});

    const int dim = static_cast<int>(expo.size());
    std::vector<std::vector<double>> cols(dim, std::vector<double>(n_obs));
    for (int j = 0; j < dim; ++j) {
        for (int i = 0; i < n_obs; ++i) {
            double v = 1.0;
            for (int r = 0; r < expo[j][0]; ++r) v *= x1[i];
            for (int r = 0; r < expo[j][1]; ++r) v *= x2[i];
            for (int r = 0; r < expo[j][2]; ++r) v *= x3[i];
            cols[j][i] = v;
        }
    }

    // standardize, dropping degenerate columns
    std::vector<int> keep;
    for (int j = 0; j < dim; ++j) {
        const double mu = mean(cols[j]);
        double sd = std::sqrt(sample_variance(cols[j]));
        if (sd > 1e-12 * (1.0 + std::abs(mu))) {
            for (int i = 0; i < n_obs; ++i) cols[j][i] = (cols[j][i] - mu) / sd;
            keep.push_back(j);
        }
    }

    const double ybar = mean(y);
    NodeRegression out;
    out.fitted.assign(n_obs, ybar);
    const int kdim = static_cast<int>(keep.size());
    double sst = 0.0;
    for (int i = 0; i < n_obs; ++i) sst += (y[i] - ybar) * (y[i] - ybar);
    if (kdim == 0) {
        out.r2 = 0.0;
        out.cond = 1.0;
        out.fit_std_error = n_obs > 1 ? std::sqrt(sst / (n_obs - 1) / n_obs) : 0.0;
        return out;
    }

    std::vector<double> gram(static_cast<std::size_t>(kdim) * kdim, 0.0);
    std::vector<double> rhs(kdim, 0.0);
    for (int a = 0; a < kdim; ++a) {
        const auto& ca = cols[keep[a]];
        for (int b = 0; b <= a; ++b) {
            const auto& cb = cols[keep[b]];
            double s = 0.0;
            for (int i = 0; i < n_obs; ++i) s += ca[i] * cb[i];
            gram[static_cast<std::size_t>(a) * kdim + b] = s;
            gram[static_cast<std::size_t>(b) * kdim + a] = s;
        }
        double s = 0.0;
        for (int i = 0; i < n_obs; ++i) s += ca[i] * (y[i] - ybar);
        rhs[a] = s;
    }
    double dmax = 0.0, dmin = 1e308;
    for (int a = 0; a < kdim; ++a) {
        const double d = gram[static_cast<std::size_t>(a) * kdim + a];
        dmax = std::max(dmax, d);
        dmin = std::min(dmin, d);
        gram[static_cast<std::size_t>(a) * kdim + a] = d + ridge * n_obs;
    }

    std::vector<double> chol;
    try {
        chol = fbm::cholesky_lower(std::move(gram), kdim);
    } catch (const std::exception&) {
        throw std::runtime_error(
            "solve_lsmc: rank-deficient regression at node " + std::to_string(node) +
            " (diagonal condition estimate " + std::to_string(dmax / std::max(dmin, 1e-300)) + ")");
    }
    out.cond = dmax / std::max(dmin, 1e-300);

    // forward/back substitution
    std::vector<double> w(kdim), beta(kdim);
    for (int a = 0; a < kdim; ++a) {
        double s = rhs[a];
        for (int b = 0; b < a; ++b) s -= chol[static_cast<std::size_t>(a) * kdim + b] * w[b];
        w[a] = s / chol[static_cast<std::size_t>(a) * kdim + a];
    }
    for (int a = kdim - 1; a >= 0; --a) {
        double s = w[a];
        for (int b = a + 1; b < kdim; ++b) s -= chol[static_cast<std::size_t>(b) * kdim + a] * beta[b];
        beta[a] = s / chol[static_cast<std::size_t>(a) * kdim + a];
    }

    for (int a = 0; a < kdim; ++a) {
        const auto& ca = cols[keep[a]];
        for (int i = 0; i < n_obs; ++i) out.fitted[i] += beta[a] * ca[i];
    }

    double ssr = 0.0;
    for (int i = 0; i < n_obs; ++i) ssr += (y[i] - out.fitted[i]) * (y[i] - out.fitted[i]);
    out.r2 = sst > 0.0 ? 1.0 - ssr / sst : 1.0;
    const int dof = std::max(n_obs - kdim - 1, 1);
    out.fit_std_error = std::sqrt(ssr / dof * (kdim + 1.0) / n_obs);
    return out;
}

}  // namespace

BsdeSolution solve_lsmc(const fbm::TimeGrid& grid, double delta,
                        const TerminalCondition& terminal,
                        const fcalc::SampledFunction& coeff,
                        const sdde::ParticlePaths& features, const fbm::FbmEnsemble& noise,
                        const BasisConfig& cfg) {
    if (!(features.grid == grid) || !(noise.grid == grid))
        throw std::invalid_argument("solve_lsmc: grid mismatch");
    if (std::abs(features.delay - delta) > 1e-9 * std::max(1.0, delta))
        throw std::invalid_argument("solve_lsmc: delta does not match the feature paths");
    if (terminal.kind != TerminalCondition::Kind::CenteredState)
        throw std::invalid_argument("solve_lsmc: expected a CenteredState terminal condition");
    const int big_n = features.n_particles;
    if (big_n < 10 * basis_dimension(cfg.degree))
        throw std::invalid_argument("solve_lsmc: need n_particles >= 10 x basis dimension");
    if (!(coeff.grid == grid))
        throw std::invalid_argument("solve_lsmc: coeff grid mismatch");

    const int n = grid.n_steps;
    const int kd = features.delay_steps;
    const double dt = grid.dt();

    BsdeSolution sol;
    sol.grid = grid;
    sol.is_deterministic = false;
    sol.method = "lsmc";
    sol.q_computed = false;
    sol.n_particles = big_n;
    sol.p_particles.assign(static_cast<std::size_t>(big_n) * grid.n_nodes(), 0.0);

    // terminal value, exact per particle; a deterministic terminal state
    // centers to exactly zero
    std::vector<double> x_t = features.states_at(n);
    const double m_t = sample_variance(x_t) == 0.0 ? x_t[0] : mean(x_t);
    std::vector<double> target(big_n);
    for (int i = 0; i < big_n; ++i) {
        target[i] = -(x_t[i] - m_t);
        sol.p_particles[static_cast<std::size_t>(i) * grid.n_nodes() + n] = target[i];
    }

    std::vector<double> b_col(big_n), p_future(big_n);
    for (int k = n - 1; k >= 0; --k) {
        const std::vector<double> xs = features.states_at(k);
        const std::vector<double> xl = features.states_lagged(k);
        for (int i = 0; i < big_n; ++i) b_col[i] = noise.value(i, k);

        if (k + kd <= n) {
            // time-advanced drift: project p(t_k + delta) onto time-t_k states
            for (int i = 0; i < big_n; ++i)
                p_future[i] =
                    sol.p_particles[static_cast<std::size_t>(i) * grid.n_nodes() + (k + kd)];
            const NodeRegression drift =
                regress(xs, xl, b_col, p_future, cfg.degree, cfg.ridge, k);
            const double cval = coeff[k + kd];
            for (int i = 0; i < big_n; ++i) target[i] += cval * drift.fitted[i] * dt;
        }

        NodeRegression reg = regress(xs, xl, b_col, target, cfg.degree, cfg.ridge, k);
        for (int i = 0; i < big_n; ++i)
            sol.p_particles[static_cast<std::size_t>(i) * grid.n_nodes() + k] = reg.fitted[i];
        sol.diagnostics.push_back({k, reg.r2, reg.cond, reg.fit_std_error});
    }
    std::reverse(sol.diagnostics.begin(), sol.diagnostics.end());
    return sol;
}

}  // namespace fbmctrl::adjoint
