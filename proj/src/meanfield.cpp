#include "fbmctrl/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fbmctrl/numerics.hpp"

namespace fbmctrl::meanfield {

EmpiricalMeasure::EmpiricalMeasure(std::vector<double> s) : samples(std::move(s)) {
    if (samples.empty()) throw std::invalid_argument("EmpiricalMeasure: need at least one sample");
}

double moment(const EmpiricalMeasure& m, const std::function<double(double)>& psi) {
    std::vector<double> vals(m.samples.size());
    for (std::size_t i = 0; i < m.samples.size(); ++i) vals[i] = psi(m.samples[i]);
    return mean(vals);
}

double MomentMap::d(double x) const {
    if (deriv) return deriv(x);
    const double h = fd_step(x);
    return (value(x + h) - value(x - h)) / (2.0 * h);
}

MomentMap MomentMap::identity() {
    return MomentMap{[](double x) { return x; }, [](double) { return 1.0; }};
}

double MeasureFn::operator()(const EmpiricalMeasure& m) const {
    return hat(moment(m, psi.value));
}

double MeasureFn::outer_derivative(const EmpiricalMeasure& m) const {
    const double v = moment(m, psi.value);
    if (hat_deriv) return hat_deriv(v);
    const double h = fd_step(v);
    const double lo = hat(v - h), hi = hat(v + h);
    if (!std::isfinite(lo) || !std::isfinite(hi))
        throw std::domain_error("measure_derivative: hat not differentiable at evaluated moment");
    return (hi - lo) / (2.0 * h);
}

MeasureDerivative measure_derivative(const MeasureFn& f, const EmpiricalMeasure& m) {
    return MeasureDerivative{f.outer_derivative(m), f.psi};
}

LiftingReport lifting_check(const MeasureFn& f, const EmpiricalMeasure& m0,
                            std::span<const double> direction,
                            std::span<const double> eps_grid) {
    if (direction.size() != m0.samples.size())
        throw std::invalid_argument("lifting_check: direction size mismatch");

    const double f0 = f(m0);
    const MeasureDerivative df = measure_derivative(f, m0);
    std::vector<double> lin(m0.samples.size());
    for (std::size_t i = 0; i < m0.samples.size(); ++i)
        lin[i] = df(m0.samples[i]) * direction[i];
    const double lin_mean = mean(lin);

    LiftingReport rep;
    double scale = 1.0 + std::abs(f0);
    for (double eps : eps_grid) {
        std::vector<double> shifted = m0.samples;
        for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += eps * direction[i];
        const double fe = f(EmpiricalMeasure(std::move(shifted)));
        rep.eps.push_back(eps);
        rep.residuals.push_back(std::abs(fe - f0 - eps * lin_mean));
    }

    bool all_tiny = true;
    for (double r : rep.residuals)
        if (r > 1e-13 * scale) all_tiny = false;
    if (all_tiny) {
        rep.exact = true;
        rep.pass = true;
        rep.slope = 2.0;
        return rep;
    }

    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < rep.eps.size(); ++i) {
        if (rep.eps[i] > 0.0 && rep.residuals[i] > 0.0) {
            lx.push_back(std::log(rep.eps[i]));
            ly.push_back(std::log(rep.residuals[i]));
        }
    }
    if (lx.size() >= 2) rep.slope = ls_slope(lx, ly);
    rep.pass = rep.slope >= 1.9;
    return rep;
}

double wasserstein2(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("wasserstein2: sample counts differ");
    std::vector<double> xs = a.samples, ys = b.samples;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - ys[i]) * (xs[i] - ys[i]);
    return std::sqrt(mean(sq));
}

namespace {

template <typename Fn, typename... Args>
double fd_partial(const Fn& value, int which, Args... args) {
    double vals[] = {static_cast<double>(args)...};
    const double h = fd_step(vals[which]);
    double up[] = {static_cast<double>(args)...};
    double dn[] = {static_cast<double>(args)...};
    up[which] += h;
    dn[which] -= h;
    auto call = [&](const double* a) {
        if constexpr (sizeof...(Args) == 6)
            return value(a[0], a[1], a[2], a[3], a[4], a[5]);
        else if constexpr (sizeof...(Args) == 3)
            return value(a[0], a[1], a[2]);
        else
            return value(a[0], a[1]);
    };
    return (call(up) - call(dn)) / (2.0 * h);
}

}  // namespace

double DriftFn::d_x(double t, double x, double xb, double v1, double v2, double u) const {
    return dx ? dx(t, x, xb, v1, v2, u) : fd_partial(value, 1, t, x, xb, v1, v2, u);
}
double DriftFn::d_xbar(double t, double x, double xb, double v1, double v2, double u) const {
    return dxbar ? dxbar(t, x, xb, v1, v2, u) : fd_partial(value, 2, t, x, xb, v1, v2, u);
}
double DriftFn::d_v1(double t, double x, double xb, double v1, double v2, double u) const {
    return dv1 ? dv1(t, x, xb, v1, v2, u) : fd_partial(value, 3, t, x, xb, v1, v2, u);
}
double DriftFn::d_v2(double t, double x, double xb, double v1, double v2, double u) const {
    return dv2 ? dv2(t, x, xb, v1, v2, u) : fd_partial(value, 4, t, x, xb, v1, v2, u);
}
double DriftFn::d_u(double t, double x, double xb, double v1, double v2, double u) const {
    return du ? du(t, x, xb, v1, v2, u) : fd_partial(value, 5, t, x, xb, v1, v2, u);
}

double DiffusionFn::d_v1(double t, double v1, double v2) const {
    return dv1 ? dv1(t, v1, v2) : fd_partial(value, 1, t, v1, v2);
}
double DiffusionFn::d_v2(double t, double v1, double v2) const {
    return dv2 ? dv2(t, v1, v2) : fd_partial(value, 2, t, v1, v2);
}

double TerminalFn::d_x(double x, double v) const {
    return dx ? dx(x, v) : fd_partial(value, 0, x, v);
}
double TerminalFn::d_v(double x, double v) const {
    return dv ? dv(x, v) : fd_partial(value, 1, x, v);
}

}  // namespace fbmctrl::meanfield
