#include "fbmctrl/fbm.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "fbmctrl/rng.hpp"

namespace fbmctrl::fbm {

HurstParam::HurstParam(double h) : value(h) {
    if (!(h > 0.5) || !(h < 1.0))
        throw std::invalid_argument("HurstParam: require 1/2 < h < 1, got " + std::to_string(h));
}

TimeGrid::TimeGrid(double t_end_, int n_steps_) : t_end(t_end_), n_steps(n_steps_) {
    if (!(t_end > 0.0)) throw std::invalid_argument("TimeGrid: t_end must be positive");
    if (n_steps < 1) throw std::invalid_argument("TimeGrid: n_steps must be >= 1");
}

double kernel_phi(double t, double s, HurstParam h) {
    if (t == s) throw std::domain_error("kernel_phi: diverges on the diagonal t == s");
    const double H = h.value;
    return H * (2.0 * H - 1.0) * std::pow(std::abs(t - s), 2.0 * H - 2.0);
}

double covariance(double t, double s, HurstParam h) {
    if (t < 0.0 || s < 0.0) throw std::domain_error("covariance: negative time");
    const double twoH = 2.0 * h.value;
    return 0.5 * (std::pow(t, twoH) + std::pow(s, twoH) - std::pow(std::abs(t - s), twoH));
}

FbmEnsemble::FbmEnsemble(TimeGrid grid_, HurstParam h_, int n_paths_, std::uint64_t seed_)
    : grid(grid_), h(h_), n_paths(n_paths_), seed(seed_) {
    if (n_paths < 1) throw std::invalid_argument("FbmEnsemble: n_paths must be >= 1");
    values.assign(static_cast<std::size_t>(n_paths) * grid.n_nodes(), 0.0);
}

void FbmEnsemble::dump_csv(std::ostream& os) const {
    os << "path_id,t,value\n";
    std::ostringstream buf;
    buf.precision(17);
    for (int i = 0; i < n_paths; ++i)
        for (int k = 0; k < grid.n_nodes(); ++k)
            buf << i << ',' << grid.node(k) << ',' << value(i, k) << '\n';
    os << buf.str();
}

std::vector<double> covariance_matrix(const TimeGrid& grid, HurstParam h) {
    const int n = grid.n_steps;
    std::vector<double> c(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            c[static_cast<std::size_t>(i) * n + j] = covariance(grid.node(i + 1), grid.node(j + 1), h);
    return c;
}

std::vector<double> cholesky_lower(std::vector<double> a, int n) {
    for (int j = 0; j < n; ++j) {
        double d = a[static_cast<std::size_t>(j) * n + j];
        for (int k = 0; k < j; ++k) {
            const double l = a[static_cast<std::size_t>(j) * n + k];
            d -= l * l;
        }
        if (!(d > 0.0))
            throw std::runtime_error("cholesky_lower: non-positive pivot at index " + std::to_string(j));
        const double dj = std::sqrt(d);
        a[static_cast<std::size_t>(j) * n + j] = dj;
        for (int i = j + 1; i < n; ++i) {
            double s = a[static_cast<std::size_t>(i) * n + j];
            for (int k = 0; k < j; ++k)
                s -= a[static_cast<std::size_t>(i) * n + k] * a[static_cast<std::size_t>(j) * n + k];
            a[static_cast<std::size_t>(i) * n + j] = s / dj;
        }
        for (int k = j + 1; k < n; ++k) a[static_cast<std::size_t>(j) * n + k] = 0.0;
    }
    return a;
}

FbmEnsemble sample_cholesky(const TimeGrid& grid, HurstParam h, int n_paths, std::uint64_t seed) {
    const int n = grid.n_steps;
    const std::vector<double> chol = cholesky_lower(covariance_matrix(grid, h), n);

    FbmEnsemble ens(grid, h, n_paths, seed);
    std::vector<double> z(n);
    for (int p = 0; p < n_paths; ++p) {
        SubstreamRng rng(seed, static_cast<std::uint64_t>(p));
        for (int k = 0; k < n; ++k) z[k] = rng.normal();
        double* row = ens.values.data() + static_cast<std::size_t>(p) * grid.n_nodes();
        row[0] = 0.0;
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            const double* li = chol.data() + static_cast<std::size_t>(i) * n;
            for (int k = 0; k <= i; ++k) s += li[k] * z[k];
            row[i + 1] = s;
        }
    }
    return ens;
}

namespace {

struct FftwBuf {
    fftw_complex* p;
    explicit FftwBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
    ~FftwBuf() { fftw_free(p); }
    FftwBuf(const FftwBuf&) = delete;
    FftwBuf& operator=(const FftwBuf&) = delete;
};

struct FftwPlan {
    fftw_plan p;
    FftwPlan(int n, fftw_complex* in, fftw_complex* out)
        : p(fftw_plan_dft_1d(n, in, out, FFTW_FORWARD, FFTW_ESTIMATE)) {}
    ~FftwPlan() { fftw_destroy_plan(p); }
    FftwPlan(const FftwPlan&) = delete;
    FftwPlan& operator=(const FftwPlan&) = delete;
};

}  // namespace

FbmEnsemble sample_circulant(const TimeGrid& grid, HurstParam h, int n_paths, std::uint64_t seed) {
    const int n = grid.n_steps;
    const int m = 2 * n;
    const double dt = grid.dt();
    const double twoH = 2.0 * h.value;
    const double scale = std::pow(dt, twoH);

    // fGn autocovariance gamma(k) for unit-step increments, scaled by dt^2H
    auto gamma = [&](int k) {
        const double a = std::abs(static_cast<double>(k));
        return 0.5 * scale * (std::pow(a + 1.0, twoH) - 2.0 * std::pow(a, twoH) +
                              std::pow(std::abs(a - 1.0), twoH));
    };

    FftwBuf in(m), out(m);
    FftwPlan plan(m, in.p, out.p);

    // eigenvalues of the circulant embedding: DFT of the wrapped first row
    for (int k = 0; k <= n; ++k) {
        in.p[k][0] = gamma(k);
        in.p[k][1] = 0.0;
    }
    for (int k = 1; k < n; ++k) {
        in.p[n + k][0] = gamma(n - k);
        in.p[n + k][1] = 0.0;
    }
    fftw_execute(plan.p);

    std::vector<double> lam(m);
    double lam_min = 0.0;
    for (int k = 0; k < m; ++k) {
        lam[k] = out.p[k][0];
        if (lam[k] < lam_min) lam_min = lam[k];
    }
    if (lam_min < -1e-10 * scale)
        throw std::runtime_error("sample_circulant: embedding not nonnegative definite, min eigenvalue " +
                                 std::to_string(lam_min));
    for (double& l : lam)
        if (l < 0.0) l = 0.0;

    std::vector<double> s0(m), s1(n - 1 > 0 ? n - 1 : 0);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (int k = 0; k < m; ++k) s0[k] = std::sqrt(lam[k] * inv_m);
    for (int k = 1; k < n; ++k) s1[k - 1] = std::sqrt(0.5 * lam[k] * inv_m);

    FbmEnsemble ens(grid, h, n_paths, seed);
    for (int p = 0; p < n_paths; ++p) {
        SubstreamRng rng(seed, static_cast<std::uint64_t>(p));
        in.p[0][0] = s0[0] * rng.normal();
        in.p[0][1] = 0.0;
        in.p[n][0] = s0[n] * rng.normal();
        in.p[n][1] = 0.0;
        for (int k = 1; k < n; ++k) {
            const double re = s1[k - 1] * rng.normal();
            const double im = s1[k - 1] * rng.normal();
            in.p[k][0] = re;
            in.p[k][1] = im;
            in.p[m - k][0] = re;
            in.p[m - k][1] = -im;
        }
        fftw_execute(plan.p);

        double* row = ens.values.data() + static_cast<std::size_t>(p) * grid.n_nodes();
        row[0] = 0.0;
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            acc += out.p[k][0];  // real part carries the fGn sample
            row[k + 1] = acc;
        }
    }
    return ens;
}

}  // namespace fbmctrl::fbm
