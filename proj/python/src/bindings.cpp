#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "fbmctrl/adjoint.hpp"
#include "fbmctrl/control.hpp"
#include "fbmctrl/fbm.hpp"
#include "fbmctrl/fcalc.hpp"
#include "fbmctrl/meanfield.hpp"
#include "fbmctrl/sdde.hpp"
#include "fbmctrl/version.hpp"

namespace py = pybind11;
using namespace fbmctrl;

namespace {

py::array_t<double> ensemble_array(const fbm::FbmEnsemble& e) {
    py::array_t<double> out(std::vector<py::ssize_t>{e.n_paths, e.grid.n_nodes()});
    std::copy(e.values.begin(), e.values.end(), out.mutable_data());
    return out;
}

py::array_t<double> vec_array(const std::vector<double>& v) {
    py::array_t<double> out(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

fcalc::SampledFunction sampled_from(const fbm::TimeGrid& grid, py::array_t<double> values) {
    auto buf = values.request();
    if (buf.ndim != 1 || buf.shape[0] != grid.n_nodes())
        throw std::invalid_argument("sampled function needs one value per grid node");
    const double* p = static_cast<const double*>(buf.ptr);
    return fcalc::SampledFunction(grid, std::vector<double>(p, p + grid.n_nodes()));
}

py::dict report_dict(const fcalc::CheckReport& r) {
    py::dict d;
    d["quantity"] = r.quantity;
    d["mc_estimate"] = r.mc_estimate;
    d["analytic"] = r.analytic;
    d["std_error"] = r.std_error;
    d["z"] = r.z;
    d["pass"] = r.pass;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "mean-field delayed stochastic control driven by fractional Brownian motion";
    m.attr("__version__") = FBMCTRL_VERSION;

    py::class_<fbm::TimeGrid>(m, "TimeGrid")
        .def(py::init<double, int>(), py::arg("t_end"), py::arg("n_steps"))
        .def_readonly("t_end", &fbm::TimeGrid::t_end)
        .def_readonly("n_steps", &fbm::TimeGrid::n_steps)
        .def("dt", &fbm::TimeGrid::dt)
        .def("node", &fbm::TimeGrid::node);

    py::class_<fbm::FbmEnsemble, std::shared_ptr<fbm::FbmEnsemble>>(m, "FbmEnsemble")
        .def_readonly("n_paths", &fbm::FbmEnsemble::n_paths)
        .def_readonly("seed", &fbm::FbmEnsemble::seed)
        .def_property_readonly("grid", [](const fbm::FbmEnsemble& e) { return e.grid; })
        .def_property_readonly("h", [](const fbm::FbmEnsemble& e) { return e.h.value; })
        .def("values", &ensemble_array);

    m.def("kernel_phi", [](double t, double s, double h) {
        return fbm::kernel_phi(t, s, fbm::HurstParam(h));
    });
    m.def("covariance", [](double t, double s, double h) {
        return fbm::covariance(t, s, fbm::HurstParam(h));
    });
    m.def(
        "sample_cholesky",
        [](const fbm::TimeGrid& g, double h, int n_paths, std::uint64_t seed) {
            return std::make_shared<fbm::FbmEnsemble>(
                fbm::sample_cholesky(g, fbm::HurstParam(h), n_paths, seed));
        },
        py::arg("grid"), py::arg("h"), py::arg("n_paths"), py::arg("seed"));
    m.def(
        "sample_circulant",
        [](const fbm::TimeGrid& g, double h, int n_paths, std::uint64_t seed) {
            return std::make_shared<fbm::FbmEnsemble>(
                fbm::sample_circulant(g, fbm::HurstParam(h), n_paths, seed));
        },
        py::arg("grid"), py::arg("h"), py::arg("n_paths"), py::arg("seed"));

    m.def("h_norm_sq", [](const fbm::TimeGrid& g, py::array_t<double> f, double h) {
        return fcalc::h_norm_sq(sampled_from(g, f), fbm::HurstParam(h));
    });
    m.def("h_inner",
          [](const fbm::TimeGrid& g, py::array_t<double> f, py::array_t<double> g2, double h) {
              return fcalc::h_inner(sampled_from(g, f), sampled_from(g, g2), fbm::HurstParam(h));
          });
    m.def("wiener_integral",
          [](const fbm::TimeGrid& g, py::array_t<double> f,
             std::shared_ptr<fbm::FbmEnsemble> ens, int path) {
              return fcalc::wiener_integral(sampled_from(g, f), ens->path(path));
          });
    m.def("check_isometry",
          [](const fbm::TimeGrid& g, py::array_t<double> f,
             std::shared_ptr<fbm::FbmEnsemble> ens, double tol) {
              return report_dict(fcalc::check_isometry(sampled_from(g, f), *ens, tol));
          });

    m.def("moment", [](py::array_t<double> samples, std::function<double(double)> psi) {
        auto buf = samples.request();
        const double* p = static_cast<const double*>(buf.ptr);
        return meanfield::moment(
            meanfield::EmpiricalMeasure(std::vector<double>(p, p + buf.shape[0])), psi);
    });
    m.def("wasserstein2", [](py::array_t<double> a, py::array_t<double> b) {
        auto ba = a.request(), bb = b.request();
        const double* pa = static_cast<const double*>(ba.ptr);
        const double* pb = static_cast<const double*>(bb.ptr);
        return meanfield::wasserstein2(
            meanfield::EmpiricalMeasure(std::vector<double>(pa, pa + ba.shape[0])),
            meanfield::EmpiricalMeasure(std::vector<double>(pb, pb + bb.shape[0])));
    });

    m.def("segment_grid", [](double t_end, double delta) {
        const auto g = adjoint::segment_grid(t_end, delta);
        std::vector<std::pair<double, double>> out;
        for (const auto& s : g.segments) out.emplace_back(s.lo, s.hi);
        return out;
    });
    m.def(
        "solve_adjoint_deterministic",
        [](const fbm::TimeGrid& g, double delta, double xi, py::array_t<double> coeff) {
            const auto sol = adjoint::solve_deterministic(
                g, delta, adjoint::TerminalCondition::constant(xi), sampled_from(g, coeff));
            return vec_array(sol.p);
        },
        py::arg("grid"), py::arg("delta"), py::arg("xi"), py::arg("coeff"));

    m.def(
        "solve_consumption",
        [](const fbm::TimeGrid& g, double delta, double xi1, py::array_t<double> beta,
           double x0, std::shared_ptr<fbm::FbmEnsemble> noise) {
            control::ConsumptionProblem pb{g, delta, xi1, sampled_from(g, beta), x0};
            const auto sol = control::solve_consumption(pb, noise);
            py::dict d;
            d["rho_star"] = vec_array(sol.rho_star.flat_values());
            d["p"] = vec_array(sol.p.p);
            d["j"] = sol.j.j;
            d["j_std_error"] = sol.j.std_error;
            return d;
        },
        py::arg("grid"), py::arg("delta"), py::arg("xi1"), py::arg("beta"), py::arg("x0"),
        py::arg("noise"));

    m.def(
        "solve_lq_picard",
        [](const fbm::TimeGrid& g, double delta, py::array_t<double> beta1,
           py::array_t<double> beta2, double x0, std::shared_ptr<fbm::FbmEnsemble> noise,
           double damping, double tol, int max_iter) {
            control::LqProblem pb{g, delta, sampled_from(g, beta1), sampled_from(g, beta2),
                                  x0};
            control::PicardConfig pc;
            pc.damping = damping;
            pc.tol = tol;
            pc.max_iter = max_iter;
            const auto sol = control::solve_lq_picard(pb, noise, pc);
            py::dict d;
            d["iterations"] = sol.iterations;
            d["j"] = sol.j.j;
            d["j_std_error"] = sol.j.std_error;
            d["first_order_residual"] = sol.first_order_residual;
            d["regression_noise_floor"] = sol.regression_noise_floor;
            return d;
        },
        py::arg("grid"), py::arg("delta"), py::arg("beta1"), py::arg("beta2"), py::arg("x0"),
        py::arg("noise"), py::arg("damping") = 0.5, py::arg("tol") = 1e-3,
        py::arg("max_iter") = 25);
}
