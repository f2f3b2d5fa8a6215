#include "fbmctrl/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "fbmctrl/adjoint.hpp"
#include "fbmctrl/control.hpp"
#include "fbmctrl/fbm.hpp"
#include "fbmctrl/fcalc.hpp"
#include "fbmctrl/numerics.hpp"
#include "fbmctrl/sdde.hpp"
#include "fbmctrl/version.hpp"

namespace fbmctrl::cli {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (...) {
        throw ConfigError("config: bad numeric value for '" + key + "': " + v);
    }
    if (pos != v.size()) throw ConfigError("config: trailing junk in value for '" + key + "'");
    return x;
}

long to_long(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x != std::floor(x)) throw ConfigError("config: '" + key + "' must be an integer");
    return static_cast<long>(x);
}

void assign(ScenarioConfig& c, const std::string& key, const std::string& val) {
    if (key == "scenario") c.scenario = val;
    else if (key == "h") c.h = to_double(key, val);
    else if (key == "t_end") c.t_end = to_double(key, val);
    else if (key == "delta") c.delta = to_double(key, val);
    else if (key == "n_steps_per_delay") c.n_steps_per_delay = static_cast<int>(to_long(key, val));
    else if (key == "n_paths") c.n_paths = to_long(key, val);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_long(key, val));
    else if (key == "xi1") c.xi1 = to_double(key, val);
    else if (key == "x0") c.x0 = to_double(key, val);
    else if (key == "beta") c.beta = val;
    else if (key == "beta1") c.beta1 = val;
    else if (key == "beta2") c.beta2 = val;
    else if (key == "picard_damping") c.picard_damping = to_double(key, val);
    else if (key == "picard_tol") c.picard_tol = to_double(key, val);
    else if (key == "picard_max_iter") c.picard_max_iter = static_cast<int>(to_long(key, val));
    else if (key == "lsmc_degree") c.lsmc_degree = static_cast<int>(to_long(key, val));
    else if (key == "lsmc_ridge") c.lsmc_ridge = to_double(key, val);
    else if (key == "dump_paths") c.dump_paths = static_cast<int>(to_long(key, val));
    else throw ConfigError("config: unknown key '" + key + "'");
}

// "const:<v>" or plain number, and "ramp:<v>" meaning v * t / T
fcalc::SampledFunction parse_coefficient(const std::string& key, const std::string& spec,
                                         const fbm::TimeGrid& grid) {
    std::string s = trim(spec);
    if (s.rfind("const:", 0) == 0)
        return fcalc::SampledFunction::constant(grid, to_double(key, s.substr(6)));
    if (s.rfind("ramp:", 0) == 0) {
        const double v = to_double(key, s.substr(5));
        const double t_end = grid.t_end;
        return fcalc::SampledFunction::from(grid,
                                            [v, t_end](double t) { return v * t / t_end; });
    }
    return fcalc::SampledFunction::constant(grid, to_double(key, s));
}

}  // namespace

ScenarioConfig ScenarioConfig::parse_text(const std::string& text) {
    ScenarioConfig c;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected 'key = value' at line " + std::to_string(line_no));
        assign(c, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return c;
}

ScenarioConfig ScenarioConfig::parse_json(const nlohmann::json& j) {
    ScenarioConfig c;
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.value().is_string())
            assign(c, it.key(), it.value().get<std::string>());
        else if (it.value().is_number() || it.value().is_boolean()) {
            std::ostringstream os;
            os.precision(17);
            os << it.value();
            assign(c, it.key(), os.str());
        } else
            throw ConfigError("config: unsupported JSON value for key '" + it.key() + "'");
    }
    return c;
}

ScenarioConfig ScenarioConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const std::exception& e) {
            throw ConfigError(std::string("config: JSON parse failure: ") + e.what());
        }
        return parse_json(j);
    }
    return parse_text(text);
}

int ScenarioConfig::n_steps() const {
    const double dt = delta / n_steps_per_delay;
    const double steps = t_end / dt;
    return static_cast<int>(std::lround(steps));
}

void ScenarioConfig::validate() const {
    static const std::set<std::string> known{"fbm-stats", "isometry", "consumption", "lq",
                                             "verify"};
    if (!known.count(scenario))
        throw ConfigError("config: scenario must be one of fbm-stats|isometry|consumption|lq|verify");
    if (!(h > 0.5) || !(h < 1.0)) throw ConfigError("config: require 0.5 < h < 1");
    if (!(t_end > 0.0)) throw ConfigError("config: t_end must be positive");
    if (!(delta > 0.0)) throw ConfigError("config: delta must be positive");
    if (n_steps_per_delay < 1) throw ConfigError("config: n_steps_per_delay must be >= 1");
    if (n_paths < 1) throw ConfigError("config: n_paths must be >= 1");
    const double dt = delta / n_steps_per_delay;
    if (std::abs(n_steps() * dt - t_end) > 1e-9 * std::max(1.0, t_end))
        throw ConfigError("config: t_end must be an integer multiple of delta/n_steps_per_delay");
    if (scenario == "consumption" && !(xi1 > 0.0))
        throw ConfigError("config: xi1 must be positive for the consumption scenario");
    if (!(picard_damping > 0.0) || picard_damping > 1.0)
        throw ConfigError("config: picard_damping must lie in (0, 1]");
    if (!(picard_tol > 0.0)) throw ConfigError("config: picard_tol must be positive");
    if (picard_max_iter < 1) throw ConfigError("config: picard_max_iter must be >= 1");
    if (lsmc_degree < 1 || lsmc_degree > 4)
        throw ConfigError("config: lsmc_degree must lie in [1, 4]");
    if (lsmc_ridge < 0.0) throw ConfigError("config: lsmc_ridge must be nonnegative");
    if (dump_paths < 0) throw ConfigError("config: dump_paths must be nonnegative");
    if (scenario == "lq" || scenario == "verify") {
        if (n_paths < 10L * adjoint::basis_dimension(lsmc_degree))
            throw ConfigError("config: n_paths must be >= 10 x LSMC basis dimension");
    }
}

std::string ScenarioConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "scenario=" << scenario << '\n'
       << "h=" << h << '\n'
       << "t_end=" << t_end << '\n'
       << "delta=" << delta << '\n'
       << "n_steps_per_delay=" << n_steps_per_delay << '\n'
       << "n_paths=" << n_paths << '\n'
       << "seed=" << seed << '\n'
       << "xi1=" << xi1 << '\n'
       << "x0=" << x0 << '\n'
       << "beta=" << beta << '\n'
       << "beta1=" << beta1 << '\n'
       << "beta2=" << beta2 << '\n'
       << "picard_damping=" << picard_damping << '\n'
       << "picard_tol=" << picard_tol << '\n'
       << "picard_max_iter=" << picard_max_iter << '\n'
       << "lsmc_degree=" << lsmc_degree << '\n'
       << "lsmc_ridge=" << lsmc_ridge << '\n'
       << "dump_paths=" << dump_paths << '\n';
    return os.str();
}

std::uint64_t ScenarioConfig::hash() const {
    std::uint64_t h64 = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h64 ^= c;
        h64 *= 0x100000001b3ULL;
    }
    return h64;
}

namespace {

struct Gate {
    std::string name;
    bool pass;
    nlohmann::ordered_json detail;
};

struct Outputs {
    std::filesystem::path dir;
    std::string header;
    std::vector<Gate> gates;
    nlohmann::ordered_json payload = nlohmann::ordered_json::object();

    void add_gate(const std::string& name, bool pass, nlohmann::ordered_json detail = {}) {
        gates.push_back({name, pass, std::move(detail)});
    }
    bool all_pass() const {
        for (const auto& g : gates)
            if (!g.pass) return false;
        return true;
    }

    std::ofstream open_csv(const std::string& name) const {
        std::ofstream os(dir / name, std::ios::binary);
        os << header;
        return os;
    }
};

std::string hex64(std::uint64_t x) {
    std::ostringstream os;
    os << "0x" << std::hex << x;
    return os.str();
}

void write_report(const ScenarioConfig& cfg, Outputs& out) {
    nlohmann::ordered_json gates = nlohmann::ordered_json::array();
    for (const auto& g : out.gates) {
        nlohmann::ordered_json item{{"name", g.name}, {"pass", g.pass}};
        if (!g.detail.is_null()) item["detail"] = g.detail;
        gates.push_back(std::move(item));
    }
    nlohmann::ordered_json rep{{"tool", "fbmctrl"},
                               {"version", FBMCTRL_VERSION},
                               {"config_hash", hex64(cfg.hash())},
                               {"scenario", cfg.scenario},
                               {"pass", out.all_pass()},
                               {"gates", gates}};
    for (auto it = out.payload.begin(); it != out.payload.end(); ++it) rep[it.key()] = it.value();
    std::ofstream os(out.dir / "report.json", std::ios::binary);
    os << rep.dump(2) << '\n';
}

// max |z| over all pairs of interior nodes, against the exact covariance
nlohmann::ordered_json covariance_zscan(const fbm::FbmEnsemble& ens, double& max_abs_z) {
    const int n = ens.grid.n_steps;
    const int big_n = ens.n_paths;
    max_abs_z = 0.0;
    int wi = 0, wj = 0;
    for (int i = 1; i <= n; ++i) {
        for (int j = i; j <= n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < big_n; ++p)
                acc += ens.value(p, i) * ens.value(p, j);
            const double est = acc / big_n;
            const double cov = fbm::covariance(ens.grid.node(i), ens.grid.node(j), ens.h);
            const double vi = fbm::covariance(ens.grid.node(i), ens.grid.node(i), ens.h);
            const double vj = fbm::covariance(ens.grid.node(j), ens.grid.node(j), ens.h);
            const double se = std::sqrt((vi * vj + cov * cov) / big_n);
            const double z = (est - cov) / se;
            if (std::abs(z) > max_abs_z) {
                max_abs_z = std::abs(z);
                wi = i;
                wj = j;
            }
        }
    }
    return nlohmann::ordered_json{{"max_abs_z", max_abs_z}, {"node_i", wi}, {"node_j", wj}};
}

void run_fbm_stats(const ScenarioConfig& cfg, Outputs& out) {
    const fbm::TimeGrid grid(cfg.t_end, cfg.n_steps());
    const fbm::HurstParam h(cfg.h);

    const auto chol = fbm::sample_cholesky(grid, h, static_cast<int>(cfg.n_paths), cfg.seed);
    double zc = 0.0;
    auto detail_c = covariance_zscan(chol, zc);
    out.add_gate("cholesky_covariance_4sigma", zc <= 4.0, detail_c);

    // factor reconstruction, closed form (no sampling)
    {
        const int n = grid.n_steps;
        const auto cov = fbm::covariance_matrix(grid, h);
        const auto low = fbm::cholesky_lower(cov, n);
        double worst = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j <= i; ++j) {
                double s = 0.0;
                for (int k = 0; k <= j; ++k)
                    s += low[static_cast<std::size_t>(i) * n + k] *
                         low[static_cast<std::size_t>(j) * n + k];
                const double ref = cov[static_cast<std::size_t>(i) * n + j];
                worst = std::max(worst, std::abs(s - ref) / std::max(std::abs(ref), 1e-300));
            }
        out.add_gate("cholesky_factor_reconstruction_1e-10", worst <= 1e-10,
                     nlohmann::ordered_json{{"max_rel_error", worst}});
    }

    const auto circ = fbm::sample_circulant(grid, h, static_cast<int>(cfg.n_paths), cfg.seed);
    double zv = 0.0;
    auto detail_v = covariance_zscan(circ, zv);
    out.add_gate("circulant_covariance_4sigma", zv <= 4.0, detail_v);

    if (cfg.dump_paths > 0) {
        fbm::FbmEnsemble head = chol;
        head.n_paths = std::min(cfg.dump_paths, chol.n_paths);
        head.values.resize(static_cast<std::size_t>(head.n_paths) * grid.n_nodes());
        auto os = out.open_csv("paths.csv");
        head.dump_csv(os);
    }
}

void run_isometry(const ScenarioConfig& cfg, Outputs& out) {
    const fbm::TimeGrid grid(cfg.t_end, cfg.n_steps());
    const fbm::HurstParam h(cfg.h);
    const auto ens = fbm::sample_cholesky(grid, h, static_cast<int>(cfg.n_paths), cfg.seed);
    const double t_end = cfg.t_end;

    const auto one = fcalc::SampledFunction::constant(grid, 1.0);
    const auto ramp = fcalc::SampledFunction::from(grid, [](double t) { return t; });
    const auto half = fcalc::SampledFunction::from(
        grid, [t_end](double t) { return t < 0.5 * t_end ? 1.0 : 0.0; });
    const auto other_half = fcalc::SampledFunction::from(
        grid, [t_end](double t) { return t < 0.5 * t_end ? 0.0 : 1.0; });

    nlohmann::ordered_json checks = nlohmann::ordered_json::array();
    auto push = [&](const std::string& name, const fcalc::CheckReport& r) {
        auto j = r.to_json();
        j["name"] = name;
        checks.push_back(j);
        out.add_gate(name, r.pass, r.to_json());
    };
    push("isometry_const", fcalc::check_isometry(one, ens, 4.0));
    push("isometry_ramp", fcalc::check_isometry(ramp, ens, 4.0));
    push("isometry_half_indicator", fcalc::check_isometry(half, ens, 4.0));
    push("ibp_equal", fcalc::check_ibp_deterministic(one, one, ens, 4.0));
    push("ibp_disjoint", fcalc::check_ibp_deterministic(half, other_half, ens, 4.0));
    out.payload["checks"] = checks;
}

void run_consumption(const ScenarioConfig& cfg, Outputs& out) {
    const fbm::TimeGrid grid(cfg.t_end, cfg.n_steps());
    const fbm::HurstParam h(cfg.h);
    auto noise = std::make_shared<const fbm::FbmEnsemble>(
        fbm::sample_cholesky(grid, h, static_cast<int>(cfg.n_paths), cfg.seed));

    control::ConsumptionProblem pb{grid, cfg.delta, cfg.xi1,
                                   parse_coefficient("beta", cfg.beta, grid), cfg.x0};
    const auto sol = control::solve_consumption(pb, noise);

    // first-order identity 1/rho* - p = 0
    double worst_foc = 0.0;
    for (int k = 0; k < grid.n_nodes(); ++k)
        worst_foc = std::max(
            worst_foc, std::abs(1.0 / sol.rho_star.flat_values()[k] - sol.p.p[k]));
    out.add_gate("consumption_first_order_identity_1e-12", worst_foc <= 1e-12,
                 nlohmann::ordered_json{{"max_abs_residual", worst_foc}});

    double min_p = 1e308;
    for (double v : sol.p.p) min_p = std::min(min_p, v);
    out.add_gate("adjoint_positivity", min_p > 0.0,
                 nlohmann::ordered_json{{"min_p", min_p}});

    const auto fam = control::default_family(grid);
    std::vector<std::pair<std::string, sdde::ControlPolicy>> candidates;
    for (const auto& [name, v] : fam.directions)
        candidates.emplace_back(name, sol.rho_star.perturbed(v, 0.1));
    const auto nec =
        control::verify_necessary(sol.dynamics, sol.cost, sol.rho_star, sol.p, candidates, noise);
    out.add_gate("necessary_condition", nec.pass, nec.to_json()["gradients"]);

    const auto dom = control::verify_dominance(sol.dynamics, sol.cost, sol.rho_star, fam, noise);
    out.add_gate("dominance", dom.pass);

    out.payload["j"] = sol.j.to_json();
    out.payload["rho_star_at_0"] = sol.rho_star.flat_values().front();
    out.payload["p_at_0"] = sol.p.p.front();

    {
        auto os = out.open_csv("p.csv");
        sol.p.dump_csv(os);
    }
    {
        auto os = out.open_csv("control.csv");
        os << "t,u\n";
        std::ostringstream buf;
        buf.precision(17);
        for (int k = 0; k < grid.n_nodes(); ++k)
            buf << grid.node(k) << ',' << sol.rho_star.flat_values()[k] << '\n';
        os << buf.str();
    }
    {
        const auto paths = sdde::simulate(sol.dynamics, sol.rho_star, noise);
        auto os = out.open_csv("state_moments.csv");
        paths.dump_moments_csv(os);
    }
    {
        auto os = out.open_csv("dominance.csv");
        dom.dump_dominance_csv(os);
    }
}

void run_lq(const ScenarioConfig& cfg, Outputs& out) {
    const fbm::TimeGrid grid(cfg.t_end, cfg.n_steps());
    const fbm::HurstParam h(cfg.h);
    auto noise = std::make_shared<const fbm::FbmEnsemble>(
        fbm::sample_cholesky(grid, h, static_cast<int>(cfg.n_paths), cfg.seed));

    control::LqProblem pb{grid, cfg.delta, parse_coefficient("beta1", cfg.beta1, grid),
                          parse_coefficient("beta2", cfg.beta2, grid), cfg.x0};
    control::PicardConfig pc;
    pc.damping = cfg.picard_damping;
    pc.tol = cfg.picard_tol;
    pc.max_iter = cfg.picard_max_iter;
    pc.basis = {cfg.lsmc_degree, cfg.lsmc_ridge};

    const auto sol = control::solve_lq_picard(pb, noise, pc);
    out.add_gate("picard_converged", sol.iterations <= pc.max_iter,
                 nlohmann::ordered_json{{"iterations", sol.iterations}});
    out.add_gate(
        "lq_first_order_identity", sol.first_order_residual <= 2.0 * sol.regression_noise_floor,
        nlohmann::ordered_json{{"mean_abs_residual", sol.first_order_residual},
                               {"regression_noise_floor", sol.regression_noise_floor}});

    const auto fam = control::default_family(grid);
    const auto dom =
        control::verify_dominance(sol.dynamics, sol.cost, sol.alpha_star, fam, noise);
    out.add_gate("dominance", dom.pass);

    out.payload["j"] = sol.j.to_json();
    out.payload["iterations"] = sol.iterations;
    out.payload["first_order_residual"] = sol.first_order_residual;

    {
        auto os = out.open_csv("p.csv");
        sol.p.dump_csv(os);
    }
    {
        auto os = out.open_csv("control.csv");
        os << "particle_id,t,u\n";
        std::ostringstream buf;
        buf.precision(17);
        const auto& a = sol.alpha_star.flat_values();
        for (int i = 0; i < sol.alpha_star.n_particles(); ++i)
            for (int k = 0; k < grid.n_nodes(); ++k)
                buf << i << ',' << grid.node(k) << ','
                    << a[static_cast<std::size_t>(i) * grid.n_nodes() + k] << '\n';
        os << buf.str();
    }
    {
        const auto paths = sdde::simulate(sol.dynamics, sol.alpha_star, noise);
        auto os = out.open_csv("state_moments.csv");
        paths.dump_moments_csv(os);
    }
    {
        auto os = out.open_csv("dominance.csv");
        dom.dump_dominance_csv(os);
    }
}

void run_verify(const ScenarioConfig& cfg, Outputs& out) {
    const fbm::TimeGrid grid(cfg.t_end, cfg.n_steps());
    const fbm::HurstParam h(cfg.h);
    auto noise = std::make_shared<const fbm::FbmEnsemble>(
        fbm::sample_cholesky(grid, h, static_cast<int>(cfg.n_paths), cfg.seed));
    const auto fam = control::default_family(grid);
    std::ofstream dom_csv;

    // consumption battery
    control::ConsumptionProblem cpb{grid, cfg.delta, cfg.xi1,
                                    parse_coefficient("beta", cfg.beta, grid), cfg.x0};
    const auto cons = control::solve_consumption(cpb, noise);
    std::vector<std::pair<std::string, sdde::ControlPolicy>> candidates;
    for (const auto& [name, v] : fam.directions)
        candidates.emplace_back(name, cons.rho_star.perturbed(v, 0.1));
    const auto nec = control::verify_necessary(cons.dynamics, cons.cost, cons.rho_star, cons.p,
                                               candidates, noise);
    out.add_gate("consumption_necessary", nec.pass);
    const auto cdom =
        control::verify_dominance(cons.dynamics, cons.cost, cons.rho_star, fam, noise);
    out.add_gate("consumption_dominance", cdom.pass);
    const double thetas[] = {1e-1, 1e-2, 1e-3};
    const auto gx = control::gateaux_check(cons.dynamics, cons.cost,
                                           cons.rho_star.perturbed(fam.directions[0].second, 0.3),
                                           fam.directions[0].second, noise, thetas);
    out.add_gate("consumption_gateaux", gx.pass);

    // LQ battery
    control::LqProblem lpb{grid, cfg.delta, parse_coefficient("beta1", cfg.beta1, grid),
                           parse_coefficient("beta2", cfg.beta2, grid), 0.0};
    control::PicardConfig pc;
    pc.damping = cfg.picard_damping;
    pc.tol = cfg.picard_tol;
    pc.max_iter = cfg.picard_max_iter;
    pc.basis = {cfg.lsmc_degree, cfg.lsmc_ridge};
    const auto lq = control::solve_lq_picard(lpb, noise, pc);
    out.add_gate("lq_first_order_identity",
                 lq.first_order_residual <= 2.0 * lq.regression_noise_floor);
    const auto ldom = control::verify_dominance(lq.dynamics, lq.cost, lq.alpha_star, fam, noise);
    out.add_gate("lq_dominance", ldom.pass);

    out.payload["consumption"] = nlohmann::ordered_json{
        {"j", cons.j.to_json()}, {"necessary", nec.to_json()}, {"gateaux", gx.to_json()}};
    out.payload["lq"] =
        nlohmann::ordered_json{{"j", lq.j.to_json()},
                               {"iterations", lq.iterations},
                               {"first_order_residual", lq.first_order_residual}};

    auto os = out.open_csv("dominance.csv");
    os << "direction,theta,J,dJ,stderr,pass\n";
    std::ostringstream buf;
    buf.precision(17);
    for (const auto& r : cdom.dominance)
        buf << "cons:" << r.direction << ',' << r.theta << ',' << r.j << ',' << r.dj << ','
            << r.std_error << ',' << (r.pass ? 1 : 0) << '\n';
    for (const auto& r : ldom.dominance)
        buf << "lq:" << r.direction << ',' << r.theta << ',' << r.j << ',' << r.dj << ','
            << r.std_error << ',' << (r.pass ? 1 : 0) << '\n';
    os << buf.str();
}

}  // namespace

int run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, bool quiet) {
    cfg.validate();
    Outputs out;
    out.dir = out_dir;
    std::filesystem::create_directories(out.dir);
    {
        std::ostringstream os;
        os << "# fbmctrl " << FBMCTRL_VERSION << " scenario=" << cfg.scenario
           << " config_hash=" << hex64(cfg.hash()) << '\n';
        out.header = os.str();
    }

    if (cfg.scenario == "fbm-stats") run_fbm_stats(cfg, out);
    else if (cfg.scenario == "isometry") run_isometry(cfg, out);
    else if (cfg.scenario == "consumption") run_consumption(cfg, out);
    else if (cfg.scenario == "lq") run_lq(cfg, out);
    else run_verify(cfg, out);

    write_report(cfg, out);
    if (!quiet) {
        for (const auto& g : out.gates)
            std::cout << (g.pass ? "PASS " : "FAIL ") << g.name << '\n';
    }
    return out.all_pass() ? 0 : 1;
}

}  // namespace fbmctrl::cli
