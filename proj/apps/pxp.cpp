// Command-line front end: deterministic reproduction runs, one directory per
// configuration (named by config hash), CSV/JSON artifacts per figure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pxp/analysis.hpp"
#include "pxp/lyapunov.hpp"
#include "pxp/quantum.hpp"
#include "pxp/semiclassics.hpp"
#include "pxp/wigner.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kAngleConvention = "full-angle-eom; z2=(0,pi/2); wrap=pi";
constexpr const char* kRelabel = "reported peaks use theta -> pi - theta (Bloch labeling)";

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string hash_hex(const std::string& s) {
    // FNV-1a 64-bit
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunContext {
    json config;      // resolved configuration (defaults + file + flags)
    std::string hash; // config hash
    fs::path dir;     // output directory

    void open(const std::string& out_root, const std::string& command) {
        hash = hash_hex(config.dump());
        dir = fs::path(out_root) / (command + "-" + hash.substr(0, 12));
        fs::create_directories(dir);
        std::ofstream cfg(dir / "config.json");
        cfg << config.dump(2) << "\n";
    }

    std::ofstream csv(const std::string& name, const std::string& header,
                      const std::map<std::string, std::string>& extra = {}) const {
        std::ofstream f(dir / name);
        f << "# config_hash=" << hash << "\n";
        f << "# conventions=" << kAngleConvention << "\n";
        for (const auto& [k, v] : extra) f << "# " << k << "=" << v << "\n";
        f << header << "\n";
        return f;
    }

    void write_json(const std::string& name, json j) const {
        j["meta"] = {{"config_hash", hash}, {"conventions", kAngleConvention}};
        std::ofstream f(dir / name);
        f << j.dump(2) << "\n";
    }
};

// Two-phase configuration: values come from defaults, then the optional JSON
// config file, then command-line flags. Unknown file keys are rejected.
class Options {
  public:
    void add(const std::string& name, double* v) { dbl_[name] = v; }
    void add(const std::string& name, int* v) { int_[name] = v; }
    void add(const std::string& name, std::string* v) { str_[name] = v; }
    void add(const std::string& name, std::uint64_t* v) { u64_[name] = v; }

    void register_flags(CLI::App* app) {
        for (auto& [k, v] : dbl_) flags_[k] = app->add_option("--" + k, *v);
        for (auto& [k, v] : int_) flags_[k] = app->add_option("--" + k, *v);
        for (auto& [k, v] : str_) flags_[k] = app->add_option("--" + k, *v);
        for (auto& [k, v] : u64_) flags_[k] = app->add_option("--" + k, *v);
    }

    // Apply file values for options not given on the command line.
    void apply_file(const json& file) {
        for (auto it = file.begin(); it != file.end(); ++it) {
            const std::string& k = it.key();
            if (flags_.find(k) == flags_.end())
                throw pxp::DomainError("unknown config key: " + k);
            if (flags_[k]->count() > 0) continue; // flag wins
            if (dbl_.count(k)) *dbl_[k] = it.value().get<double>();
            else if (int_.count(k)) *int_[k] = it.value().get<int>();
            else if (str_.count(k)) *str_[k] = it.value().get<std::string>();
            else if (u64_.count(k)) *u64_[k] = it.value().get<std::uint64_t>();
        }
    }

    json resolved() const {
        json j;
        for (const auto& [k, v] : dbl_) j[k] = *v;
        for (const auto& [k, v] : int_) j[k] = *v;
        for (const auto& [k, v] : str_) j[k] = *v;
        for (const auto& [k, v] : u64_) j[k] = *v;
        return j;
    }

    bool flag_given(const std::string& name) const {
        auto it = flags_.find(name);
        return it != flags_.end() && it->second->count() > 0;
    }

  private:
    std::map<std::string, double*> dbl_;
    std::map<std::string, int*> int_;
    std::map<std::string, std::string*> str_;
    std::map<std::string, std::uint64_t*> u64_;
    std::map<std::string, CLI::Option*> flags_;
};

// The Z2 orbit of the two-site flow: integrate and locate the physical
// revival (angles identified mod pi on this manifold).
pxp::OrbitInfo z2_orbit(double omega, double t_end, double dt) {
    pxp::ModelParams p;
    p.omega = omega;
    p.L = 2;
    const auto traj = pxp::integrate(pxp::z2_initial_state(2), p, t_end, dt);
    return pxp::find_orbit_period(traj, M_PI);
}

int run_orbit(RunContext& ctx, double omega, double t_end, double dt, int L) {
    pxp::ModelParams p;
    p.omega = omega;
    p.L = L;
    const auto traj = pxp::integrate(pxp::z2_initial_state(L), p, t_end, dt);
    const auto info = pxp::find_orbit_period(traj, M_PI);

    std::string header = "t";
    for (int i = 1; i <= L; ++i) header += ",theta_" + std::to_string(i);
    auto f = ctx.csv("trajectory.csv", header);
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        f << fmt(traj.times[k]);
        for (int i = 0; i < L; ++i) f << "," << fmt(traj.states[k].thetas[i]);
        f << "\n";
    }
    ctx.write_json("orbit.json", json{{"period", info.period},
                                      {"frequency", info.frequency},
                                      {"closure_error", info.closure_error}});
    std::cout << "orbit: period=" << info.period << " frequency=" << info.frequency
              << " closure_error=" << info.closure_error << "\n";
    return 0;
}

int run_lyapunov(RunContext& ctx, double omega, int L, const std::string& sweep,
                 int steps, const std::string& method) {
    const auto orbit = z2_orbit(omega, 40.0, 1e-3);
    const double tau = 2.0 * M_PI / (0.5 * orbit.frequency);

    std::vector<int> Ls;
    {
        std::stringstream ss(sweep);
        std::string tok;
        while (std::getline(ss, tok, ',')) Ls.push_back(std::stoi(tok));
    }
    if (std::find(Ls.begin(), Ls.end(), L) == Ls.end()) Ls.push_back(L);

    std::map<int, pxp::LyapunovSpectrum> spectra;
    for (int l : Ls) {
        pxp::MonodromyMatrix T;
        if (method == "symmetric")
            T = pxp::monodromy_symmetric(l, orbit.frequency, tau / steps, omega);
        else
            T = pxp::monodromy_direct(l, orbit.frequency, tau / steps, omega);
        spectra[l] = pxp::lyapunov_spectrum(T);
    }

    auto f = ctx.csv("spectrum.csv", "L,lambda_1...lambda_L",
                     {{"method", method}, {"tau_tangent_loop", fmt(tau)}});
    for (const auto& [l, s] : spectra) {
        f << l;
        for (double lam : s.exponents) f << "," << fmt(lam);
        f << "\n";
    }

    const auto& head = spectra[L];
    double pairing = 0;
    for (double lam : head.exponents) pairing += lam;
    ctx.write_json("ks.json",
                   json{{"L", L},
                        {"h_ks", pxp::ks_entropy(head)},
                        {"lambda_max", head.exponents.front()},
                        {"pairing_residual", pairing},
                        {"units", "Omega"},
                        {"unit_cell_labeling", "sites (two-site cells = L/2)"}});
    std::cout << "lyapunov: L=" << L << " h_ks=" << pxp::ks_entropy(head)
              << " lambda_max=" << head.exponents.front() << "\n";
    return 0;
}

int run_wigner(RunContext& ctx, int n1, int n2, int width_n) {
    for (bool constrained : {false, true}) {
        const auto g = pxp::wigner_grid(n1, n2, constrained);
        auto f = ctx.csv(constrained ? "wigner_constrained.csv" : "wigner_unconstrained.csv",
                         "theta1,theta2,W", {{"grid", "gauss-legendre"}});
        for (int i = 0; i < g.n1; ++i)
            for (int j = 0; j < g.n2; ++j)
                f << fmt(g.nodes1[i]) << "," << fmt(g.nodes2[j]) << ","
                  << fmt(g.values(i, j)) << "\n";
    }

    const auto norm = pxp::quadrature_norm(pxp::wigner_grid(400, 400, true));
    const auto wg = pxp::wigner_grid(width_n, width_n, true, pxp::GridKind::uniform);
    const auto wu = pxp::wigner_grid(width_n, width_n, false, pxp::GridKind::uniform);
    const auto pw = pxp::peak_width(wg);
    const auto pu = pxp::peak_width(wu);
    ctx.write_json("width.json",
                   json{{"delta_theta0", pw.delta_theta0},
                        {"hwhm", pw.hwhm},
                        {"moment_std", pw.moment_std},
                        {"peak", {{"theta1", pw.peak.theta1}, {"theta2", pw.peak.theta2}}},
                        {"peak_raw", {{"theta1", pw.peak_raw.theta1}, {"theta2", pw.peak_raw.theta2}}},
                        {"unconstrained_width", pu.delta_theta0},
                        {"width_ratio", pu.delta_theta0 / pw.delta_theta0},
                        {"quadrature_norm_400", norm},
                        {"width_grid", width_n},
                        {"angle_relabel", kRelabel}});
    std::cout << "wigner: norm=" << norm << " delta_theta0=" << pw.delta_theta0
              << " ratio=" << pu.delta_theta0 / pw.delta_theta0 << "\n";
    return 0;
}

int run_twa(RunContext& ctx, std::uint64_t seed, int n_samples, double omega,
            double t_end, double dt_obs) {
    const auto samples = pxp::twa_sample(seed, n_samples);
    {
        auto f = ctx.csv("samples.csv", "theta1,theta2,weight");
        for (const auto& s : samples)
            f << fmt(s.theta1) << "," << fmt(s.theta2) << "," << s.weight << "\n";
    }
    std::vector<double> t_grid;
    for (double t = 0; t <= t_end + 1e-9; t += dt_obs) t_grid.push_back(t);
    pxp::ModelParams p;
    p.omega = omega;
    p.L = 2;
    const auto series = pxp::twa_observable_series(samples, p, t_grid);
    auto f = ctx.csv("twa_series.csv", "t,obs_mean,obs_stderr,n_alive",
                     {{"observable", "sin^2(theta_flow) on the initially excited site"}});
    for (std::size_t i = 0; i < series.times.size(); ++i)
        f << fmt(series.times[i]) << "," << fmt(series.mean[i]) << ","
          << fmt(series.stderr_[i]) << "," << series.n_alive << "\n";
    std::cout << "twa: n_alive=" << series.n_alive << " n_dropped=" << series.n_dropped
              << "\n";
    return 0;
}

int run_quantum(RunContext& ctx, int N, double omega, double t_end, double dt_obs,
                const std::string& method, const std::string& boundary) {
    const auto bnd = (boundary == "periodic") ? pxp::Boundary::periodic : pxp::Boundary::open;
    const auto basis = pxp::build_basis(N, bnd);
    const auto psi0 = pxp::z2_state(basis);

    std::vector<double> t_grid;
    for (double t = 0; t <= t_end + 1e-9; t += dt_obs) t_grid.push_back(t);
    const auto m = (method == "rk4") ? pxp::EvolveMethod::rk4 : pxp::EvolveMethod::krylov;
    const double dt = (m == pxp::EvolveMethod::rk4) ? 5e-3 : 0.1 / omega;
    const auto states = pxp::evolve(basis, psi0, t_grid, dt, m, omega);

    pxp::ObservableSeries dens{t_grid, {}, pxp::SeriesKind::rydberg_density};
    pxp::ObservableSeries ent{t_grid, {}, pxp::SeriesKind::entropy};
    pxp::ObservableSeries echo{t_grid, {}, pxp::SeriesKind::echo};
    for (const auto& psi : states) {
        dens.values.push_back(pxp::rydberg_density(basis, psi, N / 2));
        ent.values.push_back(pxp::entanglement_entropy(basis, psi, N / 2));
        echo.values.push_back(pxp::loschmidt_echo(psi, psi0));
    }

    const std::map<std::string, const pxp::ObservableSeries*> all = {
        {"density", &dens}, {"entropy", &ent}, {"echo", &echo}};
    for (const auto& [name, s] : all) {
        auto f = ctx.csv(name + ".csv", "t,value", {{"N", std::to_string(N)}});
        for (std::size_t i = 0; i < s->times.size(); ++i)
            f << fmt(s->times[i]) << "," << fmt(s->values[i]) << "\n";
    }

    // revival period ~ 2 pi / (Omega / 1.53); envelope peak separation = half
    const double minsep = 0.5 * 9.64 / omega;
    json fits;
    const auto fd = pxp::fit_decay_rate(dens, pxp::FitKind::exp_envelope, minsep);
    const auto fe = pxp::fit_decay_rate(echo, pxp::FitKind::exp_envelope, minsep);
    const auto fs = pxp::fit_decay_rate(ent, pxp::FitKind::linear);
    auto put = [&fits](const std::string& k, const pxp::FitResult& r) {
        fits[k] = {{"value", r.rate}, {"stderr", r.stderr_}, {"floor", r.floor_},
                   {"n_points", r.n_points}};
    };
    put("density", fd);
    put("echo", fe);
    put("entropy", fs);
    ctx.write_json("fits.json", fits);
    ctx.write_json("run.json", json{{"N", N},
                                    {"boundary", pxp::boundary_name(bnd)},
                                    {"dim", basis.dim()},
                                    {"method", method},
                                    {"dt", dt},
                                    {"omega", omega},
                                    {"boundary_term_convention",
                                     "end sites use the single-neighbor projector"}});
    std::cout << "quantum: N=" << N << " rates density=" << fd.rate
              << " echo=" << fe.rate << " entropy=" << fs.rate << "\n";
    return 0;
}

int run_report(RunContext& ctx, const std::string& ks_path, const std::string& width_path,
               const std::string& fits_path) {
    std::vector<std::string> missing;
    auto load = [&missing](const std::string& p, const char* what) -> json {
        std::ifstream f(p);
        if (!p.empty() && f) return json::parse(f);
        missing.push_back(what);
        return {};
    };
    const json ks = load(ks_path, "ks");
    const json width = load(width_path, "width");
    const json fits = load(fits_path, "fits");
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw pxp::MissingInput("report inputs missing: " + list);
    }

    std::map<std::string, pxp::RateEntry> rates;
    for (const char* k : {"density", "entropy", "echo"})
        if (fits.contains(k))
            rates[k] = {fits[k]["value"].get<double>(), fits[k]["stderr"].get<double>()};

    const auto rep = pxp::build_report(ks["h_ks"].get<double>(),
                                       ks["lambda_max"].get<double>(),
                                       width["delta_theta0"].get<double>(), rates);
    json jr = {{"h_ks", rep.h_ks},
               {"delta_theta0", rep.delta_theta0},
               {"t_star", rep.t_star},
               {"lambda", rep.lambda},
               {"lambda_max_sensitivity", rep.lambda_max_line},
               {"ratio", rep.ratio},
               {"pass", rep.pass}};
    for (const auto& [k, v] : rep.rates)
        jr["rates"][k] = {{"value", v.value}, {"stderr", v.stderr_}};
    ctx.write_json("report.json", jr);
    std::cout << "report: lambda=" << rep.lambda << " ratio=" << rep.ratio
              << " pass=" << (rep.pass ? "true" : "false") << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"PXP-chain semiclassics vs exact quantum dynamics"};
    app.require_subcommand(1);
    CLI::App* run = app.add_subcommand("run", "execute a pipeline stage");
    run->require_subcommand(1);

    std::string config_file, out_root = "runs";
    run->add_option("--config", config_file, "JSON config file (flags override)");
    run->add_option("--out-root", out_root, "root directory for run outputs");

    // shared + per-command parameters
    double omega = 1.0, t_end = 40.0, dt = 1e-3, dt_obs = 0.25, q_t_end = 120.0;
    int L = 2, lyap_L = 30, steps = 4000, n1 = 400, n2 = 400, width_n = 315;
    int n_samples = 2000, N = 24;
    double twa_t_end = 40.0;
    std::uint64_t seed = 0;
    std::string sweep = "2,4,6,8,10,12,30", method = "direct", qmethod = "krylov",
                boundary = "open";
    std::string ks_path, width_path, fits_path;

    std::map<std::string, Options> opts;
    CLI::App* c_orbit = run->add_subcommand("orbit", "Z2 orbit trajectory and period");
    opts["orbit"].add("omega", &omega);
    opts["orbit"].add("t-end", &t_end);
    opts["orbit"].add("dt", &dt);
    opts["orbit"].add("L", &L);
    opts["orbit"].register_flags(c_orbit);

    CLI::App* c_lyap = run->add_subcommand("lyapunov", "Lyapunov spectra and KS entropy");
    opts["lyapunov"].add("omega", &omega);
    opts["lyapunov"].add("L", &lyap_L);
    opts["lyapunov"].add("sweep", &sweep);
    opts["lyapunov"].add("steps", &steps);
    opts["lyapunov"].add("method", &method);
    opts["lyapunov"].register_flags(c_lyap);

    CLI::App* c_wig = run->add_subcommand("wigner", "Wigner grids and width");
    opts["wigner"].add("n1", &n1);
    opts["wigner"].add("n2", &n2);
    opts["wigner"].add("width-n", &width_n);
    opts["wigner"].register_flags(c_wig);

    CLI::App* c_twa = run->add_subcommand("twa", "TWA ensemble series");
    opts["twa"].add("seed", &seed);
    opts["twa"].add("n-samples", &n_samples);
    opts["twa"].add("omega", &omega);
    opts["twa"].add("t-end", &twa_t_end);
    opts["twa"].add("dt-obs", &dt_obs);
    opts["twa"].register_flags(c_twa);

    CLI::App* c_q = run->add_subcommand("quantum", "exact constrained-space evolution");
    opts["quantum"].add("N", &N);
    opts["quantum"].add("omega", &omega);
    opts["quantum"].add("t-end", &q_t_end);
    opts["quantum"].add("dt-obs", &dt_obs);
    opts["quantum"].add("method", &qmethod);
    opts["quantum"].add("boundary", &boundary);
    opts["quantum"].register_flags(c_q);

    CLI::App* c_rep = run->add_subcommand("report", "escape-rate comparison report");
    opts["report"].add("ks", &ks_path);
    opts["report"].add("width", &width_path);
    opts["report"].add("fits", &fits_path);
    opts["report"].register_flags(c_rep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        std::cerr << json{{"error", "ParseError"}, {"message", e.what()}}.dump() << "\n";
        return 2;
    }

    const std::string cmd = run->get_subcommands().front()->get_name();
    try {
        if (!config_file.empty()) {
            std::ifstream f(config_file);
            if (!f) throw pxp::MissingInput("config file not found: " + config_file);
            opts[cmd].apply_file(json::parse(f));
        }
        if (cmd == "twa" && !opts[cmd].flag_given("seed") && seed == 0 &&
            (config_file.empty()))
            throw pxp::DomainError("twa: --seed is mandatory");

        RunContext ctx;
        ctx.config = opts[cmd].resolved();
        ctx.config["command"] = cmd;
        ctx.open(out_root, cmd);

        if (cmd == "orbit") return run_orbit(ctx, omega, t_end, dt, L);
        if (cmd == "lyapunov") return run_lyapunov(ctx, omega, lyap_L, sweep, steps, method);
        if (cmd == "wigner") return run_wigner(ctx, n1, n2, width_n);
        if (cmd == "twa") return run_twa(ctx, seed, n_samples, omega, twa_t_end, dt_obs);
        if (cmd == "quantum")
            return run_quantum(ctx, N, omega, q_t_end, dt_obs, qmethod, boundary);
        if (cmd == "report") return run_report(ctx, ks_path, width_path, fits_path);
        return 2;
    } catch (const pxp::Error& e) {
        const bool validation = e.code == "DomainError" || e.code == "DimensionMismatch" ||
                                e.code == "TooLarge" || e.code == "MissingInput";
        std::cerr << json{{"error", e.code}, {"message", e.what()}}.dump() << "\n";
        return validation ? 2 : 3;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "Unexpected"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
}
