// gapopen: command-line driver for crossings, predictions, 1D/2D band
// computations and gap scans. Each run writes into its own directory.

#include "gapopen/pipeline.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace gapopen;

namespace {

constexpr const char* kVersion = "1.0.0";

// --seed on the command line replaces the seed of the configuration file.
std::optional<unsigned long long> seed_override;

std::string utc_stamp(const char* format) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, format, &tm);
    return buf;
}

class Run {
public:
    Run(const std::string& command, const RunConfig& rc, const fs::path& out_root, json parameters)
        : command_(command), hash_(sha256_hex(rc.source_text)), started_(utc_stamp("%Y-%m-%dT%H:%M:%SZ")) {
        const std::string base = command + "-" + utc_stamp("%Y%m%dT%H%M%SZ");
        dir_ = out_root / base;
        for (int k = 1; fs::exists(dir_); ++k) dir_ = out_root / (base + "-" + std::to_string(k));
        fs::create_directories(dir_);
        std::ofstream(dir_ / "config.yaml", std::ios::binary) << rc.source_text;
        log_.open(dir_ / "log.txt");
        manifest_["config_hash"] = hash_;
        manifest_["subcommand"] = command;
        manifest_["parameters"] = std::move(parameters);
        manifest_["seed"] = seed_override.value_or(rc.seed);
        manifest_["started"] = started_;
        manifest_["tool_version"] = kVersion;
        manifest_["outputs"] = json::array({"config.yaml", "log.txt"});
    }

    const fs::path& dir() const { return dir_; }

    std::vector<std::pair<std::string, std::string>> preamble() const {
        return {{"config_hash", hash_}, {"subcommand", command_}, {"created", started_}};
    }

    CsvWriter csv(const std::string& name, const std::vector<std::string>& columns) {
        manifest_["outputs"].push_back(name);
        return CsvWriter(dir_ / name, columns, preamble());
    }

    void text(const std::string& name, const std::string& body) {
        manifest_["outputs"].push_back(name);
        std::ofstream out(dir_ / name, std::ios::binary);
        out << "# config_hash: " << hash_ << "\n" << body;
    }

    void json_file(const std::string& name, json body) {
        manifest_["outputs"].push_back(name);
        json doc;
        doc["config_hash"] = hash_;
        doc["body"] = std::move(body);
        std::ofstream(dir_ / name, std::ios::binary) << doc.dump(2) << "\n";
    }

    void log(const std::string& line) {
        log_ << line << "\n";
        log_.flush();
    }

    void finish(int exit_code) {
        manifest_["finished"] = utc_stamp("%Y-%m-%dT%H:%M:%SZ");
        manifest_["exit_code"] = exit_code;
        std::ofstream(dir_ / "manifest.json", std::ios::binary) << manifest_.dump(2) << "\n";
    }

private:
    std::string command_, hash_, started_;
    fs::path dir_;
    std::ofstream log_;
    json manifest_;
};

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

json tau2_json(const EdgeTau2& e) {
    if (e.indeterminate) return "indeterminate";
    return e.candidates;
}

RunConfig load_validated(const std::string& path) {
    RunConfig rc = load_config(path);
    rc.op = validate_config(rc.op);
    return rc;
}

// ---------------------------------------------------------------------------

int cmd_crossings(const std::string& config, const fs::path& out, int n_max_flag) {
    RunConfig rc = load_validated(config);
    const int n_max = n_max_flag >= 0 ? n_max_flag : rc.n_max;
    Run run("crossings", rc, out, {{"n_max", n_max}});
    const auto list = enumerate_crossings(rc.op.lattice, n_max);
    auto csv = run.csv("crossings.csv", {"index", "n", "m", "tau0", "E0", "boundary", "residual", "m12_plus",
                                         "m12_minus", "slope_product", "beta_l", "beta_r", "admissible"});
    for (std::size_t i = 0; i < list.size(); ++i) {
        const auto& c = list[i];
        const auto plus = assemble_M0(rc.op, c, c.tau0, rc.predictor_nodes);
        const auto minus = assemble_M0(rc.op, c, -c.tau0, rc.predictor_nodes);
        double bl = std::numeric_limits<double>::quiet_NaN(), br = bl;
        try {
            const auto g = gap_coefficients(rc.op, c, rc.predictor_nodes);
            bl = g.beta_l;
            br = g.beta_r;
        } catch (const ValidationError& e) {
            run.log("crossing " + std::to_string(i) + ": " + e.what());
        } catch (const NumericalError& e) {
            run.log("crossing " + std::to_string(i) + ": " + e.what());
        }
        const auto rep = check_conditions(c, rc.op.lattice, plus.m0, minus.m0, bl, br);
        csv.row(i, c.n, c.m, c.tau0, c.E0, c.boundary, crossing_residual(rc.op.lattice, c), rep.m12_abs_plus,
                rep.m12_abs_minus, rep.slope_product, bl, br, rep.admissible());
        std::cout << i << ": (n, m) = (" << c.n << ", " << c.m << "), tau0 = " << fmt(c.tau0) << ", E0 = " << fmt(c.E0)
                  << (rep.admissible() ? ", admissible" : ", not admissible") << "\n";
    }
    run.finish(0);
    std::cout << "run directory: " << run.dir().string() << "\n";
    return 0;
}

int cmd_predict(const std::string& config, const fs::path& out, int index_flag) {
    RunConfig rc = load_validated(config);
    if (index_flag >= 0) rc.crossing_index = index_flag;
    Run run("predict", rc, out, {{"crossing_index", rc.crossing_index}});
    const Crossing c = select_crossing(rc);
    GapCoefficients g;
    try {
        g = gap_coefficients(rc.op, c, rc.predictor_nodes);
    } catch (const Error&) {
        run.finish(2);
        throw;
    }
    json body;
    body["crossing"] = {{"n", c.n}, {"m", c.m}, {"tau0", c.tau0}, {"E0", c.E0}};
    body["M0_plus"] = {cplx_json(g.at_plus.m0(0, 0)), cplx_json(g.at_plus.m0(0, 1)), cplx_json(g.at_plus.m0(1, 1))};
    body["M0_minus"] = {cplx_json(g.at_minus.m0(0, 0)), cplx_json(g.at_minus.m0(0, 1)),
                        cplx_json(g.at_minus.m0(1, 1))};
    const auto k = g.extrema_plus.k;
    body["k"] = {{"k1", k.k1}, {"k2", k.k2}, {"k3", k.k3}, {"k4", k.k4}, {"k1_printed", k.k1_printed}};
    body["beta"] = {{"minus_at_plus", g.beta_minus_at_plus}, {"minus_at_minus", g.beta_minus_at_minus},
                    {"plus_at_plus", g.beta_plus_at_plus}, {"plus_at_minus", g.beta_plus_at_minus},
                    {"beta_l", g.beta_l}, {"beta_r", g.beta_r}};
    body["tau1_l"] = g.tau1_l;
    body["tau1_r"] = g.tau1_r;
    body["t_l"] = g.t_l;
    body["t_r"] = g.t_r;
    body["e_l"] = {cplx_json(g.e_l[0]), cplx_json(g.e_l[1])};
    body["e_r"] = {cplx_json(g.e_r[0]), cplx_json(g.e_r[1])};
    body["wall_mass"] = g.wall_mass;
    body["lambda"] = {{"printed", {{"l", g.lambda_l}, {"r", g.lambda_r}}},
                      {"strip_consistent", {{"l", g.lambda_l_strip}, {"r", g.lambda_r_strip}}}};
    body["tau2_candidates"] = {
        {"printed", {{"l", tau2_json(g.tau2_l)}, {"r", tau2_json(g.tau2_r)}}},
        {"strip_consistent", {{"l", tau2_json(g.tau2_l_strip)}, {"r", tau2_json(g.tau2_r_strip)}}}};
    body["conditions"] = g.conditions.describe();
    auto csv = run.csv("prediction.csv", {"eps", "wall", "t_sign", "eta_l", "eta_r", "tau1_l", "tau1_r"});
    json per_eps = json::array();
    for (double eps : rc.op.epsilons)
        for (WallCorrection w : {WallCorrection::printed, WallCorrection::strip_consistent})
            for (TSign s : {TSign::plus, TSign::minus}) {
                const auto p = predict_gap(g, c.E0, rc.op.alpha, eps, w, s);
                csv.row(eps, to_string(w), static_cast<int>(s), p.eta_l, p.eta_r, p.extremum_l.tau1, p.extremum_r.tau1);
                per_eps.push_back({{"eps", eps}, {"wall", to_string(w)}, {"t_sign", static_cast<int>(s)},
                                   {"eta_l", p.eta_l}, {"eta_r", p.eta_r}, {"tau1_l", p.extremum_l.tau1},
                                   {"tau1_r", p.extremum_r.tau1}});
            }
    body["per_eps"] = per_eps;
    run.json_file("prediction.json", body);
    std::cout << "beta_l = " << fmt(g.beta_l) << ", beta_r = " << fmt(g.beta_r) << ", lambda_l = " << fmt(g.lambda_l)
              << ", lambda_r = " << fmt(g.lambda_r) << "\n";
    run.finish(0);
    std::cout << "run directory: " << run.dir().string() << "\n";
    return 0;
}

int cmd_bands1d(const std::string& config, const fs::path& out, int tau2_points, unsigned workers) {
    RunConfig rc = load_validated(config);
    if (tau2_points < 2) throw std::invalid_argument("--tau2-grid needs at least 2 points");
    Run run("bands1d", rc, out, {{"tau2_grid", tau2_points}});
    const double a2 = rc.op.lattice.a2;
    auto csv = run.csv("spectrum1d.csv", {"tau2", "eps", "Q", "p", "lambda", "below_recommended_cutoff"});
    const auto& eps = rc.op.epsilons;
    const std::size_t jobs = eps.size() * tau2_points;
    std::vector<Spectrum1D> results(jobs);
    parallel_for(jobs, workers, [&](std::size_t j) {
        const double e = eps[j / tau2_points];
        const double tau2 = -pi / a2 + 2.0 * pi / a2 * static_cast<double>(j % tau2_points) / (tau2_points - 1);
        results[j] = bands_1d(rc.op, tau2, e, wall_cutoff(rc, e));
    });
    for (const auto& s : results)
        for (int p = 1; p <= std::min<int>(6, s.values.size()); ++p)
            csv.row(s.tau2, s.eps, s.Q, p, s.values(p - 1), s.below_recommended_cutoff);

    auto conv = run.csv("convergence1d.csv", {"tau2", "p", "eps", "lambda", "error", "scaled"});
    std::ostringstream report;
    report.precision(10);
    for (double tau2 : {0.0, pi / (2.0 * a2)}) {
        const auto rep = convergence_1d(rc.op, tau2, 2, rc.cutoff_Q, workers);
        for (const auto& m : rep.modes) {
            for (std::size_t i = 0; i < m.eps.size(); ++i) conv.row(tau2, m.p, m.eps[i], m.lambda[i], m.error[i], m.scaled[i]);
            report << "tau2 = " << tau2 << ", p = " << m.p << ": order "
                   << (m.order ? std::to_string(m.order->slope) + " (r2 " + std::to_string(m.order->r2) + ")" : "exact")
                   << ", extrapolated eps^1/2 coefficient " << m.extrapolated_coefficient << ", closed form "
                   << m.predicted_coefficient << ", opposite parity " << m.alternative_coefficient << "\n";
        }
    }
    run.text("convergence1d.txt", report.str());
    std::cout << report.str();
    run.finish(0);
    std::cout << "run directory: " << run.dir().string() << "\n";
    return 0;
}

int cmd_bands2d(const std::string& config, const fs::path& out, std::vector<double> tau, double eps_flag,
                const std::string& solver_kind, double emin, double emax) {
    RunConfig rc = load_validated(config);
    if (tau.size() != 2) throw std::invalid_argument("--tau expects two values");
    const QuasiMomentum q{tau[0], tau[1]};
    std::vector<double> eps_list = eps_flag > 0.0 ? std::vector<double>{eps_flag} : rc.op.epsilons;
    Run run("bands2d", rc, out, {{"tau", tau}, {"eps", eps_list}, {"solver", solver_kind}, {"window", {emin, emax}}});
    auto spectra = std::make_shared<const CoefficientSpectra>(
        CoefficientSpectra::build(rc.op.coeffs, rc.op.lattice, rc.op.coefficient_resolution));
    const double E0 = enumerate_crossings(rc.op.lattice, rc.n_max).empty()
                          ? 9.0 * pi * pi / (rc.op.lattice.a2 * rc.op.lattice.a2)
                          : select_crossing(rc).E0;
    auto csv = run.csv("bands2d.csv", {"tau1", "tau2", "eps", "N", "Q", "k", "E"});
    for (double e : eps_list) {
        std::unique_ptr<Bloch2DSolver> solver;
        if (solver_kind == "plane") {
            const int cap = plane_wave_q_cap(rc.cutoff_N);
            const int Q = wall_cutoff(rc, e);
            if (Q > cap) {
                run.log("eps " + fmt(e) + " dropped: Q = " + std::to_string(Q) + " exceeds the dense cap " + std::to_string(cap));
                continue;
            }
            solver = std::make_unique<PlaneWaveSolver>(rc.op, spectra, e, rc.cutoff_N, Q);
        } else {
            solver = std::make_unique<ModeSolver>(rc.op, spectra, e, wall_cutoff(rc, e), mode_cutoff(rc, E0));
        }
        const auto s = solver->bands(q, {emin, emax});
        for (std::size_t i = 0; i < s.values.size(); ++i) csv.row(q.tau1, q.tau2, e, s.N, s.Q, s.indices[i], s.values[i]);
    }
    run.finish(0);
    std::cout << "run directory: " << run.dir().string() << "\n";
    return 0;
}

int cmd_gapscan(const std::string& config, const fs::path& out, int index_flag, std::vector<int> grid, unsigned workers) {
    RunConfig rc = load_validated(config);
    if (index_flag >= 0) rc.crossing_index = index_flag;
    if (grid.size() == 2) {
        rc.grid_G1 = grid[0];
        rc.grid_G2 = grid[1];
    }
    Run run("gapscan", rc, out, {{"crossing_index", rc.crossing_index}, {"grid", {rc.grid_G1, rc.grid_G2}}});
    GapScanRun res;
    try {
        res = run_gapscan(rc, workers);
    } catch (const ValidationError&) {
        run.finish(2);
        throw;
    }
    auto edges = run.csv("gap_edges.csv", {"eps", "Q", "modes", "status", "gap_found", "edge_l", "edge_r",
                                           "argmax_l_tau1", "argmax_l_tau2", "argmin_r_tau1", "argmin_r_tau2",
                                           "coarse_edge_l", "coarse_edge_r", "radius1", "radius2"});
    auto surf = run.csv("band_surfaces.csv", {"eps", "tau1", "tau2", "lower", "upper"});
    bool failed = false;
    for (const auto& r : res.per_eps) {
        if (!r.error.empty()) {
            failed = true;
            run.log("eps " + fmt(r.eps) + ": " + r.error);
            std::cerr << "eps " << fmt(r.eps) << ": " << r.error << "\n";
            const double nan = std::numeric_limits<double>::quiet_NaN();
            edges.row(r.eps, r.Q, r.modes, "error", false, nan, nan, nan, nan, nan, nan, nan, nan, nan, nan);
            continue;
        }
        const auto& m = *r.measurement;
        edges.row(r.eps, r.Q, r.modes, "ok", m.gap_found, m.edge_l, m.edge_r, m.argmax_l.tau1, m.argmax_l.tau2,
                  m.argmin_r.tau1, m.argmin_r.tau2, m.coarse_edge_l, m.coarse_edge_r, m.refinement_radius[0],
                  m.refinement_radius[1]);
        const auto& s = *r.surface;
        for (std::size_t i = 0; i < s.grid.size(); ++i) surf.row(r.eps, s.grid[i].tau1, s.grid[i].tau2, s.lower_band[i], s.upper_band[i]);
        std::cout << "eps " << fmt(r.eps) << ": edges (" << fmt(m.edge_l) << ", " << fmt(m.edge_r) << ")"
                  << (m.gap_found ? " gap" : " no gap") << "\n";
    }
    auto resid = run.csv("residuals.csv", {"wall", "edge", "eps", "predicted", "measured", "residual",
                                           "tau1_residual_plus", "tau1_residual_minus", "tau2_distance"});
    std::ostringstream text;
    text << "crossing (n, m) = (" << res.crossing.n << ", " << res.crossing.m << "), tau0 = " << fmt(res.crossing.tau0)
         << ", E0 = " << fmt(res.crossing.E0) << "\nwindow C2 = " << fmt(res.C2) << "\n";
    for (const auto* rep : {&res.report, &res.report_strip}) {
        if (!*rep) continue;
        const auto& r = **rep;
        for (const auto* e : {&r.left, &r.right})
            for (std::size_t i = 0; i < r.eps.size(); ++i)
                resid.row(to_string(r.wall), e == &r.left ? "l" : "r", r.eps[i], e->predicted[i], e->measured[i],
                          e->residual[i], e->tau1_residual[0][i], e->tau1_residual[1][i], e->tau2_distance[i]);
        text << r.describe();
    }
    if (!res.report_error.empty()) {
        text << "comparison not possible: " << res.report_error << "\n";
        failed = true;
    }
    run.text("validation_report.txt", text.str());
    std::cout << text.str();
    const int code = failed ? 3 : 0;
    run.finish(code);
    std::cout << "run directory: " << run.dir().string() << "\n";
    return code;
}

/// Reads a CSV written by CsvWriter: skips '#' lines, returns header and rows.
std::pair<std::vector<std::string>, std::vector<std::vector<std::string>>> read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open " + path.string());
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header.empty())
            header = split(line);
        else
            rows.push_back(split(line));
    }
    return {header, rows};
}

int cmd_report(const fs::path& run_dir) {
    const fs::path manifest_path = run_dir / "manifest.json";
    if (!fs::exists(manifest_path)) throw MissingFile("no manifest.json in " + run_dir.string());
    json manifest;
    try {
        manifest = json::parse(std::ifstream(manifest_path));
    } catch (const json::exception& e) {
        throw ConfigParseError(std::string("manifest.json: ") + e.what());
    }
    RunConfig rc = load_config(run_dir / "config.yaml");
    const fs::path out = run_dir / "report";
    fs::create_directories(out);
    const auto pre = std::vector<std::pair<std::string, std::string>>{
        {"config_hash", manifest.value("config_hash", "")}, {"subcommand", "report"}};
    std::ostringstream summary;
    summary << "run: " << run_dir.string() << "\nsubcommand: " << manifest.value("subcommand", "?")
            << "\nconfig hash: " << manifest.value("config_hash", "?") << "\nexit code: " << manifest.value("exit_code", -1)
            << "\n";

    // strip-limit dispersion curves for p = 1, 2 along tau1
    {
        const auto& lat = rc.op.lattice;
        CsvWriter csv(out / "strip_dispersion.csv", {"tau1", "n", "p", "E"}, pre);
        for (int i = 0; i <= 200; ++i) {
            const double t1 = -lat.zone1() + 2.0 * lat.zone1() * i / 200;
            for (int p = 1; p <= 2; ++p)
                for (int n = -2; n <= 2; ++n) csv.row(t1, n, p, strip_energy(lat, n, p, t1));
        }
    }
    if (fs::exists(run_dir / "band_surfaces.csv")) {
        const auto [header, rows] = read_csv(run_dir / "band_surfaces.csv");
        // slices at the grid rows closest to tau2 = 0, pi/(2 a2), pi/a2
        const double a2 = rc.op.lattice.a2;
        CsvWriter csv(out / "dispersion_slices.csv", {"eps", "tau2_slice", "tau1", "tau2", "lower", "upper"}, pre);
        for (double target : {0.0, pi / (2.0 * a2), pi / a2}) {
            std::map<std::string, double> nearest; // eps -> closest tau2
            for (const auto& r : rows) {
                const double t2 = std::stod(r[2]);
                auto it = nearest.find(r[0]);
                if (it == nearest.end() || std::abs(t2 - target) < std::abs(it->second - target)) nearest[r[0]] = t2;
            }
            for (const auto& r : rows)
                if (std::stod(r[2]) == nearest[r[0]]) csv.row(std::stod(r[0]), target, std::stod(r[1]), std::stod(r[2]), std::stod(r[3]), std::stod(r[4]));
        }
        summary << "dispersion slices: report/dispersion_slices.csv\n";
    }
    if (fs::exists(run_dir / "gap_edges.csv")) {
        const auto [header, rows] = read_csv(run_dir / "gap_edges.csv");
        CsvWriter csv(out / "gap_edges_vs_eps.csv", {"eps", "edge_l", "edge_r", "width"}, pre);
        summary << "gap edges:\n";
        for (const auto& r : rows) {
            const double l = std::stod(r[5]), rr = std::stod(r[6]);
            csv.row(std::stod(r[0]), l, rr, rr - l);
            summary << "  eps " << r[0] << ": (" << r[5] << ", " << r[6] << ") " << (r[4] == "1" ? "gap" : "no gap") << "\n";
        }
    }
    if (fs::exists(run_dir / "validation_report.txt")) {
        std::ifstream in(run_dir / "validation_report.txt");
        summary << "\n" << in.rdbuf();
    }
    std::ofstream(out / "summary.txt") << summary.str();
    std::cout << summary.str();
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gap opening in periodic operators with a narrow potential wall"};
    app.require_subcommand(1);
    std::string config;
    std::string out_dir = "runs";
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::optional<unsigned long long> seed;
    auto common = [&](CLI::App* sub) {
        sub->add_option("config,--config", config, "configuration file")->required();
        sub->add_option("--out-dir", out_dir, "root directory for run directories");
        sub->add_option("--workers", workers, "worker threads");
        sub->add_option("--seed", seed, "seed recorded with the run");
    };

    int n_max = -1, crossing_index = -1, tau2_grid = 33;
    std::vector<double> tau{0.0, 0.0};
    double eps = 0.0, emin = -1e300, emax = 1e300;
    std::string solver = "modes";
    std::vector<int> grid;
    std::string run_dir;

    auto* c_cross = app.add_subcommand("crossings", "enumerate crossings and their admissibility");
    common(c_cross);
    c_cross->add_option("--n-max", n_max, "largest |n|, |m|");
    auto* c_pred = app.add_subcommand("predict", "closed-form gap prediction for a crossing");
    common(c_pred);
    c_pred->add_option("--crossing-index", crossing_index);
    auto* c_b1 = app.add_subcommand("bands1d", "wall-operator spectra and convergence to the strip");
    common(c_b1);
    c_b1->add_option("--tau2-grid", tau2_grid, "number of tau2 points");
    auto* c_b2 = app.add_subcommand("bands2d", "2D band values at one quasimomentum");
    common(c_b2);
    c_b2->add_option("--tau", tau, "tau1 tau2")->expected(2);
    c_b2->add_option("--eps", eps, "single eps (default: schedule)");
    c_b2->add_option("--solver", solver, "modes or plane")->check(CLI::IsMember({"modes", "plane"}));
    c_b2->add_option("--emin", emin);
    c_b2->add_option("--emax", emax);
    auto* c_gap = app.add_subcommand("gapscan", "measure the gap over the eps schedule and compare");
    common(c_gap);
    c_gap->add_option("--crossing-index", crossing_index);
    c_gap->add_option("--grid", grid, "G1 G2")->expected(2);
    auto* c_rep = app.add_subcommand("report", "summarise a run directory");
    c_rep->add_option("run_dir", run_dir)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    seed_override = seed;
    try {
        if (*c_cross) return cmd_crossings(config, out_dir, n_max);
        if (*c_pred) return cmd_predict(config, out_dir, crossing_index);
        if (*c_b1) return cmd_bands1d(config, out_dir, tau2_grid, workers);
        if (*c_b2) return cmd_bands2d(config, out_dir, tau, eps, solver, emin, emax);
        if (*c_gap) return cmd_gapscan(config, out_dir, crossing_index, grid, workers);
        if (*c_rep) return cmd_report(run_dir);
    } catch (const ValidationError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
