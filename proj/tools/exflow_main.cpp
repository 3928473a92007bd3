// exflow command-line front end: speed/psi checkers, lemma verifiers, flow
// runs with diagnostics, and manifest aggregation.

#include "exflow/config.hpp"
#include "exflow/flow.hpp"
#include "exflow/modulator.hpp"
#include "exflow/parallel.hpp"
#include "exflow/speed.hpp"
#include "exflow/structure_lab.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string iso_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

ordered_json to_json(const exflow::ConditionFlag& f) {
    ordered_json j;
    j["status"] = f.holds ? "holds-on-grid" : "violated";
    if (!f.holds) {
        j["witness_s"] = f.witness_s;
        j["witness_value"] = f.witness_value;
    }
    return j;
}

ordered_json to_json(const exflow::ConditionReport& rep) {
    ordered_json j;
    j["i"] = to_json(rep.i);
    j["iia"] = to_json(rep.iia);
    j["iib"] = to_json(rep.iib);
    j["iiia"] = to_json(rep.iiia);
    j["iiib"] = to_json(rep.iiib);
    j["iv"] = to_json(rep.iv);
    j["grid"] = {{"points", rep.grid_points}, {"lo", rep.grid_lo}, {"hi", rep.grid_hi}};
    return j;
}

ordered_json to_json(const exflow::WitnessSample& w) {
    ordered_json j;
    j["trial"] = w.trial;
    if (!w.lambda.empty()) j["lambda"] = w.lambda;
    if (!w.matrix_a.empty()) j["a"] = w.matrix_a;
    if (!w.matrix_b.empty()) j["b"] = w.matrix_b;
    if (std::isfinite(w.k)) j["k"] = w.k;
    if (std::isfinite(w.scalar_a)) j["scalar_a"] = w.scalar_a;
    if (std::isfinite(w.scalar_b)) j["scalar_b"] = w.scalar_b;
    return j;
}

ordered_json to_json(const exflow::InequalityReport& rep) {
    ordered_json j;
    j["check"] = rep.check;
    j["trials"] = rep.trials;
    j["skipped"] = rep.skipped;
    j["tol"] = rep.tol;
    j["min_slack"] = rep.min_slack;
    j["pass"] = rep.pass;
    j["witness"] = to_json(rep.witness);
    for (const auto& [key, value] : rep.extras) j[key] = value;
    return j;
}

void emit(const ordered_json& j, const std::string& out_dir, const std::string& filename) {
    std::string text = j.dump(2);
    std::cout << text << "\n";
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::ofstream os(fs::path(out_dir) / filename, std::ios::binary);
        os << text << "\n";
    }
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ':' || c == ',' || c == '=' || c == '/') c = '_';
    return s;
}

int cmd_check_speed(const std::string& name, int dim, long trials, std::uint64_t seed,
                    const std::string& out_dir) {
    exflow::SpeedFunction f = exflow::SpeedFunction::parse(name, dim);
    ordered_json j;
    j["exflow_report"] = "check-speed";
    j["name"] = f.name();
    j["dim"] = dim;
    j["trials"] = trials;
    j["seed"] = seed;

    exflow::AdmissibilityReport adm = exflow::verify_admissibility(f, trials, seed);
    ordered_json ja;
    ja["symmetry_max_dev"] = adm.symmetry_max_dev;
    ja["homogeneity_max_rel"] = adm.homogeneity_max_rel;
    ja["gradient_min"] = adm.gradient_min;
    ja["value_min"] = adm.value_min;
    ja["euler_max_rel"] = adm.euler_max_rel;
    ja["pass"] = adm.pass;
    j["admissibility"] = ja;

    j["convex"] = to_json(exflow::check_convexity(f, trials, seed + 1));
    j["inverse_concave_general"] = to_json(exflow::check_inverse_concave_general(f, trials, seed + 2));
    j["inverse_concave_homog"] = to_json(exflow::check_inverse_concave_homog(f, trials, seed + 3));

    exflow::DualReport dual = exflow::verify_dual(f, trials, seed + 4);
    ordered_json jd;
    jd["identity_max_residual"] = dual.identity_max_residual;
    jd["involution_max_rel"] = dual.involution_max_rel;
    jd["pass"] = dual.pass;
    j["dual"] = jd;

    emit(j, out_dir, "check_speed_" + sanitize(f.name()) + ".json");
    return 0;
}

int cmd_check_psi(const std::string& name, double grid_lo, double grid_hi, int grid_points,
                  const std::string& out_dir) {
    exflow::Modulator m = exflow::Modulator::parse(name);
    auto grid = exflow::log_grid(grid_lo, grid_hi, grid_points);
    exflow::ConditionReport rep = exflow::check_conditions(m, grid);
    ordered_json j;
    j["exflow_report"] = "check-psi";
    j["name"] = m.name();
    j["conditions"] = to_json(rep);

    bool monotone = true;
    double prev = -std::numeric_limits<double>::infinity();
    for (double s : grid) {
        double v = m.dpsi(s) * s * s;
        if (v < prev - 1e-12 * std::abs(prev)) monotone = false;
        prev = v;
    }
    j["dpsi_s2_nondecreasing"] = monotone;

    bool sign_changing = false;
    bool first = true;
    bool positive = true;
    for (double s : grid) {
        double v = m.psi(s);
        if (first) {
            positive = v > 0.0;
            first = false;
        } else if ((v > 0.0) != positive) {
            sign_changing = true;
        }
    }
    j["sign_changing_on_grid"] = sign_changing;

    emit(j, out_dir, "check_psi_" + sanitize(m.name()) + ".json");
    return 0;
}

int cmd_verify_lemma(const std::string& lemma, const std::string& speed, const std::string& psi,
                     int dim, long trials, std::uint64_t seed, double tol,
                     const std::string& out_dir) {
    exflow::Modulator m = exflow::Modulator::parse(psi);
    exflow::InequalityReport rep;
    if (lemma == "scalar-convex") {
        rep = exflow::verify_scalar_psi_convex(m, trials, seed, std::max(tol, 1e-12));
    } else if (lemma == "scalar-iv") {
        rep = exflow::verify_scalar_psi_iv(m, trials, seed, std::max(tol, 1e-12));
    } else {
        exflow::SpeedFunction f = exflow::SpeedFunction::parse(speed, dim);
        if (lemma == "interior")
            rep = exflow::verify_interior_inequality(f, m, trials, seed, tol);
        else if (lemma == "boundary")
            rep = exflow::verify_boundary_form(f, m, trials, seed, tol);
        else if (lemma == "q-monotone")
            rep = exflow::verify_q_monotone_sampled(f, m, trials, seed, 101, tol);
        else
            throw std::invalid_argument("unknown lemma: " + lemma);
    }
    ordered_json j = to_json(rep);
    j["exflow_report"] = "verify-lemma";
    j["lemma"] = lemma;
    emit(j, out_dir, "verify_" + sanitize(lemma) + ".json");
    return rep.pass ? 0 : 1;
}

class SnapshotWriter : public exflow::FlowObserver {
public:
    SnapshotWriter(fs::path dir, long interval)
        : dir_(std::move(dir)), interval_(interval) {}

    void on_curve_record(const exflow::DiscreteCurve& c,
                         const exflow::DiagnosticsRecord& rec) override {
        if (!due()) return;
        std::ofstream os(dir_ / snapshot_name(rec.step), std::ios::binary);
        c.write_csv(os);
        paths_.push_back(snapshot_name(rec.step));
        ++count_;
    }
    void on_surface_record(const exflow::SupportSurface& s, const exflow::SurfaceGeometry&,
                           const exflow::DiagnosticsRecord& rec) override {
        if (!due()) return;
        std::ofstream os(dir_ / snapshot_name(rec.step), std::ios::binary);
        s.write_csv(os);
        paths_.push_back(snapshot_name(rec.step));
        ++count_;
    }

    const std::vector<std::string>& paths() const { return paths_; }

private:
    bool due() {
        long r = record_index_++;
        if (interval_ <= 0) return r == 0; // initial state only
        return r % interval_ == 0;
    }
    std::string snapshot_name(long step) const {
        char buf[48];
        std::snprintf(buf, sizeof buf, "snapshot_%06ld.csv", step);
        return buf;
    }

    fs::path dir_;
    long interval_;
    long record_index_ = 0;
    long count_ = 0;
    std::vector<std::string> paths_;
};

int cmd_flow(const std::string& config_path, const std::string& out_dir, long snapshot_interval) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw exflow::config_error("cannot open config file: " + config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string config_text = ss.str();
    auto kv = exflow::parse_config_text(config_text);
    exflow::FlowConfig cfg = exflow::flow_config_from_map(kv);
    if (auto it = kv.find("threads"); it != kv.end())
        exflow::set_thread_count(static_cast<int>(std::stol(it->second)));

    fs::path dir(out_dir.empty() ? "." : out_dir);
    fs::create_directories(dir);

    std::string started = iso_now();
    SnapshotWriter snapshots(dir, snapshot_interval);
    exflow::FlowResult res = exflow::run_flow(cfg, &snapshots);
    std::string finished = iso_now();

    {
        std::ofstream os(dir / "diagnostics.csv", std::ios::binary);
        os << exflow::diagnostics_csv_header() << "\n";
        for (const auto& rec : res.records) os << exflow::diagnostics_csv_row(rec) << "\n";
    }

    ordered_json man;
    man["exflow_manifest"] = true;
    man["tool_version"] = kVersion;
    man["config_digest"] = hex64(exflow::config_digest(config_text));
    man["seed"] = cfg.seed;
    man["started_at"] = started;
    man["finished_at"] = finished;
    man["config"] = {{"geometry", cfg.geometry}, {"speed", cfg.speed},   {"psi", cfg.psi},
                     {"t_max", cfg.t_max},       {"n", cfg.n},           {"n_lat", cfg.n_lat},
                     {"n_lon", cfg.n_lon},       {"tol_flow", cfg.tol_flow}};
    man["outputs"] = {{"diagnostics_csv", "diagnostics.csv"}, {"snapshots", snapshots.paths()}};
    man["regime"] = exflow::to_string(res.regime);
    man["f_convex"] = res.f_convex;
    man["f_inverse_concave"] = res.f_inverse_concave;
    man["beta"] = res.beta;
    if (res.is_surface) man["dual_reading_gap"] = res.dual_reading_gap;
    man["completed"] = res.completed;
    man["halt_reason"] = res.halt_reason;
    man["final_t"] = res.final_t;
    man["steps"] = res.steps;
    ordered_json verdicts;
    verdicts["z_feasible"] = res.verdicts.z_feasible;
    verdicts["z_nonnegative"] = res.verdicts.z_feasible
                                    ? (res.verdicts.z_pass ? "pass" : "fail")
                                    : "not-applicable";
    verdicts["u_monotone"] = res.verdicts.u_pass ? "pass" : "fail";
    verdicts["u_total_drift"] = res.verdicts.u_total_drift;
    verdicts["ordering"] = res.verdicts.ordering_pass ? "pass" : "fail";
    verdicts["embedded"] = res.verdicts.embedded_pass ? "pass" : "fail";
    man["verdicts"] = verdicts;
    {
        std::ofstream os(dir / "manifest.json", std::ios::binary);
        os << man.dump(2) << "\n";
    }
    std::cout << man.dump(2) << "\n";

    if (!res.completed) {
        std::cerr << "flow halted: " << res.halt_reason << "\n";
        return 1;
    }
    return res.all_verdicts_pass() ? 0 : 1;
}

int cmd_report(const std::string& dir) {
    std::vector<fs::path> manifests;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            std::ifstream in(entry.path());
            ordered_json j;
            try {
                in >> j;
            } catch (...) {
                continue;
            }
            if (j.contains("exflow_manifest")) manifests.push_back(entry.path());
        }
    }
    std::sort(manifests.begin(), manifests.end());
    std::printf("%-40s %-28s %-9s %-10s %-8s %-8s %s\n", "manifest", "geometry", "completed",
                "final_t", "Z", "u", "ordering/embedded");
    for (const auto& path : manifests) {
        std::ifstream in(path);
        ordered_json j;
        in >> j;
        auto verdicts = j["verdicts"];
        std::printf("%-40s %-28s %-9s %-10.4g %-8s %-8s %s/%s\n",
                    path.lexically_relative(dir).string().c_str(),
                    j["config"]["geometry"].get<std::string>().c_str(),
                    j["completed"].get<bool>() ? "yes" : "no", j["final_t"].get<double>(),
                    verdicts["z_nonnegative"].get<std::string>().c_str(),
                    verdicts["u_monotone"].get<std::string>().c_str(),
                    verdicts["ordering"].get<std::string>().c_str(),
                    verdicts["embedded"].get<std::string>().c_str());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"exflow: curvature flows with inhomogeneous speeds, ball-curvature "
                 "diagnostics, and structural-inequality verifiers"};
    app.require_subcommand(1);

    int threads = 0;
    app.add_option("--threads", threads, "worker threads (0 = hardware)")
        ->envname("EXFLOW_THREADS");

    std::string out_dir;

    auto* sp = app.add_subcommand("check-speed", "sampled verification of a speed function");
    std::string sp_name;
    int sp_dim = 3;
    long sp_trials = 2000;
    std::uint64_t sp_seed = 42;
    sp->add_option("name", sp_name, "speed function, e.g. power_mean:r=1")->required();
    sp->add_option("--dim", sp_dim, "eigenvalue count");
    sp->add_option("--trials", sp_trials, "sample count");
    sp->add_option("--seed", sp_seed, "rng seed");
    sp->add_option("--out", out_dir, "output directory");

    auto* ps = app.add_subcommand("check-psi", "grid check of the structural conditions");
    std::string ps_name;
    double ps_lo = 1e-3, ps_hi = 1e3;
    int ps_points = 200;
    ps->add_option("name", ps_name, "modulator, e.g. neg_power:alpha=1")->required();
    ps->add_option("--grid-lo", ps_lo, "smallest grid point");
    ps->add_option("--grid-hi", ps_hi, "largest grid point");
    ps->add_option("--grid-points", ps_points, "log-spaced sample count");
    ps->add_option("--out", out_dir, "output directory");

    auto* vl = app.add_subcommand("verify-lemma", "randomized matrix-inequality verifier");
    std::string vl_lemma, vl_speed = "power_mean:r=1", vl_psi = "identity";
    int vl_dim = 3;
    long vl_trials = 10000;
    std::uint64_t vl_seed = 42;
    double vl_tol = 1e-10;
    vl->add_option("--lemma", vl_lemma, "interior|boundary|q-monotone|scalar-convex|scalar-iv")
        ->required();
    vl->add_option("--speed", vl_speed, "speed function name");
    vl->add_option("--psi", vl_psi, "modulator name");
    vl->add_option("--dim", vl_dim, "eigenvalue count");
    vl->add_option("--trials", vl_trials, "trial count");
    vl->add_option("--seed", vl_seed, "rng seed");
    vl->add_option("--tol", vl_tol, "slack tolerance");
    vl->add_option("--out", out_dir, "output directory");

    auto* fl = app.add_subcommand("flow", "integrate a flow from a config file");
    std::string fl_config;
    long fl_snapshots = 0;
    fl->add_option("config", fl_config, "config file (key = value, or JSON)")->required();
    fl->add_option("--out", out_dir, "output directory")->required();
    fl->add_option("--snapshot-interval", fl_snapshots,
                   "records between snapshots (0 = initial state only)");

    auto* rp = app.add_subcommand("report", "aggregate run manifests into a table");
    std::string rp_dir = ".";
    rp->add_option("dir", rp_dir, "directory to scan");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_name() == "CallForHelp" ? 0 : 2;
    }

    exflow::set_thread_count(threads);

    try {
        if (sp->parsed()) return cmd_check_speed(sp_name, sp_dim, sp_trials, sp_seed, out_dir);
        if (ps->parsed()) return cmd_check_psi(ps_name, ps_lo, ps_hi, ps_points, out_dir);
        if (vl->parsed())
            return cmd_verify_lemma(vl_lemma, vl_speed, vl_psi, vl_dim, vl_trials, vl_seed, vl_tol,
                                    out_dir);
        if (fl->parsed()) return cmd_flow(fl_config, out_dir, fl_snapshots);
        if (rp->parsed()) return cmd_report(rp_dir);
    } catch (const exflow::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const exflow::flow_error& e) {
        std::cerr << "flow error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
