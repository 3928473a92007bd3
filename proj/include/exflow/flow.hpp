#pragma once

#include "exflow/ball.hpp"
#include "exflow/curve.hpp"
#include "exflow/modulator.hpp"
#include "exflow/speed.hpp"
#include "exflow/support_surface.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace exflow {

class flow_error : public std::runtime_error {
public:
    flow_error(std::string reason, std::string what)
        : std::runtime_error(std::move(what)), reason_(std::move(reason)) {}
    const std::string& reason() const { return reason_; }

private:
    std::string reason_; // "cone-exit", "stability", "embeddedness", "convexity", "domain"
};

struct FlowConfig {
    std::string geometry = "circle:r=1";
    std::string speed = "power_mean:r=1";
    std::string psi = "identity";
    double t_max = 0.3;
    double c_cfl = 0.4;
    double dt_max = std::numeric_limits<double>::infinity();
    std::optional<double> dt_override; // bypasses the controller; the step still validates
    int n = 256;                       // curve resolution
    int n_lat = 32, n_lon = 64;        // surface resolution
    int remesh_interval = 25;          // steps between curve remeshes (0 disables)
    int diag_interval = 100;           // steps between diagnostics records
    int ball_stride = 1;               // partner subsampling for surface ball scans
    double tol_flow = 1e-3;            // per-unit-time verdict tolerance
    std::uint64_t seed = 0;
    bool rk2 = false;
    long regime_trials = 2000;         // sampled trials for tagging f convex/inverse-concave
    bool track_residuals = true;       // curve runs attach evolution residuals to records

    bool is_surface_geometry() const;
};

struct DiagnosticsRecord {
    double t = 0.0;
    long step = 0; // not a CSV column; names state snapshots
    double f_min = 0.0, f_max = 0.0;
    double kappa_min = 0.0, kappa_max = 0.0;
    double k_ex_min = 0.0;
    double k_in_max = 0.0;
    double z_min = 0.0;
    double u = 0.0;
    double pinch_ratio = 0.0;
    double res_evo_f = std::numeric_limits<double>::quiet_NaN();
    double res_evo_k = std::numeric_limits<double>::quiet_NaN();
    bool ordering_ok = true;
    bool embedded_ok = true;
    bool z_ok = true;
    bool u_ok = true;
};

std::string diagnostics_csv_header();
std::string diagnostics_csv_row(const DiagnosticsRecord& rec);

struct FlowVerdicts {
    bool z_feasible = false; // F > 0 everywhere at t = 0, so beta exists
    bool z_pass = true;
    bool u_pass = true;
    bool ordering_pass = true;
    bool embedded_pass = true;
    double u_total_drift = 0.0; // accumulated decrements of u across records
    double z_worst_margin = std::numeric_limits<double>::infinity();
};

struct FlowResult {
    std::vector<DiagnosticsRecord> records;
    bool completed = false;
    std::string halt_reason; // empty when the horizon was reached
    double final_t = 0.0;
    double beta = 0.0;
    RegimeTag regime = RegimeTag::neither;
    bool f_convex = false;
    bool f_inverse_concave = false;
    FlowVerdicts verdicts;
    bool is_surface = false;
    long steps = 0;
    // surface runs: worst relative gap between the two Gauss-map readings
    // psi(f(kappa)) and psi(f*(kappa)) at t = 0; zero for self-dual speeds
    double dual_reading_gap = 0.0;

    bool all_verdicts_pass() const {
        return verdicts.z_pass && verdicts.u_pass && verdicts.ordering_pass &&
               verdicts.embedded_pass;
    }
};

// Observation hook invoked at every diagnostics record with the live state.
class FlowObserver {
public:
    virtual ~FlowObserver() = default;
    virtual void on_curve_record(const DiscreteCurve&, const DiagnosticsRecord&) {}
    virtual void on_surface_record(const SupportSurface&, const SurfaceGeometry&,
                                   const DiagnosticsRecord&) {}
    virtual void on_snapshot_due(long /*step*/) {}
};

FlowResult run_flow(const FlowConfig& cfg, FlowObserver* observer = nullptr);

// --- single steps (exposed for tests and oracles) ---------------------------

// largest stable dt for the explicit curve update, before the c_cfl factor
double curve_stability_limit(const DiscreteCurve& curve, double f_ones, const Modulator& m);

// forward-Euler (or RK2 midpoint) update of X by -psi(F) nu dt; validates
// dt <= c_cfl * stability limit, positivity of F where the modulator needs
// it, and orientation afterwards
DiscreteCurve step_curve(const DiscreteCurve& curve, double f_ones, const Modulator& m, double dt,
                         double c_cfl, bool rk2 = false);

double surface_stability_limit(const SupportSurface& s, const SurfaceRadii& geom,
                               const SpeedFunction& f, const Modulator& m, double phi_eig_max);

void step_support(SupportSurface& s, const SurfaceRadii& geom, const SpeedFunction& f,
                  const Modulator& m, double dt, double c_cfl, const PolarFilter& filter);

// --- round sphere / circle ODE oracle ---------------------------------------

// RK4 trajectory of dr/dt = -psi(f_ones / r); halts early on domain exit
struct RadiusTrajectory {
    std::vector<double> t, r;
    bool domain_exit = false;
    double at(double query) const; // linear interpolation
};

RadiusTrajectory sphere_oracle(double f_ones, const Modulator& m, double r0, double t_end,
                               double dt = 1e-5);

// --- evolution-equation residuals (curves, three uniform-dt states) ---------

// max-norm over vertices of d_t F - [psi' f1 dss F + psi'' f1 (ds F)^2 + f1 kappa^2 psi]
double residual_evo_F(const DiscreteCurve& prev, const DiscreteCurve& mid,
                      const DiscreteCurve& next, double dt, double f_ones, const Modulator& m);

struct ResidualPair {
    double time_derivative;
    double right_hand_side;
    double abs() const { return std::abs(time_derivative - right_hand_side); }
    double rel() const {
        double s = std::max(std::abs(time_derivative), std::abs(right_hand_side));
        return s > 0.0 ? abs() / s : 0.0;
    }
};

// two-point quantity k(x, y): d_t k against
//   psi_x k^2 - (2/d^2) psi_x + (2/d^2) psi_y <nu_x - k d w, nu_y> + (2/d) <w, grad psi_x>
// with the inner-product factor replaced by 1 when `simplified`
ResidualPair residual_evo_k(const DiscreteCurve& prev, const DiscreteCurve& mid,
                            const DiscreteCurve& next, double dt, double f_ones,
                            const Modulator& m, int ix, int iy, bool simplified = false);

} // namespace exflow
