#include "exflow/flow.hpp"

#include "exflow/structure_lab.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace exflow {

namespace {

constexpr double kDtSlack = 1.0 + 1e-9; // tolerated rounding when validating dt

struct CurveFields {
    std::vector<double> kappa, f;
    std::vector<Vec2> normal;
    double f_min = 0.0, f_max = 0.0;
    double kappa_min = 0.0, kappa_max = 0.0;
};

CurveFields curve_fields(const DiscreteCurve& c, double f_ones, const Modulator& m) {
    const int n = c.size();
    CurveFields out;
    out.kappa.resize(n);
    out.f.resize(n);
    out.normal.resize(n);
    out.f_min = out.kappa_min = std::numeric_limits<double>::infinity();
    out.f_max = out.kappa_max = -out.f_min;
    for (int i = 0; i < n; ++i) {
        double k = c.curvature(i);
        double F = f_ones * k;
        if (m.positive_domain_only() && F <= 0.0)
            throw flow_error("cone-exit",
                             "speed argument left (0, inf) at vertex " + std::to_string(i));
        out.kappa[i] = k;
        out.f[i] = F;
        out.normal[i] = c.normal(i);
        out.kappa_min = std::min(out.kappa_min, k);
        out.kappa_max = std::max(out.kappa_max, k);
        out.f_min = std::min(out.f_min, F);
        out.f_max = std::max(out.f_max, F);
    }
    return out;
}

double curve_limit_from_fields(const DiscreteCurve& c, const CurveFields& fields, double f_ones,
                               const Modulator& m) {
    double dmax = 0.0;
    for (double F : fields.f) dmax = std::max(dmax, std::abs(m.dpsi(F)) * f_ones);
    double h = c.min_edge_length();
    if (dmax <= 0.0) return std::numeric_limits<double>::infinity();
    return h * h / (2.0 * dmax);
}

void advance_curve(DiscreteCurve& c, const CurveFields& fields, const Modulator& m, double dt) {
    const int n = c.size();
    for (int i = 0; i < n; ++i) {
        Vec2 p = c.point(i);
        c.set_point(i, p - fields.normal[i] * (m.psi(fields.f[i]) * dt));
    }
}

} // namespace

double curve_stability_limit(const DiscreteCurve& curve, double f_ones, const Modulator& m) {
    CurveFields fields = curve_fields(curve, f_ones, m);
    return curve_limit_from_fields(curve, fields, f_ones, m);
}

DiscreteCurve step_curve(const DiscreteCurve& curve, double f_ones, const Modulator& m, double dt,
                         double c_cfl, bool rk2) {
    CurveFields fields = curve_fields(curve, f_ones, m);
    double limit = c_cfl * curve_limit_from_fields(curve, fields, f_ones, m);
    if (!(dt > 0.0))
        throw flow_error("stability", "dt must be positive");
    if (dt > limit * kDtSlack) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "dt = %.3g exceeds the stability bound %.3g", dt, limit);
        throw flow_error("stability", buf);
    }
    DiscreteCurve next = curve;
    if (rk2) {
        DiscreteCurve mid = curve;
        advance_curve(mid, fields, m, 0.5 * dt);
        CurveFields mid_fields = curve_fields(mid, f_ones, m);
        advance_curve(next, mid_fields, m, dt);
    } else {
        advance_curve(next, fields, m, dt);
    }
    if (next.signed_area() <= 0.0)
        throw flow_error("embeddedness", "orientation lost during step");
    return next;
}

namespace {

// one pass over the nodes: speed tendency and the stiffness bound together
struct SurfaceStepData {
    std::vector<double> tendency;
    double d_max = 0.0; // max psi'(F) * max_i f'_i kappa_i^2
};

SurfaceStepData surface_step_data(const SurfaceRadii& geom, const SpeedFunction& f,
                                  const Modulator& m) {
    const std::size_t n = geom.kappa1.size();
    SurfaceStepData out;
    out.tendency.resize(n);
    double kap[2], grad[2];
    for (std::size_t idx = 0; idx < n; ++idx) {
        kap[0] = geom.kappa1[idx];
        kap[1] = geom.kappa2[idx];
        double F;
        try {
            F = f.value(std::span<const double>(kap, 2));
            f.gradient_into(std::span<const double>(kap, 2), std::span<double>(grad, 2));
        } catch (const cone_error& e) {
            throw flow_error("cone-exit", e.what());
        }
        if (m.positive_domain_only() && F <= 0.0)
            throw flow_error("cone-exit", "speed argument left (0, inf)");
        double sens = std::max(grad[0] * kap[0] * kap[0], grad[1] * kap[1] * kap[1]);
        out.d_max = std::max(out.d_max, std::abs(m.dpsi(F)) * sens);
        out.tendency[idx] = m.psi(F);
    }
    return out;
}

double surface_limit_from(double d_max, double dtheta, double phi_eig_max) {
    if (d_max <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / (d_max * (4.0 / (dtheta * dtheta) + phi_eig_max));
}

} // namespace

double surface_stability_limit(const SupportSurface& s, const SurfaceRadii& geom,
                               const SpeedFunction& f, const Modulator& m, double phi_eig_max) {
    SurfaceStepData data = surface_step_data(geom, f, m);
    return surface_limit_from(data.d_max, s.dtheta(), phi_eig_max);
}

void step_support(SupportSurface& s, const SurfaceRadii& geom, const SpeedFunction& f,
                  const Modulator& m, double dt, double c_cfl, const PolarFilter& filter) {
    if (!geom.convex) throw flow_error("convexity", "convexity lost (non-positive radius)");
    SurfaceStepData data = surface_step_data(geom, f, m);
    double limit = c_cfl * surface_limit_from(data.d_max, s.dtheta(), filter.max_phi_eigenvalue());
    if (!(dt > 0.0)) throw flow_error("stability", "dt must be positive");
    if (dt > limit * kDtSlack) {
        char buf[128];
        std::snprintf(buf, sizeof buf, "dt = %.3g exceeds the stability bound %.3g", dt, limit);
        throw flow_error("stability", buf);
    }
    filter.apply(data.tendency);
    double* sig = s.data().data();
    for (std::size_t idx = 0; idx < data.tendency.size(); ++idx)
        sig[idx] -= dt * data.tendency[idx];
}

RadiusTrajectory sphere_oracle(double f_ones, const Modulator& m, double r0, double t_end,
                               double dt) {
    if (r0 <= 0.0) throw std::invalid_argument("sphere_oracle: r0 must be positive");
    RadiusTrajectory traj;
    auto rate = [&](double r) { return -m.psi(f_ones / r); };
    double t = 0.0, r = r0;
    traj.t.push_back(t);
    traj.r.push_back(r);
    while (t < t_end - 0.5 * dt) {
        if (r <= 1e-9) {
            traj.domain_exit = true;
            break;
        }
        double k1 = rate(r);
        double k2 = rate(r + 0.5 * dt * k1);
        double k3 = rate(r + 0.5 * dt * k2);
        double k4 = rate(r + dt * k3);
        double rn = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (rn <= 0.0) {
            traj.domain_exit = true;
            break;
        }
        r = rn;
        t += dt;
        traj.t.push_back(t);
        traj.r.push_back(r);
    }
    return traj;
}

double RadiusTrajectory::at(double query) const {
    if (t.empty()) throw std::runtime_error("RadiusTrajectory: empty");
    if (query <= t.front()) return r.front();
    if (query >= t.back()) return r.back();
    auto it = std::lower_bound(t.begin(), t.end(), query);
    std::size_t hi = static_cast<std::size_t>(it - t.begin());
    std::size_t lo = hi - 1;
    double w = (query - t[lo]) / (t[hi] - t[lo]);
    return r[lo] * (1.0 - w) + r[hi] * w;
}

namespace {

// centered first/second arclength derivatives of a vertex field
void arclength_derivatives(const DiscreteCurve& c, const std::vector<double>& field, int i,
                           double& d1, double& d2) {
    const int n = c.size();
    double hp = c.edge_length(i);
    double hm = c.edge_length((i - 1 + n) % n);
    double fp = field[(i + 1) % n], fc = field[i], fm = field[(i - 1 + n) % n];
    d1 = (fp - fm) / (hp + hm);
    d2 = 2.0 * ((fp - fc) / hp - (fc - fm) / hm) / (hp + hm);
}

} // namespace

double residual_evo_F(const DiscreteCurve& prev, const DiscreteCurve& mid,
                      const DiscreteCurve& next, double dt, double f_ones, const Modulator& m) {
    const int n = mid.size();
    if (prev.size() != n || next.size() != n)
        throw std::invalid_argument("residual_evo_F: states must share the mesh");
    std::vector<double> f_prev(n), f_mid(n), f_next(n), kappa(n);
    for (int i = 0; i < n; ++i) {
        f_prev[i] = f_ones * prev.curvature(i);
        kappa[i] = mid.curvature(i);
        f_mid[i] = f_ones * kappa[i];
        f_next[i] = f_ones * next.curvature(i);
    }
    double worst = 0.0;
    for (int i = 0; i < n; ++i) {
        double dF_dt = (f_next[i] - f_prev[i]) / (2.0 * dt);
        double ds1, ds2;
        arclength_derivatives(mid, f_mid, i, ds1, ds2);
        double F = f_mid[i];
        double rhs = m.dpsi(F) * f_ones * ds2 + m.ddpsi(F) * f_ones * ds1 * ds1 +
                     f_ones * kappa[i] * kappa[i] * m.psi(F);
        worst = std::max(worst, std::abs(dF_dt - rhs));
    }
    return worst;
}

ResidualPair residual_evo_k(const DiscreteCurve& prev, const DiscreteCurve& mid,
                            const DiscreteCurve& next, double dt, double f_ones,
                            const Modulator& m, int ix, int iy, bool simplified) {
    auto k_of = [&](const DiscreteCurve& c) {
        return ball_curvature(c.point(ix), c.normal(ix), c.point(iy));
    };
    const int n = mid.size();
    std::vector<double> f_mid(n);
    for (int i = 0; i < n; ++i) f_mid[i] = f_ones * mid.curvature(i);

    double k = k_of(mid);
    Vec2 X = mid.point(ix), Y = mid.point(iy);
    Vec2 nux = mid.normal(ix), nuy = mid.normal(iy);
    double d = (X - Y).norm();
    Vec2 w = (X - Y) * (1.0 / d);

    double psi_x = m.psi(f_mid[ix]);
    double psi_y = m.psi(f_mid[iy]);
    double ds1, ds2;
    arclength_derivatives(mid, f_mid, ix, ds1, ds2);
    Vec2 grad_psi_x = mid.tangent(ix) * (m.dpsi(f_mid[ix]) * ds1);

    double factor = simplified ? 1.0 : (nux - w * (k * d)).dot(nuy);
    double rhs = psi_x * k * k - (2.0 / (d * d)) * psi_x + (2.0 / (d * d)) * psi_y * factor +
                 (2.0 / d) * w.dot(grad_psi_x);
    double fd = (k_of(next) - k_of(prev)) / (2.0 * dt);
    return {fd, rhs};
}

// --------------------------------------------------------------------------
// run_flow
// --------------------------------------------------------------------------

bool FlowConfig::is_surface_geometry() const {
    return geometry.rfind("sphere", 0) == 0 || geometry.rfind("ellipsoid", 0) == 0;
}

std::string diagnostics_csv_header() {
    return "t,f_min,f_max,kappa_min,kappa_max,k_ex_min,k_in_max,z_min,u,pinch_ratio,"
           "res_evo_f,res_evo_k,ordering_ok,embedded_ok,z_ok,u_ok";
}

std::string diagnostics_csv_row(const DiagnosticsRecord& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,"
                  "%d,%d,%d,%d",
                  r.t, r.f_min, r.f_max, r.kappa_min, r.kappa_max, r.k_ex_min, r.k_in_max,
                  r.z_min, r.u, r.pinch_ratio, r.res_evo_f, r.res_evo_k, r.ordering_ok ? 1 : 0,
                  r.embedded_ok ? 1 : 0, r.z_ok ? 1 : 0, r.u_ok ? 1 : 0);
    return buf;
}

namespace {

struct MonitorState {
    double beta = 0.0;
    bool z_feasible = false;
    bool have_prev = false;
    double u_prev = 0.0, t_prev = 0.0;
};

// shared verdict accounting between curve and surface runs
void apply_monitors(DiagnosticsRecord& rec, MonitorState& mon, FlowVerdicts& verdicts,
                    double tol_flow) {
    rec.z_ok = true;
    if (mon.z_feasible) {
        double margin = rec.z_min + tol_flow * (1.0 + rec.t);
        verdicts.z_worst_margin = std::min(verdicts.z_worst_margin, margin);
        rec.z_ok = margin >= 0.0;
        if (!rec.z_ok) verdicts.z_pass = false;
    }
    rec.u_ok = true;
    if (std::isfinite(rec.u)) {
        if (mon.have_prev) {
            double drop = mon.u_prev - rec.u;
            if (drop > 0.0) verdicts.u_total_drift += drop;
            rec.u_ok = rec.u >= mon.u_prev - tol_flow * std::max(rec.t - mon.t_prev, 0.0) - 1e-15;
            if (!rec.u_ok) verdicts.u_pass = false;
        }
        mon.u_prev = rec.u;
        mon.t_prev = rec.t;
        mon.have_prev = true;
    }
    if (!rec.ordering_ok) verdicts.ordering_pass = false;
    if (!rec.embedded_ok) verdicts.embedded_pass = false;
}

FlowResult run_curve_flow(const FlowConfig& cfg, const Modulator& m, const ConditionReport& rep,
                          FlowObserver* obs) {
    SpeedFunction f = SpeedFunction::parse(cfg.speed, 1);
    const double f1 = f.value_at_ones();

    FlowResult res;
    // a 1-homogeneous function of a single variable is linear: both convex
    // and inverse-concave
    res.f_convex = true;
    res.f_inverse_concave = true;
    res.regime = classify_regime(rep, res.f_convex, res.f_inverse_concave);

    DiscreteCurve curve = DiscreteCurve::from_seed(cfg.geometry, cfg.n);
    if (!curve.is_counterclockwise())
        throw flow_error("embeddedness", "seed curve is not counterclockwise");
    if (!curve.is_embedded_fast()) throw flow_error("embeddedness", "seed curve self-intersects");

    MonitorState mon;
    double t = 0.0;
    bool embedded_ok = true;

    auto make_record = [&](const CurveFields& fields, double dt_hint) {
        DiagnosticsRecord rec;
        rec.t = t;
        rec.step = res.steps;
        rec.f_min = fields.f_min;
        rec.f_max = fields.f_max;
        rec.kappa_min = fields.kappa_min;
        rec.kappa_max = fields.kappa_max;
        BallCurvatureField field = ball_field(curve);
        rec.k_ex_min = field.min_k_ex();
        rec.k_in_max = field.max_k_in();
        rec.ordering_ok = true;
        for (int i = 0; i < curve.size(); ++i) {
            if (field.k_ex[i] > fields.kappa[i] + 1e-12 ||
                field.k_in[i] < fields.kappa[i] - 1e-12)
                rec.ordering_ok = false;
        }
        double zmin = std::numeric_limits<double>::infinity();
        double umin = std::numeric_limits<double>::infinity();
        bool u_defined = fields.f_min > 0.0;
        for (int i = 0; i < curve.size(); ++i) {
            zmin = std::min(zmin, field.k_ex[i] + mon.beta * fields.f[i]);
            if (u_defined) umin = std::min(umin, field.k_ex[i] / fields.f[i]);
        }
        rec.z_min = zmin;
        rec.u = u_defined ? umin : std::numeric_limits<double>::quiet_NaN();
        rec.pinch_ratio = fields.kappa_min > 0.0
                              ? fields.kappa_max / fields.kappa_min
                              : std::numeric_limits<double>::quiet_NaN();
        rec.embedded_ok = embedded_ok && curve.is_embedded_fast();

        if (cfg.track_residuals && dt_hint > 0.0 && std::isfinite(dt_hint)) {
            // probe states use half the stable step so the limit cannot be
            // crossed as the geometry tightens over the triple
            double dt_r = 0.5 * dt_hint;
            // midpoint probes: Euler would add an O(dt) bias to the residual
            DiscreteCurve s1 = step_curve(curve, f1, m, dt_r, cfg.c_cfl, true);
            DiscreteCurve s2 = step_curve(s1, f1, m, dt_r, cfg.c_cfl, true);
            rec.res_evo_f = residual_evo_F(curve, s1, s2, dt_r, f1, m);
            rec.res_evo_k =
                residual_evo_k(curve, s1, s2, dt_r, f1, m, 0, curve.size() / 2).abs();
        }
        apply_monitors(rec, mon, res.verdicts, cfg.tol_flow);
        res.records.push_back(rec);
        if (obs) obs->on_curve_record(curve, rec);
    };

    try {
        CurveFields fields = curve_fields(curve, f1, m);
        // beta is fixed from the t = 0 data: the smallest constant with
        // k_ex >= -beta F, plus a safety margin
        mon.z_feasible = fields.f_min > 0.0;
        if (mon.z_feasible) {
            BallCurvatureField field0 = ball_field(curve);
            double worst = std::numeric_limits<double>::infinity();
            for (int i = 0; i < curve.size(); ++i)
                worst = std::min(worst, field0.k_ex[i] / fields.f[i]);
            mon.beta = std::max(-worst, 0.0) * (1.0 + 1e-6) + 1e-12;
        }
        res.beta = mon.beta;
        res.verdicts.z_feasible = mon.z_feasible;

        double limit0 = curve_limit_from_fields(curve, fields, f1, m);
        make_record(fields, std::min(cfg.c_cfl * limit0, cfg.dt_max));

        long steps_since_record = 0;
        while (t < cfg.t_max * (1.0 - 1e-12)) {
            fields = curve_fields(curve, f1, m);
            double limit = cfg.c_cfl * curve_limit_from_fields(curve, fields, f1, m);
            double dt = cfg.dt_override
                            ? *cfg.dt_override
                            : std::min({limit, cfg.dt_max, cfg.t_max - t});
            if (dt > limit * kDtSlack) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "dt = %.3g exceeds the stability bound %.3g", dt,
                              limit);
                throw flow_error("stability", buf);
            }
            if (cfg.rk2) {
                DiscreteCurve midc = curve;
                advance_curve(midc, fields, m, 0.5 * dt);
                CurveFields mid_fields = curve_fields(midc, f1, m);
                advance_curve(curve, mid_fields, m, dt);
            } else {
                advance_curve(curve, fields, m, dt);
            }
            if (curve.signed_area() <= 0.0)
                throw flow_error("embeddedness", "orientation lost during step");
            t += dt;
            ++res.steps;
            ++steps_since_record;

            if (cfg.remesh_interval > 0 && res.steps % cfg.remesh_interval == 0) {
                curve = curve.remeshed(cfg.n);
                if (!curve.is_embedded_fast())
                    throw flow_error("embeddedness", "self-intersection after remesh");
            }
            if (steps_since_record >= cfg.diag_interval || t >= cfg.t_max * (1.0 - 1e-12)) {
                steps_since_record = 0;
                CurveFields rec_fields = curve_fields(curve, f1, m);
                double rec_limit = cfg.c_cfl * curve_limit_from_fields(curve, rec_fields, f1, m);
                make_record(rec_fields, std::min(rec_limit, cfg.dt_max));
            }
        }
        res.completed = true;
    } catch (const flow_error& e) {
        res.halt_reason = e.reason() + std::string(": ") + e.what();
    } catch (const cone_error& e) {
        res.halt_reason = std::string("cone-exit: ") + e.what();
    } catch (const std::domain_error& e) {
        res.halt_reason = std::string("domain: ") + e.what();
    }
    res.final_t = t;
    return res;
}

FlowResult run_surface_flow(const FlowConfig& cfg, const Modulator& m, const ConditionReport& rep,
                            FlowObserver* obs) {
    SpeedFunction f = SpeedFunction::parse(cfg.speed, 2);

    FlowResult res;
    res.is_surface = true;
    res.f_convex = check_convexity(f, cfg.regime_trials, cfg.seed ^ 0xC0FFEEull).pass;
    res.f_inverse_concave =
        check_inverse_concave_general(f, cfg.regime_trials, cfg.seed ^ 0x1CEBEEFull).pass;
    res.regime = classify_regime(rep, res.f_convex, res.f_inverse_concave);

    SupportSurface surf = SupportSurface::from_seed(cfg.geometry, cfg.n_lat, cfg.n_lon);
    PolarFilter filter(cfg.n_lat, cfg.n_lon);

    MonitorState mon;
    double t = 0.0;

    auto node_speed = [&](const SurfaceGeometry& geom, std::vector<double>& F) {
        const int n = cfg.n_lat * cfg.n_lon;
        F.resize(n);
        double kap[2];
        for (int idx = 0; idx < n; ++idx) {
            kap[0] = geom.kappa1[idx];
            kap[1] = geom.kappa2[idx];
            F[idx] = f.value(std::span<const double>(kap, 2));
        }
    };

    auto make_record = [&](const SupportSurface& s, const SurfaceGeometry& geom,
                           const std::vector<double>& F) {
        DiagnosticsRecord rec;
        rec.t = t;
        rec.step = res.steps;
        rec.f_min = *std::min_element(F.begin(), F.end());
        rec.f_max = *std::max_element(F.begin(), F.end());
        rec.kappa_min = *std::min_element(geom.kappa1.begin(), geom.kappa1.end());
        rec.kappa_max = *std::max_element(geom.kappa2.begin(), geom.kappa2.end());
        BallCurvatureField field = ball_field(geom, cfg.ball_stride);
        rec.k_ex_min = field.min_k_ex();
        rec.k_in_max = field.max_k_in();
        rec.ordering_ok = true;
        const int n = cfg.n_lat * cfg.n_lon;
        for (int i = 0; i < n; ++i) {
            if (field.k_ex[i] > geom.kappa1[i] + 1e-12 || field.k_in[i] < geom.kappa2[i] - 1e-12)
                rec.ordering_ok = false;
        }
        double zmin = std::numeric_limits<double>::infinity();
        double umin = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            zmin = std::min(zmin, field.k_ex[i] + mon.beta * F[i]);
            umin = std::min(umin, field.k_ex[i] / F[i]);
        }
        rec.z_min = zmin;
        rec.u = umin;
        rec.pinch_ratio = rec.kappa_min > 0.0 ? rec.kappa_max / rec.kappa_min
                                              : std::numeric_limits<double>::quiet_NaN();
        rec.embedded_ok = geom.convex;
        apply_monitors(rec, mon, res.verdicts, cfg.tol_flow);
        res.records.push_back(rec);
        if (obs) obs->on_surface_record(s, geom, rec);
    };

    try {
        SurfaceGeometry geom = surface_geometry(surf);
        if (!geom.convex) throw flow_error("convexity", "seed surface is not convex");
        std::vector<double> F;
        node_speed(geom, F);
        mon.z_feasible = *std::min_element(F.begin(), F.end()) > 0.0;
        // gap between the direct reading psi(f(kappa)) and the dual reading
        // psi(f*(kappa)) of the Gauss-map speed; they agree for self-dual f
        {
            double kap[2];
            for (std::size_t idx = 0; idx < F.size(); ++idx) {
                kap[0] = geom.kappa1[idx];
                kap[1] = geom.kappa2[idx];
                double fstar = f.dual_value(std::span<const double>(kap, 2));
                res.dual_reading_gap = std::max(
                    res.dual_reading_gap, std::abs(F[idx] - fstar) / std::abs(F[idx]));
            }
        }
        if (mon.z_feasible) {
            BallCurvatureField field0 = ball_field(geom, cfg.ball_stride);
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < F.size(); ++i)
                worst = std::min(worst, field0.k_ex[i] / F[i]);
            mon.beta = std::max(-worst, 0.0) * (1.0 + 1e-6) + 1e-12;
        }
        res.beta = mon.beta;
        res.verdicts.z_feasible = mon.z_feasible;
        make_record(surf, geom, F);

        const double dth = surf.dtheta();
        long steps_since_record = 0;
        while (t < cfg.t_max * (1.0 - 1e-12)) {
            SurfaceRadii rad = surface_radii(surf);
            if (!rad.convex)
                throw flow_error("convexity", "convexity lost (non-positive radius)");
            SurfaceStepData data = surface_step_data(rad, f, m);
            double limit =
                cfg.c_cfl * surface_limit_from(data.d_max, dth, filter.max_phi_eigenvalue());
            double dt = cfg.dt_override ? *cfg.dt_override
                                        : std::min({limit, cfg.dt_max, cfg.t_max - t});
            if (dt > limit * kDtSlack) {
                char buf[128];
                std::snprintf(buf, sizeof buf, "dt = %.3g exceeds the stability bound %.3g", dt,
                              limit);
                throw flow_error("stability", buf);
            }
            filter.apply(data.tendency);
            double* sig = surf.data().data();
            for (std::size_t idx = 0; idx < data.tendency.size(); ++idx)
                sig[idx] -= dt * data.tendency[idx];
            t += dt;
            ++res.steps;
            ++steps_since_record;
            if (steps_since_record >= cfg.diag_interval || t >= cfg.t_max * (1.0 - 1e-12)) {
                steps_since_record = 0;
                SurfaceGeometry geom_rec = surface_geometry(surf);
                if (!geom_rec.convex)
                    throw flow_error("convexity", "convexity lost (non-positive radius)");
                node_speed(geom_rec, F);
                make_record(surf, geom_rec, F);
            }
        }
        res.completed = true;
    } catch (const flow_error& e) {
        res.halt_reason = e.reason() + std::string(": ") + e.what();
    } catch (const cone_error& e) {
        res.halt_reason = std::string("cone-exit: ") + e.what();
    } catch (const std::domain_error& e) {
        res.halt_reason = std::string("domain: ") + e.what();
    }
    res.final_t = t;
    return res;
}

} // namespace

FlowResult run_flow(const FlowConfig& cfg, FlowObserver* observer) {
    Modulator m = Modulator::parse(cfg.psi);
    ConditionReport rep = check_conditions(m);
    if (cfg.is_surface_geometry()) return run_surface_flow(cfg, m, rep, observer);
    return run_curve_flow(cfg, m, rep, observer);
}

} // namespace exflow
