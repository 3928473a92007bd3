#include "exflow/support_surface.hpp"

#include "exflow/curve.hpp" // geometry_error

#include <algorithm>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace exflow {

SupportSurface::SupportSurface(int n_lat, int n_lon, double sigma0)
    : n_lat_(n_lat), n_lon_(n_lon),
      sig_(static_cast<std::size_t>(n_lat) * n_lon, sigma0) {
    if (n_lat < 4 || n_lon < 8) throw std::invalid_argument("SupportSurface: grid too coarse");
    if (n_lon % 2 != 0)
        throw std::invalid_argument("SupportSurface: n_lon must be even for pole stencils");
}

SupportSurface SupportSurface::sphere(int n_lat, int n_lon, double r) {
    if (r <= 0.0) throw std::invalid_argument("sphere: radius must be positive");
    return SupportSurface(n_lat, n_lon, r);
}

SupportSurface SupportSurface::ellipsoid(int n_lat, int n_lon, double a, double b, double c) {
    if (a <= 0.0 || b <= 0.0 || c <= 0.0)
        throw std::invalid_argument("ellipsoid: semi-axes must be positive");
    SupportSurface s(n_lat, n_lon);
    for (int i = 0; i < n_lat; ++i) {
        for (int j = 0; j < n_lon; ++j) {
            Vec3 z = s.node_normal(i, j);
            s.sigma(i, j) = std::sqrt(a * a * z.x * z.x + b * b * z.y * z.y + c * c * z.z * z.z);
        }
    }
    return s;
}

SupportSurface SupportSurface::from_seed(std::string_view name, int n_lat, int n_lon) {
    std::size_t colon = name.find(':');
    std::string_view head = name.substr(0, colon);
    std::map<std::string, double> params;
    if (colon != std::string_view::npos) {
        std::string_view rest = name.substr(colon + 1);
        std::size_t start = 0;
        while (start < rest.size()) {
            std::size_t end = rest.find(',', start);
            if (end == std::string_view::npos) end = rest.size();
            std::string_view item = rest.substr(start, end - start);
            std::size_t eq = item.find('=');
            if (eq == std::string_view::npos)
                throw std::invalid_argument("seed parameters must be key=value");
            params[std::string(item.substr(0, eq))] =
                std::stod(std::string(item.substr(eq + 1)));
            start = end + 1;
        }
    }
    auto get = [&](const char* key) {
        auto it = params.find(key);
        if (it == params.end())
            throw std::invalid_argument(std::string("missing seed parameter: ") + key);
        return it->second;
    };
    if (head == "sphere") return sphere(n_lat, n_lon, get("r"));
    if (head == "ellipsoid") return ellipsoid(n_lat, n_lon, get("a"), get("b"), get("c"));
    throw std::invalid_argument("unknown surface seed: " + std::string(name));
}

double SupportSurface::sigma_ext(int i, int j) const {
    // crossing a pole lands on the same row with longitude shifted by pi
    if (i < 0) return sigma(-1 - i, j + n_lon_ / 2);
    if (i >= n_lat_) return sigma(2 * n_lat_ - 1 - i, j + n_lon_ / 2);
    return sigma(i, j);
}

Vec3 SupportSurface::node_normal(int i, int j) const {
    double th = theta(i), ph = phi(j);
    double st = std::sin(th), ct = std::cos(th);
    return {st * std::cos(ph), st * std::sin(ph), ct};
}

void SupportSurface::write_csv(std::ostream& os) const {
    char buf[96];
    for (int i = 0; i < n_lat_; ++i)
        for (int j = 0; j < n_lon_; ++j) {
            std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", i, j, sigma(i, j));
            os << buf;
        }
}

SupportSurface SupportSurface::read_csv(std::istream& is) {
    std::vector<std::tuple<int, int, double>> rows;
    int max_i = -1, max_j = -1;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        int i, j;
        double v;
        if (!(ls >> i >> j >> v)) throw std::invalid_argument("surface csv: bad row: " + line);
        rows.emplace_back(i, j, v);
        max_i = std::max(max_i, i);
        max_j = std::max(max_j, j);
    }
    SupportSurface s(max_i + 1, max_j + 1);
    for (auto& [i, j, v] : rows) s.sigma(i, j) = v;
    return s;
}

SurfaceRadii surface_radii(const SupportSurface& s) {
    const int nlat = s.n_lat(), nlon = s.n_lon();
    const int half = nlon / 2;
    const double dth = s.dtheta(), dph = s.dphi();
    SurfaceRadii g;
    g.n_lat = nlat;
    g.n_lon = nlon;
    const std::size_t n = static_cast<std::size_t>(nlat) * nlon;
    g.tau1.resize(n);
    g.tau2.resize(n);
    g.kappa1.resize(n);
    g.kappa2.resize(n);
    g.tau_min = std::numeric_limits<double>::infinity();

    const double* base = s.data().data();
    for (int i = 0; i < nlat; ++i) {
        double th = s.theta(i);
        double st = std::sin(th), ct = std::cos(th);
        double cot = ct / st;
        const double* rowC = base + static_cast<std::size_t>(i) * nlon;
        // rows across the poles read the mirrored row shifted half a turn
        const double* rowN = base + static_cast<std::size_t>(i + 1 < nlat ? i + 1 : nlat - 1) * nlon;
        const double* rowS = base + static_cast<std::size_t>(i - 1 >= 0 ? i - 1 : 0) * nlon;
        const int shiftN = i + 1 < nlat ? 0 : half;
        const int shiftS = i - 1 >= 0 ? 0 : half;
        double* tau1 = g.tau1.data() + static_cast<std::size_t>(i) * nlon;
        double* tau2 = g.tau2.data() + static_cast<std::size_t>(i) * nlon;
        double* kap1 = g.kappa1.data() + static_cast<std::size_t>(i) * nlon;
        double* kap2 = g.kappa2.data() + static_cast<std::size_t>(i) * nlon;
        for (int j = 0; j < nlon; ++j) {
            int jp = j + 1 < nlon ? j + 1 : 0;
            int jm = j - 1 >= 0 ? j - 1 : nlon - 1;
            int jN = (j + shiftN) < nlon ? j + shiftN : j + shiftN - nlon;
            int jNp = (jp + shiftN) < nlon ? jp + shiftN : jp + shiftN - nlon;
            int jNm = (jm + shiftN) < nlon ? jm + shiftN : jm + shiftN - nlon;
            int jS = (j + shiftS) < nlon ? j + shiftS : j + shiftS - nlon;
            int jSp = (jp + shiftS) < nlon ? jp + shiftS : jp + shiftS - nlon;
            int jSm = (jm + shiftS) < nlon ? jm + shiftS : jm + shiftS - nlon;

            double sc = rowC[j];
            double sN = rowN[jN], sS = rowS[jS];
            double sE = rowC[jp], sW = rowC[jm];
            double sNE = rowN[jNp], sNW = rowN[jNm];
            double sSE = rowS[jSp], sSW = rowS[jSm];

            double s_th = (sN - sS) / (2.0 * dth);
            double s_ph = (sE - sW) / (2.0 * dph);
            double s_thth = (sN - 2.0 * sc + sS) / (dth * dth);
            double s_phph = (sE - 2.0 * sc + sW) / (dph * dph);
            double s_thph = (sNE - sNW - sSE + sSW) / (4.0 * dth * dph);

            // radii matrix in the orthonormal frame (e_theta, e_phi/sin theta)
            double w11 = s_thth + sc;
            double w12 = (s_thph - cot * s_ph) / st;
            double w22 = s_phph / (st * st) + cot * s_th + sc;

            double mean = 0.5 * (w11 + w22);
            double disc = std::sqrt(0.25 * (w11 - w22) * (w11 - w22) + w12 * w12);
            double t1 = mean - disc, t2 = mean + disc;

            tau1[j] = t1;
            tau2[j] = t2;
            g.tau_min = std::min(g.tau_min, t1);
            if (t1 > 0.0) {
                kap1[j] = 1.0 / t2;
                kap2[j] = 1.0 / t1;
            } else {
                kap1[j] = kap2[j] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    g.convex = g.tau_min > 0.0;
    return g;
}

SurfaceGeometry surface_geometry(const SupportSurface& s) {
    const int nlat = s.n_lat(), nlon = s.n_lon();
    const double dth = s.dtheta(), dph = s.dphi();
    SurfaceGeometry g;
    static_cast<SurfaceRadii&>(g) = surface_radii(s);
    const std::size_t n = static_cast<std::size_t>(nlat) * nlon;
    g.position.resize(n);
    g.normal.resize(n);
    for (int i = 0; i < nlat; ++i) {
        double th = s.theta(i);
        double st = std::sin(th), ct = std::cos(th);
        for (int j = 0; j < nlon; ++j) {
            double sc = s.sigma(i, j);
            double s_th = (s.sigma_ext(i + 1, j) - s.sigma_ext(i - 1, j)) / (2.0 * dth);
            double s_ph = (s.sigma_ext(i, j + 1) - s.sigma_ext(i, j - 1)) / (2.0 * dph);
            double cp = std::cos(s.phi(j)), sp = std::sin(s.phi(j));
            Vec3 z{st * cp, st * sp, ct};
            Vec3 e_th{ct * cp, ct * sp, -st};
            Vec3 e_ph{-sp, cp, 0.0};
            std::size_t idx = s.index(i, j);
            g.normal[idx] = z;
            g.position[idx] = z * sc + e_th * s_th + e_ph * (s_ph / st);
        }
    }
    return g;
}

void ellipsoid_exact_radii(double a, double b, double c, Vec3 z, double& tau_lo, double& tau_hi) {
    double d[3] = {a * a, b * b, c * c};
    double zz[3] = {z.x, z.y, z.z};
    double sigma = std::sqrt(d[0] * z.x * z.x + d[1] * z.y * z.y + d[2] * z.z * z.z);

    // orthonormal tangent basis at z
    Vec3 ref = std::abs(z.z) < 0.9 ? Vec3{0, 0, 1} : Vec3{1, 0, 0};
    Vec3 u{z.y * ref.z - z.z * ref.y, z.z * ref.x - z.x * ref.z, z.x * ref.y - z.y * ref.x};
    u = u * (1.0 / u.norm());
    Vec3 v{z.y * u.z - z.z * u.y, z.z * u.x - z.x * u.z, z.x * u.y - z.y * u.x};

    // restriction of the ambient Hessian of sqrt(z^T D z) to the tangent plane
    auto hess = [&](Vec3 p, Vec3 q) {
        double pq = d[0] * p.x * q.x + d[1] * p.y * q.y + d[2] * p.z * q.z;
        double pz = d[0] * p.x * zz[0] + d[1] * p.y * zz[1] + d[2] * p.z * zz[2];
        double qz = d[0] * q.x * zz[0] + d[1] * q.y * zz[1] + d[2] * q.z * zz[2];
        return pq / sigma - pz * qz / (sigma * sigma * sigma);
    };
    double w11 = hess(u, u), w12 = hess(u, v), w22 = hess(v, v);
    double mean = 0.5 * (w11 + w22);
    double disc = std::sqrt(0.25 * (w11 - w22) * (w11 - w22) + w12 * w12);
    tau_lo = mean - disc;
    tau_hi = mean + disc;
}

PolarFilter::PolarFilter(int n_lat, int n_lon) : n_lat_(n_lat), n_lon_(n_lon) {
    const int nyquist = n_lon / 2;
    const double dth = SupportSurface::kPi / n_lat;
    const double dph = 2.0 * SupportSurface::kPi / n_lon;
    cutoffs_.resize(n_lat);
    max_phi_eig_ = 0.0;
    for (int i = 0; i < n_lat; ++i) {
        double st = std::sin((i + 0.5) * dth);
        int cutoff = std::max(2, static_cast<int>(2.0 * st / dth));
        cutoffs_[i] = std::min(cutoff, nyquist);
        double m_eff = cutoffs_[i];
        double eig = (2.0 - 2.0 * std::cos(m_eff * dph)) / (st * dph * st * dph);
        max_phi_eig_ = std::max(max_phi_eig_, eig);
    }
    cos_table_.resize(static_cast<std::size_t>(nyquist + 1) * n_lon);
    sin_table_.resize(static_cast<std::size_t>(nyquist + 1) * n_lon);
    for (int m = 0; m <= nyquist; ++m)
        for (int j = 0; j < n_lon; ++j) {
            double ang = 2.0 * SupportSurface::kPi * m * j / n_lon;
            cos_table_[static_cast<std::size_t>(m) * n_lon + j] = std::cos(ang);
            sin_table_[static_cast<std::size_t>(m) * n_lon + j] = std::sin(ang);
        }
}

void PolarFilter::apply(std::vector<double>& field) const {
    if (field.size() != static_cast<std::size_t>(n_lat_) * n_lon_)
        throw std::invalid_argument("PolarFilter: field size mismatch");
    const int nyquist = n_lon_ / 2;
    for (int i = 0; i < n_lat_; ++i) {
        if (cutoffs_[i] >= nyquist) continue;
        double* row = field.data() + static_cast<std::size_t>(i) * n_lon_;
        for (int m = cutoffs_[i] + 1; m <= nyquist; ++m) {
            const double* cm = cos_table_.data() + static_cast<std::size_t>(m) * n_lon_;
            const double* sm = sin_table_.data() + static_cast<std::size_t>(m) * n_lon_;
            double am = 0.0, bm = 0.0;
            for (int j = 0; j < n_lon_; ++j) {
                am += row[j] * cm[j];
                bm += row[j] * sm[j];
            }
            double scale = (m == nyquist) ? 1.0 / n_lon_ : 2.0 / n_lon_;
            am *= scale;
            bm *= scale;
            for (int j = 0; j < n_lon_; ++j) row[j] -= am * cm[j] + bm * sm[j];
        }
    }
}

} // namespace exflow
