#pragma once

#include <cmath>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace exflow {

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(Vec3 o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(Vec3 o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double c) const { return {x * c, y * c, z * c}; }
    double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// Convex hypersurface in R^3 represented by its support function sampled on a
// latitude-longitude grid of outward normals. Latitude rows are staggered off
// the poles: theta_i = (i + 1/2) pi / n_lat; longitudes are periodic and
// n_lon must be even so stencils can reach across the poles.
class SupportSurface {
public:
    SupportSurface(int n_lat, int n_lon, double sigma0 = 1.0);

    static SupportSurface sphere(int n_lat, int n_lon, double r);
    static SupportSurface ellipsoid(int n_lat, int n_lon, double a, double b, double c);
    // seed names: "sphere:r=1", "ellipsoid:a=1.5,b=1,c=1"
    static SupportSurface from_seed(std::string_view name, int n_lat, int n_lon);

    int n_lat() const { return n_lat_; }
    int n_lon() const { return n_lon_; }
    int nodes() const { return n_lat_ * n_lon_; }
    double theta(int i) const { return (i + 0.5) * kPi / n_lat_; }
    double phi(int j) const { return 2.0 * kPi * j / n_lon_; }
    double dtheta() const { return kPi / n_lat_; }
    double dphi() const { return 2.0 * kPi / n_lon_; }

    double sigma(int i, int j) const { return sig_[index(i, j)]; }
    double& sigma(int i, int j) { return sig_[index(i, j)]; }
    const std::vector<double>& data() const { return sig_; }
    std::vector<double>& data() { return sig_; }

    // sigma with the cross-pole / periodic extension applied
    double sigma_ext(int i, int j) const;

    Vec3 node_normal(int i, int j) const;

    void write_csv(std::ostream& os) const;
    static SupportSurface read_csv(std::istream& is);

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * n_lon_ + ((j % n_lon_) + n_lon_) % n_lon_;
    }

    static constexpr double kPi = 3.14159265358979323846264338327950288;

private:
    int n_lat_, n_lon_;
    std::vector<double> sig_;
};

// Per-node radii/curvatures only; the cheap pass the flow steps on.
struct SurfaceRadii {
    int n_lat = 0, n_lon = 0;
    std::vector<double> tau1, tau2;     // principal radii, tau1 <= tau2
    std::vector<double> kappa1, kappa2; // principal curvatures ascending
    double tau_min = 0.0;
    bool convex = false;                // all radii positive
};

SurfaceRadii surface_radii(const SupportSurface& s);

// Radii plus embedding points and normals; used for diagnostics records.
struct SurfaceGeometry : SurfaceRadii {
    std::vector<Vec3> position; // X = sigma z + grad sigma
    std::vector<Vec3> normal;   // z
};

SurfaceGeometry surface_geometry(const SupportSurface& s);

// Exact principal radii of the ellipsoid with semi-axes (a, b, c) at the
// outward normal z; oracle for the stencil convergence tests.
void ellipsoid_exact_radii(double a, double b, double c, Vec3 z, double& tau_lo, double& tau_hi);

// Removes longitudinal Fourier modes above per-ring cutoffs chosen so the
// filtered field is no stiffer in phi than in theta. Applied to the flow
// tendencies; without it the pole rings force explicit time steps of size
// (sin theta_0 dphi)^2.
class PolarFilter {
public:
    PolarFilter(int n_lat, int n_lon);

    void apply(std::vector<double>& field) const;

    int cutoff(int lat_row) const { return cutoffs_[lat_row]; }
    // largest eigenvalue of the filtered second-difference operator in phi,
    // scaled by 1/(sin theta dphi)^2; feeds the stability bound
    double max_phi_eigenvalue() const { return max_phi_eig_; }

private:
    int n_lat_, n_lon_;
    std::vector<int> cutoffs_;
    std::vector<double> cos_table_, sin_table_; // [m][j]
    double max_phi_eig_;
};

} // namespace exflow
