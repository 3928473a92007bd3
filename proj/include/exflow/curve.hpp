#pragma once

#include <cmath>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exflow {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double c) const { return {x * c, y * c}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double cross(Vec2 o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    Vec2 normalized() const {
        double n = norm();
        return {x / n, y / n};
    }
};

class geometry_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Planar curve given by a smooth parametrization theta in [0, 2pi); supplies
// exact frames and curvature for oracle-grade comparisons.
class AnalyticCurve {
public:
    virtual ~AnalyticCurve() = default;
    virtual Vec2 position(double theta) const = 0;
    virtual Vec2 d1(double theta) const = 0;
    virtual Vec2 d2(double theta) const = 0;

    double speed(double theta) const { return d1(theta).norm(); }
    Vec2 unit_tangent(double theta) const { return d1(theta).normalized(); }
    // outward normal of a counterclockwise curve
    Vec2 outward_normal(double theta) const {
        Vec2 t = unit_tangent(theta);
        return {t.y, -t.x};
    }
    double curvature(double theta) const {
        Vec2 v = d1(theta), a = d2(theta);
        double s = v.norm();
        return v.cross(a) / (s * s * s);
    }
};

class CircleCurve : public AnalyticCurve {
public:
    explicit CircleCurve(double r) : r_(r) {}
    Vec2 position(double t) const override { return {r_ * std::cos(t), r_ * std::sin(t)}; }
    Vec2 d1(double t) const override { return {-r_ * std::sin(t), r_ * std::cos(t)}; }
    Vec2 d2(double t) const override { return {-r_ * std::cos(t), -r_ * std::sin(t)}; }

private:
    double r_;
};

class EllipseCurve : public AnalyticCurve {
public:
    EllipseCurve(double a, double b) : a_(a), b_(b) {}
    Vec2 position(double t) const override { return {a_ * std::cos(t), b_ * std::sin(t)}; }
    Vec2 d1(double t) const override { return {-a_ * std::sin(t), b_ * std::cos(t)}; }
    Vec2 d2(double t) const override { return {-a_ * std::cos(t), -b_ * std::sin(t)}; }

private:
    double a_, b_;
};

// r(theta) = 1 + eps cos(theta); embedded for eps < 1, convex for eps <= 1/2
class LimaconCurve : public AnalyticCurve {
public:
    explicit LimaconCurve(double eps) : eps_(eps) {
        if (eps <= 0.0 || eps >= 1.0)
            throw std::invalid_argument("limacon: eps in (0, 1) required for embeddedness");
    }
    Vec2 position(double t) const override {
        double r = 1.0 + eps_ * std::cos(t);
        return {r * std::cos(t), r * std::sin(t)};
    }
    Vec2 d1(double t) const override;
    Vec2 d2(double t) const override;

private:
    double eps_;
};

// Closed polygonal curve, counterclockwise, with per-vertex frame estimators.
// Curvature uses the circumscribed-circle formula on consecutive triples,
// which is exact on circles and O(h^2) for smoothly sampled curves.
class DiscreteCurve {
public:
    DiscreteCurve() = default;
    explicit DiscreteCurve(std::vector<Vec2> points);

    static DiscreteCurve sample(const AnalyticCurve& c, int n);
    // seed names: "circle:r=1", "ellipse:a=2,b=1", "limacon:eps=0.2"
    static DiscreteCurve from_seed(std::string_view name, int n);
    static std::unique_ptr<AnalyticCurve> analytic_seed(std::string_view name);

    int size() const { return static_cast<int>(pts_.size()); }
    Vec2 point(int i) const { return pts_[wrap(i)]; }
    const std::vector<Vec2>& points() const { return pts_; }
    void set_point(int i, Vec2 p) { pts_[wrap(i)] = p; }

    Vec2 tangent(int i) const;        // unit
    Vec2 normal(int i) const;         // outward unit
    double curvature(int i) const;    // signed, positive on convex arcs
    double arclength_weight(int i) const;
    double edge_length(int i) const;  // |P_{i+1} - P_i|
    double total_length() const;
    double min_edge_length() const;
    double signed_area() const;       // > 0 for counterclockwise
    double diameter() const;

    bool is_counterclockwise() const { return signed_area() > 0.0; }
    // exact all-pairs segment test
    bool is_embedded() const;
    // same predicate through a uniform spatial grid; used in the flow loop
    bool is_embedded_fast() const;

    // arclength-uniform resampling through periodic cubic interpolation
    DiscreteCurve remeshed(int n) const;

    void write_csv(std::ostream& os) const;
    static DiscreteCurve read_csv(std::istream& is);

private:
    int wrap(int i) const {
        int n = size();
        i %= n;
        return i < 0 ? i + n : i;
    }
    std::vector<Vec2> pts_;
};

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

} // namespace exflow
