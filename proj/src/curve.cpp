#include "exflow/curve.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

namespace exflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::map<std::string, double> parse_params(std::string_view params) {
    std::map<std::string, double> out;
    std::size_t start = 0;
    while (start < params.size()) {
        std::size_t end = params.find(',', start);
        if (end == std::string_view::npos) end = params.size();
        std::string_view item = params.substr(start, end - start);
        std::size_t eq = item.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("seed parameters must be key=value");
        out[std::string(item.substr(0, eq))] = std::stod(std::string(item.substr(eq + 1)));
        start = end + 1;
    }
    return out;
}

double required(const std::map<std::string, double>& p, const std::string& key) {
    auto it = p.find(key);
    if (it == p.end()) throw std::invalid_argument("missing seed parameter: " + key);
    return it->second;
}

} // namespace

Vec2 LimaconCurve::d1(double t) const {
    double c = std::cos(t), s = std::sin(t);
    double r = 1.0 + eps_ * c;
    double rp = -eps_ * s;
    return {rp * c - r * s, rp * s + r * c};
}

Vec2 LimaconCurve::d2(double t) const {
    double c = std::cos(t), s = std::sin(t);
    double r = 1.0 + eps_ * c;
    double rp = -eps_ * s;
    double rpp = -eps_ * c;
    return {rpp * c - 2.0 * rp * s - r * c, rpp * s + 2.0 * rp * c - r * s};
}

DiscreteCurve::DiscreteCurve(std::vector<Vec2> points) : pts_(std::move(points)) {
    if (pts_.size() < 4) throw std::invalid_argument("DiscreteCurve: at least 4 points required");
}

DiscreteCurve DiscreteCurve::sample(const AnalyticCurve& c, int n) {
    std::vector<Vec2> pts(n);
    for (int i = 0; i < n; ++i) pts[i] = c.position(kTwoPi * i / n);
    return DiscreteCurve(std::move(pts));
}

std::unique_ptr<AnalyticCurve> DiscreteCurve::analytic_seed(std::string_view name) {
    std::size_t colon = name.find(':');
    std::string_view head = name.substr(0, colon);
    auto params =
        parse_params(colon == std::string_view::npos ? std::string_view{} : name.substr(colon + 1));
    if (head == "circle") return std::make_unique<CircleCurve>(required(params, "r"));
    if (head == "ellipse")
        return std::make_unique<EllipseCurve>(required(params, "a"), required(params, "b"));
    if (head == "limacon") return std::make_unique<LimaconCurve>(required(params, "eps"));
    throw std::invalid_argument("unknown curve seed: " + std::string(name));
}

DiscreteCurve DiscreteCurve::from_seed(std::string_view name, int n) {
    return sample(*analytic_seed(name), n);
}

Vec2 DiscreteCurve::tangent(int i) const {
    return (point(i + 1) - point(i - 1)).normalized();
}

Vec2 DiscreteCurve::normal(int i) const {
    Vec2 t = tangent(i);
    return {t.y, -t.x};
}

double DiscreteCurve::curvature(int i) const {
    Vec2 a = point(i) - point(i - 1);
    Vec2 b = point(i + 1) - point(i);
    Vec2 c = point(i + 1) - point(i - 1);
    double denom = a.norm() * b.norm() * c.norm();
    if (denom == 0.0) throw geometry_error("curvature: coincident vertices");
    return 2.0 * a.cross(b) / denom;
}

double DiscreteCurve::edge_length(int i) const { return (point(i + 1) - point(i)).norm(); }

double DiscreteCurve::arclength_weight(int i) const {
    return 0.5 * (edge_length(i - 1) + edge_length(i));
}

double DiscreteCurve::total_length() const {
    double L = 0.0;
    for (int i = 0; i < size(); ++i) L += edge_length(i);
    return L;
}

double DiscreteCurve::min_edge_length() const {
    double m = edge_length(0);
    for (int i = 1; i < size(); ++i) m = std::min(m, edge_length(i));
    return m;
}

double DiscreteCurve::signed_area() const {
    double a = 0.0;
    for (int i = 0; i < size(); ++i) a += point(i).cross(point(i + 1));
    return 0.5 * a;
}

double DiscreteCurve::diameter() const {
    Vec2 lo = pts_[0], hi = pts_[0];
    for (const Vec2& p : pts_) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    return (hi - lo).norm();
}

bool segments_intersect(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
    auto orient = [](Vec2 p, Vec2 q, Vec2 r) { return (q - p).cross(r - p); };
    double d1 = orient(a0, a1, b0);
    double d2 = orient(a0, a1, b1);
    double d3 = orient(b0, b1, a0);
    double d4 = orient(b0, b1, a1);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
        ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on_segment = [](Vec2 p, Vec2 q, Vec2 r) {
        return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) &&
               std::min(p.y, q.y) <= r.y && r.y <= std::max(p.y, q.y);
    };
    if (d1 == 0 && on_segment(a0, a1, b0)) return true;
    if (d2 == 0 && on_segment(a0, a1, b1)) return true;
    if (d3 == 0 && on_segment(b0, b1, a0)) return true;
    if (d4 == 0 && on_segment(b0, b1, a1)) return true;
    return false;
}

bool DiscreteCurve::is_embedded() const {
    const int n = size();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 2; j < n; ++j) {
            if (i == 0 && j == n - 1) continue; // adjacent through the wrap
            if (segments_intersect(point(i), point(i + 1), point(j), point(j + 1))) return false;
        }
    }
    return true;
}

bool DiscreteCurve::is_embedded_fast() const {
    const int n = size();
    double max_len = 0.0;
    Vec2 lo = pts_[0], hi = pts_[0];
    for (int i = 0; i < n; ++i) {
        max_len = std::max(max_len, edge_length(i));
        lo.x = std::min(lo.x, pts_[i].x);
        lo.y = std::min(lo.y, pts_[i].y);
        hi.x = std::max(hi.x, pts_[i].x);
        hi.y = std::max(hi.y, pts_[i].y);
    }
    double cell = 2.0 * max_len;
    if (cell <= 0.0) return false;
    int nx = std::max(1, static_cast<int>((hi.x - lo.x) / cell) + 1);
    int ny = std::max(1, static_cast<int>((hi.y - lo.y) / cell) + 1);

    std::vector<std::vector<int>> bins(static_cast<std::size_t>(nx) * ny);
    auto cells_of = [&](int seg, int& cx0, int& cy0, int& cx1, int& cy1) {
        Vec2 a = point(seg), b = point(seg + 1);
        cx0 = std::clamp(static_cast<int>((std::min(a.x, b.x) - lo.x) / cell), 0, nx - 1);
        cy0 = std::clamp(static_cast<int>((std::min(a.y, b.y) - lo.y) / cell), 0, ny - 1);
        cx1 = std::clamp(static_cast<int>((std::max(a.x, b.x) - lo.x) / cell), 0, nx - 1);
        cy1 = std::clamp(static_cast<int>((std::max(a.y, b.y) - lo.y) / cell), 0, ny - 1);
    };
    for (int i = 0; i < n; ++i) {
        int cx0, cy0, cx1, cy1;
        cells_of(i, cx0, cy0, cx1, cy1);
        for (int cx = cx0; cx <= cx1; ++cx)
            for (int cy = cy0; cy <= cy1; ++cy)
                bins[static_cast<std::size_t>(cy) * nx + cx].push_back(i);
    }
    auto adjacent = [n](int i, int j) {
        int d = std::abs(i - j);
        return d <= 1 || d == n - 1;
    };
    for (const auto& bin : bins) {
        for (std::size_t u = 0; u < bin.size(); ++u) {
            for (std::size_t v = u + 1; v < bin.size(); ++v) {
                int i = bin[u], j = bin[v];
                if (adjacent(i, j)) continue;
                if (segments_intersect(point(i), point(i + 1), point(j), point(j + 1)))
                    return false;
            }
        }
    }
    return true;
}

DiscreteCurve DiscreteCurve::remeshed(int n) const {
    const int m = size();
    std::vector<double> s(m + 1, 0.0);
    for (int i = 0; i < m; ++i) s[i + 1] = s[i] + edge_length(i);
    const double L = s[m];

    // periodic Catmull-Rom over cumulative chord length
    auto cum = [&](int j) {
        int q = j / m, r = j % m;
        if (r < 0) {
            r += m;
            --q;
        }
        return s[r] + L * q;
    };
    auto slope = [&](int i) {
        double ds = cum(i + 1) - cum(i - 1);
        Vec2 dp = point(i + 1) - point(i - 1);
        return dp * (1.0 / ds);
    };

    std::vector<Vec2> out(n);
    int seg = 0;
    for (int j = 0; j < n; ++j) {
        double target = L * j / n;
        while (seg + 1 <= m && s[seg + 1] < target) ++seg;
        double h = s[seg + 1] - s[seg];
        double t = h > 0.0 ? (target - s[seg]) / h : 0.0;
        Vec2 p0 = point(seg), p1 = point(seg + 1);
        Vec2 m0 = slope(seg) * h, m1 = slope(seg + 1) * h;
        double t2 = t * t, t3 = t2 * t;
        out[j] = p0 * (2 * t3 - 3 * t2 + 1) + m0 * (t3 - 2 * t2 + t) + p1 * (-2 * t3 + 3 * t2) +
                 m1 * (t3 - t2);
    }
    return DiscreteCurve(std::move(out));
}

void DiscreteCurve::write_csv(std::ostream& os) const {
    char buf[96];
    for (const Vec2& p : pts_) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
        os << buf;
    }
}

DiscreteCurve DiscreteCurve::read_csv(std::istream& is) {
    std::vector<Vec2> pts;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        Vec2 p;
        if (!(ls >> p.x >> p.y)) throw std::invalid_argument("curve csv: bad row: " + line);
        pts.push_back(p);
    }
    return DiscreteCurve(std::move(pts));
}

} // namespace exflow
