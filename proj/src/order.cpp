#include "wotkit/order.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "wotkit/error.hpp"
#include "wotkit/oracle.hpp"

namespace wotkit {

namespace {

constexpr double kOrderTol = 1e-10;
constexpr double kInteriorTol = 1e-12;

double call_price(const DiscreteMeasure& m, double strike) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.weight(i) * std::max(m.x(i) - strike, 0.0);
    return s;
}

struct P2 {
    double x, y;
};

double cross(const P2& o, const P2& a, const P2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Andrew's monotone chain; counter-clockwise, no repeated endpoint.
std::vector<P2> convex_hull(std::vector<P2> pts) {
    std::sort(pts.begin(), pts.end(),
              [](const P2& a, const P2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    if (pts.size() < 3) return pts;
    std::vector<P2> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
        h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
        h[k++] = pts[i];
    }
    h.resize(k - 1);
    return h;
}

double segment_distance(const P2& p, const P2& a, const P2& b) {
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

}  // namespace

OrderReport convex_order_1d(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("convex_order_1d needs 1D measures");
    OrderReport rep;
    rep.mean_gap = nu.mean()[0] - mu.mean()[0];

    std::vector<double> strikes(mu.coords());
    strikes.insert(strikes.end(), nu.coords().begin(), nu.coords().end());
    std::sort(strikes.begin(), strikes.end());

    rep.margin = std::numeric_limits<double>::infinity();
    for (double k : strikes) {
        const double m = call_price(nu, k) - call_price(mu, k);
        if (m < rep.margin) {
            rep.margin = m;
            rep.worst_test_point = k;
        }
    }
    rep.convex_order = std::abs(rep.mean_gap) <= kOrderTol && rep.margin >= -kOrderTol;
    return rep;
}

NondegeneracyReport nondegeneracy_check(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
    if (mu.dim() != nu.dim()) throw DimensionError("nondegeneracy_check: dimension mismatch");
    NondegeneracyReport rep;
    rep.distance = std::numeric_limits<double>::infinity();
    if (mu.dim() == 1) {
        const auto [lo, hi] = std::minmax_element(nu.coords().begin(), nu.coords().end());
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (mu.weight(i) <= 0.0) continue;
            rep.distance = std::min(rep.distance, std::min(mu.x(i) - *lo, *hi - mu.x(i)));
        }
    } else if (mu.dim() == 2) {
        std::vector<P2> pts;
        for (std::size_t j = 0; j < nu.size(); ++j) {
            if (nu.weight(j) > 0.0) pts.push_back({nu.point(j)[0], nu.point(j)[1]});
        }
        const auto hull = convex_hull(pts);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            if (mu.weight(i) <= 0.0) continue;
            const P2 p{mu.point(i)[0], mu.point(i)[1]};
            double d = std::numeric_limits<double>::infinity();
            if (hull.size() < 3) {
                // Flat hull: no interior. Report minus the distance to it.
                for (std::size_t k = 0; k < hull.size(); ++k) {
                    d = std::min(d, segment_distance(p, hull[k], hull[(k + 1) % hull.size()]));
                }
                d = -d;
            } else {
                for (std::size_t k = 0; k < hull.size(); ++k) {
                    const P2& a = hull[k];
                    const P2& b = hull[(k + 1) % hull.size()];
                    const double signed_dist = cross(a, b, p) / std::hypot(b.x - a.x, b.y - a.y);
                    d = std::min(d, signed_dist);
                }
            }
            rep.distance = std::min(rep.distance, d);
        }
    } else {
        throw DimensionError("nondegeneracy_check supports d = 1 or d = 2");
    }
    rep.ok = rep.distance > kInteriorTol;
    return rep;
}

IrreducibilityReport irreducibility_probe(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                          double floor) {
    if (mu.dim() != 1 || nu.dim() != 1) throw DimensionError("irreducibility_probe needs 1D measures");
    if (!(floor >= 0.0) || floor >= 1.0) throw InvalidArgument("floor must lie in [0, 1)");
    if (mu.size() * nu.size() > kOracleVariableCap) {
        throw SizeLimit("irreducibility probe exceeds oracle cap");
    }
    Tensor3 g(mu.size(), nu.size(), 1);
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t j = 0; j < nu.size(); ++j) g(i, j, 0) = nu.x(j) - mu.x(i);
    }
    // Any objective works for feasibility; zero keeps phase two trivial.
    IrreducibilityReport rep;
    try {
        auto res = solve_moment_lp(mu, nu, Matrix(mu.size(), nu.size()), g, floor);
        rep.feasible = true;
        rep.witness = std::move(res.plan);
    } catch (const Infeasible&) {
        rep.feasible = false;
    }
    return rep;
}

MedianResult median(const Matrix& alpha, const std::vector<double>& weights) {
    if (alpha.rows() != weights.size()) throw InvalidArgument("median: weights size mismatch");
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw InvalidArgument("median: negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("median: weights must sum to 1");

    MedianResult res;
    res.a.resize(alpha.cols());
    std::vector<std::size_t> order(alpha.rows());
    for (std::size_t k = 0; k < alpha.cols(); ++k) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return alpha(a, k) < alpha(b, k); });
        double cum = 0.0;
        res.a[k] = alpha(order.back(), k);
        for (std::size_t idx : order) {
            cum += weights[idx];
            if (weights[idx] > 0.0 && cum >= 0.5 - 1e-12) {
                res.a[k] = alpha(idx, k);
                break;
            }
        }
    }
    for (std::size_t i = 0; i < alpha.rows(); ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < alpha.cols(); ++k) s += std::abs(alpha(i, k) - res.a[k]);
        res.l1_value += weights[i] * s;
    }
    return res;
}

}  // namespace wotkit
