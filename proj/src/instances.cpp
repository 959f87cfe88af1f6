#include "wotkit/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include "wotkit/error.hpp"

namespace wotkit {

namespace {

std::vector<double> random_weights(std::size_t n, std::mt19937_64& rng) {
    std::vector<double> w(n);
    for (double& v : w) v = 0.2 + uniform01(rng);
    return w;
}

// North-west corner coupling of mu and nu visited in the given orders.
Matrix northwest_corner(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                        const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) {
    Matrix m(mu.size(), nu.size());
    std::size_t a = 0, b = 0;
    double ra = mu.weight(rows[0]), rb = nu.weight(cols[0]);
    while (a < rows.size() && b < cols.size()) {
        const double step = std::min(ra, rb);
        m(rows[a], cols[b]) += step;
        ra -= step;
        rb -= step;
        if (ra <= rb) {
            if (++a < rows.size()) ra += mu.weight(rows[a]);
        } else {
            if (++b < cols.size()) rb += nu.weight(cols[b]);
        }
    }
    return m;
}

}  // namespace

DiscreteMeasure normal_quantile_grid(std::size_t n, double mean, double sd) {
    if (n == 0) throw InvalidArgument("grid needs at least one point");
    const boost::math::normal_distribution<double> law(mean, sd);
    std::vector<double> pts(n);
    for (std::size_t k = 0; k < n; ++k) {
        pts[k] = boost::math::quantile(law, (static_cast<double>(k) + 0.5) / static_cast<double>(n));
    }
    return DiscreteMeasure::uniform_1d(std::move(pts));
}

DiscreteMeasure bimodal_quantile_grid(std::size_t n) {
    if (n == 0) throw InvalidArgument("grid needs at least one point");
    const boost::math::normal_distribution<double> std_normal;
    auto cdf = [&](double t) {
        return 0.5 * boost::math::cdf(std_normal, t + 1.0) + 0.5 * boost::math::cdf(std_normal, t - 1.0);
    };
    std::vector<double> pts(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double level = (static_cast<double>(k) + 0.5) / static_cast<double>(n);
        boost::math::tools::eps_tolerance<double> tol(52);
        std::uintmax_t max_iter = 200;
        const auto [lo, hi] = boost::math::tools::toms748_solve(
            [&](double t) { return cdf(t) - level; }, -40.0, 40.0, tol, max_iter);
        pts[k] = 0.5 * (lo + hi);
    }
    return DiscreteMeasure::uniform_1d(std::move(pts));
}

DiscreteMeasure random_measure_1d(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
    std::vector<double> pts(n);
    for (double& p : pts) p = uniform(rng, lo, hi);
    return DiscreteMeasure::from_1d(std::move(pts), random_weights(n, rng));
}

std::pair<DiscreteMeasure, DiscreteMeasure> random_martingale_pair(std::size_t nx, std::size_t ny,
                                                                   std::mt19937_64& rng) {
    if (nx == 0 || ny < 2) throw InvalidArgument("martingale pair needs nx >= 1 and ny >= 2");
    std::vector<double> y(ny);
    for (double& v : y) v = uniform(rng, -1.0, 1.0);
    auto wy = random_weights(ny, rng);
    const double total = std::accumulate(wy.begin(), wy.end(), 0.0);
    for (double& w : wy) w /= total;

    Matrix p(nx, ny);
    for (std::size_t j = 0; j < ny; ++j) {
        double col = 0.0;
        for (std::size_t i = 0; i < nx; ++i) col += (p(i, j) = 0.2 + uniform01(rng));
        for (std::size_t i = 0; i < nx; ++i) p(i, j) *= wy[j] / col;
    }
    std::vector<double> x(nx), wx(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        double r = 0.0, m = 0.0;
        for (std::size_t j = 0; j < ny; ++j) {
            r += p(i, j);
            m += p(i, j) * y[j];
        }
        wx[i] = r;
        x[i] = m / r;
    }
    return {DiscreteMeasure::from_1d(std::move(x), std::move(wx)),
            DiscreteMeasure::from_1d(std::move(y), std::move(wy))};
}

std::pair<DiscreteMeasure, DiscreteMeasure> random_equal_mean_pair(std::size_t nx, std::size_t ny,
                                                                   std::mt19937_64& rng) {
    const double spread_mu = uniform(rng, 0.2, 1.5);
    const double spread_nu = uniform(rng, 0.2, 1.5);
    auto mu = random_measure_1d(nx, -spread_mu, spread_mu, rng);
    auto nu = random_measure_1d(ny, -spread_nu, spread_nu, rng);
    const double shift = mu.mean()[0] - nu.mean()[0];
    std::vector<double> y = nu.coords();
    for (double& v : y) v += shift;
    return {std::move(mu), DiscreteMeasure::from_1d(std::move(y), nu.weights())};
}

Coupling random_coupling(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::mt19937_64& rng) {
    // Convex mixture of north-west corner couplings for random visiting
    // orders; every piece has exact marginals, so the mixture does too.
    Matrix mix(mu.size(), nu.size());
    std::vector<std::size_t> rows(mu.size()), cols(nu.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    constexpr int kPieces = 3;
    std::vector<double> coef(kPieces);
    double total = 0.0;
    for (double& c : coef) total += (c = 0.1 + uniform01(rng));
    for (int k = 0; k < kPieces; ++k) {
        for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng() % i]);
        for (std::size_t j = cols.size(); j > 1; --j) std::swap(cols[j - 1], cols[rng() % j]);
        const Matrix piece = northwest_corner(mu, nu, rows, cols);
        for (std::size_t t = 0; t < mix.size(); ++t) mix.data()[t] += coef[k] / total * piece.data()[t];
    }
    return Coupling(mu, nu, std::move(mix));
}

}  // namespace wotkit
