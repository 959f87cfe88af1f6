#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "support.hpp"
#include "wotkit/error.hpp"
#include "wotkit/instances.hpp"
#include "wotkit/measures.hpp"

using namespace wotkit;

namespace {

// W1 in 1D as the integral of |F_p - F_q| over the merged support.
double w1_by_cdf(const DiscreteMeasure& p, const DiscreteMeasure& q) {
    std::vector<double> xs;
    for (std::size_t i = 0; i < p.size(); ++i) xs.push_back(p.x(i));
    for (std::size_t i = 0; i < q.size(); ++i) xs.push_back(q.x(i));
    std::sort(xs.begin(), xs.end());
    auto cdf = [](const DiscreteMeasure& m, double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.x(i) <= t) s += m.weight(i);
        return s;
    };
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < xs.size(); ++k) total += std::abs(cdf(p, xs[k]) - cdf(q, xs[k])) * (xs[k + 1] - xs[k]);
    return total;
}

Coupling diagonal(std::size_t n) {
    std::vector<double> pts(n);
    std::iota(pts.begin(), pts.end(), 0.0);
    auto m = DiscreteMeasure::uniform_1d(pts);
    Matrix mass(n, n);
    for (std::size_t i = 0; i < n; ++i) mass(i, i) = 1.0 / n;
    return Coupling(m, m, mass);
}

}  // namespace

TEST_CASE("measure construction normalizes and merges") {
    auto m = DiscreteMeasure::from_1d({0.0, 1.0, 1.0 + 1e-14}, {1.0, 1.0, 2.0});
    CHECK(m.size() == 2);
    CHECK(m.weight(0) == doctest::Approx(0.25));
    CHECK(m.weight(1) == doctest::Approx(0.75));
    CHECK_THROWS_AS(DiscreteMeasure::from_1d({0.0}, {-1.0}), InvalidArgument);
    CHECK_THROWS_AS(DiscreteMeasure::from_1d({0.0, 1.0}, {1.0}), Error);
}

TEST_CASE("disintegration") {
    std::mt19937_64 rng(1);
    auto mu = random_measure_1d(4, -1, 1, rng);
    auto nu = random_measure_1d(5, -1, 1, rng);

    SUBCASE("product coupling gives the second marginal") {
        auto pi = Coupling::product(mu, nu);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            auto c = disintegrate(pi, i);
            for (std::size_t j = 0; j < nu.size(); ++j) CHECK(c.weight(j) == doctest::Approx(nu.weight(j)).epsilon(1e-14));
        }
    }
    SUBCASE("diagonal coupling gives Diracs") {
        auto pi = diagonal(4);
        for (std::size_t i = 0; i < 4; ++i) {
            auto c = disintegrate(pi, i);
            CHECK(c.weight(i) == doctest::Approx(1.0));
        }
    }
    SUBCASE("random coupling rows divided by mu") {
        auto pi = random_coupling(mu, nu, rng);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            auto c = disintegrate(pi, i);
            double s = 0.0;
            for (std::size_t j = 0; j < nu.size(); ++j) {
                s += c.weight(j);
                CHECK(c.weight(j) == doctest::Approx(pi(i, j) / pi.row_sums()[i]).epsilon(1e-12));
            }
            CHECK(s == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
    SUBCASE("zero mass row") {
        Matrix mass(2, 2);
        mass(0, 0) = 0.5;
        mass(0, 1) = 0.5;
        auto a = DiscreteMeasure::from_1d({0.0, 1.0}, {0.5, 0.5});
        Coupling pi(a, a, mass);
        CHECK_THROWS_AS(disintegrate(pi, 1), ZeroMassRow);
    }
}

TEST_CASE("relative entropy") {
    std::mt19937_64 rng(2);
    auto mu = random_measure_1d(5, -1, 1, rng);
    auto nu = random_measure_1d(6, -1, 1, rng);
    CHECK(relative_entropy(Coupling::product(mu, nu)).get() == doctest::Approx(0.0).epsilon(1e-14));
    for (std::size_t n : {2u, 5u, 17u}) CHECK(relative_entropy(diagonal(n)).get() == doctest::Approx(std::log(double(n))));

    SUBCASE("infinite when the reference vanishes") {
        auto a = DiscreteMeasure::from_1d({0.0, 1.0}, {1.0, 0.0});
        auto b = DiscreteMeasure::from_1d({0.0, 1.0}, {1.0, 1.0});
        Matrix mass(2, 2);
        mass(0, 0) = 0.5;
        mass(1, 1) = 0.5;
        CHECK(relative_entropy(Coupling(a, b, mass)).infinite);
        CHECK(std::isinf(relative_entropy(Coupling(a, b, mass)).get()));
        mass(1, 1) = 0.0;
        mass(0, 1) = 0.5;
        CHECK_FALSE(relative_entropy(Coupling(a, b, mass)).infinite);
    }
    SUBCASE("convex along segments and nonnegative") {
        for (int trial = 0; trial < 50; ++trial) {
            auto p = random_coupling(mu, nu, rng);
            auto q = random_coupling(mu, nu, rng);
            const double t = uniform01(rng);
            Matrix mid(mu.size(), nu.size());
            for (std::size_t k = 0; k < mid.size(); ++k)
                mid.data()[k] = t * p.matrix().data()[k] + (1 - t) * q.matrix().data()[k];
            const double hp = relative_entropy(p).get(), hq = relative_entropy(q).get();
            const double hm = relative_entropy(Coupling(mu, nu, mid)).get();
            CHECK(hm <= t * hp + (1 - t) * hq + 1e-12);
            CHECK(hp >= -1e-14);
        }
    }
}

TEST_CASE("wasserstein distances in 1D") {
    auto d0 = DiscreteMeasure::dirac({0.0});
    auto d1 = DiscreteMeasure::dirac({1.0});
    CHECK(w1_distance_1d(d0, d0) == 0.0);
    CHECK(w1_distance_1d(d0, d1) == doctest::Approx(1.0));
    CHECK(w_infinity_distance_1d(d0, d1) == doctest::Approx(1.0));
    CHECK(w1_distance_1d(DiscreteMeasure::uniform_1d({0, 1}), DiscreteMeasure::uniform_1d({0, 2})) ==
          doctest::Approx(0.5));
    CHECK(w_infinity_distance_1d(DiscreteMeasure::uniform_1d({0, 1}), DiscreteMeasure::uniform_1d({0.2, 1.3})) ==
          doctest::Approx(0.3));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto p = random_measure_1d(1 + rng() % 7, -2, 2, rng);
        auto q = random_measure_1d(1 + rng() % 7, -2, 2, rng);
        const double w1 = w1_distance_1d(p, q);
        CHECK(w1 == doctest::Approx(w1_by_cdf(p, q)).epsilon(1e-10));
        CHECK(w1 <= w_infinity_distance_1d(p, q) + 1e-12);
        CHECK(w1_distance_1d(p, p) == doctest::Approx(0.0));
    }
}

TEST_CASE("shared-support distances match measure distances") {
    std::mt19937_64 rng(4);
    std::vector<double> pts = {0.3, -1.0, 2.0, 0.7};
    std::vector<double> p = {0.1, 0.4, 0.2, 0.3}, q = {0.25, 0.25, 0.25, 0.25};
    auto mp = DiscreteMeasure::from_1d(pts, p), mq = DiscreteMeasure::from_1d(pts, q);
    CHECK(w1_distance_1d(pts, p, q) == doctest::Approx(w1_distance_1d(mp, mq)));
    CHECK(w_infinity_distance_1d(pts, p, q) == doctest::Approx(w_infinity_distance_1d(mp, mq)));
}

TEST_CASE("coupling marginals") {
    std::mt19937_64 rng(5);
    auto mu = random_measure_1d(6, 0, 1, rng);
    auto nu = random_measure_1d(4, 0, 1, rng);
    auto pi = random_coupling(mu, nu, rng);
    CHECK(pi.marginal_residual() < 1e-14);
    CHECK(pi.total_mass() == doctest::Approx(1.0));
    CHECK_NOTHROW(pi.check_marginals(1e-12));
    Matrix bad = pi.matrix();
    bad(0, 0) += 1e-3;
    CHECK_THROWS_AS(Coupling(mu, nu, bad).check_marginals(1e-6), MarginalMismatch);
    CHECK_THROWS_AS(Coupling(mu, nu, Matrix(2, 2)), InvalidArgument);
}

TEST_CASE("measure csv round trip") {
    DiscreteMeasure m(2, {0.0, 1.0, 2.5, -3.0, 1e-3, 7.0}, {0.2, 0.3, 0.5});
    std::stringstream ss;
    write_measure_csv(ss, m);
    auto back = read_measure_csv(ss);
    REQUIRE(back.size() == 3);
    CHECK(back.dim() == 2);
    for (std::size_t k = 0; k < m.coords().size(); ++k) CHECK(back.coords()[k] == m.coords()[k]);
    for (std::size_t i = 0; i < 3; ++i) CHECK(back.weight(i) == doctest::Approx(m.weight(i)).epsilon(1e-15));

    std::stringstream bad("x,w\n1.0,abc\n");
    CHECK_THROWS_AS(read_measure_csv(bad), ParseError);
}
