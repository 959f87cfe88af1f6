#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "support.hpp"
#include "wotkit/error.hpp"
#include "wotkit/instances.hpp"
#include "wotkit/order.hpp"

using namespace wotkit;
using namespace wotkit::testing;

namespace {

auto two_point() { return DiscreteMeasure::from_1d({-1.0, 1.0}, {0.5, 0.5}); }

double l1_objective(const Matrix& a, const std::vector<double>& w, const std::vector<double>& c) {
    double v = 0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) v += w[i] * std::abs(a(i, k) - c[k]);
    return v;
}

}  // namespace

TEST_CASE("convex order") {
    auto d0 = DiscreteMeasure::dirac({0.0});
    CHECK(convex_order_1d(d0, two_point()).convex_order);
    auto rev = convex_order_1d(two_point(), d0);
    CHECK_FALSE(rev.convex_order);
    CHECK(rev.margin < 0);
    CHECK(rev.worst_test_point == doctest::Approx(0.0));
    auto same = convex_order_1d(two_point(), two_point());
    CHECK(same.convex_order);
    CHECK(same.margin == doctest::Approx(0.0));

    auto shifted = DiscreteMeasure::dirac({0.5});
    auto r = convex_order_1d(shifted, two_point());
    CHECK_FALSE(r.convex_order);
    CHECK(r.mean_gap == doctest::Approx(-0.5));

    std::mt19937_64 rng(50);
    for (int trial = 0; trial < 50; ++trial) {
        auto [mu, nu] = random_martingale_pair(1 + rng() % 5, 2 + rng() % 5, rng);
        CHECK(convex_order_1d(mu, nu).convex_order);
    }
}

TEST_CASE("nondegeneracy") {
    auto r = nondegeneracy_check(DiscreteMeasure::dirac({0.0}), two_point());
    CHECK(r.ok);
    CHECK(r.distance == doctest::Approx(1.0));
    CHECK_FALSE(nondegeneracy_check(DiscreteMeasure::dirac({1.0}), two_point()).ok);
    CHECK_FALSE(nondegeneracy_check(DiscreteMeasure::dirac({2.0}), two_point()).ok);

    DiscreteMeasure corners(2, {-1, -1, -1, 1, 1, -1, 1, 1}, {1, 1, 1, 1});
    auto r2 = nondegeneracy_check(DiscreteMeasure::dirac({0.0, 0.0}), corners);
    CHECK(r2.ok);
    CHECK(r2.distance == doctest::Approx(1.0));
    auto r3 = nondegeneracy_check(DiscreteMeasure::dirac({0.5, 0.25}), corners);
    CHECK(r3.distance == doctest::Approx(0.5));
    CHECK_FALSE(nondegeneracy_check(DiscreteMeasure::dirac({1.0, 0.0}), corners).ok);
}

TEST_CASE("irreducibility probe") {
    auto r = irreducibility_probe(DiscreteMeasure::dirac({0.0}), two_point(), 0.1);
    REQUIRE(r.feasible);
    REQUIRE(r.witness);
    CHECK((*r.witness)(0, 0) == doctest::Approx(0.5));
    CHECK((*r.witness)(0, 1) == doctest::Approx(0.5));
    CHECK_FALSE(irreducibility_probe(two_point(), two_point(), 0.1).feasible);
    CHECK_FALSE(irreducibility_probe(two_point(), DiscreteMeasure::dirac({0.0}), 0.0).feasible);

    std::mt19937_64 rng(51);
    for (int trial = 0; trial < 30; ++trial) {
        auto [mu, nu] = random_equal_mean_pair(1 + rng() % 4, 1 + rng() % 5, rng);
        if (!convex_order_1d(mu, nu).convex_order) CHECK_FALSE(irreducibility_probe(mu, nu, 0.0).feasible);
    }
}

TEST_CASE("median") {
    Matrix c(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        c(i, 0) = 1.5;
        c(i, 1) = -2;
    }
    auto m = median(c, {0.1, 0.2, 0.3, 0.4});
    CHECK(m.a[0] == 1.5);
    CHECK(m.a[1] == -2);
    CHECK(m.l1_value == 0.0);

    Matrix a(3, 1);
    a(0, 0) = 1;
    a(1, 0) = 2;
    a(2, 0) = 100;
    auto r = median(a, {1.0 / 3, 1.0 / 3, 1.0 / 3});
    CHECK(r.a[0] == 2);
    CHECK(r.l1_value == doctest::Approx(33.0));

    Matrix b(2, 1);
    b(0, 0) = 0;
    b(1, 0) = 1;
    auto t = median(b, {0.5, 0.5});
    CHECK(t.a[0] == 0);
    CHECK(t.l1_value == doctest::Approx(0.5));

    std::mt19937_64 rng(52);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng() % 9, d = 1 + rng() % 3;
        Matrix x(n, d);
        for (double& v : x.data()) v = uniform(rng, -5, 5);
        std::vector<double> w(n);
        double total = 0;
        for (double& v : w) total += (v = uniform(rng, 0.01, 1));
        for (double& v : w) v /= total;
        auto res = median(x, w);
        CHECK(res.l1_value == doctest::Approx(l1_objective(x, w, res.a)).epsilon(1e-12));
        // The objective is piecewise linear per coordinate with kinks at the
        // data, so the best data point is a global minimizer.
        for (std::size_t k = 0; k < d; ++k) {
            double best = 1e300;
            for (std::size_t i = 0; i < n; ++i) {
                double v = 0;
                for (std::size_t l = 0; l < n; ++l) v += w[l] * std::abs(x(l, k) - x(i, k));
                best = std::min(best, v);
            }
            double got = 0;
            for (std::size_t l = 0; l < n; ++l) got += w[l] * std::abs(x(l, k) - res.a[k]);
            CHECK(got <= best + 1e-12);
        }
        for (int probe = 0; probe < 5; ++probe) {
            std::vector<double> c2(d);
            for (double& v : c2) v = uniform(rng, -6, 6);
            CHECK(res.l1_value <= l1_objective(x, w, c2) + 1e-12);
        }
    }
}
