#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "support.hpp"
#include "wotkit/error.hpp"
#include "wotkit/instances.hpp"
#include "wotkit/sliced.hpp"

using namespace wotkit;
using namespace wotkit::testing;

namespace {

// Direct construction in 1D: pi_delta(i, j) = pi_i(Q) nu_j / nu(Q), Q the cell of y_j.
Matrix sliced_oracle(const Coupling& pi, double delta) {
    const auto& nu = pi.col_measure();
    std::map<long long, double> cell_nu;
    std::vector<long long> cell(nu.size());
    for (std::size_t j = 0; j < nu.size(); ++j) {
        cell[j] = static_cast<long long>(std::floor(nu.x(j) / delta));
        cell_nu[cell[j]] += nu.weight(j);
    }
    Matrix out(pi.rows(), pi.cols());
    for (std::size_t i = 0; i < pi.rows(); ++i) {
        std::map<long long, double> row_mass;
        for (std::size_t j = 0; j < nu.size(); ++j) row_mass[cell[j]] += pi(i, j);
        for (std::size_t j = 0; j < nu.size(); ++j) out(i, j) = row_mass[cell[j]] * nu.weight(j) / cell_nu[cell[j]];
    }
    return out;
}

}  // namespace

TEST_CASE("grid cells") {
    SlicedGrid g(0.5);
    std::vector<double> p = {0.74, -0.1};
    auto c = g.cell_of(p);
    CHECK(c[0] == 1);
    CHECK(c[1] == -1);
    std::vector<double> edge = {1.5 - 1e-15};
    CHECK(g.cell_of(edge)[0] == 3);
    CHECK_THROWS_AS(SlicedGrid(0.0), DomainError);
}

TEST_CASE("sliced approximation examples") {
    std::mt19937_64 rng(40);
    auto mu = random_measure_1d(5, 0, 1, rng);
    auto nu = random_measure_1d(6, 0.01, 0.99, rng);

    SUBCASE("one cell gives the product") {
        auto pi = random_coupling(mu, nu, rng);
        auto s = sliced_approximation(pi, 5.0);
        CHECK(max_abs_diff(s.matrix(), Coupling::product(mu, nu).matrix()) < 1e-15);
    }
    SUBCASE("product is fixed") {
        auto prod = Coupling::product(mu, nu);
        for (double d : {0.1, 0.3, 0.5}) CHECK(max_abs_diff(sliced_approximation(prod, d).matrix(), prod.matrix()) < 1e-15);
    }
    SUBCASE("matches direct construction and is idempotent") {
        for (int trial = 0; trial < 20; ++trial) {
            auto m = random_measure_1d(4, -2, 2, rng);
            auto n = random_measure_1d(9, -2, 2, rng);
            auto pi = random_coupling(m, n, rng);
            for (double d : {0.5, 0.2, 0.1}) {
                auto s = sliced_approximation(pi, d);
                CHECK(max_abs_diff(s.matrix(), sliced_oracle(pi, d)) < 1e-15);
                CHECK(max_abs_diff(sliced_approximation(s, d).matrix(), s.matrix()) < 1e-15);
                CHECK(s.marginal_residual() <= 1e-12);
            }
        }
    }
}

TEST_CASE("sliced guarantees on random couplings") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        auto mu = random_measure_1d(1 + rng() % 6, -1, 1, rng);
        auto nu = random_measure_1d(1 + rng() % 12, -1, 1.5, rng);
        auto pi = random_coupling(mu, nu, rng);
        for (double d : {0.5, 0.2, 0.1}) {
            auto s = sliced_approximation(pi, d);
            double row_err = 0, col_err = 0;
            auto r = s.row_sums();
            auto c = s.col_sums();
            for (std::size_t i = 0; i < r.size(); ++i) row_err = std::max(row_err, std::abs(r[i] - mu.weight(i)));
            for (std::size_t j = 0; j < c.size(); ++j) col_err = std::max(col_err, std::abs(c[j] - nu.weight(j)));
            CHECK(row_err <= 1e-12);
            CHECK(col_err <= 1e-12);
            CHECK(relative_entropy(s).get() <= sliced_entropy_bound(d, 1, nu.diameter_inf()) + 1e-12);
            std::vector<double> ys(nu.size());
            for (std::size_t j = 0; j < nu.size(); ++j) ys[j] = nu.x(j);
            for (std::size_t i = 0; i < mu.size(); ++i) {
                std::vector<double> p(nu.size()), q(nu.size());
                for (std::size_t j = 0; j < nu.size(); ++j) {
                    p[j] = pi(i, j) / mu.weight(i);
                    q[j] = s(i, j) / mu.weight(i);
                }
                CHECK(w_infinity_distance_1d(ys, p, q) <= d + 1e-12);
            }
        }
    }
}

TEST_CASE("entropy bound values") {
    CHECK(sliced_entropy_bound(0.5, 1, 1.0) == doctest::Approx(2 * std::log(2.0)));
    CHECK(sliced_entropy_bound(0.5, 1, 1.0) == doctest::Approx(1.3863).epsilon(1e-4));
    CHECK(sliced_entropy_bound(0.1, 2, 1.0) == doctest::Approx(5.9915).epsilon(1e-4));
    for (double d : {0.999999, 0.9, 0.5, 0.01})
        for (double diam : {0.0, 0.3, 7.0}) CHECK(sliced_entropy_bound(d, 1, diam) >= 0.0);
    CHECK_THROWS_AS(sliced_entropy_bound(1.5, 1, 1.0), DomainError);
}
