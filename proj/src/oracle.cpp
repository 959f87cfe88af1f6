#include "wotkit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "wotkit/error.hpp"

namespace wotkit {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kReducedCostTol = 1e-11;
constexpr double kFeasibilityTol = 1e-9;

// Tableau with m constraint rows and one objective row. Columns are the
// structural variables, then one artificial per row, then the right-hand side.
class Tableau {
public:
    Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), t_(m + 1, n + m + 1), basis_(m) {}

    double& at(std::size_t r, std::size_t c) { return t_(r, c); }
    double at(std::size_t r, std::size_t c) const { return t_(r, c); }
    double& rhs(std::size_t r) { return t_(r, n_ + m_); }
    std::size_t& basis(std::size_t r) { return basis_[r]; }
    std::size_t basis(std::size_t r) const { return basis_[r]; }
    std::size_t total_cols() const { return n_ + m_; }

    void pivot(std::size_t pr, std::size_t pc) {
        const std::size_t width = n_ + m_ + 1;
        auto prow = t_.row(pr);
        const double p = prow[pc];
        for (std::size_t c = 0; c < width; ++c) prow[c] /= p;
        prow[pc] = 1.0;
        for (std::size_t r = 0; r <= m_; ++r) {
            if (r == pr) continue;
            auto row = t_.row(r);
            const double factor = row[pc];
            if (factor == 0.0) continue;
            for (std::size_t c = 0; c < width; ++c) row[c] -= factor * prow[c];
            row[pc] = 0.0;
        }
        basis_[pr] = pc;
        ++pivots_;
    }

    // Bland's rule iterations over columns [0, allowed). Returns false if
    // the problem is unbounded.
    bool run(std::size_t allowed) {
        for (;;) {
            std::size_t enter = allowed;
            for (std::size_t c = 0; c < allowed; ++c) {
                if (t_(m_, c) < -kReducedCostTol) {
                    enter = c;
                    break;
                }
            }
            if (enter == allowed) return true;

            std::size_t leave = m_;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t r = 0; r < m_; ++r) {
                const double a = t_(r, enter);
                if (a <= kPivotTol) continue;
                const double ratio = rhs(r) / a;
                if (leave == m_) {
                    best = ratio;
                    leave = r;
                    continue;
                }
                const double slack = 1e-12 * (1.0 + std::abs(best));
                if (ratio < best - slack) {
                    best = ratio;
                    leave = r;
                } else if (ratio <= best + slack && basis_[r] < basis_[leave]) {
                    best = std::min(best, ratio);
                    leave = r;
                }
            }
            if (leave == m_) return false;
            pivot(leave, enter);
        }
    }

    std::size_t pivots() const { return pivots_; }

private:
    std::size_t m_;
    std::size_t n_;
    Matrix t_;
    std::vector<std::size_t> basis_;
    std::size_t pivots_ = 0;
};

}  // namespace

LpSolution solve_lp(const LpProblem& lp) {
    const std::size_t n = lp.objective.size();
    const std::size_t m = lp.rhs.size();
    if (n > kOracleVariableCap) {
        throw SizeLimit("LP has " + std::to_string(n) + " variables, cap is " +
                        std::to_string(kOracleVariableCap));
    }
    if (lp.equality.rows() != m || lp.equality.cols() != n) {
        throw InvalidArgument("LP equality matrix shape mismatch");
    }
    if (!lp.lower.empty() && lp.lower.size() != n) throw InvalidArgument("LP lower bound size mismatch");
    for (double b : lp.rhs) {
        if (!std::isfinite(b)) throw InvalidArgument("LP right-hand side must be finite");
    }

    // Shift to x' = x - lower >= 0.
    std::vector<double> lower = lp.lower.empty() ? std::vector<double>(n, 0.0) : lp.lower;
    std::vector<double> b(m);
    for (std::size_t r = 0; r < m; ++r) {
        double s = lp.rhs[r];
        for (std::size_t c = 0; c < n; ++c) s -= lp.equality(r, c) * lower[c];
        b[r] = s;
    }

    Tableau tab(m, n);
    std::vector<double> sign(m, 1.0);
    for (std::size_t r = 0; r < m; ++r) {
        sign[r] = b[r] < 0.0 ? -1.0 : 1.0;
        for (std::size_t c = 0; c < n; ++c) tab.at(r, c) = sign[r] * lp.equality(r, c);
        tab.at(r, n + r) = 1.0;
        tab.rhs(r) = sign[r] * b[r];
        tab.basis(r) = n + r;
    }

    // Phase one: minimize the sum of artificials.
    for (std::size_t c = 0; c < n; ++c) {
        double s = 0.0;
        for (std::size_t r = 0; r < m; ++r) s += tab.at(r, c);
        tab.at(m, c) = -s;
    }
    double infeas = 0.0;
    for (std::size_t r = 0; r < m; ++r) infeas += tab.rhs(r);
    tab.rhs(m) = -infeas;
    tab.run(n);
    if (-tab.rhs(m) > kFeasibilityTol) {
        throw Infeasible("LP infeasible: phase-one residual " + std::to_string(-tab.rhs(m)));
    }

    // Drive degenerate artificials out of the basis; rows with no structural
    // entry are redundant and keep their artificial at zero.
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis(r) < n) continue;
        std::size_t best = n;
        double best_abs = 1e-9;
        for (std::size_t c = 0; c < n; ++c) {
            if (std::abs(tab.at(r, c)) > best_abs) {
                best_abs = std::abs(tab.at(r, c));
                best = c;
            }
        }
        if (best < n) tab.pivot(r, best);
    }

    // Phase two.
    auto cost_of = [&](std::size_t col) { return col < n ? lp.objective[col] : 0.0; };
    for (std::size_t c = 0; c < tab.total_cols(); ++c) {
        double s = cost_of(c);
        for (std::size_t r = 0; r < m; ++r) s -= cost_of(tab.basis(r)) * tab.at(r, c);
        tab.at(m, c) = s;
    }
    {
        double z = 0.0;
        for (std::size_t r = 0; r < m; ++r) z += cost_of(tab.basis(r)) * tab.rhs(r);
        tab.rhs(m) = -z;
    }
    if (!tab.run(n)) throw Error("LP unbounded");

    LpSolution sol;
    sol.pivots = tab.pivots();
    sol.x = lower;
    for (std::size_t r = 0; r < m; ++r) {
        if (tab.basis(r) < n) sol.x[tab.basis(r)] += std::max(0.0, tab.rhs(r));
    }
    sol.value = 0.0;
    for (std::size_t c = 0; c < n; ++c) sol.value += lp.objective[c] * sol.x[c];

    sol.duals.resize(m);
    for (std::size_t r = 0; r < m; ++r) sol.duals[r] = -sign[r] * tab.at(m, n + r);

    double dual_obj = 0.0;
    for (std::size_t r = 0; r < m; ++r) dual_obj += b[r] * sol.duals[r];
    double shifted_primal = 0.0;
    for (std::size_t c = 0; c < n; ++c) shifted_primal += lp.objective[c] * (sol.x[c] - lower[c]);
    sol.duality_gap = std::abs(shifted_primal - dual_obj);
    for (std::size_t c = 0; c < n; ++c) {
        double reduced = lp.objective[c];
        for (std::size_t r = 0; r < m; ++r) reduced -= lp.equality(r, c) * sol.duals[r];
        sol.dual_residual = std::max(sol.dual_residual, -reduced);
    }
    return sol;
}

MomentLpResult solve_moment_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Matrix& cost, const Tensor3& g, double floor) {
    const std::size_t nx = mu.size(), ny = nu.size();
    if (nx * ny > kOracleVariableCap) {
        throw SizeLimit("instance has " + std::to_string(nx * ny) + " cells, oracle cap is " +
                        std::to_string(kOracleVariableCap));
    }
    if (cost.rows() != nx || cost.cols() != ny) throw InvalidArgument("cost shape mismatch");
    const std::size_t depth = g.depth();
    if (depth > 0 && (g.rows() != nx || g.cols() != ny)) {
        throw InvalidArgument("moment tensor shape mismatch");
    }
    if (!(floor >= 0.0) || floor >= 1.0) throw InvalidArgument("floor must lie in [0, 1)");

    const std::size_t nvar = nx * ny;
    const std::size_t ncons = nx + ny + nx * depth;
    LpProblem lp;
    lp.objective.resize(nvar);
    lp.equality = Matrix(ncons, nvar);
    lp.rhs.assign(ncons, 0.0);
    lp.lower.assign(nvar, 0.0);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const std::size_t v = i * ny + j;
            lp.objective[v] = cost(i, j);
            lp.lower[v] = floor * mu.weight(i) * nu.weight(j);
            lp.equality(i, v) = 1.0;
            lp.equality(nx + j, v) = 1.0;
            for (std::size_t k = 0; k < depth; ++k) lp.equality(nx + ny + i * depth + k, v) = g(i, j, k);
        }
        lp.rhs[i] = mu.weight(i);
    }
    for (std::size_t j = 0; j < ny; ++j) lp.rhs[nx + j] = nu.weight(j);

    const LpSolution sol = solve_lp(lp);
    Matrix plan(nx, ny);
    for (std::size_t v = 0; v < nvar; ++v) plan.data()[v] = sol.x[v];
    return {sol.value, Coupling(mu, nu, std::move(plan)), sol.dual_residual, sol.duality_gap};
}

MomentLpResult solve_martingale_lp(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                   const Matrix& cost) {
    if (mu.dim() != nu.dim()) throw DimensionError("martingale LP needs measures of equal dimension");
    Tensor3 g(mu.size(), nu.size(), mu.dim());
    for (std::size_t i = 0; i < mu.size(); ++i) {
        for (std::size_t j = 0; j < nu.size(); ++j) {
            for (std::size_t k = 0; k < mu.dim(); ++k) g(i, j, k) = nu.point(j)[k] - mu.point(i)[k];
        }
    }
    return solve_moment_lp(mu, nu, cost, g);
}

Coupling reference_sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                            const Matrix& cost, double epsilon, double tol,
                            std::size_t max_iters) {
    if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
    const std::size_t nx = mu.size(), ny = nu.size();
    if (cost.rows() != nx || cost.cols() != ny) throw InvalidArgument("cost shape mismatch");

    // Scaled cost K_ij = -C_ij / eps, transposed copy for the column sweep.
    std::vector<double> k_rows(nx * ny), k_cols(nx * ny);
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            k_rows[i * ny + j] = -cost(i, j) / epsilon;
            k_cols[j * nx + i] = -cost(i, j) / epsilon;
        }
    }
    std::vector<double> log_mu(nx), log_nu(ny);
    for (std::size_t i = 0; i < nx; ++i) log_mu[i] = std::log(mu.weight(i));
    for (std::size_t j = 0; j < ny; ++j) log_nu[j] = std::log(nu.weight(j));

    // u, v are potentials divided by eps.
    std::vector<double> u(nx, 0.0), v(ny, 0.0), buf(std::max(nx, ny));
    auto lse = [&](const double* k, const std::vector<double>& pot,
                   const std::vector<double>& logw, std::size_t len) {
        double hi = -std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < len; ++t) {
            buf[t] = k[t] + pot[t] + logw[t];
            hi = std::max(hi, buf[t]);
        }
        double s = 0.0;
        for (std::size_t t = 0; t < len; ++t) s += std::exp(buf[t] - hi);
        return hi + std::log(s);
    };

    for (std::size_t it = 0; it < max_iters; ++it) {
        for (std::size_t i = 0; i < nx; ++i) u[i] = -lse(&k_rows[i * ny], v, log_nu, ny);
        for (std::size_t j = 0; j < ny; ++j) v[j] = -lse(&k_cols[j * nx], u, log_mu, nx);

        double err = 0.0;
        for (std::size_t i = 0; i < nx; ++i) {
            const double row = std::exp(lse(&k_rows[i * ny], v, log_nu, ny) + u[i]);
            err += mu.weight(i) * std::abs(row - 1.0);
        }
        if (err <= tol) {
            Matrix plan(nx, ny);
            for (std::size_t i = 0; i < nx; ++i) {
                for (std::size_t j = 0; j < ny; ++j) {
                    plan(i, j) = std::exp(k_rows[i * ny + j] + u[i] + v[j] + log_mu[i] + log_nu[j]);
                }
            }
            return Coupling(mu, nu, std::move(plan));
        }
    }
    throw NotConverged("reference Sinkhorn did not reach tolerance in " +
                       std::to_string(max_iters) + " sweeps");
}

Extrapolation unregularized_value_extrapolation(const std::vector<std::pair<double, double>>& values) {
    std::set<double> distinct;
    for (const auto& [eps, v] : values) {
        if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("extrapolation needs eps in (0, 1)");
        if (!std::isfinite(v)) throw InvalidArgument("extrapolation values must be finite");
        distinct.insert(eps);
    }
    if (distinct.size() < 3) throw InvalidArgument("extrapolation needs at least 3 distinct eps values");
    if (*distinct.rbegin() / *distinct.begin() < 10.0 * (1.0 - 1e-12)) {
        throw IllConditioned("eps values span less than one decade");
    }

    const double n = static_cast<double>(values.size());
    double sx = 0.0, sy = 0.0;
    for (const auto& [eps, v] : values) {
        sx += eps * std::log(1.0 / eps);
        sy += v;
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& [eps, v] : values) {
        const double dx = eps * std::log(1.0 / eps) - mx;
        const double dy = v - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    Extrapolation fit;
    fit.slope = sxy / sxx;
    fit.v0_estimate = my - fit.slope * mx;
    double sse = 0.0;
    for (const auto& [eps, v] : values) {
        const double r = v - (fit.v0_estimate + fit.slope * eps * std::log(1.0 / eps));
        sse += r * r;
    }
    fit.r_squared = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    return fit;
}

}  // namespace wotkit
