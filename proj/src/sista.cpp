#include "wotkit/sista.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "wotkit/error.hpp"
#include "wotkit/order.hpp"

namespace wotkit {

namespace {

// Conditional moments and certificates of the Gibbs plan at one state.
struct Evaluation {
    std::vector<double> row_mass;  // sum_j nu_j rho_ij
    Matrix f_moment;               // sum_j nu_j rho_ij f_ij
    Matrix g_moment;               // sum_j nu_j rho_ij g_ij
    double dual = 0.0;
    double primal = 0.0;
    double marginal = 0.0;
    double moment = 0.0;
    double stationarity = 0.0;

    double gap() const { return primal - dual; }
};

// Shadow cost without the potentials, C = cost + lambda.f + alpha.g, kept up
// to date with (lambda, alpha) so the Sinkhorn sweeps only touch phi and psi.
class Kernel {
public:
    explicit Kernel(const ProblemSpec& spec)
        : spec_(spec),
          base_(spec.rows(), spec.cols()),
          col_min_(spec.cols()),
          col_acc_(spec.cols()),
          col_mass_(spec.cols()),
          scratch_(std::max<std::size_t>({spec.soft_dim(), spec.hard_dim(), 1})) {}

    void rebuild(const DualState& s) {
        const std::size_t M = spec_.soft_dim(), N = spec_.hard_dim();
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            auto out = base_.row(i);
            auto c = spec_.cost.row(i);
            auto lam = s.lambda.row(i);
            auto al = s.alpha.row(i);
            for (std::size_t j = 0; j < spec_.cols(); ++j) {
                double v = c[j];
                if (M > 0) {
                    auto f = spec_.f.at(i, j);
                    for (std::size_t k = 0; k < M; ++k) v += lam[k] * f[k];
                }
                if (N > 0) {
                    auto g = spec_.g.at(i, j);
                    for (std::size_t k = 0; k < N; ++k) v += al[k] * g[k];
                }
                out[j] = v;
            }
        }
    }

    // Returns sum_i mu_i phi*_i, phi* being the exact row softmin.
    double update_phi(DualState& s) const {
        const double eps = spec_.epsilon;
        const auto& mu = spec_.mu.weights();
        const auto& nu = spec_.nu.weights();
        double before = 0.0;
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            auto c = base_.row(i);
            double lo = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < c.size(); ++j) {
                if (nu[j] > 0.0) lo = std::min(lo, c[j] - s.psi[j]);
            }
            double acc = 0.0;
            for (std::size_t j = 0; j < c.size(); ++j) {
                if (nu[j] > 0.0) acc += nu[j] * std::exp(-(c[j] - s.psi[j] - lo) / eps);
            }
            const double target = lo - eps * std::log(acc);
            if (mu[i] > 0.0) before += mu[i] * target;
            s.phi[i] = target;
        }
        return before;
    }

    // sum_i mu_i [theta*(lambda_i) + (theta_tilde/zeta)*(alpha_i)].
    double conjugate_sum(const DualState& s) const {
        const auto& mu = spec_.mu.weights();
        double out = 0.0;
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            if (!(mu[i] > 0.0)) continue;
            if (spec_.soft_dim() > 0) out += mu[i] * spec_.theta->conjugate(s.lambda.row(i));
            if (spec_.hard_dim() > 0 && spec_.penalized()) {
                const double z = *spec_.zeta;
                std::vector<double> scaled(s.alpha.row(i).begin(), s.alpha.row(i).end());
                for (double& v : scaled) v *= z;
                out += mu[i] * spec_.theta_tilde->conjugate(scaled) / z;
            }
        }
        return out;
    }

    void update_psi(DualState& s) {
        const double eps = spec_.epsilon;
        const auto& mu = spec_.mu.weights();
        std::fill(col_min_.begin(), col_min_.end(), std::numeric_limits<double>::infinity());
        std::fill(col_acc_.begin(), col_acc_.end(), 0.0);
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            if (!(mu[i] > 0.0)) continue;
            auto c = base_.row(i);
            for (std::size_t j = 0; j < c.size(); ++j) col_min_[j] = std::min(col_min_[j], c[j] - s.phi[i]);
        }
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            if (!(mu[i] > 0.0)) continue;
            auto c = base_.row(i);
            const double shift = s.phi[i];
            for (std::size_t j = 0; j < c.size(); ++j) {
                col_acc_[j] += mu[i] * std::exp(-(c[j] - shift - col_min_[j]) / eps);
            }
        }
        for (std::size_t j = 0; j < spec_.cols(); ++j) s.psi[j] = col_min_[j] - eps * std::log(col_acc_[j]);
    }

    Evaluation evaluate(const DualState& s) {
        const double eps = spec_.epsilon;
        const std::size_t M = spec_.soft_dim(), N = spec_.hard_dim();
        const auto& mu = spec_.mu.weights();
        const auto& nu = spec_.nu.weights();

        Evaluation ev;
        ev.row_mass.assign(spec_.rows(), 0.0);
        if (keep_plan_) plan_ = Matrix(spec_.rows(), spec_.cols());
        ev.f_moment = Matrix(spec_.rows(), M);
        ev.g_moment = Matrix(spec_.rows(), N);
        std::fill(col_mass_.begin(), col_mass_.end(), 0.0);

        double plan_mass = 0.0;
        double plan_shadow = 0.0;  // sum pi * Lambda xi
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            if (!(mu[i] > 0.0)) continue;
            auto c = base_.row(i);
            auto fm = ev.f_moment.row(i);
            auto gm = ev.g_moment.row(i);
            double r = 0.0, rz = 0.0;
            for (std::size_t j = 0; j < c.size(); ++j) {
                if (!(nu[j] > 0.0)) continue;
                const double z = c[j] - s.phi[i] - s.psi[j];
                const double w = nu[j] * std::exp(-z / eps);
                r += w;
                rz += w * z;
                if (keep_plan_) plan_(i, j) = mu[i] * w;
                col_mass_[j] += mu[i] * w;
                if (M > 0) {
                    auto f = spec_.f.at(i, j);
                    for (std::size_t k = 0; k < M; ++k) fm[k] += w * f[k];
                }
                if (N > 0) {
                    auto g = spec_.g.at(i, j);
                    for (std::size_t k = 0; k < N; ++k) gm[k] += w * g[k];
                }
            }
            ev.row_mass[i] = r;
            plan_mass += mu[i] * r;
            plan_shadow += mu[i] * rz;
        }

        double pot = 0.0;  // sum pi (phi + psi)
        double dual = 0.0;
        double marginal = 0.0;
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            pot += mu[i] * ev.row_mass[i] * s.phi[i];
            dual += mu[i] * s.phi[i];
            marginal += std::abs(mu[i] * ev.row_mass[i] - mu[i]);
        }
        for (std::size_t j = 0; j < spec_.cols(); ++j) {
            pot += col_mass_[j] * s.psi[j];
            dual += nu[j] * s.psi[j];
            marginal += std::abs(col_mass_[j] - nu[j]);
        }

        // sum pi * cost = sum pi * C - sum mu lambda.F - sum mu alpha.G
        double linear = plan_shadow + pot;
        double soft = 0.0, hard = 0.0;
        std::span<double> tmp{scratch_};
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            if (!(mu[i] > 0.0)) continue;
            auto fm = ev.f_moment.row(i);
            auto gm = ev.g_moment.row(i);
            for (std::size_t k = 0; k < M; ++k) linear -= mu[i] * s.lambda(i, k) * fm[k];
            for (std::size_t k = 0; k < N; ++k) linear -= mu[i] * s.alpha(i, k) * gm[k];
            if (M > 0) {
                soft += mu[i] * spec_.theta->value(fm);
                dual -= mu[i] * spec_.theta->conjugate(s.lambda.row(i));
                auto out = tmp.first(M);
                spec_.theta->conjugate_gradient(s.lambda.row(i), out);
                for (std::size_t k = 0; k < M; ++k) {
                    ev.stationarity = std::max(ev.stationarity, std::abs(out[k] - fm[k]));
                }
            }
            if (N > 0) {
                for (std::size_t k = 0; k < N; ++k) ev.moment = std::max(ev.moment, std::abs(gm[k]));
                if (spec_.penalized()) {
                    const double z = *spec_.zeta;
                    std::vector<double> scaled(s.alpha.row(i).begin(), s.alpha.row(i).end());
                    for (double& v : scaled) v *= z;
                    hard += mu[i] * spec_.theta_tilde->value(gm) / z;
                    dual -= mu[i] * spec_.theta_tilde->conjugate(scaled) / z;
                    auto out = tmp.first(N);
                    spec_.theta_tilde->conjugate_gradient(scaled, out);
                    for (std::size_t k = 0; k < N; ++k) {
                        ev.stationarity = std::max(ev.stationarity, std::abs(out[k] - gm[k]));
                    }
                }
            }
        }
        const double entropy = -plan_shadow - eps * plan_mass + eps;
        ev.primal = linear + soft + hard + entropy;
        ev.dual = dual - eps * plan_mass + eps;
        ev.marginal = marginal;
        return ev;
    }

    void ista(DualState& s, const Evaluation& ev, double tau) {
        const std::size_t M = spec_.soft_dim(), N = spec_.hard_dim();
        std::span<double> tmp{scratch_};
        for (std::size_t i = 0; i < spec_.rows(); ++i) {
            if (M > 0) {
                auto lam = s.lambda.row(i);
                auto out = tmp.first(M);
                spec_.theta->conjugate_gradient(lam, out);
                for (std::size_t k = 0; k < M; ++k) lam[k] -= tau * (out[k] - ev.f_moment(i, k));
            }
            if (N == 0) continue;
            auto al = s.alpha.row(i);
            if (!spec_.penalized()) {
                for (std::size_t k = 0; k < N; ++k) al[k] += tau * ev.g_moment(i, k);
            } else if (spec_.theta_tilde->is_quadratic()) {
                // prox of tau * zeta |.|^2 / (4 s): closed-form shrinkage
                const double shrink = 1.0 + tau * *spec_.zeta / (2.0 * spec_.theta_tilde->scale());
                for (std::size_t k = 0; k < N; ++k) al[k] = (al[k] + tau * ev.g_moment(i, k)) / shrink;
            } else {
                const double z = *spec_.zeta;
                std::vector<double> scaled(al.begin(), al.end());
                for (double& v : scaled) v *= z;
                auto out = tmp.first(N);
                spec_.theta_tilde->conjugate_gradient(scaled, out);
                for (std::size_t k = 0; k < N; ++k) al[k] += tau * (ev.g_moment(i, k) - out[k]);
            }
        }
    }

    void keep_plan(bool on) { keep_plan_ = on; }

    // Line-searched Newton ascent step in (phi, psi) with the multipliers
    // fixed. `ev` must come from evaluate(s) with the plan kept; on success
    // `s` and `ev` describe the new point.
    bool newton_potentials(DualState& s, Evaluation& ev) {
        const double eps = spec_.epsilon;
        const std::size_t nx = spec_.rows(), ny = spec_.cols(), n = nx + ny;
        const auto& mu = spec_.mu.weights();
        const auto& nu = spec_.nu.weights();

        // Hessian block [[diag r, P], [P^T, diag c]] / eps, gradient b.
        std::vector<double> diag(n), b(n);
        for (std::size_t i = 0; i < nx; ++i) {
            diag[i] = mu[i] * ev.row_mass[i];
            b[i] = mu[i] - diag[i];
        }
        for (std::size_t j = 0; j < ny; ++j) {
            diag[nx + j] = col_mass_[j];
            b[nx + j] = nu[j] - col_mass_[j];
        }
        std::vector<double> dinv(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (diag[k] > 0.0) dinv[k] = 1.0 / diag[k];
            else b[k] = 0.0;
        }
        auto apply = [&](const std::vector<double>& x, std::vector<double>& y) {
            for (std::size_t k = 0; k < n; ++k) y[k] = diag[k] * x[k];
            for (std::size_t i = 0; i < nx; ++i) {
                auto p = plan_.row(i);
                const double xi = x[i];
                double acc = 0.0;
                for (std::size_t j = 0; j < ny; ++j) {
                    acc += p[j] * x[nx + j];
                    y[nx + j] += p[j] * xi;
                }
                y[i] += acc;
            }
        };

        // Preconditioned conjugate gradients on diag-scaled A d = eps b.
        std::vector<double> d(n, 0.0), res(n), z(n), dir(n), ad(n);
        double norm0 = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            res[k] = eps * b[k];
            norm0 += res[k] * res[k];
        }
        if (!(norm0 > 0.0)) return false;
        for (std::size_t k = 0; k < n; ++k) dir[k] = z[k] = dinv[k] * res[k];
        double rz = 0.0;
        for (std::size_t k = 0; k < n; ++k) rz += res[k] * z[k];
        const std::size_t max_cg = 4 * n + 20;
        for (std::size_t cg = 0; cg < max_cg; ++cg) {
            apply(dir, ad);
            double pad = 0.0;
            for (std::size_t k = 0; k < n; ++k) pad += dir[k] * ad[k];
            if (!(pad > 0.0)) break;
            const double a = rz / pad;
            double norm = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                d[k] += a * dir[k];
                res[k] -= a * ad[k];
                norm += res[k] * res[k];
            }
            if (norm <= 1e-24 * norm0) break;
            double rz_next = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                z[k] = dinv[k] * res[k];
                rz_next += res[k] * z[k];
            }
            const double beta = rz_next / rz;
            rz = rz_next;
            for (std::size_t k = 0; k < n; ++k) dir[k] = z[k] + beta * dir[k];
        }

        double slope = 0.0;
        for (std::size_t k = 0; k < n; ++k) slope += b[k] * d[k];
        if (!(slope > 0.0)) return false;
        for (double t = 1.0; t > 1e-3; t *= 0.5) {
            DualState trial = s;
            for (std::size_t i = 0; i < nx; ++i) trial.phi[i] += t * d[i];
            for (std::size_t j = 0; j < ny; ++j) trial.psi[j] += t * d[nx + j];
            Evaluation tev = evaluate(trial);
            if (std::isfinite(tev.dual) && std::isfinite(tev.primal) && tev.dual >= ev.dual + 1e-4 * t * slope) {
                s = std::move(trial);
                ev = std::move(tev);
                return true;
            }
        }
        evaluate(s);
        return false;
    }

private:
    const ProblemSpec& spec_;
    Matrix base_;
    std::vector<double> col_min_;
    std::vector<double> col_acc_;
    std::vector<double> col_mass_;
    std::vector<double> scratch_;
    bool keep_plan_ = false;
    Matrix plan_;
};

// Splits t(i, j, .) = u_j - v_i when possible.
struct Separable {
    Matrix u;  // cols x depth
    Matrix v;  // rows x depth
};

std::optional<Separable> split_separable(const Tensor3& t) {
    const std::size_t nx = t.rows(), ny = t.cols(), d = t.depth();
    if (d == 0 || nx == 0 || ny == 0) return std::nullopt;
    Separable out{Matrix(ny, d), Matrix(nx, d)};
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t k = 0; k < d; ++k) out.u(j, k) = t(0, j, k);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t k = 0; k < d; ++k) out.v(i, k) = t(0, 0, k) - t(i, 0, k);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t k = 0; k < d; ++k) {
                const double want = out.u(j, k) - out.v(i, k);
                if (std::abs(t(i, j, k) - want) > 1e-12 * (1.0 + std::abs(want))) return std::nullopt;
            }
        }
    }
    return out;
}

// Exact dual maximization over uniform shifts c of the rows of `mult`, for
// the conjugate penalty sum_i mu_i |m_i + c|^2 / (4 s_eff); the potentials
// absorb the shift. Returns false when nothing was done.
bool shift_rows(Matrix& mult, const Separable& sep, double s_eff, const ProblemSpec& spec, DualState& s) {
    const auto& mu = spec.mu.weights();
    const auto& nu = spec.nu.weights();
    const std::size_t d = mult.cols();
    for (std::size_t k = 0; k < d; ++k) {
        double m = 0.0, mean = 0.0;
        for (std::size_t j = 0; j < nu.size(); ++j) m += nu[j] * sep.u(j, k);
        for (std::size_t i = 0; i < mu.size(); ++i) {
            m -= mu[i] * sep.v(i, k);
            mean += mu[i] * mult(i, k);
        }
        const double c = 2.0 * s_eff * m - mean;
        if (!std::isfinite(c)) return false;
        for (std::size_t i = 0; i < mu.size(); ++i) {
            mult(i, k) += c;
            s.phi[i] -= c * sep.v(i, k);
        }
        for (std::size_t j = 0; j < nu.size(); ++j) s.psi[j] += c * sep.u(j, k);
    }
    return true;
}

void require_shape(const DualState& s, const ProblemSpec& spec) {
    if (s.phi.size() != spec.rows() || s.psi.size() != spec.cols() ||
        s.lambda.rows() != spec.rows() || s.lambda.cols() != spec.soft_dim() ||
        s.alpha.rows() != spec.rows() || s.alpha.cols() != spec.hard_dim()) {
        throw InvalidArgument("dual state shape does not match problem");
    }
}

double fiber_sup_norm(const Tensor3& t) {
    double best = 0.0;
    for (std::size_t i = 0; i < t.rows(); ++i) {
        for (std::size_t j = 0; j < t.cols(); ++j) {
            double s = 0.0;
            for (double v : t.at(i, j)) s += v * v;
            best = std::max(best, s);
        }
    }
    return std::sqrt(best);
}

bool is_martingale_tensor(const ProblemSpec& spec) {
    if (spec.mu.dim() != 1 || spec.nu.dim() != 1 || spec.hard_dim() != 1) return false;
    for (std::size_t i = 0; i < spec.rows(); ++i) {
        for (std::size_t j = 0; j < spec.cols(); ++j) {
            const double expected = spec.nu.x(j) - spec.mu.x(i);
            if (std::abs(spec.g(i, j, 0) - expected) > 1e-12 * (1.0 + std::abs(expected))) return false;
        }
    }
    return true;
}

std::vector<std::string> qualification_warnings(const ProblemSpec& spec) {
    std::vector<std::string> out;
    if (spec.penalized() || !is_martingale_tensor(spec)) return out;
    const auto order = convex_order_1d(spec.mu, spec.nu);
    if (!order.convex_order) {
        out.push_back("mu is not dominated by nu in convex order (margin " +
                      std::to_string(order.margin) + ", mean gap " + std::to_string(order.mean_gap) +
                      "): no martingale coupling exists");
        return out;
    }
    const auto nd = nondegeneracy_check(spec.mu, spec.nu);
    if (!nd.ok) {
        out.push_back("supp(mu) touches the boundary of the hull of supp(nu): multipliers may be unbounded");
    }
    return out;
}

}  // namespace

void SolverConfig::validate() const {
    if (tau && !(*tau > 0.0)) throw InvalidArgument("tau must be positive");
    if (!(tol_marginal > 0.0) || !(tol_gap > 0.0) || !(tol_moment > 0.0) || !(tol_stationarity > 0.0)) {
        throw InvalidArgument("solver tolerances must be positive");
    }
    if (inner_sinkhorn_iters == 0) throw InvalidArgument("inner_sinkhorn_iters must be at least 1");
    if (max_outer_iters == 0) throw InvalidArgument("max_outer_iters must be at least 1");
    if (!(scaling_tol > 0.0)) throw InvalidArgument("scaling_tol must be positive");
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::not_converged: return "not_converged";
        case SolveStatus::diverged: return "diverged";
    }
    return "unknown";
}

DualState sinkhorn_row_update(const DualState& state, const ProblemSpec& spec) {
    require_shape(state, spec);
    Kernel k(spec);
    k.rebuild(state);
    DualState out = state;
    k.update_phi(out);
    return out;
}

DualState sinkhorn_col_update(const DualState& state, const ProblemSpec& spec) {
    require_shape(state, spec);
    Kernel k(spec);
    k.rebuild(state);
    DualState out = state;
    k.update_psi(out);
    return out;
}

DualState sinkhorn_block(const DualState& state, const ProblemSpec& spec) {
    require_shape(state, spec);
    Kernel k(spec);
    k.rebuild(state);
    DualState out = state;
    k.update_phi(out);
    k.update_psi(out);
    return out;
}

DualState ista_block(const DualState& state, const ProblemSpec& spec, double tau) {
    if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
    require_shape(state, spec);
    Kernel k(spec);
    k.rebuild(state);
    const Evaluation ev = k.evaluate(state);
    DualState out = state;
    k.ista(out, ev, tau);
    return out;
}

double auto_step_size(const ProblemSpec& spec) {
    const double nf = fiber_sup_norm(spec.f);
    const double ng = fiber_sup_norm(spec.g);
    const double lip = spec.soft_dim() > 0 ? spec.theta->conjugate_gradient_lipschitz() : 0.0;
    const double denom = nf * nf + ng * ng + lip * spec.epsilon;
    if (!(denom > 0.0)) return kMaxAutoStep;
    return std::min(kMaxAutoStep, spec.epsilon / denom);
}

namespace {

// One fixed-eps run of the outer loop; fills the iteration fields of `rep`.
void run_loop(const ProblemSpec& spec, const SolverConfig& config, DualState& state, SolveReport& rep,
              bool keep_trace) {
    const bool adaptive = config.adaptive_step && !config.tau;
    double tau = config.tau ? *config.tau : adaptive ? kMaxAutoStep : auto_step_size(spec);
    const auto& nu = spec.nu.weights();
    Kernel kernel(spec);
    kernel.rebuild(state);
    kernel.keep_plan(config.newton_every > 0);

    std::optional<Separable> soft_shift, hard_shift;
    if (config.multiplier_shift) {
        if (spec.soft_dim() > 0 && spec.theta->is_quadratic()) soft_shift = split_separable(spec.f);
        if (spec.penalized() && spec.theta_tilde->is_quadratic()) hard_shift = split_separable(spec.g);
    }

    // State and dual value just before the last multiplier step. The next phi
    // sweep yields the dual value after that step followed by an exact row
    // update, so the step is judged apart from the following column sweep.
    DualState accepted;
    Evaluation accepted_ev;
    bool have_accepted = false;
    int halvings = 0;
    std::size_t decreasing_streak = 0;
    rep.status = SolveStatus::not_converged;
    std::size_t it = 0;
    while (it < config.max_outer_iters) {
        const double row_part = kernel.update_phi(state);
        if (have_accepted) {
            double after = row_part - kernel.conjugate_sum(state);
            for (std::size_t j = 0; j < nu.size(); ++j) after += nu[j] * state.psi[j];
            const double ref = accepted_ev.dual;
            if (!std::isfinite(after) || after < ref - 1e-12 * std::max(1.0, std::abs(ref))) {
                ++rep.step_too_large_events;
                ++decreasing_streak;
                if (halvings < config.max_step_halvings) {
                    tau *= 0.5;
                    ++halvings;
                    if (adaptive) {
                        state = accepted;
                        kernel.ista(state, accepted_ev, tau);
                        if (soft_shift) shift_rows(state.lambda, *soft_shift, spec.theta->scale(), spec, state);
                        if (hard_shift) {
                            shift_rows(state.alpha, *hard_shift, spec.theta_tilde->scale() / *spec.zeta, spec, state);
                        }
                        kernel.rebuild(state);
                        continue;
                    }
                } else if (decreasing_streak >= 50) {
                    rep.status = SolveStatus::diverged;
                    rep.warnings.push_back("dual value decreased for 50 iterations at minimal step");
                    break;
                }
            } else {
                decreasing_streak = 0;
            }
        }
        kernel.update_psi(state);
        for (std::size_t s = 1; s < config.inner_sinkhorn_iters; ++s) {
            kernel.update_phi(state);
            kernel.update_psi(state);
        }
        if (config.gauge_fix) state.gauge_fix(spec.mu);

        Evaluation ev = kernel.evaluate(state);
        rep.iterations = ++it;
        if (keep_trace) rep.trace.push_back({ev.dual, ev.gap(), ev.marginal, ev.moment, ev.stationarity});
        if (!std::isfinite(ev.dual) || !std::isfinite(ev.primal)) {
            rep.status = SolveStatus::diverged;
            rep.warnings.push_back("non-finite objective at iteration " + std::to_string(it));
            break;
        }

        const bool hard_ok = spec.penalized() || spec.hard_dim() == 0 || ev.moment <= config.tol_moment;
        if (ev.marginal <= config.tol_marginal && std::abs(ev.gap()) <= config.tol_gap &&
            ev.stationarity <= config.tol_stationarity && hard_ok) {
            rep.status = SolveStatus::converged;
            break;
        }
        if (it == config.max_outer_iters) break;
        if (config.newton_every > 0 && it % config.newton_every == 0 && ev.marginal > config.tol_marginal) {
            kernel.newton_potentials(state, ev);
        }
        if (adaptive) accepted = state;
        accepted_ev = ev;
        have_accepted = true;
        kernel.ista(state, ev, tau);
        if (soft_shift) shift_rows(state.lambda, *soft_shift, spec.theta->scale(), spec, state);
        if (hard_shift) shift_rows(state.alpha, *hard_shift, spec.theta_tilde->scale() / *spec.zeta, spec, state);
        kernel.rebuild(state);
    }
    rep.tau = tau;
}

std::vector<double> scaling_ladder(const ProblemSpec& spec) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double c : spec.cost.data()) {
        lo = std::min(lo, c);
        hi = std::max(hi, c);
    }
    std::vector<double> out;
    for (double e = (hi - lo) / 4.0; e > 2.0 * spec.epsilon; e *= 0.5) out.push_back(e);
    return out;
}

}  // namespace

SolveReport solve(const ProblemSpec& spec, const SolverConfig& config,
                  const std::optional<DualState>& warm_start) {
    spec.validate();
    config.validate();

    SolveReport rep;
    rep.warnings = qualification_warnings(spec);

    DualState state = warm_start ? *warm_start : DualState::zeros(spec);
    require_shape(state, spec);

    if (config.epsilon_scaling && !warm_start) {
        SolverConfig loose = config;
        loose.tol_marginal = loose.tol_gap = loose.tol_stationarity = config.scaling_tol;
        loose.tol_moment = std::max(config.tol_moment, config.scaling_tol);
        for (double e : scaling_ladder(spec)) {
            ProblemSpec rung = spec;
            rung.epsilon = e;
            SolveReport scratch;
            run_loop(rung, loose, state, scratch, false);
            rep.warmup_iterations += scratch.iterations;
            rep.step_too_large_events += scratch.step_too_large_events;
        }
    }
    const std::size_t warm_events = rep.step_too_large_events;
    run_loop(spec, config, state, rep, true);

    if (rep.status != SolveStatus::converged && rep.step_too_large_events > warm_events) {
        rep.warnings.push_back("step size too large: dual value decreased " +
                               std::to_string(rep.step_too_large_events - warm_events) + " times");
    }

    rep.final_state = state;
    rep.plan = gibbs_plan(state, spec);
    rep.primal_breakdown = primal_value_unchecked(rep.plan, spec);
    rep.dual_value = dual_value(state, spec);
    rep.duality_gap = rep.primal_breakdown.total - rep.dual_value;
    rep.marginal_residual = rep.plan.marginal_residual();
    Kernel kernel(spec);
    kernel.rebuild(state);
    const Evaluation last = kernel.evaluate(state);
    rep.moment_residual = last.moment;
    rep.stationarity = last.stationarity;
    for (double a : state.alpha.data()) rep.alpha_sup_norm = std::max(rep.alpha_sup_norm, std::abs(a));
    return rep;
}

}  // namespace wotkit
