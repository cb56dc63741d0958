#include "bosim/linalg/krylov.hpp"

#include "bosim/error.hpp"

#include <cmath>
#include <deque>

namespace bosim {

KrylovMethod parse_krylov_method(const std::string& name)
{
    if (name == "gmres")
        return KrylovMethod::Gmres;
    if (name == "bicgstab")
        return KrylovMethod::Bicgstab;
    if (name == "orthomin")
        return KrylovMethod::Orthomin;
    throw ConfigError("unknown linear solver '" + name + "'");
}

std::string to_string(KrylovMethod m)
{
    switch (m) {
    case KrylovMethod::Gmres: return "gmres";
    case KrylovMethod::Bicgstab: return "bicgstab";
    case KrylovMethod::Orthomin: return "orthomin";
    }
    return "?";
}

void SolverConfig::validate() const
{
    if (restart < 1 || orthomin_k < 1)
        throw ConfigError("solver: restart and Orthomin k must be >= 1");
    if (!(tol > 0.0))
        throw ConfigError("solver: tolerance must be positive");
    if (max_iterations < 1)
        throw ConfigError("solver: max iterations must be >= 1");
    if (fixed_iterations < 0)
        throw ConfigError("solver: fixed iteration count must be >= 0");
}

namespace {

void apply_or_copy(const Preconditioner* m, const DistVector& r, DistVector& z)
{
    if (m)
        m->apply(r, z);
    else
        copy(r, z);
}

void check_finite(double v, const char* where)
{
    if (!std::isfinite(v))
        throw DivergenceError(std::string(where) + ": non-finite value in the recurrence");
}

struct Budget {
    bool fixed;
    int limit;
    double tol;

    explicit Budget(const SolverConfig& c)
        : fixed(c.fixed_iterations > 0), limit(fixed ? c.fixed_iterations : c.max_iterations), tol(c.tol)
    {
    }
    bool done(double rel) const { return !fixed && rel <= tol; }
};

double true_residual(const CsrMatrix& a, const DistVector& b, DistVector& x, DistVector& r)
{
    residual(a, x, b, r);
    return norm2(r);
}

} // namespace

SolveResult gmres(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                  const Preconditioner* m)
{
    cfg.validate();
    const Budget budget(cfg);
    const auto& layout = a.layout_ptr();
    SolveResult res;

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        fill(x, 0.0);
        res.converged = true;
        return res;
    }

    DistVector r(layout), w(layout), z(layout);
    double beta = true_residual(a, b, x, r);
    check_finite(beta, "gmres");
    double rel = beta / bnorm;
    if (budget.done(rel)) {
        res.converged = true;
        res.relative_residual = rel;
        return res;
    }

    const int mdim = cfg.restart;
    std::vector<DistVector> v;
    v.reserve(static_cast<std::size_t>(mdim) + 1);
    for (int i = 0; i <= mdim; ++i)
        v.emplace_back(layout);
    std::vector<std::vector<double>> h(static_cast<std::size_t>(mdim) + 1, std::vector<double>(static_cast<std::size_t>(mdim), 0.0));
    std::vector<double> cs(static_cast<std::size_t>(mdim)), sn(static_cast<std::size_t>(mdim)),
        g(static_cast<std::size_t>(mdim) + 1);

    while (res.iterations < budget.limit && beta > 0.0) {
        axpby(1.0 / beta, r, 0.0, v[0]);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        int j = 0;
        bool breakdown = false;
        while (j < mdim && res.iterations < budget.limit) {
            apply_or_copy(m, v[static_cast<std::size_t>(j)], z);
            spmv(a, z, w);
            for (int i = 0; i <= j; ++i) {
                const double hij = dot(w, v[static_cast<std::size_t>(i)]);
                h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = hij;
                axpby(-hij, v[static_cast<std::size_t>(i)], 1.0, w);
            }
            const double hnext = norm2(w);
            check_finite(hnext, "gmres");
            for (int i = 0; i < j; ++i) {
                auto& hi = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                auto& hi1 = h[static_cast<std::size_t>(i) + 1][static_cast<std::size_t>(j)];
                const double t = cs[static_cast<std::size_t>(i)] * hi + sn[static_cast<std::size_t>(i)] * hi1;
                hi1 = -sn[static_cast<std::size_t>(i)] * hi + cs[static_cast<std::size_t>(i)] * hi1;
                hi = t;
            }
            auto& hjj = h[static_cast<std::size_t>(j)][static_cast<std::size_t>(j)];
            const double denom = std::hypot(hjj, hnext);
            cs[static_cast<std::size_t>(j)] = denom == 0.0 ? 1.0 : hjj / denom;
            sn[static_cast<std::size_t>(j)] = denom == 0.0 ? 0.0 : hnext / denom;
            hjj = denom;
            h[static_cast<std::size_t>(j) + 1][static_cast<std::size_t>(j)] = 0.0;
            g[static_cast<std::size_t>(j) + 1] = -sn[static_cast<std::size_t>(j)] * g[static_cast<std::size_t>(j)];
            g[static_cast<std::size_t>(j)] *= cs[static_cast<std::size_t>(j)];

            ++j;
            ++res.iterations;
            const double est = std::abs(g[static_cast<std::size_t>(j)]) / bnorm;
            check_finite(est, "gmres");
            res.history.push_back(est);
            if (hnext <= 1e-14 * beta) {
                breakdown = true;
                break;
            }
            axpby(1.0 / hnext, w, 0.0, v[static_cast<std::size_t>(j)]);
            if (budget.done(est))
                break;
        }

        // y = H^{-1} g, then x += M V y
        std::vector<double> y(static_cast<std::size_t>(j), 0.0);
        for (int i = j - 1; i >= 0; --i) {
            double s = g[static_cast<std::size_t>(i)];
            for (int k = i + 1; k < j; ++k)
                s -= h[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] * y[static_cast<std::size_t>(k)];
            const double d = h[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
            y[static_cast<std::size_t>(i)] = d == 0.0 ? 0.0 : s / d;
        }
        fill(w, 0.0);
        for (int i = 0; i < j; ++i)
            axpby(y[static_cast<std::size_t>(i)], v[static_cast<std::size_t>(i)], 1.0, w);
        apply_or_copy(m, w, z);
        axpby(1.0, z, 1.0, x);

        beta = true_residual(a, b, x, r);
        check_finite(beta, "gmres");
        rel = beta / bnorm;
        if (budget.done(rel))
            break;
        if (breakdown && !budget.fixed && j == 0)
            break;
    }
    res.relative_residual = rel;
    res.converged = rel <= cfg.tol;
    return res;
}

SolveResult bicgstab(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                     const Preconditioner* m)
{
    cfg.validate();
    const Budget budget(cfg);
    const auto& layout = a.layout_ptr();
    SolveResult res;

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        fill(x, 0.0);
        res.converged = true;
        return res;
    }

    DistVector r(layout), rhat(layout), p(layout), v(layout), s(layout), t(layout), phat(layout), shat(layout);
    double rnorm = true_residual(a, b, x, r);
    check_finite(rnorm, "bicgstab");
    double rel = rnorm / bnorm;
    if (budget.done(rel)) {
        res.converged = true;
        res.relative_residual = rel;
        return res;
    }

    bool fresh = true;          // next iteration starts a new cycle (p = r)
    bool after_breakdown = false;
    double rho_old = 1.0, alpha = 1.0, omega = 1.0;
    copy(r, rhat);

    auto restart = [&](const char* why) {
        if (after_breakdown)
            throw DivergenceError(std::string("bicgstab: repeated breakdown (") + why + ")");
        after_breakdown = true;
        rnorm = true_residual(a, b, x, r);
        copy(r, rhat);
        fresh = true;
    };

    while (res.iterations < budget.limit) {
        const double rho = dot(rhat, r);
        check_finite(rho, "bicgstab");
        if (std::abs(rho) <= 1e-300 || std::abs(rho) < 1e-16 * norm2(rhat) * rnorm) {
            if (rnorm == 0.0)
                break;
            restart("rho");
            continue;
        }
        if (fresh) {
            copy(r, p);
            fresh = false;
        } else {
            const double beta = (rho / rho_old) * (alpha / omega);
            axpby(-omega, v, 1.0, p);
            axpby(1.0, r, beta, p);
        }
        apply_or_copy(m, p, phat);
        spmv(a, phat, v);
        const double rv = dot(rhat, v);
        check_finite(rv, "bicgstab");
        if (std::abs(rv) <= 1e-300 || std::abs(rv) < 1e-16 * norm2(rhat) * norm2(v)) {
            restart("rhat.v");
            continue;
        }
        alpha = rho / rv;
        waxpby(s, 1.0, r, -alpha, v);
        const double snorm = norm2(s);
        check_finite(snorm, "bicgstab");
        if (budget.done(snorm / bnorm)) {
            axpby(alpha, phat, 1.0, x);
            ++res.iterations;
            res.history.push_back(snorm / bnorm);
            rnorm = true_residual(a, b, x, r);
            rel = rnorm / bnorm;
            if (budget.done(rel))
                break;
            copy(r, rhat);
            fresh = true;
            rho_old = 1.0;
            continue;
        }
        apply_or_copy(m, s, shat);
        spmv(a, shat, t);
        const double tt = dot(t, t);
        check_finite(tt, "bicgstab");
        if (tt == 0.0) {
            axpby(alpha, phat, 1.0, x);
            restart("t.t");
            continue;
        }
        omega = dot(t, s) / tt;
        axpby(alpha, phat, 1.0, x);
        axpby(omega, shat, 1.0, x);
        waxpby(r, 1.0, s, -omega, t);
        rho_old = rho;
        ++res.iterations;
        after_breakdown = false;
        rnorm = norm2(r);
        check_finite(rnorm, "bicgstab");
        res.history.push_back(rnorm / bnorm);
        if (omega == 0.0) {
            restart("omega");
            continue;
        }
        if (budget.done(rnorm / bnorm)) {
            rnorm = true_residual(a, b, x, r);
            rel = rnorm / bnorm;
            if (budget.done(rel))
                break;
            copy(r, rhat);
            fresh = true;
        }
    }
    rnorm = true_residual(a, b, x, r);
    res.relative_residual = rnorm / bnorm;
    res.converged = res.relative_residual <= cfg.tol;
    return res;
}

SolveResult orthomin(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                     const Preconditioner* m)
{
    cfg.validate();
    const Budget budget(cfg);
    const auto& layout = a.layout_ptr();
    SolveResult res;

    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        fill(x, 0.0);
        res.converged = true;
        return res;
    }

    DistVector r(layout), z(layout), w(layout);
    double rnorm = true_residual(a, b, x, r);
    check_finite(rnorm, "orthomin");
    if (budget.done(rnorm / bnorm)) {
        res.converged = true;
        res.relative_residual = rnorm / bnorm;
        return res;
    }

    struct Direction {
        DistVector p, q;
        double qq;
    };
    std::deque<Direction> dirs;

    auto push_direction = [&]() {
        apply_or_copy(m, r, z);
        spmv(a, z, w);
        Direction d{DistVector(layout), DistVector(layout), 0.0};
        copy(z, d.p);
        copy(w, d.q);
        for (const auto& old : dirs) {
            const double beta = -dot(w, old.q) / old.qq;
            axpby(beta, old.p, 1.0, d.p);
            axpby(beta, old.q, 1.0, d.q);
        }
        d.qq = dot(d.q, d.q);
        check_finite(d.qq, "orthomin");
        if (d.qq == 0.0)
            throw DivergenceError("orthomin: search direction annihilated by the operator");
        dirs.push_back(std::move(d));
        if (static_cast<int>(dirs.size()) > cfg.orthomin_k)
            dirs.pop_front();
    };

    push_direction();
    while (res.iterations < budget.limit) {
        const Direction& d = dirs.back();
        const double alpha = dot(r, d.q) / d.qq;
        check_finite(alpha, "orthomin");
        axpby(alpha, d.p, 1.0, x);
        axpby(-alpha, d.q, 1.0, r);
        ++res.iterations;
        rnorm = norm2(r);
        check_finite(rnorm, "orthomin");
        res.history.push_back(rnorm / bnorm);
        if (budget.done(rnorm / bnorm)) {
            rnorm = true_residual(a, b, x, r);
            if (budget.done(rnorm / bnorm))
                break;
            dirs.clear();
        }
        if (res.iterations < budget.limit) {
            if (rnorm == 0.0)
                break;
            push_direction();
        }
    }
    rnorm = true_residual(a, b, x, r);
    res.relative_residual = rnorm / bnorm;
    res.converged = res.relative_residual <= cfg.tol;
    return res;
}

SolveResult krylov_solve(const CsrMatrix& a, const DistVector& b, DistVector& x, const SolverConfig& cfg,
                         const Preconditioner* m)
{
    switch (cfg.method) {
    case KrylovMethod::Gmres: return gmres(a, b, x, cfg, m);
    case KrylovMethod::Bicgstab: return bicgstab(a, b, x, cfg, m);
    case KrylovMethod::Orthomin: return orthomin(a, b, x, cfg, m);
    }
    throw ConfigError("unknown linear solver");
}

} // namespace bosim
