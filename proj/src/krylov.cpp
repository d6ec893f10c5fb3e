#include "fvd/krylov.hpp"

#include "fvd/errors.hpp"

#include <cmath>
#include <fmt/format.h>

namespace fvd {

namespace {

void project_out(Vector &v, const std::vector<Vector> &basis) {
    for (const auto &b : basis) v -= b * b.dot(v);
}

struct KrylovBasis {
    std::vector<Vector> q;
    std::vector<double> alpha;
    std::vector<double> beta; // beta[j] couples q[j] and q[j+1]
    double tail = 0.0;        // norm of the residual after the last vector
    int matvecs = 0;
};

// Lanczos with full reorthogonalization. Stops early on invariant subspaces.
KrylovBasis build_krylov(const LinearOp &op, const Vector &v0, int m, const std::vector<Vector> &deflate) {
    KrylovBasis kb;
    Vector q = v0;
    project_out(q, deflate);
    const double n0 = q.norm();
    if (!(n0 > 0.0)) throw NumericalFault("Krylov start vector is zero after deflation");
    q /= n0;
    for (int j = 0; j < m; ++j) {
        kb.q.push_back(q);
        Vector w = op(q);
        ++kb.matvecs;
        project_out(w, deflate);
        const double a = kb.q.back().dot(w).real();
        kb.alpha.push_back(a);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto &b : kb.q) w -= b * b.dot(w);
        const double bnorm = w.norm();
        if (!std::isfinite(bnorm)) throw NumericalFault("non-finite vector in Lanczos iteration");
        kb.tail = bnorm;
        const double scale = std::abs(a) + (kb.beta.empty() ? 0.0 : kb.beta.back()) + 1e-300;
        if (bnorm <= 1e-14 * scale || bnorm == 0.0 || j + 1 == m) break;
        kb.beta.push_back(bnorm);
        q = w / bnorm;
    }
    return kb;
}

Eigen::MatrixXd tridiagonal(const KrylovBasis &kb) {
    const auto k = static_cast<Eigen::Index>(kb.alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) t(i, i) = kb.alpha[static_cast<size_t>(i)];
    for (Eigen::Index i = 0; i + 1 < k; ++i) t(i, i + 1) = t(i + 1, i) = kb.beta[static_cast<size_t>(i)];
    return t;
}

} // namespace

EigenPair lanczos_lowest(const LinearOp &op, const Vector &start, const LanczosOptions &opt,
                         const std::vector<Vector> &deflate) {
    Vector v = start;
    if (v.norm() == 0.0) v = Vector::Ones(start.size());
    EigenPair best;
    std::vector<double> trace;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
        const KrylovBasis kb = build_krylov(op, v, opt.max_krylov, deflate);
        best.matvecs += kb.matvecs;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tridiagonal(kb));
        const Eigen::VectorXd y = es.eigenvectors().col(0);
        Vector x = Vector::Zero(v.size());
        for (size_t j = 0; j < kb.q.size(); ++j) x += y(static_cast<Eigen::Index>(j)) * kb.q[j];
        project_out(x, deflate);
        x.normalize();
        Vector r = op(x);
        ++best.matvecs;
        project_out(r, deflate);
        const double lam = x.dot(r).real();
        r -= lam * x;
        best.value = lam;
        best.vector = x;
        best.residual = r.norm();
        trace.push_back(best.residual);
        if (best.residual <= opt.tol) return best;
        // Krylov space exhausted: the residual is at rounding level for this operator.
        if (static_cast<int>(kb.q.size()) < opt.max_krylov && kb.tail <= 1e-14 * (std::abs(lam) + 1.0) &&
            best.residual <= 1e3 * opt.tol)
            return best;
        v = x;
    }
    if (best.residual <= std::sqrt(opt.tol)) return best; // usable; callers check convergence of energies
    throw ConvergenceError(fmt::format("Lanczos residual {} above tolerance {}", best.residual, opt.tol), trace);
}

Vector expm_krylov(const LinearOp &op, const Vector &v, double t, const ExpmOptions &opt) {
    const double nv = v.norm();
    if (nv == 0.0 || t == 0.0) return v;
    Vector cur = v;
    double remaining = t;
    double step = t;
    int guard = 0;
    while (std::abs(remaining) > 0.0) {
        if (++guard > 100000) throw ConvergenceError("Krylov exponential failed to make progress");
        if (std::abs(step) > std::abs(remaining)) step = remaining;
        const KrylovBasis kb = build_krylov(op, cur, opt.max_krylov, {});
        const Eigen::MatrixXd tri = tridiagonal(kb);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
        const auto k = tri.rows();
        // c = exp(-i step T) e1
        const Eigen::VectorXd e1v = es.eigenvectors().row(0).transpose();
        Eigen::VectorXcd phase(k);
        for (Eigen::Index i = 0; i < k; ++i) phase(i) = std::exp(cplx(0.0, -step * es.eigenvalues()(i))) * e1v(i);
        const Eigen::VectorXcd c = es.eigenvectors().cast<cplx>() * phase;
        const bool exhausted = static_cast<int>(kb.q.size()) < opt.max_krylov;
        const double err = exhausted ? 0.0 : kb.tail * std::abs(c(k - 1));
        if (err > opt.tol && std::abs(step) > 1e-300) {
            step *= 0.5;
            continue;
        }
        const double ncur = cur.norm();
        Vector next = Vector::Zero(cur.size());
        for (Eigen::Index j = 0; j < k; ++j) next += c(j) * kb.q[static_cast<size_t>(j)];
        cur = ncur * next;
        remaining -= step;
        if (std::abs(remaining) < 1e-15 * std::abs(t)) break;
    }
    return cur;
}

} // namespace fvd
