#include "fvd/groundstate.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

namespace fvd {

void DmrgConfig::validate() const {
    if (chi_dmrg < 1) throw InputDomainError("chi_dmrg must be >= 1");
    if (n_sweeps_max < 1) throw InputDomainError("n_sweeps_max must be >= 1");
    if (!(energy_tol > 0.0)) throw InputDomainError("energy_tol must be positive");
    if (!(svd_min >= 0.0)) throw InputDomainError("svd_min must be >= 0");
}

namespace {

// Environment caches for one DMRG solve. left[k] covers sites [0, k), right[k] covers [k, N).
struct Sweeper {
    const Mpo &h;
    MpsState &psi;
    const std::vector<MpsState> &lower;
    double weight;
    std::vector<Env> left, right;
    std::vector<std::vector<Matrix>> oleft, oright; // per lower state: (lower bond) x (psi bond)

    Sweeper(const Mpo &h_, MpsState &psi_, const std::vector<MpsState> &lower_, double w)
        : h(h_), psi(psi_), lower(lower_), weight(w) {
        const auto n = static_cast<size_t>(psi.size());
        left.assign(n + 1, {});
        right.assign(n + 1, {});
        left[0] = boundary_env();
        right[n] = boundary_env();
        oleft.assign(lower.size(), std::vector<Matrix>(n + 1));
        oright.assign(lower.size(), std::vector<Matrix>(n + 1));
        for (size_t i = 0; i < lower.size(); ++i) {
            oleft[i][0] = Matrix::Ones(1, 1);
            oright[i][n] = Matrix::Ones(1, 1);
        }
        for (int k = psi.size() - 1; k >= 1; --k) update_right(k);
    }

    void update_left(int k) { // after site k became a left isometry
        const auto &a = psi.tensor(k);
        left[static_cast<size_t>(k + 1)] = extend_left(left[static_cast<size_t>(k)], a, a, h[k]);
        for (size_t i = 0; i < lower.size(); ++i)
            oleft[i][static_cast<size_t>(k + 1)] = extend_overlap_left(oleft[i][static_cast<size_t>(k)], a, lower[i].tensor(k));
    }
    void update_right(int k) { // after site k became a right isometry
        const auto &b = psi.tensor(k);
        right[static_cast<size_t>(k)] = extend_right(right[static_cast<size_t>(k + 1)], b, b, h[k]);
        for (size_t i = 0; i < lower.size(); ++i)
            oright[i][static_cast<size_t>(k)] =
                extend_overlap_right(oright[i][static_cast<size_t>(k + 1)], b, lower[i].tensor(k));
    }

    // Projections of the lower states onto the local space of sites [k, k+span).
    std::vector<Vector> penalty_vectors(int k, int span, const Tensor3 &shape) const {
        std::vector<Vector> out;
        for (size_t i = 0; i < lower.size(); ++i) {
            const Tensor3 phi = span == 2 ? merge_two_sites(lower[i].tensor(k), lower[i].tensor(k + 1)) : lower[i].tensor(k);
            const Matrix &ol = oleft[i][static_cast<size_t>(k)];
            const Matrix &orr = oright[i][static_cast<size_t>(k + span)];
            Tensor3 p(shape.dl(), shape.d(), shape.dr());
            for (int s = 0; s < shape.d(); ++s) p.slice(s) = ol.adjoint() * phi.slice(s) * orr.conjugate();
            out.push_back(p.vec());
        }
        return out;
    }

    LinearOp local_op(int k, int span, const MpoSite &w, const Tensor3 &theta) const {
        const Env &l = left[static_cast<size_t>(k)];
        const Env &r = right[static_cast<size_t>(k + span)];
        const int dl = theta.dl(), d = theta.d(), dr = theta.dr();
        return [&l, &r, &w, dl, d, dr, pen = penalty_vectors(k, span, theta), wt = weight](const Vector &x) {
            const Tensor3 xt = Tensor3::from_vector(x, dl, d, dr);
            Vector y = apply_effective(l, w, r, xt).vec();
            for (const auto &p : pen) y += wt * p * p.dot(x);
            return y;
        };
    }

    EigenPair solve_local(int k, int span, const MpoSite &w, const Tensor3 &theta, const LanczosOptions &opt) const {
        return lanczos_lowest(local_op(k, span, w, theta), theta.vec(), opt);
    }

    // Penalized energy of the normalized local tensor; with the centre on [k, k+span) this is the energy of psi.
    double local_energy(int k, int span, const MpoSite &w, const Tensor3 &theta) const {
        const Vector x = theta.vec();
        return x.dot(local_op(k, span, w, theta)(x)).real() / x.squaredNorm();
    }
};

} // namespace

DmrgResult run_dmrg(const Mpo &h, MpsState init, const DmrgConfig &cfg, const std::vector<MpsState> &lower,
                    double penalty_weight) {
    cfg.validate();
    const int n = h.size();
    if (init.size() != n) throw InputDomainError("initial state and Hamiltonian lengths differ");
    for (const auto &l : lower)
        if (l.size() != n) throw InputDomainError("lower state has the wrong length");

    DmrgResult res;
    MpsState psi = std::move(init);
    psi.set_truncation(cfg.chi_dmrg, cfg.svd_min);
    psi.move_center(0);
    psi.normalize();

    if (n == 1) {
        Sweeper sw(h, psi, lower, penalty_weight);
        const EigenPair ep = sw.solve_local(0, 1, h[0], psi.tensor(0), cfg.lanczos);
        psi.tensor(0) = Tensor3::from_vector(ep.vector, 1, 2, 1);
        psi.set_center(0);
        psi.normalize();
        res.half_sweep_energies.push_back(ep.value);
        res.sweeps = 1;
    } else {
        std::vector<MpoSite> merged;
        for (int k = 0; k + 1 < n; ++k) merged.push_back(merge_mpo_sites(h[k], h[k + 1]));
        Sweeper sw(h, psi, lower, penalty_weight);
        double prev = std::numeric_limits<double>::infinity();
        bool converged = false;
        for (int sweep = 0; sweep < cfg.n_sweeps_max; ++sweep) {
            double e = 0.0;
            for (int dir = 0; dir < 2; ++dir) {
                const bool to_right = (dir == 0);
                for (int step = 0; step < n - 1; ++step) {
                    const int k = to_right ? step : n - 2 - step;
                    const Tensor3 theta = merge_two_sites(psi.tensor(k), psi.tensor(k + 1));
                    const EigenPair ep = sw.solve_local(k, 2, merged[static_cast<size_t>(k)], theta, cfg.lanczos);
                    e = ep.value;
                    if (!std::isfinite(e)) throw NumericalFault("non-finite local energy in DMRG");
                    const Tensor3 opt = Tensor3::from_vector(ep.vector, theta.dl(), 4, theta.dr());
                    const Matrix m = Eigen::Map<const Matrix>(opt.data(), 2 * opt.dl(), 2 * opt.dr());
                    const SvdSplit sp = truncated_svd(m, cfg.chi_dmrg, cfg.svd_min);
                    res.max_discarded = std::max(res.max_discarded, sp.discarded);
                    const RealVector s = sp.s / sp.kept_norm;
                    if (step == n - 2) {
                        const Matrix kept = sp.u * s.asDiagonal() * sp.vh;
                        e = sw.local_energy(k, 2, merged[static_cast<size_t>(k)],
                                            Tensor3::from_vector(Eigen::Map<const Vector>(kept.data(), kept.size()),
                                                                 theta.dl(), 4, theta.dr()));
                    }
                    if (to_right) {
                        psi.tensor(k) = Tensor3::from_left_matrix(sp.u, theta.dl(), 2);
                        psi.tensor(k + 1) = Tensor3::from_right_matrix(s.asDiagonal() * sp.vh, 2, theta.dr());
                        psi.set_center(k + 1);
                        sw.update_left(k);
                    } else {
                        psi.tensor(k + 1) = Tensor3::from_right_matrix(sp.vh, 2, theta.dr());
                        psi.tensor(k) = Tensor3::from_left_matrix(sp.u * s.asDiagonal(), theta.dl(), 2);
                        psi.set_center(k);
                        sw.update_right(k + 1);
                    }
                }
                res.half_sweep_energies.push_back(e);
            }
            res.sweeps = sweep + 1;
            if (sweep + 1 >= cfg.n_sweeps_min && std::abs(e - prev) < cfg.energy_tol) {
                converged = true;
                break;
            }
            prev = e;
        }
        if (!converged)
            throw ConvergenceError(fmt::format("DMRG not converged after {} sweeps (last dE = {:.3e})", cfg.n_sweeps_max,
                                               std::abs(res.half_sweep_energies.back() - prev)),
                                   res.half_sweep_energies);
    }
    psi.normalize();
    res.energy = expect_mpo(psi, h).real();
    res.variance = mpo_variance(psi, h);
    res.state = std::move(psi);
    return res;
}

DmrgResult ground_state(const LatticeGeometry &geom, const ModelParams &p, const DmrgConfig &cfg,
                        std::optional<MpsState> init) {
    const Mpo h = hamiltonian_mpo(geom, p);
    MpsState start = init ? std::move(*init) : product_state(geom, p.h > 0.0);
    return run_dmrg(h, std::move(start), cfg);
}

std::vector<DmrgResult> excited_states(const LatticeGeometry &geom, const ModelParams &p, const DmrgConfig &cfg,
                                       int k) {
    if (k < 1) throw InputDomainError("excited_states needs k >= 1");
    const double dim = std::pow(2.0, geom.size());
    if (static_cast<double>(k) + 1.0 > dim)
        throw InputDomainError(fmt::format("{} states requested but the Hilbert space has dimension {}", k + 1, dim));
    const Mpo h = hamiltonian_mpo(geom, p);
    std::vector<DmrgResult> out;
    out.push_back(run_dmrg(h, product_state(geom, p.h > 0.0), cfg));
    const double weight = cfg.penalty_weight > 0.0 ? cfg.penalty_weight : std::max(10.0 * std::abs(out[0].energy), 1.0);
    std::vector<MpsState> lower{out[0].state};
    CounterRng rng(cfg.seed);
    for (int j = 1; j <= k; ++j) {
        CounterRng stream = rng.substream(static_cast<std::uint64_t>(j));
        MpsState start = random_mps(geom.size(), std::min(cfg.chi_dmrg, 4), stream);
        DmrgResult r = run_dmrg(h, std::move(start), cfg, lower, weight);
        for (size_t i = 0; i < lower.size(); ++i) {
            const double ov = std::abs(overlap(lower[i], r.state));
            if (ov > 1e-3)
                throw ConvergenceError(fmt::format("state {} overlaps state {} by {:.3e}; penalty weight {} too small", j, i,
                                                   ov, weight),
                                       r.half_sweep_energies);
        }
        lower.push_back(r.state);
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(), [](const DmrgResult &a, const DmrgResult &b) { return a.energy < b.energy; });
    return out;
}

} // namespace fvd
