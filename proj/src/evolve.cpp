#include "fvd/evolve.hpp"

#include "fvd/errors.hpp"
#include "fvd/observables.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

namespace fvd {

void EvolutionConfig::validate() const {
    if (chi_q < 1) throw InputDomainError("chi_q must be >= 1");
    if (!(svd_min >= 0.0)) throw InputDomainError("svd_min must be >= 0");
    if (!(krylov.tol > 0.0) || krylov.max_krylov < 2) throw InputDomainError("invalid Krylov options");
}

std::string TrajectoryRecord::csv() const {
    std::ostringstream out;
    out << "time,mz,ztot_var,p_ret,energy,max_bond,discarded_weight\n";
    for (size_t i = 0; i < times.size(); ++i)
        out << fmt::format("{:.10g},{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g}\n", times[i], mz[i], ztot_var[i], p_ret[i],
                           energy[i], max_bond[i], discarded_weight[i]);
    return out.str();
}

void TrajectoryRecord::write_csv(const std::string &path) const {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", path));
    f << csv();
    if (!f) throw std::runtime_error(fmt::format("write failed for {}", path));
}

TdvpEngine::TdvpEngine(MpsState psi, const Mpo &h, EvolutionConfig cfg) : h_(h), psi_(std::move(psi)), cfg_(cfg) {
    cfg_.validate();
    if (psi_.size() != h_.size()) throw InputDomainError("state and Hamiltonian lengths differ");
    psi_.set_truncation(cfg_.chi_q, cfg_.svd_min);
    psi_.move_center(0);
    const int n = psi_.size();
    for (int k = 0; k + 1 < n; ++k) merged_.push_back(merge_mpo_sites(h_[k], h_[k + 1]));
    left_.assign(static_cast<size_t>(n + 1), {});
    right_.assign(static_cast<size_t>(n + 1), {});
    left_[0] = boundary_env();
    right_[static_cast<size_t>(n)] = boundary_env();
    for (int k = n - 1; k >= 1; --k)
        right_[static_cast<size_t>(k)] = extend_right(right_[static_cast<size_t>(k + 1)], psi_.tensor(k), psi_.tensor(k), h_[k]);
}

Tensor3 TdvpEngine::evolve_local(int k, int span, const MpoSite &w, const Tensor3 &x, double tau) const {
    const Env &l = left_[static_cast<size_t>(k)];
    const Env &r = right_[static_cast<size_t>(k + span)];
    const int dl = x.dl(), d = x.d(), dr = x.dr();
    LinearOp op = [&, dl, d, dr](const Vector &v) {
        return Vector(apply_effective(l, w, r, Tensor3::from_vector(v, dl, d, dr)).vec());
    };
    return Tensor3::from_vector(expm_krylov(op, x.vec(), tau, cfg_.krylov), dl, d, dr);
}

void TdvpEngine::split(int k, const Tensor3 &theta, bool center_right) {
    const Matrix m = Eigen::Map<const Matrix>(theta.data(), 2 * theta.dl(), 2 * theta.dr());
    const SvdSplit sp = truncated_svd(m, cfg_.chi_q, cfg_.svd_min);
    discarded_ += sp.discarded;
    const double full = m.norm();
    const RealVector s = sp.kept_norm > 0.0 ? RealVector(sp.s * (full / sp.kept_norm)) : sp.s;
    if (center_right) {
        psi_.tensor(k) = Tensor3::from_left_matrix(sp.u, theta.dl(), 2);
        psi_.tensor(k + 1) = Tensor3::from_right_matrix(s.asDiagonal() * sp.vh, 2, theta.dr());
        left_[static_cast<size_t>(k + 1)] = extend_left(left_[static_cast<size_t>(k)], psi_.tensor(k), psi_.tensor(k), h_[k]);
        psi_.set_center(k + 1);
    } else {
        psi_.tensor(k + 1) = Tensor3::from_right_matrix(sp.vh, 2, theta.dr());
        psi_.tensor(k) = Tensor3::from_left_matrix(sp.u * s.asDiagonal(), theta.dl(), 2);
        right_[static_cast<size_t>(k + 1)] =
            extend_right(right_[static_cast<size_t>(k + 2)], psi_.tensor(k + 1), psi_.tensor(k + 1), h_[k + 1]);
        psi_.set_center(k);
    }
}

void TdvpEngine::sweep_right(double tau) {
    const int n = psi_.size();
    for (int k = 0; k + 1 < n; ++k) {
        Tensor3 theta = merge_two_sites(psi_.tensor(k), psi_.tensor(k + 1));
        theta = evolve_local(k, 2, merged_[static_cast<size_t>(k)], theta, tau);
        split(k, theta, true);
        if (k + 2 < n) psi_.tensor(k + 1) = evolve_local(k + 1, 1, h_[k + 1], psi_.tensor(k + 1), -tau);
    }
}

void TdvpEngine::sweep_left(double tau) {
    const int n = psi_.size();
    for (int k = n - 2; k >= 0; --k) {
        Tensor3 theta = merge_two_sites(psi_.tensor(k), psi_.tensor(k + 1));
        theta = evolve_local(k, 2, merged_[static_cast<size_t>(k)], theta, tau);
        split(k, theta, false);
        if (k > 0) psi_.tensor(k) = evolve_local(k, 1, h_[k], psi_.tensor(k), -tau);
    }
}

void TdvpEngine::step(double dt) {
    if (psi_.size() == 1) {
        psi_.tensor(0) = evolve_local(0, 1, h_[0], psi_.tensor(0), dt);
    } else {
        sweep_right(0.5 * dt);
        sweep_left(0.5 * dt);
    }
    const double n = psi_.norm();
    if (!std::isfinite(n)) throw NumericalFault("non-finite norm during TDVP step");
}

double return_probability(const MpsState &psi0, const MpsState &psit) {
    if (psi0.size() != psit.size()) throw InputDomainError("return_probability: state lengths differ");
    const double n0 = overlap(psi0, psi0).real();
    const double nt = overlap(psit, psit).real();
    return std::norm(overlap(psi0, psit)) / (n0 * nt);
}

std::vector<Snapshot> draw_shots(const MpsState &psi, const LatticeGeometry &geom, int n_shots, const CounterRng &base,
                                 std::uint64_t time_index) {
    if (psi.size() != geom.size()) throw InputDomainError("state and geometry sizes differ");
    if (n_shots < 1) throw InputDomainError("n_shots must be >= 1");
    const MpsSampler sampler(psi);
    std::vector<Snapshot> out;
    out.reserve(static_cast<size_t>(n_shots));
    for (int s = 0; s < n_shots; ++s) {
        CounterRng rng = base.substream(time_index, static_cast<std::uint64_t>(s));
        out.push_back(Snapshot{geom.rows(), geom.cols(), sampler.sample(rng)});
    }
    return out;
}

TrajectoryRecord evolve_quench(const MpsState &psi0, const LatticeGeometry &geom, const QuenchProtocol &protocol,
                               const EvolutionConfig &cfg, const std::optional<ShotSchedule> &shots) {
    protocol.validate();
    cfg.validate();
    if (psi0.size() != geom.size()) throw InputDomainError("initial state does not match the geometry");
    const Mpo h = hamiltonian_mpo(geom, protocol.post);
    const Mpo z2 = ztot_squared_mpo(geom.size());

    const auto n_steps = static_cast<std::int64_t>(std::llround(protocol.t_max / protocol.dt));
    std::vector<std::int64_t> shot_steps;
    if (shots) {
        for (double t : shots->times) {
            const double raw = t / protocol.dt;
            const auto s = static_cast<std::int64_t>(std::llround(raw));
            if (std::abs(raw - static_cast<double>(s)) > 1e-6 || s < 0 || s > n_steps)
                throw InputDomainError(fmt::format("shot time {} is not on the dt grid within [0, t_max]", t));
            shot_steps.push_back(s);
        }
    }

    MpsState start = psi0;
    start.normalize();
    TdvpEngine engine(start, h, cfg);
    TrajectoryRecord rec;
    const CounterRng base(shots ? shots->seed : 0);

    auto record = [&](std::int64_t step) {
        const MpsState &psi = engine.state();
        const double t = static_cast<double>(step) * protocol.dt;
        const auto z = local_expectations(psi, Pauli::Z);
        double mz = 0.0;
        for (double v : z) mz += v;
        mz /= static_cast<double>(z.size());
        double first = 0.0;
        for (double v : z) first += v;
        const double second = expect_mpo(psi, z2).real();
        const double e = expect_mpo(psi, h).real();
        const double p = return_probability(start, psi);
        const double nrm = psi.norm();
        if (!std::isfinite(mz) || !std::isfinite(e) || !std::isfinite(p))
            throw NumericalFault(fmt::format("non-finite observable at t = {}", t));
        rec.times.push_back(t);
        rec.mz.push_back(mz);
        rec.ztot_var.push_back(second - first * first);
        rec.p_ret.push_back(p);
        rec.energy.push_back(e);
        rec.norm.push_back(nrm);
        rec.max_bond.push_back(psi.max_bond());
        rec.discarded_weight.push_back(engine.discarded_weight());
    };
    auto maybe_sample = [&](std::int64_t step) {
        for (size_t i = 0; i < shot_steps.size(); ++i) {
            if (shot_steps[i] != step) continue;
            ShotSet set;
            set.step = step;
            set.time = static_cast<double>(step) * protocol.dt;
            set.shots = draw_shots(engine.state(), geom, shots->n_shots, base, static_cast<std::uint64_t>(step));
            rec.snapshots.push_back(std::move(set));
        }
    };

    record(0);
    maybe_sample(0);
    for (std::int64_t step = 1; step <= n_steps; ++step) {
        engine.step(protocol.dt);
        if (step % protocol.observable_stride == 0 || step == n_steps) record(step);
        maybe_sample(step);
    }
    return rec;
}

} // namespace fvd
