#include "fvd/model.hpp"

#include "fvd/errors.hpp"

#include <cmath>
#include <fmt/format.h>
#include <numbers>

namespace fvd {

void ModelParams::validate() const {
    if (!std::isfinite(J) || !std::isfinite(g) || !std::isfinite(h))
        throw InputDomainError(fmt::format("model parameters must be finite (J={}, g={}, h={})", J, g, h));
}

QuenchProtocol QuenchProtocol::make(double J, double g, double h0, double hq, double t_max, double dt,
                                    int observable_stride) {
    QuenchProtocol q{{J, g, h0}, {J, g, hq}, t_max, dt, observable_stride};
    q.validate();
    return q;
}

void QuenchProtocol::validate() const {
    pre.validate();
    post.validate();
    if (pre.J != post.J || pre.g != post.g)
        throw InputDomainError("quench may only change the longitudinal field h");
    if (!(t_max > 0.0) || !(dt > 0.0))
        throw InputDomainError(fmt::format("t_max and dt must be positive (t_max={}, dt={})", t_max, dt));
    if (observable_stride < 1)
        throw InputDomainError("observable_stride must be >= 1");
}

double CouplingList::classical_energy(std::span<const std::uint8_t> up) const {
    if (static_cast<int>(up.size()) != n_sites)
        throw InputDomainError(fmt::format("basis state has {} spins, expected {}", up.size(), n_sites));
    auto zval = [&](int k) { return up[static_cast<size_t>(k)] ? 1.0 : -1.0; };
    double e = 0.0;
    for (const auto &t : zz) e += t.weight * zval(t.i) * zval(t.j);
    for (const auto &t : z) e += t.weight * zval(t.site);
    return e;
}

CouplingList hamiltonian_terms(const LatticeGeometry &geom, const ModelParams &p) {
    p.validate();
    CouplingList out;
    out.n_sites = geom.size();
    out.zz.reserve(geom.bonds().size());
    for (const auto &b : geom.bonds()) out.zz.push_back({b.i, b.j, -p.J});
    for (int k = 0; k < geom.size(); ++k) {
        out.x.push_back({k, -p.g});
        out.z.push_back({k, -p.h});
    }
    return out;
}

void BubbleParams::validate() const {
    if (!(sigma > 0.0) || !(delta_eps > 0.0) || !std::isfinite(sigma) || !std::isfinite(delta_eps))
        throw InputDomainError(fmt::format("sigma and delta_eps must be positive (sigma={}, delta_eps={})", sigma,
                                           delta_eps));
}

double bubble_energy_2d(const BubbleParams &b, double radius) {
    b.validate();
    if (!(radius >= 0.0)) throw InputDomainError(fmt::format("bubble radius must be >= 0, got {}", radius));
    return 2.0 * std::numbers::pi * radius * b.sigma - std::numbers::pi * radius * radius * b.delta_eps;
}

double bubble_energy_2d_derivative(const BubbleParams &b, double radius) {
    b.validate();
    if (!(radius >= 0.0)) throw InputDomainError(fmt::format("bubble radius must be >= 0, got {}", radius));
    return 2.0 * std::numbers::pi * (b.sigma - radius * b.delta_eps);
}

double critical_radius(const BubbleParams &b) {
    b.validate();
    return b.sigma / b.delta_eps;
}

double nucleation_barrier(const BubbleParams &b) {
    b.validate();
    return std::numbers::pi * b.sigma * b.sigma / b.delta_eps;
}

double bubble_energy_1d(const BubbleParams &b, double length) {
    b.validate();
    if (!(length >= 0.0)) throw InputDomainError(fmt::format("bubble length must be >= 0, got {}", length));
    return 2.0 * b.sigma - length * b.delta_eps;
}

double bubble_energy_1d_derivative(const BubbleParams &b, double length) {
    b.validate();
    if (!(length >= 0.0)) throw InputDomainError(fmt::format("bubble length must be >= 0, got {}", length));
    return -b.delta_eps;
}

} // namespace fvd
