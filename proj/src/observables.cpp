#include "fvd/observables.hpp"

#include "fvd/errors.hpp"

#include <algorithm>
#include <numeric>

namespace fvd {

double magnetization(const MpsState &psi) {
    const auto z = local_expectations(psi, Pauli::Z);
    return std::accumulate(z.begin(), z.end(), 0.0) / static_cast<double>(z.size());
}

double magnetization(const DenseState &psi) {
    return dense_ztot_moments(psi).first / static_cast<double>(psi.n_sites);
}

ZtotFluctuation ztot_fluctuation(const MpsState &psi) {
    const double v = expect_ztot_moments(psi).variance();
    return {v, 4.0 * v};
}

ZtotFluctuation ztot_fluctuation(const DenseState &psi) {
    const double v = dense_ztot_moments(psi).variance();
    return {v, 4.0 * v};
}

FptResult first_passage_time(const std::vector<double> &t, const std::vector<double> &p_ret, double threshold) {
    if (t.empty() || t.size() != p_ret.size()) throw InputDomainError("first_passage_time: empty or mismatched series");
    if (!std::is_sorted(t.begin(), t.end()) || std::adjacent_find(t.begin(), t.end()) != t.end())
        throw InputDomainError("first_passage_time: times must be strictly increasing");
    if (!(threshold > 0.0)) throw InputDomainError("first_passage_time: threshold must be positive");
    FptResult r;
    r.threshold = threshold;
    for (size_t i = 0; i < t.size(); ++i) {
        if (!(p_ret[i] <= threshold)) continue;
        if (i == 0) {
            r.t_fpt = t[0];
            return r;
        }
        const double y0 = std::log(p_ret[i - 1]);
        const double y1 = std::log(p_ret[i]);
        const double ly = std::log(threshold);
        const double f = (y0 - ly) / (y0 - y1);
        r.t_fpt = t[i - 1] + std::clamp(f, 0.0, 1.0) * (t[i] - t[i - 1]);
        return r;
    }
    return r;
}

} // namespace fvd
