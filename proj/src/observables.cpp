#include "wg/observables.hpp"

#include <algorithm>
#include <cmath>

namespace wg {

void PopulationWeights::normalize()
{
    double s = 0.0;
    for (const auto& [c, v] : w) {
        if (!(v >= 0.0))
            throw DomainError("population weights must be nonnegative");
        s += v;
    }
    if (!(s > 0.0))
        throw DomainError("population weights are all zero");
    for (auto& [c, v] : w)
        v /= s;
}

double PopulationWeights::weight(const Channel& c) const
{
    for (const auto& [ch, v] : w)
        if (ch == c)
            return v;
    return 0.0;
}

PopulationWeights PopulationWeights::from_excited_ratio(double r)
{
    if (!(r >= 0.0))
        throw DomainError("W2/W0 must be nonnegative");
    PopulationWeights p;
    p.w = {{{0, 0}, 1.0}, {{0, 2}, 0.5 * r}, {{2, 0}, 0.5 * r}};
    p.normalize();
    return p;
}

namespace {

int entrance_index(const ScatteringSolution& sol, const Channel& c)
{
    const int i = sol.open_index(c);
    if (i < 0)
        throw DomainError("entrance channel " + to_string(c) + " is closed");
    return i;
}

}  // namespace

double partial_transmission(const ScatteringSolution& sol, const Channel& entrance)
{
    const int c = entrance_index(sol, entrance);
    double T = 0.0;
    for (int cp = 0; cp < static_cast<int>(sol.k.size()); ++cp) {
        const cplx a = (cp == c ? 1.0 : 0.0) + sol.f(cp, c);
        T += sol.k[cp] / sol.k[c] * std::norm(a);
    }
    return T;
}

double reflection(const ScatteringSolution& sol, const Channel& entrance)
{
    const int c = entrance_index(sol, entrance);
    double R = 0.0;
    for (int cp = 0; cp < static_cast<int>(sol.k.size()); ++cp)
        R += sol.k[cp] / sol.k[c] * std::norm(sol.f(cp, c));
    return R;
}

double total_transmission(const std::vector<ScatteringSolution>& sols, const PopulationWeights& weights)
{
    double T = 0.0, wsum = 0.0;
    for (const auto& [c, w] : weights.w) {
        if (w == 0.0)
            continue;
        auto it = std::find_if(sols.begin(), sols.end(), [&](const auto& s) { return s.entrance == c; });
        if (it == sols.end())
            throw DomainError("no solution for weighted entrance " + to_string(c));
        T += w * partial_transmission(*it, c);
        wsum += w;
    }
    if (!(wsum > 0.0))
        throw DomainError("population weights are all zero");
    return T / wsum;
}

double total_transmission(const ScatteringSolution& sol, const PopulationWeights& weights)
{
    double T = 0.0, wsum = 0.0;
    for (const auto& [c, w] : weights.w) {
        if (w == 0.0)
            continue;
        T += w * partial_transmission(sol, c);
        wsum += w;
    }
    if (!(wsum > 0.0))
        throw DomainError("population weights are all zero");
    return T / wsum;
}

double manifold_flux(const ScatteringSolution& sol, const Channel& entrance, int n_prime)
{
    const int c = entrance_index(sol, entrance);
    double P = 0.0;
    for (int cp = 0; cp < static_cast<int>(sol.k.size()); ++cp)
        if (sol.channels_open[cp].manifold() == n_prime)
            P += sol.k[cp] / sol.k[c] * std::norm(sol.f(cp, c));
    return P;
}

double transition_probability(const ScatteringSolution& sol, int n, int n_prime)
{
    if (n % 2 || n_prime % 2 || n < 0 || n_prime < 0)
        throw DomainError("manifold indices must be even and nonnegative");
    const Channel entrance{0, n};
    if (sol.open_index(entrance) < 0)
        throw DomainError("entrance manifold " + std::to_string(n) + " is closed");
    return 2.0 * manifold_flux(sol, entrance, n_prime);
}

double unitarity_defect(const ScatteringSolution& sol)
{
    const int n = static_cast<int>(sol.k.size());
    double d = (sol.S.adjoint() * sol.S - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (sol.K.size())
        d = std::max(d, (sol.K - sol.K.transpose()).cwiseAbs().maxCoeff() / (1.0 + sol.K.cwiseAbs().maxCoeff()));
    d = std::max(d, sol.diagnostics.symmetry_defect);
    for (const auto& c : sol.channels_open)
        d = std::max(d, std::abs(partial_transmission(sol, c) + reflection(sol, c) - 1.0));
    return d;
}

}  // namespace wg
