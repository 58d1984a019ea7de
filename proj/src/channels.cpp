#include "wg/channels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace wg {

std::string to_string(const Channel& c) { return std::to_string(c.n1) + "," + std::to_string(c.n2); }

Channel parse_channel(const std::string& s)
{
    std::istringstream in(s);
    Channel c;
    char comma = 0;
    if (!(in >> c.n1 >> comma >> c.n2) || comma != ',' || c.n1 < 0 || c.n2 < 0 || c.n1 % 2 || c.n2 % 2)
        throw std::invalid_argument("bad channel '" + s + "', expected even pair n1,n2");
    return c;
}

int ChannelSet::index_of(const Channel& c) const
{
    auto it = std::find(channels.begin(), channels.end(), c);
    return it == channels.end() ? -1 : static_cast<int>(it - channels.begin());
}

double threshold_energy(const Channel& ch, double eta) { return eta * (ch.n1 + 0.5) + (ch.n2 + 0.5); }

ChannelSet enumerate_channels(int n_cut, double eta)
{
    if (n_cut < 0 || n_cut % 2)
        throw std::invalid_argument("N_cut must be a nonnegative even integer");
    if (!(eta >= 1.0))
        throw std::invalid_argument("anisotropy eta must be >= 1");
    ChannelSet cs;
    cs.eta = eta;
    cs.n_cut = n_cut;
    for (int n1 = 0; n1 <= n_cut; n1 += 2)
        for (int n2 = 0; n1 + n2 <= n_cut; n2 += 2)
            cs.channels.push_back({n1, n2});
    std::stable_sort(cs.channels.begin(), cs.channels.end(), [eta](const Channel& a, const Channel& b) {
        const double ea = threshold_energy(a, eta), eb = threshold_energy(b, eta);
        if (ea != eb)
            return ea < eb;
        return a.n1 < b.n1;
    });
    return cs;
}

MomentumValue channel_momentum(double E, const Channel& ch, double eta)
{
    if (!std::isfinite(E))
        throw std::invalid_argument("energy is not finite");
    const double d = E - threshold_energy(ch, eta);
    MomentumValue m;
    m.is_open = d > 0.0;
    m.magnitude = std::sqrt(2.0 * std::abs(d));
    m.degenerate = std::abs(d) < kThresholdTolerance;
    return m;
}

}  // namespace wg
