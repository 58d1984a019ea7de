#pragma once

#include <string>
#include <vector>

namespace wg {

struct Channel {
    int n1 = 0;
    int n2 = 0;
    int manifold() const { return n1 + n2; }
    bool operator==(const Channel&) const = default;
};

std::string to_string(const Channel& c);  // "n1,n2"
Channel parse_channel(const std::string& s);

struct ChannelSet {
    std::vector<Channel> channels;
    double eta = 1.0;
    int n_cut = 0;

    std::size_t size() const { return channels.size(); }
    const Channel& operator[](std::size_t i) const { return channels[i]; }
    int index_of(const Channel& c) const;  // -1 if absent
};

struct MomentumValue {
    double magnitude = 0.0;  // k if open, kappa if closed
    bool is_open = false;
    bool degenerate = false;  // E sits on the threshold
};

// Half-width of the band around a threshold that counts as "at threshold".
constexpr double kThresholdTolerance = 5e-10;

ChannelSet enumerate_channels(int n_cut, double eta);

double threshold_energy(const Channel& ch, double eta);

MomentumValue channel_momentum(double E, const Channel& ch, double eta);

}  // namespace wg
