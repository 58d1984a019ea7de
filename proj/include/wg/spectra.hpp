#pragma once

#include "wg/observables.hpp"
#include "wg/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace wg {

class SpectraError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class PointKind { bound, resonant };

struct SpectrumPoint {
    double eta = 1.0;
    double ratio = 0.0;
    PointKind kind = PointKind::bound;
    Channel branch;
    double E = 0.0;
    double E_B_or_gap = 0.0;  // E_B for bound points, E - E_perp(0,0) for resonances
};

struct BoundState {
    bool found = false;
    double E0 = 0.0;
    double E_B = 0.0;
    double step_change = 0.0;  // change under h -> h/2
    double box_change = 0.0;   // change under z_max -> z_max + 5
};

BoundState bound_state_energy(double ratio, const TrapConfig& cfg);
BoundState bound_state_energy_for_depth(double V0, const TrapConfig& cfg);

struct ResonanceResult {
    bool found = false;
    double E_r = 0.0;
    double T_min = 0.0;
    std::optional<double> im_zero;  // zero of Im f00 when only the ground channel is open
    std::string note;
};

ResonanceResult resonance_energy(double ratio, double E_lo, double E_hi, const TrapConfig& cfg);
ResonanceResult resonance_energy_for_depth(double V0, double E_lo, double E_hi, const TrapConfig& cfg);

struct MinimumResult {
    double ratio = 0.0;
    double T = 0.0;
    std::optional<double> im_zero;  // Im f00 zero crossing in ratio (ground entrance only)
    std::optional<double> g1d;      // k00 Re f00 / Im f00 at the refined ratio
    int widenings = 0;
};

// argmin over ratio of T for the given entrance at fixed E_par (absolute energy units).
MinimumResult locate_cir(double E_par, const TrapConfig& cfg, Channel entrance = {0, 0}, double lo = 0.8,
                         double hi = 2.2, int points = 57, double tol = 1e-3);

struct LocalMinimum {
    double ratio;
    double T;
};

// Local minima of the population-weighted total transmission over ratio in [1.2, 1.8].
std::vector<LocalMinimum> detect_splitting(double eta, double w2_over_w0, double E_par, const TrapConfig& cfg,
                                           double lo = 1.2, double hi = 1.8, double step = 0.005);

double weighted_transmission(double ratio, const PopulationWeights& w, double E_par, const TrapConfig& cfg);

double g1d_indicator(const ScatteringSolution& sol);

// Inter-threshold windows from E_perp(0,0) up to the lowest n = 4 threshold, each labelled by
// the channel whose threshold closes it from above.
struct EnergyWindow {
    double lo, hi;
    Channel branch;
};
std::vector<EnergyWindow> resonance_windows(double eta);

std::vector<SpectrumPoint> spectrum_at(double ratio, const TrapConfig& cfg);

}  // namespace wg
