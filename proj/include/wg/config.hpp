#pragma once

#include "wg/channels.hpp"

#include <string>

namespace wg {

enum class Closure {
    regularized,  // all closed channels summed in closed form, interaction through a(E)
    truncated,    // explicit product basis up to n_cut, log-derivative propagation
};

std::string to_string(Closure c);
Closure parse_closure(const std::string& s);

struct TrapConfig {
    double eta = 1.0;
    double r0 = 0.1;
    int n_cut = 20;
    double z_max = 15.0;
    double h = 0.0;               // longitudinal step, 0 selects the default
    int refinement = 2;           // half-step verification factor
    int radial_steps_per_r0 = 200;
    Closure closure = Closure::regularized;
    bool full_range = false;      // propagate to z_max instead of the potential edge
    double gate = 1e-6;           // accepted grid/unitarity defect
};

}  // namespace wg
