#pragma once

#include "wg/channels.hpp"

namespace wg {

// phi_{n1}(0; eta)^2 phi_{n2}(0; 1)^2 for even n1, n2.
double contact_density(const Channel& c, double eta);

struct ClosedSum {
    double value = 0.0;
    double error = 0.0;  // discrepancy between two quadrature orders
};

// Regular part at the origin of the Green's function summed over every transverse
// state closed at energy E (all even pairs, no truncation). A contact interaction with
// inverse length g then has K = v v^T / (g/(2 pi) - value), v_c = sqrt(p_c/k_c).
ClosedSum closed_channel_sum(double E, double eta);

}  // namespace wg
