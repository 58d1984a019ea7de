#pragma once

#include "wg/solver.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wg {

class DomainError : public std::domain_error {
    using std::domain_error::domain_error;
};

struct PopulationWeights {
    std::vector<std::pair<Channel, double>> w;

    void normalize();
    double weight(const Channel& c) const;

    // W0 for (0,0) and W0 * ratio / 2 for each of (2,0), (0,2), normalized.
    static PopulationWeights from_excited_ratio(double w2_over_w0);
};

double partial_transmission(const ScatteringSolution& sol, const Channel& entrance);
double reflection(const ScatteringSolution& sol, const Channel& entrance);

// sum_i W_i T_i over solutions that each carry their own entrance channel
double total_transmission(const std::vector<ScatteringSolution>& sols, const PopulationWeights& weights);
// same with all entrances taken from one solution
double total_transmission(const ScatteringSolution& sol, const PopulationWeights& weights);

// 2 sum_{n1'+n2'=n'} (k'/k) |f|^2 from the lowest open channel of manifold n.
double transition_probability(const ScatteringSolution& sol, int n, int n_prime);

// flux leaving entrance c into manifold n' (no factor 2)
double manifold_flux(const ScatteringSolution& sol, const Channel& entrance, int n_prime);

double unitarity_defect(const ScatteringSolution& sol);

}  // namespace wg
