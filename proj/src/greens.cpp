#include "wg/greens.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <numbers>
#include <vector>

namespace wg {

namespace {

// c(n) = phi_n(0)^2 / sqrt(1/pi) for even n
double even_origin_factor(int n)
{
    double v = 1.0;
    for (int j = 2; j <= n; j += 2)
        v *= (j - 1.0) / j;
    return v;
}

double log_sinhc(double x)
{
    if (x < 1e-2) {
        const double x2 = x * x;
        return x2 / 6.0 - x2 * x2 / 180.0 + x2 * x2 * x2 / 2835.0;
    }
    if (x > 300.0)
        return x - std::log(2.0 * x);
    return std::log(std::sinh(x) / x);
}

}  // namespace

double contact_density(const Channel& c, double eta)
{
    if (c.n1 % 2 || c.n2 % 2)
        return 0.0;
    return std::sqrt(eta) / std::numbers::pi * even_origin_factor(c.n1) * even_origin_factor(c.n2);
}

ClosedSum closed_channel_sum(double E, double eta)
{
    const double two_pi = 2.0 * std::numbers::pi;
    const double t1 = 1.0 / std::max(1.0, std::abs(E) / 4.0);
    // erfc(kappa sqrt(t1/2)) < 1e-20 beyond the cut
    const double tail_cut = 45.0 / t1;

    struct Term {
        double thr, p;
    };
    std::vector<Term> open;
    double tail = 0.0;
    for (int n1 = 0; eta * (n1 + 0.5) + 0.5 < E + tail_cut; n1 += 2)
        for (int n2 = 0;; n2 += 2) {
            const Channel c{n1, n2};
            const double thr = threshold_energy(c, eta);
            if (thr >= E + tail_cut)
                break;
            const double p = contact_density(c, eta);
            if (thr < E) {
                open.push_back({thr, p});
            } else {
                const double kappa = std::sqrt(2.0 * (thr - E));
                tail += p / kappa * std::erfc(kappa * std::sqrt(0.5 * t1));
            }
        }

    // t = s^2 removes the t^{-1/2} endpoint behaviour
    auto integrand = [&](double s) {
        const double t = s * s;
        double F;
        if (t == 0.0) {
            F = (E - (eta * eta + 1.0) / 12.0) / two_pi;
        } else {
            F = std::expm1(E * t - 0.5 * (log_sinhc(eta * t) + log_sinhc(t))) / (two_pi * t);
        }
        for (const auto& o : open)
            F -= o.p * std::exp((E - o.thr) * t);
        return 2.0 * F / std::sqrt(two_pi);
    };
    const double ub = std::sqrt(t1);
    const double i40 = boost::math::quadrature::gauss<double, 40>::integrate(integrand, 0.0, ub);
    const double i60 = boost::math::quadrature::gauss<double, 60>::integrate(integrand, 0.0, ub);

    ClosedSum out;
    out.value = -(i60 + tail - 2.0 * std::pow(two_pi, -1.5) / std::sqrt(t1));
    out.error = std::abs(i60 - i40);
    return out;
}

}  // namespace wg
