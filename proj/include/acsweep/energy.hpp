#ifndef ACSWEEP_ENERGY_HPP
#define ACSWEEP_ENERGY_HPP

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "grid.hpp"
#include "profile.hpp"
#include "scenario.hpp"
#include "well.hpp"

namespace acsweep {

// Region ids for the optional energy decomposition.
enum : std::uint8_t { kRegionComplement = 0, kRegionTube = 1, kRegionHole = 2 };

struct EnergyReport {
    double total = 0.0;      // E_eps(u), normalized by 1/(2 sigma)
    double dirichlet = 0.0;  // gradient part (normalized)
    double potential = 0.0;  // well part (normalized)
    std::map<std::string, double> byRegion;  // optional decomposition of total
};

// The Dirichlet part is accumulated over faces with the same coefficients as
// the Laplacian flux, so the discrete integration-by-parts identity
// <first_variation, v> = -d/da F(u + a v) holds exactly.
inline EnergyReport ac_energy(const ScalarField& u, const DoubleWell& dw, double eps,
                              const std::vector<std::uint8_t>* regions = nullptr) {
    const ChartGrid& G = *u.grid;
    EnergyReport rep;
    const double norm = 1.0 / (2.0 * dw.sigma);
    double dir = dirichlet_face_sum(u);
    double pot = parallel_sum(G.n1(), [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < G.n2(); ++j) s += dw.w(u.v[G.idx(i, j)]) * G.volB[j];
        return s * G.volA[i];
    });
    rep.dirichlet = norm * 0.5 * eps * dir;
    rep.potential = norm * pot / eps;
    rep.total = rep.dirichlet + rep.potential;
    if (regions) {
        const char* names[3] = {"complement", "tube", "hole"};
        for (std::uint8_t r = 0; r < 3; ++r) {
            double dr = dirichlet_face_sum(u, regions, r);
            double pr = parallel_sum(G.n1(), [&](std::size_t i) {
                double s = 0.0;
                for (std::size_t j = 0; j < G.n2(); ++j) {
                    std::size_t k = G.idx(i, j);
                    if ((*regions)[k] == r) s += dw.w(u.v[k]) * G.volB[j];
                }
                return s * G.volA[i];
            });
            rep.byRegion[names[r]] = norm * (0.5 * eps * dr + pr / eps);
        }
    }
    return rep;
}

// F_{eps,mu}(u) = E_eps(u) - (mu / 2 sigma) int u
inline double forced_energy(const ScalarField& u, const DoubleWell& dw, double eps, double mu) {
    require(mu >= 0.0, "forced_energy: mu must be >= 0");
    return ac_energy(u, dw, eps).total - mu / (2.0 * dw.sigma) * integrate(u);
}

// eps Lap u - W'(u)/eps + mu; equals -(2 sigma) F'_{eps,mu}(u) as a field.
inline ScalarField first_variation(const ScalarField& u, const DoubleWell& dw, double eps,
                                   double mu = 0.0) {
    ScalarField out(*u.grid);
    laplacian_into(u, out);
    const std::size_t n = u.size();
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k)
            out.v[k] = eps * out.v[k] - dw.w1(u.v[k]) / eps + mu;
    });
    return out;
}

// default forcing mu_eps = eps |log eps| (config may override)
inline double mu_default(double eps) { return eps * log_abs(eps); }

// stationary constant of the forced flow near +1: W'(k) = eps * mu
inline double stationary_constant(const DoubleWell& dw, double eps, double mu) {
    double target = eps * mu;
    double k = 1.0;
    for (int it = 0; it < 80; ++it) {
        double f = dw.w1(k) - target;
        double df = dw.w2(k);
        double step = f / df;
        k -= step;
        if (std::fabs(step) < 1e-16) break;
    }
    return k;
}

}  // namespace acsweep

#endif
