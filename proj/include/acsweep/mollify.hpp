#ifndef ACSWEEP_MOLLIFY_HPP
#define ACSWEEP_MOLLIFY_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include "grid.hpp"
#include "quadrature.hpp"
#include "scenario.hpp"

namespace acsweep {

// Geodesic mollifier eta_delta(x,y) = eta(d(x,y)/delta) / (c_n delta^{n+1}),
// eta(t) = exp(-1/(1-t^2)) on (-1,1). On the reduced S^3 chart the kernel
// acts on the quotient distance (beta-orbit distance); the chart-exact
// kernel identities are exercised on the scenarios whose chart is the full
// manifold (S^2, torus).
class MollifierKernel {
public:
    const ChartGrid* grid = nullptr;
    double delta = 0.0;
    double delta0 = 0.0;  // scenario ceiling min(inj/4, omega/4)
    int dim = 2;          // n+1
    double cn = 0.0;
    bool normalized = false;  // divide by the discrete mass (exact on constants)

    MollifierKernel(const ChartGrid& G, double delta_, bool normalized_ = false) {
        grid = &G;
        delta = delta_;
        normalized = normalized_;
        const Scenario& S = *G.scenario;
        delta0 = std::min(S.M.injRadius / 4.0, S.M.omega / 4.0);
        require(delta > 0.0 && delta < delta0,
                "MollifierKernel: delta must lie in (0, delta0), delta0 = min(inj/4, omega/4)");
        dim = (S.kind == ScenarioKind::Sphere3Axisym) ? 3 : 2;
        double momentn = integrate_adaptive(
            [this](double s) { return etaProfile(s) * std::pow(s, dim - 1); }, 0.0, 1.0, 1e-14);
        double wn = (dim == 2) ? M_PI : 4.0 * M_PI / 3.0;  // volume of the unit ball
        cn = dim * wn * momentn;
    }

    static double etaProfile(double t) {
        double a = std::fabs(t);
        if (a >= 1.0) return 0.0;
        return std::exp(-1.0 / (1.0 - a * a));
    }

    double eta(double dist) const {
        if (dist >= delta) return 0.0;
        return etaProfile(dist / delta) / (cn * std::pow(delta, dim));
    }

    // raw discrete kernel mass at node (i,j): sum_y eta(x,y) vol(y)
    double massAt(std::size_t i, std::size_t j) const {
        double m = 0.0;
        visit(i, j, [&](std::size_t /*ii*/, std::size_t /*jj*/, double e, double vol) { m += e * vol; });
        return m;
    }

    // f * eta_delta (and the normalized variant used inside paths)
    ScalarField convolveField(const ScalarField& u) const {
        const ChartGrid& G = *grid;
        ScalarField out(G);
        parallel_for(G.n1(), [&](std::size_t ilo, std::size_t ihi) {
            for (std::size_t i = ilo; i < ihi; ++i)
                for (std::size_t j = 0; j < G.n2(); ++j) {
                    double acc = 0.0, mass = 0.0;
                    visit(i, j, [&](std::size_t ii, std::size_t jj, double e, double vol) {
                        acc += e * vol * u.v[G.idx(ii, jj)];
                        mass += e * vol;
                    });
                    out.v[G.idx(i, j)] = normalized && mass > 0.0 ? acc / mass : acc;
                }
        });
        return out;
    }

    // (mu * eta_delta)(x) for a node-atom measure (weights already include vol)
    ScalarField convolveMeasure(const std::vector<double>& atomWeights) const {
        const ChartGrid& G = *grid;
        require(atomWeights.size() == G.size(), "convolveMeasure: atom vector size mismatch");
        ScalarField out(G);
        parallel_for(G.n1(), [&](std::size_t ilo, std::size_t ihi) {
            for (std::size_t i = ilo; i < ihi; ++i)
                for (std::size_t j = 0; j < G.n2(); ++j) {
                    double acc = 0.0;
                    visit(i, j, [&](std::size_t ii, std::size_t jj, double e, double /*vol*/) {
                        acc += e * atomWeights[G.idx(ii, jj)];
                    });
                    out.v[G.idx(i, j)] = acc;
                }
        });
        return out;
    }

    // enumerate source nodes within distance delta of target (i,j)
    template <class Fn>
    void visit(std::size_t i, std::size_t j, Fn&& fn) const {
        const ChartGrid& G = *grid;
        const Scenario& S = *G.scenario;
        const double x1 = G.a1.x[i], x2 = G.a2.x[j];
        if (S.kind == ScenarioKind::FlatTorus) {
            std::size_t n1 = G.n1(), n2 = G.n2();
            int iw = static_cast<int>(delta / G.a1.dx(0)) + 1;
            int jw = static_cast<int>(delta / G.a2.dx(0)) + 1;
            for (int di = -iw; di <= iw; ++di)
                for (int dj = -jw; dj <= jw; ++dj) {
                    std::size_t ii = (i + n1 + di) % n1, jj = (j + n2 + dj) % n2;
                    double d = S.geoDist(x1, x2, G.a1.x[ii], G.a2.x[jj]);
                    if (d < delta) fn(ii, jj, eta(d), G.volMid(ii, jj));
                }
            return;
        }
        // sphere charts: theta window, then angular window in the other axis
        const double dth = delta / S.rho;
        std::size_t ilo = std::lower_bound(G.a1.x.begin(), G.a1.x.end(), x1 - dth) - G.a1.x.begin();
        std::size_t ihi = std::upper_bound(G.a1.x.begin(), G.a1.x.end(), x1 + dth) - G.a1.x.begin();
        const bool per2 = G.a2.boundary == Boundary::Periodic;
        // if the kernel ball touches a chart pole, the product midpoint rule
        // loses its boundary cancellation there; refine every cell of such
        // windows by subcell midpoints
        const bool ballAtPole1 = S.rho * std::min(x1, M_PI - x1) < 1.05 * delta;
        const bool ballAtPole2 = !per2 && S.rho * std::min(x2, M_PI - x2) < 1.05 * delta;
        auto emit = [&](std::size_t ii, std::size_t jj) {
            if (!ballAtPole1 && !ballAtPole2) {
                double d = S.geoDist(x1, x2, G.a1.x[ii], G.a2.x[jj]);
                if (d < delta) fn(ii, jj, eta(d), G.volMid(ii, jj));
                return;
            }
            const int r = 6;
            double acc = 0.0;
            double h1 = G.a1.dx(ii) / r, h2 = G.a2.dx(jj) / r;
            for (int a = 0; a < r; ++a)
                for (int b = 0; b < r; ++b) {
                    double y1 = G.a1.xf[ii] + (a + 0.5) * h1;
                    double y2 = G.a2.xf[jj] + (b + 0.5) * h2;
                    double d = S.geoDist(x1, x2, y1, y2);
                    if (d < delta) acc += eta(d) * S.densityAt(y1, y2) * h1 * h2;
                }
            double vol = G.volMid(ii, jj);
            if (acc != 0.0 && vol > 0.0) fn(ii, jj, acc / vol, vol);  // cell-averaged kernel
        };
        for (std::size_t ii = ilo; ii < ihi; ++ii) {
            double sThMin = std::min(std::sin(G.a1.x[ii]), std::sin(x1));
            double wang;
            double sd = std::sin(dth);
            if (sThMin <= sd) wang = M_PI;  // window covers the full circle near poles
            else wang = std::asin(std::min(1.0, sd / sThMin)) * 1.2 + 2.0 * G.a2.dx(0);
            if (per2) {
                int jw = std::min<int>(static_cast<int>(G.n2()) / 2,
                                       static_cast<int>(wang / G.a2.dx(0)) + 1);
                if (2 * jw + 1 >= static_cast<int>(G.n2())) {
                    for (std::size_t jj = 0; jj < G.n2(); ++jj) emit(ii, jj);
                } else {
                    for (int dj = -jw; dj <= jw; ++dj)
                        emit(ii, static_cast<std::size_t>((j + G.n2() + dj) % G.n2()));
                }
            } else {
                double lo2 = x2 - wang, hi2 = x2 + wang;
                for (std::size_t jj = 0; jj < G.n2(); ++jj) {
                    if (G.a2.x[jj] < lo2 || G.a2.x[jj] > hi2) continue;
                    emit(ii, jj);
                }
            }
        }
    }
};

// sup_N |Delta(u * eta) - (Delta u) * eta| with Delta u taken as the node
// measure produced by the divergence-form stencil (its atoms carry the
// absolutely continuous part and the codimension-1 jump parts of kinked
// fields at once, since the flux difference equals the one-sided normal
// derivative jump times the face area at a kink row).
struct CommutatorResult {
    double sup = 0.0;
    double fittedCN = 0.0;  // sup / ||u||_inf
};

inline CommutatorResult laplacian_commutator(const ScalarField& u, const MollifierKernel& kernel) {
    const ChartGrid& G = *u.grid;
    ScalarField lap = laplace_beltrami(u);
    std::vector<double> atoms(G.size());
    for (std::size_t i = 0; i < G.n1(); ++i)
        for (std::size_t j = 0; j < G.n2(); ++j)
            atoms[G.idx(i, j)] = lap(i, j) * G.vol(i, j);
    ScalarField smoothed = kernel.convolveField(u);
    ScalarField lhs = laplace_beltrami(smoothed);
    ScalarField rhs = kernel.convolveMeasure(atoms);
    double sup = 0.0, umax = 0.0;
    for (std::size_t k = 0; k < G.size(); ++k) {
        sup = std::max(sup, std::fabs(lhs.v[k] - rhs.v[k]));
        umax = std::max(umax, std::fabs(u.v[k]));
    }
    CommutatorResult r;
    r.sup = sup;
    r.fittedCN = umax > 0 ? sup / umax : sup;
    return r;
}

}  // namespace acsweep

#endif
