#ifndef ACSWEEP_GRID_HPP
#define ACSWEEP_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"

namespace acsweep {

enum class Boundary { Periodic, Pole, Clamped };

// One coordinate axis. Nodes live at x[i]; node i owns the cell
// [xf[i], xf[i+1]]. Interior faces sit midway between nodes. Pole axes are
// cell-centered: no node at the pole itself, the boundary face carries zero
// area so the flux closure is the standard polar-grid (regularized) one.
struct Axis {
    std::string name;
    Boundary boundary = Boundary::Clamped;
    std::vector<double> x;   // node coordinates, size n
    std::vector<double> xf;  // face coordinates, size n+1
    double period = 0.0;     // coordinate period for Periodic

    std::size_t n() const { return x.size(); }
    double dx(std::size_t i) const { return xf[i + 1] - xf[i]; }
    // node-to-node distance across face i (faces 0..n); periodic wraps
    double delta(std::size_t f) const {
        if (f == 0 || f == n()) {
            if (boundary == Boundary::Periodic) return x.front() + period - x.back();
            return 0.0;  // unused for Pole/Clamped (zero-flux faces)
        }
        return x[f] - x[f - 1];
    }

    static Axis uniformPeriodic(std::string name, double lo, double period, std::size_t n) {
        Axis a;
        a.name = std::move(name);
        a.boundary = Boundary::Periodic;
        a.period = period;
        double h = period / n;
        a.x.resize(n);
        a.xf.resize(n + 1);
        for (std::size_t i = 0; i < n; ++i) a.x[i] = lo + (i + 0.5) * h;
        for (std::size_t i = 0; i <= n; ++i) a.xf[i] = lo + i * h;
        return a;
    }

    static Axis cellCenteredPole(std::string name, double lo, double hi, std::size_t n) {
        Axis a;
        a.name = std::move(name);
        a.boundary = Boundary::Pole;
        double h = (hi - lo) / n;
        a.x.resize(n);
        a.xf.resize(n + 1);
        for (std::size_t i = 0; i < n; ++i) a.x[i] = lo + (i + 0.5) * h;
        for (std::size_t i = 0; i <= n; ++i) a.xf[i] = lo + i * h;
        return a;
    }

    // Non-uniform pole axis from explicit interior node positions.
    static Axis fromNodesPole(std::string name, double lo, double hi, std::vector<double> nodes) {
        Axis a;
        a.name = std::move(name);
        a.boundary = Boundary::Pole;
        a.x = std::move(nodes);
        a.xf.resize(a.x.size() + 1);
        a.xf.front() = lo;
        a.xf.back() = hi;
        for (std::size_t i = 1; i < a.x.size(); ++i) a.xf[i] = 0.5 * (a.x[i - 1] + a.x[i]);
        return a;
    }
};

class Scenario;  // forward

// Structured 2D chart grid with separable metric data:
//   cell volume        w(i,j)   = volA[i]   * volB[j]   (exact cell masses)
//   axis-1 face coeff  sqrt(g) g^{11} -> face1P[f] * face1Q[j]
//   axis-2 face coeff  sqrt(g) g^{22} -> face2R[i] * face2S[f]
// The divergence-form Laplacian built from these is self-adjoint in the
// w-weighted inner product and has nonnegative off-diagonal entries.
class ChartGrid {
public:
    Axis a1, a2;
    std::vector<double> volA, volB;      // per-axis cell masses (exact integrals)
    std::vector<double> volAc, volBc;    // midpoint-rule masses (kernel quadratures)
    std::vector<double> face1P, face1Q;  // sizes n1+1, n2
    std::vector<double> face2R, face2S;  // sizes n1, n2+1
    std::vector<double> g11inv;          // g^{11} per axis-1 node
    std::vector<double> g22invA;         // g^{22} per axis-1 node (axis-2 part is 1)
    const Scenario* scenario = nullptr;

    std::size_t n1() const { return a1.n(); }
    std::size_t n2() const { return a2.n(); }
    std::size_t size() const { return n1() * n2(); }
    std::size_t idx(std::size_t i, std::size_t j) const { return i * n2() + j; }

    double vol(std::size_t i, std::size_t j) const { return volA[i] * volB[j]; }
    double volMid(std::size_t i, std::size_t j) const { return volAc[i] * volBc[j]; }
    double totalVolume() const {
        double va = 0, vb = 0;
        for (double v : volA) va += v;
        for (double v : volB) vb += v;
        return va * vb;
    }
};

struct ScalarField {
    const ChartGrid* grid = nullptr;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const ChartGrid& g, double fill = 0.0) : grid(&g), v(g.size(), fill) {}

    double& operator()(std::size_t i, std::size_t j) { return v[grid->idx(i, j)]; }
    double operator()(std::size_t i, std::size_t j) const { return v[grid->idx(i, j)]; }
    std::size_t size() const { return v.size(); }

    double minValue() const {
        double m = v[0];
        for (double x : v) m = std::min(m, x);
        return m;
    }
    double maxValue() const {
        double m = v[0];
        for (double x : v) m = std::max(m, x);
        return m;
    }
};

inline void checkSameGrid(const ScalarField& a, const ScalarField& b, const char* what) {
    require(a.grid == b.grid && a.size() == b.size(), std::string(what) + ": grid mismatch");
}

// ---------------------------------------------------------------------------
// Divergence-form Laplace-Beltrami stencil.
// ---------------------------------------------------------------------------
inline void laplacian_into(const ScalarField& u, ScalarField& out) {
    const ChartGrid& G = *u.grid;
    const std::size_t N1 = G.n1(), N2 = G.n2();
    const bool per2 = G.a2.boundary == Boundary::Periodic;
    const bool per1 = G.a1.boundary == Boundary::Periodic;
    parallel_for(N1, [&](std::size_t ilo, std::size_t ihi) {
        for (std::size_t i = ilo; i < ihi; ++i) {
            const double* row = &u.v[G.idx(i, 0)];
            double* orow = &out.v[G.idx(i, 0)];
            const double wA = G.volA[i];
            // axis-1 neighbors
            const double* up = (i + 1 < N1) ? &u.v[G.idx(i + 1, 0)] : (per1 ? &u.v[G.idx(0, 0)] : nullptr);
            const double* dn = (i > 0) ? &u.v[G.idx(i - 1, 0)] : (per1 ? &u.v[G.idx(N1 - 1, 0)] : nullptr);
            const double cUp = (i + 1 < N1 || per1) ? G.face1P[i + 1] / G.a1.delta(i + 1) : 0.0;
            const double cDn = (i > 0 || per1) ? G.face1P[i] / G.a1.delta(i) : 0.0;
            const double r2 = G.face2R[i];
            for (std::size_t j = 0; j < N2; ++j) {
                double acc = 0.0;
                if (up) acc += cUp * G.face1Q[j] * (up[j] - row[j]);
                if (dn) acc -= cDn * G.face1Q[j] * (row[j] - dn[j]);
                // axis-2 fluxes
                if (j + 1 < N2)
                    acc += r2 * G.face2S[j + 1] / G.a2.delta(j + 1) * (row[j + 1] - row[j]);
                else if (per2)
                    acc += r2 * G.face2S[N2] / G.a2.delta(N2) * (row[0] - row[j]);
                if (j > 0)
                    acc -= r2 * G.face2S[j] / G.a2.delta(j) * (row[j] - row[j - 1]);
                else if (per2)
                    acc -= r2 * G.face2S[0] / G.a2.delta(0) * (row[j] - row[N2 - 1]);
                orow[j] = acc / (wA * G.volB[j]);
            }
        }
    });
}

inline ScalarField laplace_beltrami(const ScalarField& u) {
    ScalarField out(*u.grid);
    laplacian_into(u, out);
    return out;
}

// Sum over all faces of coef * (du)^2 / delta; equals -<Lu, u>_w exactly.
// An optional node mask splits each face's contribution half/half between
// its two end nodes (used for exact by-region energy decompositions).
inline double dirichlet_face_sum(const ScalarField& u, const std::vector<std::uint8_t>* mask = nullptr,
                                 std::uint8_t region = 0) {
    const ChartGrid& G = *u.grid;
    const std::size_t N1 = G.n1(), N2 = G.n2();
    const bool per2 = G.a2.boundary == Boundary::Periodic;
    const bool per1 = G.a1.boundary == Boundary::Periodic;
    auto weight = [&](std::size_t a, std::size_t b) -> double {
        if (!mask) return 1.0;
        double w = 0.0;
        if ((*mask)[a] == region) w += 0.5;
        if ((*mask)[b] == region) w += 0.5;
        return w;
    };
    return parallel_sum(N1, [&](std::size_t i) {
        double s = 0.0;
        // axis-1 face below row i (face index i), skip if zero-flux boundary
        if (i > 0 || per1) {
            std::size_t im = (i > 0) ? i - 1 : N1 - 1;
            double c = G.face1P[i] / G.a1.delta(i);
            if (c != 0.0)
                for (std::size_t j = 0; j < N2; ++j) {
                    double du = u.v[G.idx(i, j)] - u.v[G.idx(im, j)];
                    s += weight(G.idx(i, j), G.idx(im, j)) * c * G.face1Q[j] * du * du;
                }
        }
        // axis-2 faces within row i (face j for j>0, plus wrap face once)
        double r2 = G.face2R[i];
        for (std::size_t j = 1; j < N2; ++j) {
            double c = r2 * G.face2S[j] / G.a2.delta(j);
            double du = u.v[G.idx(i, j)] - u.v[G.idx(i, j - 1)];
            s += weight(G.idx(i, j), G.idx(i, j - 1)) * c * du * du;
        }
        if (per2) {
            double c = r2 * G.face2S[0] / G.a2.delta(0);
            double du = u.v[G.idx(i, 0)] - u.v[G.idx(i, N2 - 1)];
            s += weight(G.idx(i, 0), G.idx(i, N2 - 1)) * c * du * du;
        }
        return s;
    });
}

inline double integrate(const ScalarField& u) {
    const ChartGrid& G = *u.grid;
    return parallel_sum(G.n1(), [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < G.n2(); ++j) s += u.v[G.idx(i, j)] * G.volB[j];
        return s * G.volA[i];
    });
}

inline double integrate_masked(const ScalarField& u, const std::vector<std::uint8_t>& mask,
                               std::uint8_t region) {
    const ChartGrid& G = *u.grid;
    return parallel_sum(G.n1(), [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < G.n2(); ++j) {
            std::size_t k = G.idx(i, j);
            if (mask[k] == region) s += u.v[k] * G.volB[j];
        }
        return s * G.volA[i];
    });
}

// Pointwise metric gradient norm squared by central differences (one-sided at
// zero-flux boundaries). Used for the Lipschitz-1 distance check.
inline ScalarField grad_norm_sq(const ScalarField& u) {
    const ChartGrid& G = *u.grid;
    const std::size_t N1 = G.n1(), N2 = G.n2();
    const bool per2 = G.a2.boundary == Boundary::Periodic;
    ScalarField out(G);
    parallel_for(N1, [&](std::size_t ilo, std::size_t ihi) {
        for (std::size_t i = ilo; i < ihi; ++i) {
            for (std::size_t j = 0; j < N2; ++j) {
                double d1;
                if (i > 0 && i + 1 < N1)
                    d1 = (u(i + 1, j) - u(i - 1, j)) / (G.a1.x[i + 1] - G.a1.x[i - 1]);
                else if (i + 1 < N1)
                    d1 = (u(i + 1, j) - u(i, j)) / (G.a1.x[i + 1] - G.a1.x[i]);
                else if (i > 0)
                    d1 = (u(i, j) - u(i - 1, j)) / (G.a1.x[i] - G.a1.x[i - 1]);
                else
                    d1 = 0.0;
                double d2;
                std::size_t jp = (j + 1 < N2) ? j + 1 : 0, jm = (j > 0) ? j - 1 : N2 - 1;
                if (per2 || (j > 0 && j + 1 < N2)) {
                    double dl = (j + 1 < N2) ? G.a2.x[j + 1] - G.a2.x[j] : G.a2.delta(N2);
                    double dr = (j > 0) ? G.a2.x[j] - G.a2.x[jm] : G.a2.delta(0);
                    d2 = (u(i, jp) - u(i, jm)) / (dl + dr);
                } else if (j + 1 < N2)
                    d2 = (u(i, jp) - u(i, j)) / (G.a2.x[j + 1] - G.a2.x[j]);
                else
                    d2 = (u(i, j) - u(i, jm)) / (G.a2.x[j] - G.a2.x[jm]);
                out(i, j) = G.g11inv[i] * d1 * d1 + G.g22invA[i] * d2 * d2;
            }
        }
    });
    return out;
}

// H^1-type distance used for the path continuity certificates.
inline double w12_dist(const ScalarField& a, const ScalarField& b) {
    checkSameGrid(a, b, "w12_dist");
    ScalarField d(*a.grid);
    for (std::size_t k = 0; k < d.size(); ++k) d.v[k] = a.v[k] - b.v[k];
    double l2 = parallel_sum(a.grid->n1(), [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.grid->n2(); ++j) {
            double x = d.v[a.grid->idx(i, j)];
            s += x * x * a.grid->volB[j];
        }
        return s * a.grid->volA[i];
    });
    return std::sqrt(l2 + dirichlet_face_sum(d));
}

inline double l2_norm(const ScalarField& a) {
    const ChartGrid& G = *a.grid;
    double s = parallel_sum(G.n1(), [&](std::size_t i) {
        double t = 0.0;
        for (std::size_t j = 0; j < G.n2(); ++j) {
            double x = a.v[G.idx(i, j)];
            t += x * x * G.volB[j];
        }
        return t * G.volA[i];
    });
    return std::sqrt(s);
}

}  // namespace acsweep

#endif
