#ifndef ACSWEEP_SCENARIO_HPP
#define ACSWEEP_SCENARIO_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "common.hpp"
#include "grid.hpp"

namespace acsweep {

// Reference data for the minimal hypersurface M of a scenario.
struct HypersurfaceRef {
    double area = 0.0;       // H^n(M)
    double injRadius = 0.0;  // inj(N)
    double ricMin = 0.0;     // min_N Ric_N (0 on the torus)
    double secondFF = 0.0;   // |A|^2 on M
    double ricNormal = 0.0;  // Ric_N(nu, nu) on M
    double omega = 0.0;      // tube half-width, < min(inj, distance to cut locus)
};

// Grid resolution policy: fine layer around the profile band, eps/4 inside
// the tube, coarser outside, with geometric grading between zones.
struct GridPolicy {
    double eps = 0.05;
    double hLayer = 0.0;        // default eps/16
    double hTube = 0.0;         // default eps/4
    double hOuter = 0.0;        // default eps
    double layerHalfWidth = 0;  // default 4 eps Lambda + 0.25
    std::size_t n2 = 0;         // axis-2 node count (scenario default if 0)
    double gradeRatio = 1.25;

    void fill(double) {
        if (hLayer <= 0) hLayer = eps / 16.0;
        if (hTube <= 0) hTube = eps / 4.0;
        if (hOuter <= 0) hOuter = eps;
        if (layerHalfWidth <= 0) layerHalfWidth = 12.0 * eps * log_abs(eps) + 0.25;
    }
};

enum class ScenarioKind { Sphere2, Sphere3Axisym, FlatTorus };

// Symmetric compact scenarios with closed-form geometry:
//  - Sphere2:       round S^2(rho), M = equator circle, chart (theta, phi)
//  - Sphere3Axisym: round S^3(rho), M = equatorial S^2, reduced by rotational
//                   symmetry to the (theta, alpha) half-chart with volume
//                   weight 2 pi rho^3 sin^2(theta) sin(alpha)
//  - FlatTorus:     [0,Lx) x [0,Ly), M = {x = 0} circle (Ricci-zero control)
class Scenario {
public:
    ScenarioKind kind;
    std::string name;
    double rho = 3.0;       // sphere radius (Lx for the torus)
    double Ly = 2 * M_PI;   // torus only
    HypersurfaceRef M;
    double cK = 0.0;        // tubular semi-width used for Fermi-region work
    double jacPiC = 0.0;    // valid constant for the |JPi - 1| <= 2 C s bounds
    int dimM = 1;           // n = dim M

    static Scenario sphere2(double rho_, double omega = 0.0) {
        Scenario s;
        s.kind = ScenarioKind::Sphere2;
        s.name = "s2";
        s.rho = rho_;
        s.dimM = 1;
        s.M.area = 2.0 * M_PI * rho_;
        s.M.injRadius = M_PI * rho_;
        s.M.ricMin = 1.0 / (rho_ * rho_);
        s.M.secondFF = 0.0;
        s.M.ricNormal = 1.0 / (rho_ * rho_);
        double cut = s.cutLocusDistance();
        s.M.omega = omega > 0 ? omega : 0.72 * cut;
        require(s.M.omega < cut && s.M.omega < s.M.injRadius, "sphere2: omega too large");
        s.cK = 0.90 * cut;
        s.jacPiC = s.jacConstant();
        return s;
    }

    static Scenario sphere3Axisym(double rho_, double omega = 0.0) {
        Scenario s;
        s.kind = ScenarioKind::Sphere3Axisym;
        s.name = "s3axi";
        s.rho = rho_;
        s.dimM = 2;
        s.M.area = 4.0 * M_PI * rho_ * rho_;
        s.M.injRadius = M_PI * rho_;
        s.M.ricMin = 2.0 / (rho_ * rho_);
        s.M.secondFF = 0.0;
        s.M.ricNormal = 2.0 / (rho_ * rho_);
        double cut = s.cutLocusDistance();
        s.M.omega = omega > 0 ? omega : 0.72 * cut;
        require(s.M.omega < cut && s.M.omega < s.M.injRadius, "sphere3: omega too large");
        s.cK = 0.90 * cut;
        s.jacPiC = s.jacConstant();
        return s;
    }

    static Scenario flatTorus(double Lx, double Ly_, double omega = 0.0) {
        Scenario s;
        s.kind = ScenarioKind::FlatTorus;
        s.name = "torus";
        s.rho = Lx;
        s.Ly = Ly_;
        s.dimM = 1;
        s.M.area = Ly_;
        s.M.injRadius = 0.5 * std::min(Lx, Ly_);
        s.M.ricMin = 0.0;
        s.M.secondFF = 0.0;
        s.M.ricNormal = 0.0;
        double cut = s.cutLocusDistance();
        s.M.omega = omega > 0 ? omega : 0.72 * cut;
        require(s.M.omega < cut, "torus: omega too large");
        s.cK = 0.90 * cut;
        s.jacPiC = 1e-12;  // flat normal bundle: JPi == 1
        return s;
    }

    bool ricciPositive() const { return M.ricMin > 0.0; }

    // distance from M to its cut locus (poles / antipodal circle)
    double cutLocusDistance() const {
        switch (kind) {
            case ScenarioKind::Sphere2:
            case ScenarioKind::Sphere3Axisym: return 0.5 * M_PI * rho;
            case ScenarioKind::FlatTorus: return 0.5 * rho;
        }
        return 0.0;
    }

    double volume() const {
        switch (kind) {
            case ScenarioKind::Sphere2: return 4.0 * M_PI * rho * rho;
            case ScenarioKind::Sphere3Axisym: return 2.0 * M_PI * M_PI * rho * rho * rho;
            case ScenarioKind::FlatTorus: return rho * Ly;
        }
        return 0.0;
    }

    // length of the M-chart coordinate (arc length); periodic for circles
    double mChartLength() const {
        switch (kind) {
            case ScenarioKind::Sphere2: return 2.0 * M_PI * rho;
            case ScenarioKind::Sphere3Axisym: return M_PI * rho;  // q = rho * alpha
            case ScenarioKind::FlatTorus: return Ly;
        }
        return 0.0;
    }
    bool mChartPeriodic() const { return kind != ScenarioKind::Sphere3Axisym; }

    // measure weight along the M-chart: integral of weightM dq = H^n(M)
    double weightM(double q) const {
        if (kind == ScenarioKind::Sphere3Axisym) return 2.0 * M_PI * rho * std::sin(q / rho);
        return 1.0;
    }

    // geodesic distance on M between chart points (axisymmetric chart: on the
    // S^3 scenario this is the distance to the symmetry axis point at q2=0
    // extended by |q1 - q2| along meridional arcs, exact for q2 = 0).
    double distOnM(double q1, double q2) const {
        if (mChartPeriodic()) {
            double L = mChartLength();
            double d = std::fabs(q1 - q2);
            d = std::fmod(d, L);
            return std::min(d, L - d);
        }
        return std::fabs(q1 - q2);
    }

    // --- chart geometry --------------------------------------------------

    // unsigned distance to M at chart point (x1, x2)
    double distM(double x1, double x2) const {
        switch (kind) {
            case ScenarioKind::Sphere2:
            case ScenarioKind::Sphere3Axisym: return rho * std::fabs(x1 - 0.5 * M_PI);
            case ScenarioKind::FlatTorus: {
                double d = std::fmod(x1, rho);
                (void)x2;
                return std::min(d, rho - d);
            }
        }
        return 0.0;
    }

    int sheet(double x1, double /*x2*/) const {
        if (kind == ScenarioKind::FlatTorus) {
            double d = std::fmod(x1, rho);
            return d <= rho - d ? +1 : -1;
        }
        return x1 >= 0.5 * M_PI ? +1 : -1;
    }

    // Fermi chart coordinate along M for the point (x1, x2)
    double qArc(double x1, double x2) const {
        switch (kind) {
            case ScenarioKind::Sphere2: return rho * x2;
            case ScenarioKind::Sphere3Axisym: return rho * x2;
            case ScenarioKind::FlatTorus: (void)x1; return x2;
        }
        return 0.0;
    }

    // chart point of the normal graph point (sheet, q, s)
    void graphPoint(int sheet_, double q, double s, double& x1, double& x2) const {
        switch (kind) {
            case ScenarioKind::Sphere2:
            case ScenarioKind::Sphere3Axisym:
                x1 = 0.5 * M_PI + sheet_ * (s / rho);
                x2 = q / rho;
                break;
            case ScenarioKind::FlatTorus:
                x1 = (sheet_ > 0) ? s : rho - s;
                x2 = q;
                break;
        }
    }

    // geodesic distance between chart points (closed form; on the reduced S^3
    // chart this is the true S^3 distance between the orbits' closest points)
    double geoDist(double a1, double a2, double b1, double b2) const {
        switch (kind) {
            case ScenarioKind::Sphere2:
            case ScenarioKind::Sphere3Axisym: {
                double c = std::cos(a1) * std::cos(b1) +
                           std::sin(a1) * std::sin(b1) * std::cos(a2 - b2);
                c = std::clamp(c, -1.0, 1.0);
                return rho * std::acos(c);
            }
            case ScenarioKind::FlatTorus: {
                double dx = std::fabs(a1 - b1);
                dx = std::min(dx, rho - dx);
                double dy = std::fabs(a2 - b2);
                dy = std::fmod(dy, Ly);
                dy = std::min(dy, Ly - dy);
                return std::sqrt(dx * dx + dy * dy);
            }
        }
        return 0.0;
    }

    // closed-form cut locus marker: nodes within margin of the locus
    bool nearCutLocus(double x1, double /*x2*/, double margin) const {
        switch (kind) {
            case ScenarioKind::Sphere2:
            case ScenarioKind::Sphere3Axisym:
                return rho * std::min(x1, M_PI - x1) < margin;
            case ScenarioKind::FlatTorus: {
                double d = std::fmod(x1, rho);
                return std::fabs(std::min(d, rho - d) - 0.5 * rho) < margin;
            }
        }
        return false;
    }

    // volume density sqrt|g| at a chart point (includes reduction constants)
    double densityAt(double x1, double x2) const {
        switch (kind) {
            case ScenarioKind::Sphere2: return rho * rho * std::sin(x1);
            case ScenarioKind::Sphere3Axisym:
                return 2.0 * M_PI * rho * rho * rho * sqr(std::sin(x1)) * std::sin(x2);
            case ScenarioKind::FlatTorus: return 1.0;
        }
        return 1.0;
    }

    // Jacobian of the nearest-point projection onto M at normal height s
    double jacPi(double s) const {
        switch (kind) {
            case ScenarioKind::Sphere2: return 1.0 / std::cos(s / rho);
            case ScenarioKind::Sphere3Axisym: return 1.0 / sqr(std::cos(s / rho));
            case ScenarioKind::FlatTorus: return 1.0;
        }
        return 1.0;
    }

    // Area element of the normal graph s = gamma(q) over one sheet of the
    // double cover: integrate areaElement dq over the M-chart.
    double graphAreaElement(double q, double s, double dsdq) const {
        switch (kind) {
            case ScenarioKind::Sphere2:
                return std::sqrt(dsdq * dsdq + sqr(std::cos(s / rho)));
            case ScenarioKind::Sphere3Axisym: {
                double c = std::cos(s / rho);
                return std::sqrt(dsdq * dsdq + c * c) * 2.0 * M_PI * rho * c * std::sin(q / rho);
            }
            case ScenarioKind::FlatTorus: return std::sqrt(dsdq * dsdq + 1.0);
        }
        return 0.0;
    }

    // --- grid construction -------------------------------------------------

    ChartGrid makeGrid(GridPolicy pol) const {
        pol.fill(rho);
        ChartGrid G;
        G.scenario = this;
        switch (kind) {
            case ScenarioKind::Sphere2: buildSphereGrid(G, pol, /*alphaAxis=*/false); break;
            case ScenarioKind::Sphere3Axisym: buildSphereGrid(G, pol, /*alphaAxis=*/true); break;
            case ScenarioKind::FlatTorus: buildTorusGrid(G, pol); break;
        }
        return G;
    }

private:
    double jacConstant() const {
        // smallest C with |JPi - 1| <= 2 C s and |1/JPi - 1| <= 2 C s on s <= cK
        double cut = cutLocusDistance();
        double cmax = 0.0;
        for (int k = 1; k <= 400; ++k) {
            double s = 0.90 * cut * k / 400.0;
            double j = (kind == ScenarioKind::Sphere2) ? 1.0 / std::cos(s / rho)
                                                       : 1.0 / sqr(std::cos(s / rho));
            cmax = std::max(cmax, std::fabs(j - 1.0) / (2.0 * s));
            cmax = std::max(cmax, std::fabs(1.0 / j - 1.0) / (2.0 * s));
        }
        return cmax;
    }

    // arc-length node ladder from the equator (d = 0) to the pole cap
    std::vector<double> arcLadder(const GridPolicy& pol) const {
        double cut = cutLocusDistance();
        std::vector<double> arcs;
        arcs.push_back(0.0);
        double h = pol.hLayer;
        while (true) {
            double p = arcs.back();
            double target = (p < pol.layerHalfWidth) ? pol.hLayer
                           : (p < M.omega)           ? pol.hTube
                                                     : pol.hOuter;
            if (h < target) h = std::min(target, h * pol.gradeRatio);
            else h = target;
            if (p + h > cut - 0.25 * h) break;
            arcs.push_back(p + h);
        }
        return arcs;
    }

    void buildSphereGrid(ChartGrid& G, const GridPolicy& pol, bool alphaAxis) const {
        std::vector<double> arcs = arcLadder(pol);
        // theta nodes: mirrored about the equator, node at theta = pi/2
        std::vector<double> theta;
        for (std::size_t k = arcs.size(); k-- > 1;) theta.push_back(0.5 * M_PI - arcs[k] / rho);
        theta.push_back(0.5 * M_PI);
        for (std::size_t k = 1; k < arcs.size(); ++k) theta.push_back(0.5 * M_PI + arcs[k] / rho);
        G.a1 = Axis::fromNodesPole("theta", 0.0, M_PI, std::move(theta));

        std::size_t n2 = pol.n2 ? pol.n2 : (alphaAxis ? 256 : 192);
        if (alphaAxis)
            G.a2 = Axis::cellCenteredPole("alpha", 0.0, M_PI, n2);
        else
            G.a2 = Axis::uniformPeriodic("phi", 0.0, 2.0 * M_PI, n2);

        std::size_t N1 = G.a1.n(), N2 = G.a2.n();
        G.volA.resize(N1);
        G.volB.resize(N2);
        G.face1P.resize(N1 + 1);
        G.face1Q.resize(N2);
        G.face2R.resize(N1);
        G.face2S.resize(N2 + 1);
        G.g11inv.assign(N1, 1.0 / (rho * rho));
        G.g22invA.resize(N1);
        G.volAc.resize(N1);
        G.volBc.resize(N2);
        if (!alphaAxis) {
            // S^2: sqrt(g) = rho^2 sin(theta)
            for (std::size_t i = 0; i < N1; ++i) {
                G.volA[i] = rho * rho * (std::cos(G.a1.xf[i]) - std::cos(G.a1.xf[i + 1]));
                G.volAc[i] = rho * rho * std::sin(G.a1.x[i]) * G.a1.dx(i);
                G.face2R[i] = G.a1.dx(i) / std::sin(G.a1.x[i]);
                G.g22invA[i] = 1.0 / sqr(rho * std::sin(G.a1.x[i]));
            }
            for (std::size_t i = 0; i <= N1; ++i) G.face1P[i] = std::sin(G.a1.xf[i]);
            for (std::size_t j = 0; j < N2; ++j) {
                G.volB[j] = G.a2.dx(j);
                G.volBc[j] = G.a2.dx(j);
                G.face1Q[j] = G.a2.dx(j);
            }
            for (std::size_t j = 0; j <= N2; ++j) G.face2S[j] = 1.0;
        } else {
            // reduced S^3: sqrt(g) = 2 pi rho^3 sin^2(theta) sin(alpha)
            auto I2 = [&](double t) { return 0.5 * (t - std::sin(t) * std::cos(t)); };
            double c0 = 2.0 * M_PI * rho * rho * rho;
            for (std::size_t i = 0; i < N1; ++i) {
                G.volA[i] = c0 * (I2(G.a1.xf[i + 1]) - I2(G.a1.xf[i]));
                G.volAc[i] = c0 * sqr(std::sin(G.a1.x[i])) * G.a1.dx(i);
                G.face2R[i] = 2.0 * M_PI * rho * G.a1.dx(i);
                G.g22invA[i] = 1.0 / sqr(rho * std::sin(G.a1.x[i]));
            }
            for (std::size_t i = 0; i <= N1; ++i)
                G.face1P[i] = 2.0 * M_PI * rho * sqr(std::sin(G.a1.xf[i]));
            for (std::size_t j = 0; j < N2; ++j) {
                G.volB[j] = std::cos(G.a2.xf[j]) - std::cos(G.a2.xf[j + 1]);
                G.volBc[j] = std::sin(G.a2.x[j]) * G.a2.dx(j);
                G.face1Q[j] = G.volB[j];
            }
            for (std::size_t j = 0; j <= N2; ++j) G.face2S[j] = std::sin(G.a2.xf[j]);
        }
    }

    void buildTorusGrid(ChartGrid& G, const GridPolicy& pol) const {
        std::size_t n1 = std::max<std::size_t>(16, static_cast<std::size_t>(rho / pol.hTube));
        std::size_t n2 = pol.n2 ? pol.n2 : std::max<std::size_t>(16, static_cast<std::size_t>(Ly / pol.hTube));
        G.a1 = Axis::uniformPeriodic("x", 0.0, rho, n1);
        G.a2 = Axis::uniformPeriodic("y", 0.0, Ly, n2);
        std::size_t N1 = G.a1.n(), N2 = G.a2.n();
        G.volA.resize(N1);
        G.volB.resize(N2);
        G.face1P.assign(N1 + 1, 1.0);
        G.face1Q.resize(N2);
        G.face2R.resize(N1);
        G.face2S.assign(N2 + 1, 1.0);
        G.g11inv.assign(N1, 1.0);
        G.g22invA.assign(N1, 1.0);
        for (std::size_t i = 0; i < N1; ++i) {
            G.volA[i] = G.a1.dx(i);
            G.face2R[i] = G.a1.dx(i);
        }
        for (std::size_t j = 0; j < N2; ++j) {
            G.volB[j] = G.a2.dx(j);
            G.face1Q[j] = G.a2.dx(j);
        }
        G.volAc = G.volA;
        G.volBc = G.volB;
    }
};

// -----------------------------------------------------------------------
// Cached per-node Fermi data for a grid (distance to M, sheet, arc along M).
// -----------------------------------------------------------------------
struct FermiCache {
    std::vector<double> dist;   // d_M(x) per node
    std::vector<double> qarc;   // Fermi chart coordinate along M
    std::vector<std::int8_t> sheet;

    static FermiCache build(const ChartGrid& G) {
        const Scenario& S = *G.scenario;
        FermiCache F;
        F.dist.resize(G.size());
        F.qarc.resize(G.size());
        F.sheet.resize(G.size());
        parallel_for(G.n1(), [&](std::size_t ilo, std::size_t ihi) {
            for (std::size_t i = ilo; i < ihi; ++i)
                for (std::size_t j = 0; j < G.n2(); ++j) {
                    std::size_t k = G.idx(i, j);
                    double x1 = G.a1.x[i], x2 = G.a2.x[j];
                    F.dist[k] = S.distM(x1, x2);
                    F.qarc[k] = S.qArc(x1, x2);
                    F.sheet[k] = static_cast<std::int8_t>(S.sheet(x1, x2));
                }
        });
        return F;
    }
};

}  // namespace acsweep

#endif
