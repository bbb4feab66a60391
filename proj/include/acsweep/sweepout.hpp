#ifndef ACSWEEP_SWEEPOUT_HPP
#define ACSWEEP_SWEEPOUT_HPP

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "energy.hpp"
#include "geometry_ops.hpp"
#include "grid.hpp"
#include "instability.hpp"
#include "profile.hpp"
#include "scenario.hpp"

namespace acsweep {

// Certificates store the slack constant a bound family requires:
//   requiredC = max_k max(0, (lhs_k - geometricBound_k)) / (eps |log eps|).
// A family passes with the fitted constant C iff requiredC <= C.
struct Certificate {
    std::string name;
    double requiredC = 0.0;
    double worstLhs = 0.0;
    double worstBound = 0.0;
    std::string detail;
};

struct SweepoutSegment {
    std::string name;  // toMinusOne | holeDeform | closeHole | mollifyBridge | flowToPlusOne
    std::vector<double> params;
    std::vector<double> energyTrace;      // E_eps per sample
    std::vector<double> continuityTrace;  // W12 distance between consecutive samples
    std::vector<Certificate> certificates;
    ScalarField first, last;
    double maxEnergy = 0.0;

    void accumulate(double lhs, double geom, double epsLog, const std::string& family) {
        for (auto& c : certificates)
            if (c.name == family) {
                double req = std::max(0.0, lhs - geom) / epsLog;
                if (req > c.requiredC) {
                    c.requiredC = req;
                    c.worstLhs = lhs;
                    c.worstBound = geom;
                }
                return;
            }
        Certificate c;
        c.name = family;
        c.requiredC = std::max(0.0, lhs - geom) / epsLog;
        c.worstLhs = lhs;
        c.worstBound = geom;
        certificates.push_back(c);
    }
};

// max consecutive-gap ratio between the stride-2 subchain and the full chain
inline double continuity_halving_ratio(const std::vector<double>& gaps) {
    double fullMax = 0.0, coarseMax = 0.0;
    for (double g : gaps) fullMax = std::max(fullMax, g);
    for (std::size_t k = 0; k + 1 < gaps.size(); k += 2) coarseMax = std::max(coarseMax, gaps[k] + gaps[k + 1]);
    return fullMax > 0 ? coarseMax / fullMax : 0.0;
}

// ---------------------------------------------------------------------------
// Field constructors (eq. level-set / Fermi expressions)
// ---------------------------------------------------------------------------

// G0 = Hbar^eps(-d_M(x) + 2 eps Lambda); -1 where d > 4 eps Lambda
inline ScalarField build_G0(const ChartGrid& G, const FermiCache& F, const DoubleWell& dw,
                            double eps) {
    const Scenario& S = *G.scenario;
    Profile1D p = truncate(dw, eps);
    double c = p.supportRadius();  // 2 eps Lambda
    require(2.0 * c < 0.5 * S.M.omega, "build_G0: requires 4 eps Lambda < omega / 2");
    ScalarField u(G);
    parallel_for(G.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) u.v[k] = p.hbar((c - F.dist[k]) / eps);
    });
    return u;
}

// Y_r = Psi_r(d_M(x)); Y_0 = G0, Y_{4 eps Lambda} = -1
inline ScalarField build_Yr(const ChartGrid& G, const FermiCache& F, const DoubleWell& dw,
                            double eps, double r) {
    Profile1D p = truncate(dw, eps);
    double c = p.supportRadius();
    ScalarField u(G);
    parallel_for(G.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) u.v[k] = p.hbar((c - F.dist[k] - r) / eps);
    });
    return u;
}

// value of the shifted profile at signed distance `dist`: Hbar^eps(-dist - a)
inline double profile_at(const Profile1D& p, double eps, double dist, double a) {
    return p.hbar((-dist - a) / eps);
}

// f: the holed approximation; equals Psi_{4 eps Lambda chi(q)}(s) on the
// D-fibers and G0 elsewhere
inline ScalarField build_f(const ChartGrid& G, const FermiCache& F, const DoubleWell& dw,
                           double eps, const DeformationPlan& plan) {
    const Scenario& S = *G.scenario;
    require(plan.chiSlopeBound() <= 2.0 / plan.R + 1e-12, "build_f: |grad chi| <= 2/R violated");
    Profile1D p = truncate(dw, eps);
    double c = p.supportRadius();
    double fourEl = 2.0 * c;
    ScalarField u = build_G0(G, F, dw, eps);
    parallel_for(G.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            if (F.dist[k] >= S.cK) continue;
            double ch = plan.chi(F.qarc[k]);
            if (ch <= 0.0) continue;
            u.v[k] = p.hbar((c - F.dist[k] - fourEl * ch) / eps);
        }
    });
    return u;
}

// max over the D\B fiber nodes of eps |grad_q u|^2 (tangential penalty)
inline double tangential_penalty_max(const ScalarField& u, const FermiCache& F,
                                     const DeformationPlan& plan, double eps) {
    const ChartGrid& G = *u.grid;
    const Scenario& S = *G.scenario;
    ScalarField gs = grad_norm_sq(u);  // metric gradient; restrict to tangential part
    double best = 0.0;
    for (std::size_t i = 0; i < G.n1(); ++i)
        for (std::size_t j = 0; j < G.n2(); ++j) {
            std::size_t k = G.idx(i, j);
            double d = S.distOnM(F.qarc[k], plan.qB);
            if (d <= plan.R || d >= 2.0 * plan.R) continue;
            if (F.dist[k] >= S.cK) continue;
            // tangential derivative = axis-2 part of the gradient
            std::size_t jp = (j + 1 < G.n2()) ? j + 1 : 0, jm = (j > 0) ? j - 1 : G.n2() - 1;
            double dq;
            if (G.a2.boundary == Boundary::Periodic || (j > 0 && j + 1 < G.n2())) {
                double dl = (j + 1 < G.n2()) ? G.a2.x[j + 1] - G.a2.x[j] : G.a2.delta(G.n2());
                double dr = (j > 0) ? G.a2.x[j] - G.a2.x[jm] : G.a2.delta(0);
                dq = (u(i, jp) - u(i, jm)) / (dl + dr);
            } else
                continue;
            double t2 = G.g22invA[i] * dq * dq;
            best = std::max(best, eps * t2);
        }
    return best;
}

// a <= b node-wise (barrier admissibility). `tol` absorbs the float-level
// noise of nearest-point distances when comparing fields built from them.
inline bool ordering_check(const ScalarField& a, const ScalarField& b, double tol = 0.0) {
    checkSameGrid(a, b, "ordering_check");
    for (std::size_t k = 0; k < a.size(); ++k)
        if (a.v[k] > b.v[k] + tol) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Segment builders (streaming; only endpoint fields are retained)
// ---------------------------------------------------------------------------
struct SegmentOptions {
    int samples = 129;
    int graphSamples = 4096;
    std::function<void(int, const ScalarField&)> onSample;  // optional sink
};

// r in [0, 4 eps Lambda]: f_r; f_0 = f, f_{4 eps Lambda} == -1
inline SweepoutSegment segment_to_minus_one(const ChartGrid& G, const FermiCache& F,
                                            const DoubleWell& dw, double eps,
                                            const DeformationPlan& plan, const ScalarField& fRef,
                                            SegmentOptions opt = {}) {
    const Scenario& S = *G.scenario;
    Profile1D p = truncate(dw, eps);
    const double c = p.supportRadius(), fourEl = 2.0 * c;
    const double epsLog = eps * log_abs(eps);
    const double HM = S.M.area, HB = plan.areaB;
    SweepoutSegment seg;
    seg.name = "toMinusOne";
    Profile1D psi = fold(p, 0.0);
    ScalarField prev;
    for (int k = 0; k < opt.samples; ++k) {
        double r = fourEl * k / (opt.samples - 1);
        ScalarField u(G);
        parallel_for(G.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t m = lo; m < hi; ++m) {
                double a = r;
                if (F.dist[m] < S.cK) a += fourEl * plan.chi(F.qarc[m]);
                u.v[m] = p.hbar((c - F.dist[m] - a) / eps);
            }
        });
        if (k == 0) {
            bool same = true;
            for (std::size_t m = 0; m < u.size(); ++m)
                if (u.v[m] != fRef.v[m]) { same = false; break; }
            require(same, "segment_to_minus_one: endpoint mismatch with build_f");
            seg.first = u;
        }
        double E = ac_energy(u, dw, eps).total;
        seg.params.push_back(r);
        seg.energyTrace.push_back(E);
        seg.maxEnergy = std::max(seg.maxEnergy, E);
        // eq:energy_path_1 (profile-factor form and uniform form)
        double tail = energy1d(psi, r, fourEl).normalized;
        seg.accumulate(E, 2.0 * (HM - HB) * tail, epsLog, "energy_path_1_profile");
        seg.accumulate(E, 2.0 * (HM - HB), epsLog, "energy_path_1");
        if (k + 1 == opt.samples) seg.accumulate(E, 0.0, epsLog, "energy_path_1_final");
        if (k > 0) seg.continuityTrace.push_back(w12_dist(u, prev));
        if (opt.onSample) opt.onSample(k, u);
        prev = std::move(u);
    }
    seg.last = prev;
    return seg;
}

// shared helper for the two graph-based segments
inline ScalarField graph_field(const ChartGrid& G, const FermiCache& F, const Profile1D& p,
                               double eps, const ScalarField& dist, const DeformationPlan& plan,
                               double shiftScale) {
    const Scenario& S = *G.scenario;
    const double c = p.supportRadius(), fourEl = 2.0 * c;
    ScalarField u(G);
    parallel_for(G.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t m = lo; m < hi; ++m) {
            double a = 0.0;
            if (F.dist[m] < S.cK) a = shiftScale * fourEl * plan.chi(F.qarc[m]);
            u.v[m] = p.hbar((-dist.v[m] - a) / eps);
        }
    });
    return u;
}

struct HoleDeformResult {
    SweepoutSegment seg;
    ScalarField distT0;  // signed distance to the t0 graph (reused by closeHole)
};

// t in [0, t0]: g_t; g_0 == f node-wise
inline HoleDeformResult segment_hole_deform(const ChartGrid& G, const FermiCache& F,
                                            const DoubleWell& dw, double eps,
                                            const DeformationPlan& plan, const ScalarField& fRef,
                                            SegmentOptions opt = {}) {
    const Scenario& S = *G.scenario;
    Profile1D p = truncate(dw, eps);
    const double c = p.supportRadius();
    const double epsLog = eps * log_abs(eps);
    require(c + plan.t0 * plan.phiMax + c < S.cK,
            "segment_hole_deform: deformed graph tube exits the Fermi region");
    HoleDeformResult out;
    out.seg.name = "holeDeform";
    NormalGraph graph;
    graph.S = &S;
    graph.c = c;
    graph.phi = [&plan](double q) { return plan.phi(q); };
    graph.phiMax = plan.phiMax;
    graph.suppLo = plan.suppLo;
    graph.suppHi = plan.suppHi;
    graph.samples = opt.graphSamples;
    // Hbar saturates at |dist| >= 2 eps Lambda wherever the search runs
    // (the chi-shift is supported where phiTilde vanishes, i.e. in the
    // vertical-shortcut region), so distances need resolving only to c + pad.
    const double cap = c + 0.1;
    ScalarField prev;
    for (int k = 0; k < opt.samples; ++k) {
        double t = plan.t0 * k / (opt.samples - 1);
        graph.t = t;
        graph.tabulate();
        ScalarField dist = signed_dist_to_graph(G, F, graph, cap);
        ScalarField u = graph_field(G, F, p, eps, dist, plan, 1.0);
        if (k == 0) {
            bool same = true;
            for (std::size_t m = 0; m < u.size(); ++m)
                if (u.v[m] != fRef.v[m]) { same = false; break; }
            require(same, "segment_hole_deform: g_0 does not equal f node-wise");
            out.seg.first = u;
        }
        if (k + 1 == opt.samples) out.distT0 = dist;
        double E = ac_energy(u, dw, eps).total;
        out.seg.params.push_back(t);
        out.seg.energyTrace.push_back(E);
        out.seg.maxEnergy = std::max(out.seg.maxEnergy, E);
        // eq:energy_gt; the doubled-count form is the same number, reported once
        out.seg.accumulate(E, 2.0 * (S.M.area - 0.75 * plan.areaB), epsLog, "energy_gt");
        if (k > 0) out.seg.continuityTrace.push_back(w12_dist(u, prev));
        if (opt.onSample) opt.onSample(k, u);
        prev = std::move(u);
    }
    out.seg.last = prev;
    return out;
}

// r in [0, 1]: g_{t0+r}; closes the hole, ends at Hbar^eps(-dist_{t0})
inline SweepoutSegment segment_close_hole(const ChartGrid& G, const FermiCache& F,
                                          const DoubleWell& dw, double eps,
                                          const DeformationPlan& plan, const ScalarField& distT0,
                                          const ScalarField& gT0, SegmentOptions opt = {}) {
    Profile1D p = truncate(dw, eps);
    const double epsLog = eps * log_abs(eps);
    const Scenario& S = *G.scenario;
    SweepoutSegment seg;
    seg.name = "closeHole";
    ScalarField prev;
    for (int k = 0; k < opt.samples; ++k) {
        double r = static_cast<double>(k) / (opt.samples - 1);
        ScalarField u = graph_field(G, F, p, eps, distT0, plan, 1.0 - r);
        if (k == 0) {
            bool same = true;
            for (std::size_t m = 0; m < u.size(); ++m)
                if (u.v[m] != gT0.v[m]) { same = false; break; }
            require(same, "segment_close_hole: r = 0 does not equal g_{t0}");
            seg.first = u;
        }
        double E = ac_energy(u, dw, eps).total;
        seg.params.push_back(plan.t0 + r);
        seg.energyTrace.push_back(E);
        seg.maxEnergy = std::max(seg.maxEnergy, E);
        seg.accumulate(E, 2.0 * S.M.area - plan.tau, epsLog, "energy_gtr");
        if (k > 0) seg.continuityTrace.push_back(w12_dist(u, prev));
        if (opt.onSample) opt.onSample(k, u);
        prev = std::move(u);
    }
    seg.last = prev;
    return seg;
}

}  // namespace acsweep

#endif
