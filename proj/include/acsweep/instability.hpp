#ifndef ACSWEEP_INSTABILITY_HPP
#define ACSWEEP_INSTABILITY_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"
#include "scenario.hpp"

namespace acsweep {

// ---------------------------------------------------------------------------
// 1D chart of the hypersurface M (arc-length coordinate q, measure weight
// weightM(q) dq). Fields on the double cover that are even descend to this
// chart; all deformation data used here is even by construction.
// ---------------------------------------------------------------------------
struct MChartField {
    const Scenario* S = nullptr;
    std::vector<double> val;  // uniform table over [0, L]
    double L = 0.0;
    bool periodic = true;

    double step() const { return L / (val.size() - 1); }

    double operator()(double q) const {
        double h = step();
        double x = q / h;
        if (periodic) {
            double n = static_cast<double>(val.size() - 1);
            x = std::fmod(x, n);
            if (x < 0) x += n;
        } else
            x = std::clamp(x, 0.0, static_cast<double>(val.size() - 1));
        std::size_t k = std::min(val.size() - 2, static_cast<std::size_t>(x));
        double t = x - k;
        return val[k] * (1.0 - t) + val[k + 1] * t;
    }
    double deriv(double q) const {
        double h = step();
        double x = q / h;
        if (periodic) {
            double n = static_cast<double>(val.size() - 1);
            x = std::fmod(x, n);
            if (x < 0) x += n;
        } else
            x = std::clamp(x, 1.0, static_cast<double>(val.size() - 2));
        std::size_t k = std::min(val.size() - 2, std::max<std::size_t>(1, static_cast<std::size_t>(x)));
        return (val[k + 1] - val[k - 1]) / (2.0 * h);
    }

    // trapezoid quadrature of fn(q, value, derivative) against weightM dq
    double quadrature(const std::function<double(double, double, double)>& fn) const {
        double h = step();
        double s = 0.0;
        for (std::size_t k = 0; k + 1 < val.size(); ++k) {
            double q = (k + 0.5) * h;
            double v = 0.5 * (val[k] + val[k + 1]);
            double dv = (val[k + 1] - val[k]) / h;
            s += fn(q, v, dv) * S->weightM(q) * h;
        }
        return s;
    }
};

// log-profile capacity cutoff around a point b on M
struct CapacityCutoff {
    MChartField rho;       // 1 on B_{r1}(b), 0 outside B_{r2}(b)
    double dirichlet = 0.0;  // int_M |grad rho|^2
};

inline CapacityCutoff capacity_cutoff(const Scenario& S, double qb, double r1, double r2,
                                      std::size_t table = 16384) {
    require(r1 > 0.0 && r1 < r2, "capacity_cutoff: requires 0 < r1 < r2");
    require(r2 <= 0.5 * S.mChartLength() || !S.mChartPeriodic(),
            "capacity_cutoff: r2 exceeds half the chart");
    CapacityCutoff out;
    out.rho.S = &S;
    out.rho.L = S.mChartLength();
    out.rho.periodic = S.mChartPeriodic();
    out.rho.val.resize(table + 1);
    double logRatio = std::log(r2 / r1);
    for (std::size_t k = 0; k <= table; ++k) {
        double q = out.rho.L * k / table;
        double d = S.distOnM(q, qb);
        double v;
        if (d <= r1) v = 1.0;
        else if (d >= r2) v = 0.0;
        else v = std::log(r2 / d) / logRatio;
        out.rho.val[k] = v;
    }
    out.dirichlet = out.rho.quadrature(
        [](double, double, double dv) { return dv * dv; });
    return out;
}

// (1/4 of) the closed-form Dirichlet integral of the 2D log cutoff, used as
// an oracle in tests: 2 pi / log(r2/r1) on a flat disc.
inline double log_cutoff_capacity_flat(double r1, double r2) {
    return 2.0 * M_PI / std::log(r2 / r1);
}

// ---------------------------------------------------------------------------
// Second variation of area for a normal deformation speed phi on M
// (single-cover normalization; the even double-cover value is twice this).
// ---------------------------------------------------------------------------
inline double second_variation_area(const Scenario& S, const MChartField& phi) {
    double curv = S.M.secondFF + S.M.ricNormal;
    return phi.quadrature([curv](double, double v, double dv) { return dv * dv - curv * v * v; });
}

// ---------------------------------------------------------------------------
// Deformation plan: hole ball B, speed field phiTilde, calibrated (t0,c0,tau).
// ---------------------------------------------------------------------------
struct DeformationPlan {
    const Scenario* S = nullptr;
    double qB = 0.0;   // hole center on the M-chart
    double R = 0.0;    // radius of B; D is concentric with radius 2R
    double rampWidth = 0.0;
    double gap = 0.0;  // margin between D and supp(phiTilde)
    MChartField phiTilde;
    double phiMax = 1.0;
    double suppLo = 0.0, suppHi = 0.0;  // support of phiTilde as arc interval
    double secondVariation = 0.0;       // single-cover value, must be < 0
    double areaB = 0.0;                 // H^n(B)
    double areaM2 = 0.0;                // H^n(K) = 2 H^n(M) (quadrature)
    double t0 = 0.0, c0 = 0.0, tau = 0.0;

    double chi(double q) const {  // hole cutoff: 1 on B, supp in D, |chi'| <= 2/R
        double d = S->distOnM(q, qB);
        if (d <= R) return 1.0;
        if (d >= 2.0 * R) return 0.0;
        double x = (d - R) / R;
        double x3 = x * x * x;
        return 1.0 - (10.0 * x3 - 15.0 * x3 * x + 6.0 * x3 * x * x);  // quintic step
    }
    double chiSlopeBound() const { return 1.875 / R; }  // max |chi'| of the quintic

    double phi(double q) const { return phiTilde(q); }
    double dphi(double q) const { return phiTilde.deriv(q); }

    // paper margin 6 eps |log eps| < c0 / 20 (reported; see geometricFeasible)
    bool paperMarginOk(double eps) const { return 6.0 * eps * log_abs(eps) < c0 / 20.0; }

    // the direct desk-scale feasibility conditions the margin stands for
    bool geometricFeasible(double eps) const {
        double twoEpsLam = 6.0 * eps * log_abs(eps);
        return 2.0 * twoEpsLam < 0.5 * S->M.omega && twoEpsLam <= c0 &&
               2.0 * twoEpsLam + t0 * phiMax < S->cK;
    }
};

// area of the normal graph s = c + t phiTilde(q) over the double cover,
// multiplicity 2; optionally restricted to the holed domain K_B
inline double immersed_area(const Scenario& S, const DeformationPlan& plan, double c, double t,
                            bool holed = false, std::size_t quad = 16384) {
    require(c >= 0.0 && t >= 0.0, "immersed_area: c, t must be >= 0");
    require(c + t * plan.phiMax < S.cK, "immersed_area: graph exits the tubular neighbourhood");
    double L = S.mChartLength();
    double h = L / quad;
    double sum = parallel_sum(quad, [&](std::size_t k) {
        double q = (k + 0.5) * h;
        if (holed && S.distOnM(q, plan.qB) < plan.R) return 0.0;
        double s = c + t * plan.phi(q);
        double ds = t * plan.dphi(q);
        return S.graphAreaElement(q, s, ds) * h;
    });
    return 2.0 * sum;
}

struct PlanOptions {
    double R = 0.0;          // default 0.18 * mChartLength (S2) / 0.5 rho (S3)
    double rampWidth = 0.0;  // default scenario-tuned
    double gap = 0.0;        // default rampWidth / 4
    double tMax = 0.0;       // default tube-limited
    double cMax = 0.0;       // default 0.5 cK
    int sweep = 16;
    std::size_t table = 16384;
    // synthetic collar (kept to exercise the boundary-collar code path even
    // though desk scenarios have K = Mtilde and no real collar)
    double collarCenter = -1.0, collarRadius = 0.0;
};

// Build phiTilde: log-profile ramp away from D (capacity-style), mollified
// once in the chart so the field is C^1 with support clear of D-bar.
inline MChartField build_phi_tilde(const Scenario& S, const PlanOptions& opt, double qB, double R,
                                   double& suppLo, double& suppHi) {
    double L = S.mChartLength();
    double r1 = 2.0 * R + opt.gap;
    double r2 = r1 + opt.rampWidth;
    require(r2 < (S.mChartPeriodic() ? 0.5 * L : L), "build_phi_tilde: ramp exceeds the chart");
    MChartField raw;
    raw.S = &S;
    raw.L = L;
    raw.periodic = S.mChartPeriodic();
    raw.val.resize(opt.table + 1);
    double logRatio = std::log(r2 / r1);
    for (std::size_t k = 0; k <= opt.table; ++k) {
        double q = L * k / opt.table;
        double d = S.distOnM(q, qB);
        double v;
        if (d <= r1) v = 0.0;
        else if (d >= r2) v = 1.0;
        else v = std::log(d / r1) / logRatio;
        if (opt.collarRadius > 0.0 && opt.collarCenter >= 0.0) {
            double dc = S.distOnM(q, opt.collarCenter);
            if (dc < opt.collarRadius) v *= smoothstep01(dc / opt.collarRadius);
        }
        raw.val[k] = v;
    }
    // one pass of 1D mollification (triweight, radius rampWidth / 6)
    double rad = opt.rampWidth / 6.0;
    int kw = std::max<int>(2, static_cast<int>(rad / (L / opt.table)));
    MChartField out = raw;
    std::size_t n = raw.val.size() - 1;
    for (std::size_t k = 0; k <= n; ++k) {
        double acc = 0.0, wsum = 0.0;
        for (int m = -kw; m <= kw; ++m) {
            long km = static_cast<long>(k) + m;
            if (raw.periodic) km = (km % static_cast<long>(n) + n) % n;
            else km = std::clamp<long>(km, 0, n);
            double xi = static_cast<double>(m) / kw;
            double w = std::pow(std::max(0.0, 1.0 - xi * xi), 3);
            acc += w * raw.val[km];
            wsum += w;
        }
        out.val[k] = acc / wsum;
    }
    suppLo = r1 - rad;  // arc distance bracket of the support boundary
    suppHi = L - (S.mChartPeriodic() ? (r1 - rad) : 0.0);
    return out;
}

// Calibrate (t0, c0, tau) by sweeping deformed immersion areas.
inline DeformationPlan calibrate(const Scenario& S, PlanOptions opt = {}) {
    DeformationPlan plan;
    plan.S = &S;
    double L = S.mChartLength();
    if (opt.R <= 0.0)
        opt.R = (S.kind == ScenarioKind::Sphere3Axisym) ? 0.5 * S.rho : 0.053 * L;
    if (opt.rampWidth <= 0.0)
        opt.rampWidth = (S.kind == ScenarioKind::Sphere3Axisym) ? 1.0 * S.rho : 0.13 * L;
    if (opt.gap <= 0.0) opt.gap = opt.rampWidth / 4.0;
    if (opt.cMax <= 0.0) opt.cMax = 0.5 * S.cK;
    plan.qB = S.mChartPeriodic() ? 0.0 : 0.0;  // hole on the symmetry axis
    plan.R = opt.R;
    plan.rampWidth = opt.rampWidth;
    plan.gap = opt.gap;
    plan.phiTilde = build_phi_tilde(S, opt, plan.qB, plan.R, plan.suppLo, plan.suppHi);
    plan.phiMax = 0.0;
    for (double v : plan.phiTilde.val) plan.phiMax = std::max(plan.phiMax, v);
    plan.secondVariation = second_variation_area(S, plan.phiTilde);
    require(plan.secondVariation < 0.0,
            "calibrate: phiTilde is not area-unstable (second variation >= 0)");
    {
        double h = L / 16384.0;
        double s = 0.0;
        for (int k = 0; k < 16384; ++k) {
            double q = (k + 0.5) * h;
            if (S.distOnM(q, plan.qB) < plan.R) s += S.weightM(q) * h;
        }
        plan.areaB = s;  // H^n(B) by the chart measure
    }
    if (opt.tMax <= 0.0) opt.tMax = std::max(0.1, 0.45 * S.cK - 0.05) / std::max(plan.phiMax, 1e-12);

    auto fullArea = [&](double c, double t) { return immersed_area(S, plan, c, t, false); };
    auto holedArea = [&](double c, double t) { return immersed_area(S, plan, c, t, true); };

    plan.areaM2 = fullArea(0.0, 0.0);

    // largest t0 with strictly decreasing full-immersion area at c = 0
    int n = opt.sweep;
    std::vector<double> ts(n + 1), as(n + 1);
    for (int k = 0; k <= n; ++k) {
        ts[k] = opt.tMax * k / n;
        as[k] = fullArea(0.0, ts[k]);
    }
    int lastMono = 0;
    while (lastMono + 1 <= n && as[lastMono + 1] < as[lastMono] - 1e-12) ++lastMono;
    require(lastMono > 0, "calibrate: area is not decreasing in t (phiTilde ineffective)");
    double t0 = ts[lastMono];
    if (lastMono < n) {  // bisect the monotonicity boundary
        double lo = ts[lastMono], hi = ts[lastMono + 1];
        double alo = as[lastMono];
        for (int it = 0; it < 6; ++it) {
            double mid = 0.5 * (lo + hi);
            double amid = fullArea(0.0, mid);
            if (amid < alo - 1e-12) {
                lo = mid;
                alo = amid;
            } else
                hi = mid;
        }
        t0 = lo;
    }
    plan.t0 = t0;
    double a0 = plan.areaM2;
    double aT = fullArea(0.0, t0);
    plan.tau = 0.5 * (a0 - aT);
    require(plan.tau > 0.0, "calibrate: no positive tau found (deformation does not reduce area)");

    // largest c0 <= cMax with (i) and (ii) along the sweep
    double halfB = plan.areaM2 - 1.5 * plan.areaB;  // bound in (i), doubled count
    double c0 = -1.0;
    for (int kc = 0; kc <= n; ++kc) {
        double c = opt.cMax * kc / n;
        if (c + t0 * plan.phiMax >= S.cK) break;
        bool ok = fullArea(c, t0) <= plan.areaM2 - plan.tau + 1e-12;
        for (int kt = 0; ok && kt <= n; ++kt) {
            double t = t0 * kt / n;
            if (holedArea(c, t) > halfB + 1e-12) ok = false;
        }
        if (!ok) break;
        c0 = c;
    }
    require(c0 > 0.0, "calibrate: no positive c0 satisfies the area certificates");
    plan.c0 = c0;
    return plan;
}

}  // namespace acsweep

#endif
