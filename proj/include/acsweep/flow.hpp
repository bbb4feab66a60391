#ifndef ACSWEEP_FLOW_HPP
#define ACSWEEP_FLOW_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <memory>

#include "energy.hpp"
#include "grid.hpp"
#include "mollify.hpp"
#include "scenario.hpp"
#include "spectral.hpp"

namespace acsweep {

// ---------------------------------------------------------------------------
// Conjugate gradients for (alpha I - c L) x = b, SPD in the volume-weighted
// inner product. Deterministic reductions; Jacobi preconditioner.
// ---------------------------------------------------------------------------
class HelmholtzSolver {
public:
    HelmholtzSolver(const ChartGrid& G, double alpha, double c) : G_(&G), alpha_(alpha), c_(c) {
        buildDiag();
    }

    void apply(const ScalarField& x, ScalarField& out) const {
        laplacian_into(x, out);
        const double a = alpha_, c = c_;
        parallel_for(x.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) out.v[k] = a * x.v[k] - c * out.v[k];
        });
    }

    // warm-started preconditioned CG
    int solve(const ScalarField& b, ScalarField& x, double relTol = 1e-10, int maxIter = 800) const {
        const ChartGrid& G = *G_;
        ScalarField r(G), z(G), p(G), Ap(G);
        apply(x, Ap);
        for (std::size_t k = 0; k < r.size(); ++k) r.v[k] = b.v[k] - Ap.v[k];
        double bnorm = std::sqrt(dotw(b, b));
        if (bnorm == 0.0) bnorm = 1.0;
        for (std::size_t k = 0; k < z.size(); ++k) z.v[k] = r.v[k] / diag_[k];
        p = z;
        double rz = dotw(r, z);
        int it = 0;
        for (; it < maxIter; ++it) {
            double rn = std::sqrt(dotw(r, r));
            if (rn <= relTol * bnorm) break;
            apply(p, Ap);
            double pap = dotw(p, Ap);
            double a = rz / pap;
            for (std::size_t k = 0; k < x.size(); ++k) x.v[k] += a * p.v[k];
            for (std::size_t k = 0; k < r.size(); ++k) r.v[k] -= a * Ap.v[k];
            for (std::size_t k = 0; k < z.size(); ++k) z.v[k] = r.v[k] / diag_[k];
            double rz2 = dotw(r, z);
            double beta = rz2 / rz;
            rz = rz2;
            for (std::size_t k = 0; k < p.size(); ++k) p.v[k] = z.v[k] + beta * p.v[k];
        }
        return it;
    }

private:
    const ChartGrid* G_;
    double alpha_, c_;
    std::vector<double> diag_;

    double dotw(const ScalarField& a, const ScalarField& b) const {
        const ChartGrid& G = *G_;
        return parallel_sum(G.n1(), [&](std::size_t i) {
            double s = 0.0;
            const double* av = &a.v[G.idx(i, 0)];
            const double* bv = &b.v[G.idx(i, 0)];
            for (std::size_t j = 0; j < G.n2(); ++j) s += av[j] * bv[j] * G.volB[j];
            return s * G.volA[i];
        });
    }

    void buildDiag() {
        const ChartGrid& G = *G_;
        diag_.assign(G.size(), alpha_);
        const bool per1 = G.a1.boundary == Boundary::Periodic;
        const bool per2 = G.a2.boundary == Boundary::Periodic;
        std::size_t N1 = G.n1(), N2 = G.n2();
        for (std::size_t i = 0; i < N1; ++i) {
            double w1 = G.volA[i];
            double cUp = (i + 1 < N1 || per1) ? G.face1P[i + 1] / G.a1.delta(i + 1) : 0.0;
            double cDn = (i > 0 || per1) ? G.face1P[i] / G.a1.delta(i) : 0.0;
            for (std::size_t j = 0; j < N2; ++j) {
                double lapDiag = (cUp + cDn) * G.face1Q[j];
                if (j + 1 < N2 || per2)
                    lapDiag += G.face2R[i] * G.face2S[j + 1] / G.a2.delta(j + 1);
                if (j > 0 || per2)
                    lapDiag += G.face2R[i] * G.face2S[j] / G.a2.delta(j);
                diag_[G.idx(i, j)] = alpha_ + c_ * lapDiag / (w1 * G.volB[j]);
            }
        }
    }
};

// ---------------------------------------------------------------------------
// Forced negative gradient flow  eps u_t = eps Lap u - W'(u)/eps + mu.
// Stabilized IMEX: implicit in eps Lap - (W''(1)/eps) I, explicit remainder,
// with an energy-decrease acceptance test and dt halving/doubling.
// ---------------------------------------------------------------------------
struct FlowMonitors {
    double forcedEnergy = 0.0;
    double acEnergy = 0.0;
    double minRHS = 0.0;
    double maxRHS = 0.0;
    double distToBarrier = 0.0;  // min(u - barrier)
};

struct FlowState {
    ScalarField u;
    double time = 0.0;
    ScalarField rhs;  // cached first variation (forced)
    FlowMonitors monitors;
};

struct MonitorRow {
    double time, dt, forcedEnergy, acEnergy, minRHS, maxRHS, distToBarrier, rhsL2;
};

struct FlowOptions {
    const DoubleWell* dw = nullptr;
    double eps = 0.05;
    double mu = 0.0;
    double dtInit = 0.0;             // default eps * (min arc spacing)
    double dtMax = 0.0;              // default eps / 4
    double stationarityTol = 1e-8;   // ||u_t||_L2 < tol * sqrt(vol)
    double constTol = 1e-6;          // constant classification max-min
    double maxTime = 2e3;
    bool guardMeanConvex = true;     // reject steps losing RHS positivity
    // Where u has relaxed onto the nearby stationary constant, the true RHS
    // decays like exp(-W''(1) t / eps^2) below what doubles can resolve; the
    // positivity monitor therefore runs against the solver noise floor.
    double convexityFloor = 1e-10;
    std::vector<double> snapshotTimes;
    const ScalarField* barrier = nullptr;
};

struct Trajectory {
    std::vector<MonitorRow> rows;
    std::vector<double> snapTimes;
    std::vector<ScalarField> snapshots;
    ScalarField limit;
    double limitTime = 0.0;
    bool reachedStationary = false;
    bool limitIsConstant = false;
    double limitMean = 0.0;
    int rejectedSteps = 0;
    bool forcedEnergyMonotone = true;
    bool meanConvexityPreserved = true;  // meaningful when initial minRHS > 0
    bool aprioriBoundsHeld = true;       // -2 <= u <= 2 throughout
};

class FlowIntegrator {
public:
    FlowIntegrator(const ChartGrid& G, const FlowOptions& opt) : G_(&G), opt_(opt) {
        require(opt.dw, "flow: missing double well");
        eps_ = opt.eps;
        mu_ = opt.mu;
        stab_ = opt.dw->w2(1.0);  // frozen-coefficient shift
        hmin_ = minArcSpacing(G);
        dt_ = opt.dtInit > 0 ? opt.dtInit : eps_ * hmin_;
        dtMax_ = opt.dtMax > 0 ? opt.dtMax : eps_ / 4.0;
        vol_ = G.totalVolume();
        useSpectral_ = SpectralHelmholtz::supports(G);
    }

    Trajectory run(const ScalarField& u0) {
        Trajectory traj;
        FlowState st;
        st.u = u0;
        st.time = 0.0;
        st.rhs = first_variation(st.u, *opt_.dw, eps_, mu_);
        refreshMonitors(st);
        bool trackConvex = st.monitors.minRHS > 0.0;
        pushRow(traj, st, 0.0);
        std::size_t snapIdx = 0;
        auto maybeSnapshot = [&](const FlowState& s) {
            while (snapIdx < opt_.snapshotTimes.size() &&
                   s.time >= opt_.snapshotTimes[snapIdx] - 1e-12) {
                traj.snapTimes.push_back(s.time);
                traj.snapshots.push_back(s.u);
                ++snapIdx;
            }
        };
        maybeSnapshot(st);
        int sinceAccept = 0;
        while (st.time < opt_.maxTime) {
            double rhsL2 = l2_norm(st.rhs) / eps_;
            if (rhsL2 < opt_.stationarityTol * std::sqrt(vol_)) {
                traj.reachedStationary = true;
                break;
            }
            // clamp dt to the next snapshot time
            double dt = dt_;
            if (snapIdx < opt_.snapshotTimes.size()) {
                double gap = opt_.snapshotTimes[snapIdx] - st.time;
                if (gap > 1e-14) dt = std::min(dt, gap);
            }
            FlowState trial;
            bool ok = tryStep(st, trial, dt, trackConvex);
            if (!ok) {
                dt_ *= 0.5;
                ++traj.rejectedSteps;
                sinceAccept = 0;
                require(dt_ > 1e-14 * eps_,
                        "flow: dt underflow (energy would not decrease at minimal step)");
                continue;
            }
            if (trial.monitors.forcedEnergy > st.monitors.forcedEnergy + tolF(st)) {
                traj.forcedEnergyMonotone = false;
            }
            if (trackConvex && trial.monitors.minRHS < -opt_.convexityFloor)
                traj.meanConvexityPreserved = false;
            if (trial.u.minValue() < -2.0 || trial.u.maxValue() > 2.0) traj.aprioriBoundsHeld = false;
            st = std::move(trial);
            pushRow(traj, st, dt);
            maybeSnapshot(st);
            if (++sinceAccept >= 20 && dt_ < dtMax_) {
                dt_ = std::min(dtMax_, 2.0 * dt_);
                sinceAccept = 0;
            }
        }
        traj.limit = st.u;
        traj.limitTime = st.time;
        double umin = st.u.minValue(), umax = st.u.maxValue();
        traj.limitIsConstant = (umax - umin) < opt_.constTol;
        traj.limitMean = integrate(st.u) / vol_;
        return traj;
    }

private:
    const ChartGrid* G_;
    FlowOptions opt_;
    double eps_, mu_, stab_, hmin_, dt_, dtMax_, vol_;
    bool useSpectral_ = false;
    std::unique_ptr<SpectralHelmholtz> spec_;
    std::unique_ptr<HelmholtzSolver> cg_;
    double solverDt_ = -1.0;

    void ensureSolver(double dt) {
        if (dt == solverDt_) return;
        double alpha = eps_ / dt + stab_ / eps_;
        if (useSpectral_) {
            if (spec_) spec_->refactor(alpha, eps_);
            else spec_ = std::make_unique<SpectralHelmholtz>(*G_, alpha, eps_);
        } else {
            cg_ = std::make_unique<HelmholtzSolver>(*G_, alpha, eps_);
        }
        solverDt_ = dt;
    }

    // forced energy F and int u in two fused sweeps (acEnergy derives from F)
    double forcedEnergyFast(const ScalarField& u, double& intU) const {
        const ChartGrid& G = *G_;
        const DoubleWell& dw = *opt_.dw;
        double dir = dirichlet_face_sum(u);
        std::vector<double> iuPart(G.n1());
        double pot = parallel_sum(G.n1(), [&](std::size_t i) {
            double s = 0.0, t = 0.0;
            for (std::size_t j = 0; j < G.n2(); ++j) {
                double x = u.v[G.idx(i, j)];
                s += well_w(dw, x) * G.volB[j];
                t += x * G.volB[j];
            }
            iuPart[i] = t * G.volA[i];
            return s * G.volA[i];
        });
        double iu = 0.0;
        for (double x : iuPart) iu += x;
        intU = iu;
        double norm = 1.0 / (2.0 * dw.sigma);
        return norm * (0.5 * eps_ * dir + pot / eps_) - mu_ * norm * iu;
    }

    static double minArcSpacing(const ChartGrid& G) {
        double h = 1e30;
        for (std::size_t i = 0; i < G.n1(); ++i)
            h = std::min(h, G.a1.dx(i) * std::sqrt(1.0 / G.g11inv[i]));
        for (std::size_t j = 0; j < G.n2(); ++j) {
            double g22 = G.g22invA[G.n1() / 2];
            h = std::min(h, G.a2.dx(j) / std::sqrt(g22));
        }
        return h;
    }

    double tolF(const FlowState& st) const {
        return 1e-11 * std::max(1.0, std::fabs(st.monitors.forcedEnergy));
    }

    void refreshMonitors(FlowState& st) const {
        double iu = 0.0;
        st.monitors.forcedEnergy = forcedEnergyFast(st.u, iu);
        st.monitors.acEnergy =
            st.monitors.forcedEnergy + mu_ / (2.0 * opt_.dw->sigma) * iu;
        double mn = st.rhs.v[0], mx = st.rhs.v[0];
        for (double x : st.rhs.v) {
            mn = std::min(mn, x);
            mx = std::max(mx, x);
        }
        st.monitors.minRHS = mn;
        st.monitors.maxRHS = mx;
        if (opt_.barrier) {
            double d = 1e30;
            for (std::size_t k = 0; k < st.u.size(); ++k)
                d = std::min(d, st.u.v[k] - opt_.barrier->v[k]);
            st.monitors.distToBarrier = d;
        }
    }

    bool tryStep(const FlowState& st, FlowState& trial, double dt, bool trackConvex) {
        const DoubleWell& dw = *opt_.dw;
        const double alpha = eps_ / dt + stab_ / eps_;
        ensureSolver(dt);
        ScalarField b(*G_);
        parallel_for(st.u.size(), [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k)
                b.v[k] = alpha * st.u.v[k] - well_w1(dw, st.u.v[k]) / eps_ + mu_;
        });
        trial.u = st.u;  // warm start for CG; overwritten by the direct solver
        if (useSpectral_) spec_->solve(b, trial.u);
        else cg_->solve(b, trial.u, 1e-10);
        trial.time = st.time + dt;
        // rhs of the new state: eps L u+ = alpha u+ - (A u+) + ... for the
        // direct solver A u+ = b exactly, so eps L u+ = alpha u+ - b.
        trial.rhs = ScalarField(*G_);
        if (useSpectral_) {
            parallel_for(trial.u.size(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t k = lo; k < hi; ++k)
                    trial.rhs.v[k] = (alpha * trial.u.v[k] - b.v[k]) -
                                     well_w1(dw, trial.u.v[k]) / eps_ + mu_;
            });
        } else {
            laplacian_into(trial.u, trial.rhs);
            parallel_for(trial.u.size(), [&](std::size_t lo, std::size_t hi) {
                for (std::size_t k = lo; k < hi; ++k)
                    trial.rhs.v[k] = eps_ * trial.rhs.v[k] -
                                     well_w1(dw, trial.u.v[k]) / eps_ + mu_;
            });
        }
        refreshMonitors(trial);
        if (trial.monitors.forcedEnergy > st.monitors.forcedEnergy + tolF(st)) return false;
        if (trackConvex && opt_.guardMeanConvex && trial.monitors.minRHS < -opt_.convexityFloor)
            return false;
        return true;
    }

    void pushRow(Trajectory& traj, const FlowState& st, double dt) const {
        MonitorRow r;
        r.time = st.time;
        r.dt = dt;
        r.forcedEnergy = st.monitors.forcedEnergy;
        r.acEnergy = st.monitors.acEnergy;
        r.minRHS = st.monitors.minRHS;
        r.maxRHS = st.monitors.maxRHS;
        r.distToBarrier = st.monitors.distToBarrier;
        r.rhsL2 = l2_norm(st.rhs) / eps_;
        traj.rows.push_back(r);
    }
};

inline Trajectory run_to_stationary(const ScalarField& u0, const FlowOptions& opt) {
    FlowIntegrator integ(*u0.grid, opt);
    return integ.run(u0);
}

// strict node-wise ordering at every shared sample time
inline bool comparison_monitor(const Trajectory& a, const Trajectory& b) {
    require(a.snapshots.size() == b.snapshots.size(), "comparison_monitor: sample misalignment");
    for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
        require(std::fabs(a.snapTimes[s] - b.snapTimes[s]) < 1e-9,
                "comparison_monitor: sample times differ");
        const auto& ua = a.snapshots[s];
        const auto& ub = b.snapshots[s];
        for (std::size_t k = 0; k < ua.size(); ++k)
            if (!(ua.v[k] < ub.v[k])) return false;
    }
    return !a.snapshots.empty();
}

// ---------------------------------------------------------------------------
// Barrier m = (G0 - rho0) * eta_delta with certified slack.
// ---------------------------------------------------------------------------
struct Barrier {
    ScalarField m;
    double rho0 = 0.0;
    double delta = 0.0;  // 0 means the unmollified field already certifies
    double slack = 0.0;  // min of eps Lap m - W'(m)/eps + mu
};

struct BarrierOptions {
    double rho0 = 0.0;           // default eps^2
    double quadratureFloor = 12.0;  // smallest honest delta in units of local h
};

// Tries mollification radii delta0/2, delta0/4, ... above the discrete
// quadrature floor, then the unmollified shifted field itself (delta = 0;
// on the desk scenarios M is smooth and closed, so G0 is already smooth and
// no smoothing is required). Fails listing the violated invariant.
inline Barrier build_barrier(const ScalarField& G0, const ScalarField& gRef, const DoubleWell& dw,
                             double eps, double mu, BarrierOptions bopt = {}) {
    const ChartGrid& G = *G0.grid;
    double rho0 = bopt.rho0 > 0 ? bopt.rho0 : eps * eps;
    double hLayer = 1e30;
    for (std::size_t i = 0; i < G.n1(); ++i)
        hLayer = std::min(hLayer, G.a1.dx(i) * std::sqrt(1.0 / G.g11inv[i]));
    double delta0 = std::min(G.scenario->M.injRadius / 4.0, G.scenario->M.omega / 4.0);
    ScalarField shifted(G);
    for (std::size_t k = 0; k < G0.size(); ++k) shifted.v[k] = G0.v[k] - rho0;

    std::string lastFailure = "no candidate delta tried";
    std::vector<double> deltas;
    for (double d = delta0 / 2.0; d >= bopt.quadratureFloor * hLayer; d /= 2.0) deltas.push_back(d);
    deltas.push_back(0.0);
    // cheap prescreen: the slack on a few probe columns bounds the global
    // minimum from above, so a failing probe rejects the candidate soundly
    auto probeSlack = [&](double d) {
        MollifierKernel ker(G, d, /*normalized=*/false);
        std::size_t n2 = G.n2();
        std::vector<std::size_t> cols = {0, n2 / 4, n2 / 2, (3 * n2) / 4};
        double worst = 1e30;
        for (std::size_t jc : cols) {
            std::vector<std::size_t> js = {(jc + n2 - 1) % n2, jc, (jc + 1) % n2};
            std::vector<std::vector<double>> mcol(3, std::vector<double>(G.n1()));
            for (int t = 0; t < 3; ++t)
                for (std::size_t i = 0; i < G.n1(); ++i) {
                    double acc = 0.0;
                    ker.visit(i, js[t], [&](std::size_t ii, std::size_t jj, double e, double vol) {
                        acc += e * vol * shifted.v[G.idx(ii, jj)];
                    });
                    mcol[t][i] = acc;
                }
            // divergence-form stencil on the probe column
            const bool per2 = G.a2.boundary == Boundary::Periodic;
            for (std::size_t i = 0; i < G.n1(); ++i) {
                double w = G.volA[i] * G.volB[jc];
                double acc = 0.0;
                if (i + 1 < G.n1())
                    acc += G.face1P[i + 1] * G.face1Q[jc] / G.a1.delta(i + 1) *
                           (mcol[1][i + 1] - mcol[1][i]);
                if (i > 0)
                    acc -= G.face1P[i] * G.face1Q[jc] / G.a1.delta(i) * (mcol[1][i] - mcol[1][i - 1]);
                if (jc + 1 < n2 || per2)
                    acc += G.face2R[i] * G.face2S[jc + 1] / G.a2.delta(jc + 1) *
                           (mcol[2][i] - mcol[1][i]);
                if (jc > 0 || per2)
                    acc -= G.face2R[i] * G.face2S[jc] / G.a2.delta(jc) * (mcol[1][i] - mcol[0][i]);
                double lap = acc / w;
                double sl = eps * lap - well_w1(dw, mcol[1][i]) / eps + mu;
                worst = std::min(worst, sl);
            }
        }
        return worst;
    };
    for (double d : deltas) {
        if (d > 0.0) {
            double ps = probeSlack(d);
            if (ps < mu / 5.0) {
                lastFailure = "slack >= mu/5 violated at delta " + std::to_string(d) +
                              " (probe slack = " + std::to_string(ps) + ")";
                continue;
            }
        }
        ScalarField m = shifted;
        if (d > 0.0) {
            MollifierKernel ker(G, d, /*normalized=*/false);
            m = ker.convolveField(shifted);
        }
        ScalarField fv = first_variation(m, dw, eps, mu);
        double slack = fv.v[0];
        for (double x : fv.v) slack = std::min(slack, x);
        if (slack < mu / 5.0) {
            lastFailure = "slack >= mu/5 violated at delta " + std::to_string(d) +
                          " (slack = " + std::to_string(slack) + ")";
            continue;
        }
        bool below = true;
        for (std::size_t k = 0; k < m.size(); ++k)
            if (!(m.v[k] < gRef.v[k])) { below = false; break; }
        if (!below) {
            lastFailure = "m < g_{t0+1} violated at delta " + std::to_string(d);
            continue;
        }
        Barrier bar;
        bar.m = std::move(m);
        bar.rho0 = rho0;
        bar.delta = d;
        bar.slack = slack;
        return bar;
    }
    throw Error("build_barrier: no delta certified; last failure: " + lastFailure);
}

}  // namespace acsweep

#endif
