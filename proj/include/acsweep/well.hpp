#ifndef ACSWEEP_WELL_HPP
#define ACSWEEP_WELL_HPP

#include <cmath>
#include <functional>
#include <string>

#include "common.hpp"
#include "quadrature.hpp"

namespace acsweep {

// Double well potential with non-degenerate minima at +-1 and exactly
// quadratic growth on |x| >= 2, matched C^1 at |x| = 2 (the second
// derivative may jump there).
struct DoubleWell {
    std::function<double(double)> w;   // W
    std::function<double(double)> w1;  // W'
    std::function<double(double)> w2;  // W'' (inner branch; quadratic branch uses its own)
    double sigma = 0.0;                // int_{-1}^{1} sqrt(W/2)
    bool isStandard = false;
    std::string name;

    double operator()(double x) const { return w(x); }
};

namespace detail {
// Wrap an inner C^2 well (valid on [-2,2]) with the quadratic extension.
inline DoubleWell wrap_well(std::function<double(double)> iw, std::function<double(double)> iw1,
                            std::function<double(double)> iw2, bool standard, std::string name) {
    const double v2 = iw(2.0), d2 = iw1(2.0);
    const double kq = 2.0;  // curvature of the quadratic tails
    DoubleWell dw;
    dw.w = [iw, v2, d2, kq](double x) {
        double ax = std::fabs(x);
        if (ax <= 2.0) return iw(x);
        double t = ax - 2.0;
        return v2 + d2 * t + 0.5 * kq * t * t;
    };
    dw.w1 = [iw1, d2, kq](double x) {
        double ax = std::fabs(x);
        if (ax <= 2.0) return iw1(x);
        double t = ax - 2.0;
        double s = (x > 0.0) ? 1.0 : -1.0;
        return s * (d2 + kq * t);
    };
    dw.w2 = [iw2, kq](double x) {
        double ax = std::fabs(x);
        if (ax <= 2.0) return iw2(x);
        return kq;
    };
    dw.isStandard = standard;
    dw.name = std::move(name);
    dw.sigma = integrate_adaptive([&dw](double t) { return std::sqrt(std::max(0.0, dw.w(t)) / 2.0); },
                                  -1.0, 1.0, 1e-14);
    return dw;
}
}  // namespace detail

// W(x) = (1-x^2)^2/4 on [-2,2]; sigma = sqrt(2)/3 exactly.
inline const DoubleWell& standard_well() {
    static const DoubleWell dw = [] {
        DoubleWell d = detail::wrap_well(
            [](double x) { return sqr(1.0 - x * x) / 4.0; },
            [](double x) { return x * x * x - x; },
            [](double x) { return 3.0 * x * x - 1.0; }, true, "standard");
        d.sigma = std::sqrt(2.0) / 3.0;
        return d;
    }();
    return dw;
}

// A non-standard even well used to exercise the generic heteroclinic path:
// W(x) = (1-x^2)^2 (1 + x^2/2) / 4 on [-2,2].
inline const DoubleWell& skewed_quartic_well() {
    static const DoubleWell dw = detail::wrap_well(
        [](double x) {
            double q = 1.0 - x * x;
            return q * q * (1.0 + 0.5 * x * x) / 4.0;
        },
        [](double x) {
            double q = 1.0 - x * x;
            return (-4.0 * x * q * (1.0 + 0.5 * x * x) + q * q * x) / 4.0;
        },
        [](double x) {
            double q = 1.0 - x * x;
            return (-4.0 * q * (1.0 + 0.5 * x * x) + 8.0 * x * x * (1.0 + 0.5 * x * x) -
                    4.0 * x * x * q + q * q - 4.0 * x * x * q) / 4.0;
        },
        false, "skewed_quartic");
    return dw;
}

// inlined fast paths for the hot loops (fall back to the stored callables)
inline double well_w(const DoubleWell& dw, double u) {
    if (dw.isStandard) {
        double a = std::fabs(u);
        if (a <= 2.0) {
            double q = 1.0 - u * u;
            return 0.25 * q * q;
        }
        double t = a - 2.0;
        return 2.25 + 6.0 * t + t * t;
    }
    return dw.w(u);
}
inline double well_w1(const DoubleWell& dw, double u) {
    if (dw.isStandard) {
        double a = std::fabs(u);
        if (a <= 2.0) return u * u * u - u;
        double t = a - 2.0;
        return (u > 0.0 ? 1.0 : -1.0) * (6.0 + 2.0 * t);
    }
    return dw.w1(u);
}

inline bool well_valid(const DoubleWell& dw) {
    if (std::fabs(dw.w(1.0)) > 1e-13 || std::fabs(dw.w(-1.0)) > 1e-13) return false;
    if (dw.w2(1.0) <= 0.0 || dw.w2(-1.0) <= 0.0) return false;
    for (double x = -0.95; x < 0.951; x += 0.05)
        if (dw.w(x) <= 0.0) return false;
    return dw.sigma > 0.0;
}

}  // namespace acsweep

#endif
