#ifndef ACSWEEP_QUADRATURE_HPP
#define ACSWEEP_QUADRATURE_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "common.hpp"

namespace acsweep {

// 8-point Gauss-Legendre nodes/weights on [-1,1].
inline const std::vector<double>& gl8_nodes() {
    static const std::vector<double> x = {
        -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
        0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
    return x;
}
inline const std::vector<double>& gl8_weights() {
    static const std::vector<double> w = {
        0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};
    return w;
}

// Composite 8-point Gauss-Legendre with a fixed step.
inline double integrate_gl(const std::function<double(double)>& f, double a, double b, double step) {
    if (b <= a) return 0.0;
    int n = std::max(1, static_cast<int>(std::ceil((b - a) / step)));
    double h = (b - a) / n;
    const auto& xs = gl8_nodes();
    const auto& ws = gl8_weights();
    double total = 0.0;
    for (int k = 0; k < n; ++k) {
        double lo = a + k * h;
        double mid = lo + 0.5 * h, half = 0.5 * h;
        double s = 0.0;
        for (std::size_t j = 0; j < xs.size(); ++j) s += ws[j] * f(mid + half * xs[j]);
        total += s * half;
    }
    return total;
}

struct QuadratureResult {
    double value = 0.0;
    double refinedDelta = 0.0;  // |value(step) - value(step/2)|
    bool converged = true;
};

// Integrate with one refinement pass; flags non-convergence beyond tol.
inline QuadratureResult integrate_checked(const std::function<double(double)>& f, double a, double b,
                                          double step, double tol) {
    QuadratureResult r;
    double coarse = integrate_gl(f, a, b, step);
    double fine = integrate_gl(f, a, b, 0.5 * step);
    r.value = fine;
    r.refinedDelta = std::fabs(fine - coarse);
    r.converged = r.refinedDelta <= tol * (1.0 + std::fabs(fine));
    return r;
}

// Adaptive Simpson, used by oracle-grade integrals (heteroclinic inversion).
inline double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                          double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-12, int maxDepth = 48) {
    if (b <= a) return 0.0;
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, maxDepth);
}

}  // namespace acsweep

#endif
