#ifndef ACSWEEP_PROFILE_HPP
#define ACSWEEP_PROFILE_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "common.hpp"
#include "quadrature.hpp"
#include "well.hpp"

namespace acsweep {

// ---------------------------------------------------------------------------
// Smooth bump transition used by the truncation: chi(x) = 1 on (-1,1),
// supp chi = [-2,2], built from the standard exp(-1/t) glue so that every
// derivative vanishes at |x| = 1 and |x| = 2.
// ---------------------------------------------------------------------------
namespace bump {

inline double phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
inline double phi1(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }
inline double phi2(double t) {
    return t > 0.0 ? std::exp(-1.0 / t) * (1.0 / (t * t * t * t) - 2.0 / (t * t * t)) : 0.0;
}

// B: [0,1] -> [1,0], all derivatives vanish at the ends.
inline double B(double t) {
    double a = phi(1.0 - t), b = phi(t);
    if (a + b == 0.0) return t < 0.5 ? 1.0 : 0.0;
    return a / (a + b);
}
inline double B1(double t) {
    double a = phi(1.0 - t), b = phi(t);
    double s = a + b;
    if (s == 0.0) return 0.0;
    double a1 = -phi1(1.0 - t), b1 = phi1(t);
    return (a1 * b - a * b1) / (s * s);
}
inline double B2(double t) {
    double a = phi(1.0 - t), b = phi(t);
    double s = a + b;
    if (s == 0.0) return 0.0;
    double a1 = -phi1(1.0 - t), b1 = phi1(t);
    double a2 = phi2(1.0 - t), b2 = phi2(t);
    double n = a1 * b - a * b1;
    double n1 = a2 * b - a * b2;
    return n1 / (s * s) - 2.0 * n * (a1 + b1) / (s * s * s);
}

inline double chi(double x) {
    double ax = std::fabs(x);
    if (ax <= 1.0) return 1.0;
    if (ax >= 2.0) return 0.0;
    return B(ax - 1.0);
}
inline double chi1(double x) {
    double ax = std::fabs(x);
    if (ax <= 1.0 || ax >= 2.0) return 0.0;
    double s = (x > 0.0) ? 1.0 : -1.0;
    return s * B1(ax - 1.0);
}
inline double chi2(double x) {
    double ax = std::fabs(x);
    if (ax <= 1.0 || ax >= 2.0) return 0.0;
    return B2(ax - 1.0);
}

}  // namespace bump

// ---------------------------------------------------------------------------
// Heteroclinic H: monotone solution of H'' = W'(H), H(0) = 0, H(+-inf) = +-1.
// Standard well: tanh(r/sqrt(2)) in closed form. Other wells: first-order
// reduction H' = sqrt(2 W(H)) inverted by quadrature (no shooting).
// ---------------------------------------------------------------------------
class Heteroclinic {
public:
    explicit Heteroclinic(const DoubleWell& dw) : dw_(&dw) {
        if (!dw.isStandard) buildTable();
    }

    double value(double r) const {
        if (dw_->isStandard) return std::tanh(r / std::sqrt(2.0));
        double s = r < 0.0 ? -1.0 : 1.0;
        return s * lookup(std::fabs(r));
    }
    double deriv(double r) const {
        double h = value(r);
        return std::sqrt(std::max(0.0, 2.0 * dw_->w(h)));
    }
    double deriv2(double r) const { return dw_->w1(value(r)); }

private:
    const DoubleWell* dw_;
    std::vector<double> u_;  // u_[k] = H(k*dr_), r >= 0
    double dr_ = 5e-4;
    double decay_ = 1.0;  // sqrt(W''(1)), asymptotic rate

    void buildTable() {
        decay_ = std::sqrt(dw_->w2(1.0));
        const double rmax = 40.0;
        std::size_t n = static_cast<std::size_t>(rmax / dr_) + 1;
        u_.resize(n);
        u_[0] = 0.0;
        auto rhs = [this](double u) { return std::sqrt(std::max(0.0, 2.0 * dw_->w(std::min(u, 1.0)))); };
        for (std::size_t k = 0; k + 1 < n; ++k) {
            double u0 = u_[k];
            double k1 = rhs(u0);
            double k2 = rhs(u0 + 0.5 * dr_ * k1);
            double k3 = rhs(u0 + 0.5 * dr_ * k2);
            double k4 = rhs(u0 + dr_ * k3);
            u_[k + 1] = std::min(1.0, u0 + dr_ / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
        }
    }

    double lookup(double r) const {
        double x = r / dr_;
        std::size_t k = static_cast<std::size_t>(x);
        if (k + 1 >= u_.size()) {
            double tail = 1.0 - u_.back();
            return 1.0 - tail * std::exp(-decay_ * (r - (u_.size() - 1) * dr_));
        }
        // cubic Hermite using the known slope sqrt(2W(u))
        double t = x - k;
        double u0 = u_[k], u1 = u_[k + 1];
        double m0 = std::sqrt(std::max(0.0, 2.0 * dw_->w(u0))) * dr_;
        double m1 = std::sqrt(std::max(0.0, 2.0 * dw_->w(u1))) * dr_;
        double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * u0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * u1 +
               (t3 - t2) * m1;
    }
};

inline double heteroclinic(const DoubleWell& dw, double r) { return Heteroclinic(dw).value(r); }

// ---------------------------------------------------------------------------
// Truncated profile Hbar (unscaled variable y, Lambda = 3|log eps|):
//   Hbar(y) = psi(y) H(y) + sgn(y)(1 - psi(y)),  psi(y) = chi(|y|/Lambda - 1).
// Identically -1 on y <= -2 Lambda, +1 on y >= 2 Lambda, equal to H on
// |y| <= Lambda; every derivative vanishes at |y| = 2 Lambda.
// ---------------------------------------------------------------------------
enum class Orientation { Increasing, Folded };

class Profile1D {
public:
    Profile1D(const DoubleWell& dw, double eps, double shift = 0.0,
              Orientation orientation = Orientation::Increasing, double foldT = 0.0)
        : dw_(&dw), het_(std::make_shared<Heteroclinic>(dw)), eps_(eps), shift_(shift),
          orientation_(orientation), foldT_(foldT) {
        require(eps > 0.0 && eps < 1.0, "Profile1D: eps must lie in (0,1)");
        require(foldT >= 0.0, "Profile1D: fold parameter must be >= 0");
        lambda_ = 3.0 * log_abs(eps);
    }

    double eps() const { return eps_; }
    double lambda() const { return lambda_; }
    double shift() const { return shift_; }
    double foldT() const { return foldT_; }
    Orientation orientation() const { return orientation_; }
    const DoubleWell& well() const { return *dw_; }

    // half-width of the transition zone in the scaled variable
    double supportRadius() const { return 2.0 * eps_ * lambda_; }

    double value(double r) const {
        if (orientation_ == Orientation::Increasing) return hbar((r - shift_) / eps_);
        return hbar(foldArg(r));
    }
    double deriv(double r) const {
        if (orientation_ == Orientation::Increasing) return hbar1((r - shift_) / eps_) / eps_;
        double s = (r > 0.0) ? -1.0 : 1.0;  // d(foldArg)/dr
        return s * hbar1(foldArg(r)) / eps_;
    }
    double deriv2(double r) const {
        if (orientation_ == Orientation::Increasing) return hbar2((r - shift_) / eps_) / (eps_ * eps_);
        return hbar2(foldArg(r)) / (eps_ * eps_);
    }

    // Unscaled truncation and its derivatives (variable y = r/eps). The glue
    // psi(y) = B(|y|/Lambda - 1) equals 1 up to |y| = Lambda and 0 beyond
    // 2 Lambda, so Hbar = H on (-Lambda, Lambda) and Hbar = sgn(y) outside
    // (-2 Lambda, 2 Lambda), with all derivatives vanishing there.
    double hbar(double y) const {
        double ay = std::fabs(y);
        if (ay <= lambda_) return het_->value(y);
        if (ay >= 2.0 * lambda_) return y > 0.0 ? 1.0 : -1.0;
        double sg = y > 0.0 ? 1.0 : -1.0;
        double psi = bump::B(ay / lambda_ - 1.0);
        return psi * het_->value(y) + sg * (1.0 - psi);
    }
    double hbar1(double y) const {
        double ay = std::fabs(y);
        if (ay <= lambda_) return het_->deriv(y);
        if (ay >= 2.0 * lambda_) return 0.0;
        double sg = y > 0.0 ? 1.0 : -1.0;
        double psi = bump::B(ay / lambda_ - 1.0);
        double psi1 = sg * bump::B1(ay / lambda_ - 1.0) / lambda_;
        return psi1 * (het_->value(y) - sg) + psi * het_->deriv(y);
    }
    double hbar2(double y) const {
        double ay = std::fabs(y);
        if (ay <= lambda_) return het_->deriv2(y);
        if (ay >= 2.0 * lambda_) return 0.0;
        double sg = y > 0.0 ? 1.0 : -1.0;
        double psi = bump::B(ay / lambda_ - 1.0);
        double psi1 = sg * bump::B1(ay / lambda_ - 1.0) / lambda_;
        double psi2 = bump::B2(ay / lambda_ - 1.0) / (lambda_ * lambda_);
        return psi2 * (het_->value(y) - sg) + 2.0 * psi1 * het_->deriv(y) + psi * het_->deriv2(y);
    }

private:
    const DoubleWell* dw_;
    std::shared_ptr<Heteroclinic> het_;
    double eps_, shift_, lambda_, foldT_;
    Orientation orientation_;

    double foldArg(double r) const { return (-std::fabs(r) + 2.0 * eps_ * lambda_ - foldT_) / eps_; }
};

// Hbar^eps with shift 0; constant +-1 outside [-2 eps Lambda, 2 eps Lambda].
inline Profile1D truncate(const DoubleWell& dw, double eps) {
    require(eps < 1.0 && eps > 0.0, "truncate: requires eps in (0,1)");
    return Profile1D(dw, eps, 0.0, Orientation::Increasing);
}

// shifted profile Hbar^eps(. - s)
inline Profile1D shift_profile(const Profile1D& p, double s) {
    return Profile1D(p.well(), p.eps(), p.shift() + s, Orientation::Increasing);
}

// Psi_t: even family, Psi_t == -1 for |r| >= 4 eps Lambda - t, identically -1
// once t >= 4 eps Lambda. fold(profile, 0) is the double-transition Psi.
inline Profile1D fold(const Profile1D& p, double t) {
    require(t >= 0.0, "fold: parameter t must be >= 0");
    return Profile1D(p.well(), p.eps(), 0.0, Orientation::Folded, t);
}

struct Energy1D {
    double unnormalized = 0.0;  // int  eps q'^2/2 + W(q)/eps
    double normalized = 0.0;    // (1/2 sigma) * unnormalized
    bool converged = true;
};

// Allen-Cahn line energy over [a, b]. Composite Gauss-Legendre with step
// <= eps/8 across the transition; one refinement pass as convergence check.
inline Energy1D energy1d(const Profile1D& p, double a, double b, double tol = 1e-9) {
    const double eps = p.eps();
    auto density = [&p, eps](double r) {
        double d = p.deriv(r);
        return eps * d * d / 2.0 + p.well().w(p.value(r)) / eps;
    };
    // restrict to the support (tails contribute exactly zero)
    double lo = a, hi = b;
    if (p.orientation() == Orientation::Increasing) {
        lo = std::max(lo, p.shift() - p.supportRadius());
        hi = std::min(hi, p.shift() + p.supportRadius());
    } else {
        double rad = std::max(0.0, 2.0 * p.supportRadius() - p.foldT());
        lo = std::max(lo, -rad);
        hi = std::min(hi, rad);
    }
    Energy1D e;
    if (hi <= lo) return e;
    auto q = integrate_checked(density, lo, hi, eps / 8.0, tol);
    e.unnormalized = q.value;
    e.normalized = q.value / (2.0 * p.well().sigma);
    e.converged = q.converged;
    return e;
}

// Full-line energy (profile support only).
inline Energy1D energy1d(const Profile1D& p, double tol = 1e-9) {
    return energy1d(p, -1e30, 1e30, tol);
}

struct OdeResidual {
    double unscaled = 0.0;  // sup_y |Hbar''(y) - W'(Hbar(y))|
    double scaled = 0.0;    // sup_r |eps q''(r) - W'(q(r))/eps| = unscaled / eps
};

// Residual of the truncated profile in the Allen-Cahn ODE. Nonzero only on
// Lambda < |y| < 2 Lambda.
inline OdeResidual ode_residual(const DoubleWell& dw, double eps, int samples = 20000) {
    Profile1D p = truncate(dw, eps);
    double lam = p.lambda();
    double sup = 0.0;
    for (int i = 0; i <= samples; ++i) {
        double y = lam - 0.5 + (lam + 1.0) * i / samples;  // covers [Lambda-0.5, 2 Lambda+0.5]
        double r = std::fabs(p.hbar2(y) - dw.w1(p.hbar(y)));
        sup = std::max(sup, r);
    }
    return {sup, sup / eps};
}

}  // namespace acsweep

#endif
