#ifndef ACSWEEP_SPECTRAL_HPP
#define ACSWEEP_SPECTRAL_HPP

#include <complex>
#include <vector>

#include <fftw3.h>

#include "grid.hpp"

namespace acsweep {

// Direct solver for (alpha I - c L) x = b on charts whose axis-2 is uniform
// and periodic with axis-2-independent coefficients (S^2 and the torus):
// Fourier transform along axis 2 decouples the system into one real
// tridiagonal solve per mode. Plans use FFTW_ESTIMATE so results are
// reproducible run to run.
class SpectralHelmholtz {
public:
    static bool supports(const ChartGrid& G) {
        if (G.a2.boundary != Boundary::Periodic) return false;
        double q0 = G.face1Q[0], v0 = G.volB[0], s0 = G.face2S[0];
        for (std::size_t j = 0; j < G.n2(); ++j)
            if (std::fabs(G.face1Q[j] - q0) > 1e-14 || std::fabs(G.volB[j] - v0) > 1e-14)
                return false;
        for (std::size_t j = 0; j <= G.n2(); ++j)
            if (std::fabs(G.face2S[j] - s0) > 1e-14) return false;
        return G.a1.boundary != Boundary::Periodic;  // theta-type axis with zero-flux ends
    }

    SpectralHelmholtz(const ChartGrid& G, double alpha, double c) : G_(&G) {
        n1_ = G.n1();
        n2_ = G.n2();
        nm_ = n2_ / 2 + 1;
        buf_.resize(n1_ * n2_);
        spec_.resize(n1_ * nm_);
        int n = static_cast<int>(n2_);
        int rank1[1] = {n};
        fwd_ = fftw_plan_many_dft_r2c(1, rank1, static_cast<int>(n1_), buf_.data(), nullptr, 1, n,
                                      reinterpret_cast<fftw_complex*>(spec_.data()), nullptr, 1,
                                      static_cast<int>(nm_), FFTW_ESTIMATE);
        bwd_ = fftw_plan_many_dft_c2r(1, rank1, static_cast<int>(n1_),
                                      reinterpret_cast<fftw_complex*>(spec_.data()), nullptr, 1,
                                      static_cast<int>(nm_), buf_.data(), nullptr, 1, n,
                                      FFTW_ESTIMATE);
        factor(alpha, c);
    }
    ~SpectralHelmholtz() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    SpectralHelmholtz(const SpectralHelmholtz&) = delete;
    SpectralHelmholtz& operator=(const SpectralHelmholtz&) = delete;

    void refactor(double alpha, double c) { factor(alpha, c); }

    void solve(const ScalarField& b, ScalarField& x) {
        const ChartGrid& G = *G_;
        std::copy(b.v.begin(), b.v.end(), buf_.begin());
        fftw_execute(fwd_);
        // one tridiagonal solve per Fourier mode (Thomas, prefactored)
        parallel_for(nm_, [&](std::size_t klo, std::size_t khi) {
            std::vector<std::complex<double>> work(n1_);
            for (std::size_t k = klo; k < khi; ++k) {
                const double* cp = &cprime_[k * n1_];
                const double* di = &ddInv_[k * n1_];
                std::complex<double>* w = work.data();
                w[0] = spec_[0 * nm_ + k] * di[0];
                for (std::size_t i = 1; i < n1_; ++i)
                    w[i] = (spec_[i * nm_ + k] - lower_[i] * w[i - 1]) * di[i];
                spec_[(n1_ - 1) * nm_ + k] = w[n1_ - 1];
                for (std::size_t i = n1_ - 1; i-- > 0;) {
                    w[i] -= cp[i] * w[i + 1];
                    spec_[i * nm_ + k] = w[i];
                }
            }
        });
        fftw_execute(bwd_);
        double invn = 1.0 / static_cast<double>(n2_);
        for (std::size_t m = 0; m < x.v.size(); ++m) x.v[m] = buf_[m] * invn;
    }

private:
    const ChartGrid* G_;
    std::size_t n1_, n2_, nm_;
    std::vector<double> buf_;
    std::vector<std::complex<double>> spec_;
    fftw_plan fwd_, bwd_;
    std::vector<double> lower_, upper_;        // tridiagonal couplings (mode-independent)
    std::vector<double> diag_, cprime_, ddInv_;  // prefactored per mode

    void factor(double alpha, double c) {
        const ChartGrid& G = *G_;
        lower_.assign(n1_, 0.0);
        upper_.assign(n1_, 0.0);
        std::vector<double> base(n1_);
        double dphi = G.a2.dx(0);
        for (std::size_t i = 0; i < n1_; ++i) {
            double w = G.volA[i] * G.volB[0];
            double cUp = (i + 1 < n1_) ? G.face1P[i + 1] * G.face1Q[0] / G.a1.delta(i + 1) : 0.0;
            double cDn = (i > 0) ? G.face1P[i] * G.face1Q[0] / G.a1.delta(i) : 0.0;
            upper_[i] = -c * cUp / w;
            lower_[i] = -c * cDn / w;
            base[i] = alpha + c * (cUp + cDn) / w;
        }
        std::vector<double> phiCoef(n1_);
        for (std::size_t i = 0; i < n1_; ++i)
            phiCoef[i] = c * G.face2R[i] * G.face2S[0] / (G.volA[i] * G.volB[0] * dphi);
        diag_.assign(nm_ * n1_, 0.0);
        cprime_.assign(nm_ * n1_, 0.0);
        ddInv_.assign(nm_ * n1_, 0.0);
        for (std::size_t k = 0; k < nm_; ++k) {
            double lam = 2.0 - 2.0 * std::cos(2.0 * M_PI * static_cast<double>(k) / n2_);
            double* dd = &diag_[k * n1_];
            double* cp = &cprime_[k * n1_];
            double* di = &ddInv_[k * n1_];
            for (std::size_t i = 0; i < n1_; ++i) dd[i] = base[i] + phiCoef[i] * lam;
            // Thomas prefactorization
            double piv = dd[0];
            di[0] = 1.0 / piv;
            cp[0] = upper_[0] / piv;
            for (std::size_t i = 1; i < n1_; ++i) {
                piv = dd[i] - lower_[i] * cp[i - 1];
                di[i] = 1.0 / piv;
                cp[i] = upper_[i] / piv;
            }
        }
    }
};

}  // namespace acsweep

#endif
