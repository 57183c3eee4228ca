#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace soundmask::fft {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Forward real FFT, reusable across frames. Input shorter than nfft is
// zero-padded; returns the nfft/2 + 1 non-negative-frequency bins.
class RealFft {
public:
    explicit RealFft(std::size_t nfft) : nfft_(nfft), buf_(nfft, 0.0) {}

    std::size_t nfft() const { return nfft_; }

    const std::vector<std::complex<double>>& forward(
        const double* x, std::size_t n) {
        std::fill(buf_.begin(), buf_.end(), 0.0);
        std::copy(x, x + std::min(n, nfft_), buf_.begin());
        impl_.fwd(spectrum_, buf_);
        spectrum_.resize(nfft_ / 2 + 1);
        return spectrum_;
    }

    // |X_k|^2 for k = 0 .. nfft/2
    const std::vector<double>& power(const double* x, std::size_t n) {
        forward(x, n);
        power_.resize(spectrum_.size());
        for (std::size_t k = 0; k < spectrum_.size(); ++k) {
            power_[k] = std::norm(spectrum_[k]);
        }
        return power_;
    }

private:
    std::size_t nfft_;
    Eigen::FFT<double> impl_;
    std::vector<double> buf_;
    std::vector<std::complex<double>> spectrum_;
    std::vector<double> power_;
};

}  // namespace soundmask::fft
