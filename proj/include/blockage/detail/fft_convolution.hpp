#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace blockage::detail {

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Linear convolution with a fixed kernel, truncated to the first `n_out`
/// outputs, by FFT overlap-add. The kernel spectrum is computed once.
class FixedKernelConvolver {
 public:
  FixedKernelConvolver() = default;

  FixedKernelConvolver(std::span<const double> kernel, std::size_t n_out) : n_out_(n_out) {
    kernel_len_ = std::max<std::size_t>(1, std::min(kernel.size(), n_out));
    block_ = std::max<std::size_t>(next_pow2(kernel_len_), 1024);
    nfft_ = next_pow2(block_ + kernel_len_ - 1);
    std::vector<double> padded(nfft_, 0.0);
    std::copy_n(kernel.begin(), std::min(kernel.size(), kernel_len_), padded.begin());
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    fft.fwd(spectrum_, padded);
  }

  std::size_t output_size() const noexcept { return n_out_; }

  /// (signal * kernel)[i] for i < n_out.
  std::vector<double> apply(std::span<const double> signal) const {
    std::vector<double> out(n_out_, 0.0);
    const std::size_t len = std::min(signal.size(), n_out_);
    Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
    std::vector<double> buf(nfft_);
    std::vector<std::complex<double>> freq;
    std::vector<double> back;
    for (std::size_t start = 0; start < len; start += block_) {
      const std::size_t count = std::min(block_, len - start);
      std::fill(buf.begin(), buf.end(), 0.0);
      std::copy_n(signal.begin() + static_cast<std::ptrdiff_t>(start), count, buf.begin());
      fft.fwd(freq, buf);
      for (std::size_t k = 0; k < freq.size(); ++k) freq[k] *= spectrum_[k];
      fft.inv(back, freq, nfft_);
      const std::size_t produced = std::min(count + kernel_len_ - 1, nfft_);
      for (std::size_t k = 0; k < produced && start + k < n_out_; ++k) out[start + k] += back[k];
    }
    return out;
  }

 private:
  std::size_t n_out_ = 0;
  std::size_t kernel_len_ = 1;
  std::size_t block_ = 1;
  std::size_t nfft_ = 1;
  std::vector<std::complex<double>> spectrum_;
};

/// Truncated linear convolution of two sequences.
inline std::vector<double> convolve_truncated(std::span<const double> a, std::span<const double> b,
                                              std::size_t n_out) {
  return FixedKernelConvolver(b, n_out).apply(a);
}

}  // namespace blockage::detail
