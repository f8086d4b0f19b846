#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace ffou::detail {
namespace {

// Planning is not thread-safe in FFTW; execution on new arrays is.
fftw_plan cached_plan(int n, int sign) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, fftw_plan> plans;
    std::lock_guard lock(mutex);
    auto [it, inserted] = plans.try_emplace({n, sign}, nullptr);
    if (inserted) {
        fftw_complex* buffer = fftw_alloc_complex(static_cast<std::size_t>(n));
        it->second = fftw_plan_dft_1d(n, buffer, buffer, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buffer);
    }
    return it->second;
}

} // namespace

void fft_inplace(std::span<std::complex<double>> data, bool forward) {
    if (data.empty()) return;
    fftw_plan plan = cached_plan(static_cast<int>(data.size()), forward ? FFTW_FORWARD : FFTW_BACKWARD);
    auto* raw = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, raw, raw);
}

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<double> convolve_truncated(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = a.size();
    const std::size_t size = next_pow2(n + b.size());
    std::vector<std::complex<double>> fa(size), fb(size);
    for (std::size_t i = 0; i < n; ++i) fa[i] = a[i];
    for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
    fft_inplace(fa, true);
    fft_inplace(fb, true);
    for (std::size_t i = 0; i < size; ++i) fa[i] *= fb[i];
    fft_inplace(fa, false);
    std::vector<double> out(n);
    const double norm = 1.0 / static_cast<double>(size);
    for (std::size_t i = 0; i < n; ++i) out[i] = fa[i].real() * norm;
    return out;
}

} // namespace ffou::detail
