#include "hens/fft.hpp"

#include <mutex>

#include <fftw3.h>

namespace hens::fft {

namespace {
// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

std::vector<Complex> dft(std::span<const Complex> in, Direction dir) {
    const int n = static_cast<int>(in.size());
    std::vector<Complex> buffer(in.begin(), in.end());
    std::vector<Complex> out(in.size());
    if (n == 0) return out;
    auto* src = reinterpret_cast<fftw_complex*>(buffer.data());
    auto* dst = reinterpret_cast<fftw_complex*>(out.data());
    const int sign = dir == Direction::forward ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan plan;
    {
        std::lock_guard lock(planner_mutex());
        plan = fftw_plan_dft_1d(n, src, dst, sign, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace hens::fft
