#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

namespace hens {

// Symmetric time grid t_n = (n - N/2) dt, dt = 2 t_max / N, n = 0..N-1.
// The sample at n = 0 stands for both endpoints -t_max and +t_max (periodic
// identification), so a grid of N samples represents the closed interval.
struct TimeGrid {
    double t_max = 200.0;
    std::size_t n = std::size_t{1} << 16;

    // N a power of two >= 4 and t_max > 0; throws ConfigError otherwise.
    void validate() const;

    double dt() const { return 2.0 * t_max / static_cast<double>(n); }
    double t(std::size_t i) const {
        return (static_cast<double>(i) - static_cast<double>(n / 2)) * dt();
    }
    std::size_t zero_index() const { return n / 2; }

    static TimeGrid defaults_for(double omega_c) { return {200.0 / omega_c, std::size_t{1} << 16}; }
};

// Uniform grid x_k = start + k step, k = 0..n-1.
struct UniformGrid {
    double start = 0.0;
    double step = 1.0;
    std::size_t n = 0;

    double operator[](std::size_t k) const { return start + static_cast<double>(k) * step; }
    double back() const { return (*this)[n - 1]; }
    std::vector<double> values() const {
        std::vector<double> v(n);
        for (std::size_t k = 0; k < n; ++k) v[k] = (*this)[k];
        return v;
    }
};

// Frequency grid conjugate to a time grid: d_omega = 2 pi / (N dt) = pi / t_max,
// centered so that index N/2 is omega = 0.
inline UniformGrid conjugate_grid(const TimeGrid& g) {
    const double step = M_PI / g.t_max;
    return {-static_cast<double>(g.n / 2) * step, step, g.n};
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace hens
