#pragma once

#include <span>
#include <vector>

#include "hens/core.hpp"

namespace hens::fft {

enum class Direction { forward, backward };

// Unnormalized DFT: out_k = sum_n in_n exp(-+ 2 pi i k n / N), minus sign for forward.
std::vector<Complex> dft(std::span<const Complex> in, Direction dir);

}  // namespace hens::fft
