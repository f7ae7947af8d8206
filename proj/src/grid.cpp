#include "hens/grid.hpp"

#include "hens/error.hpp"

namespace hens {

void TimeGrid::validate() const {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("time grid: t_max must be positive");
    if (n < 4 || !is_power_of_two(n)) throw ConfigError("time grid: N must be a power of two >= 4");
}

}  // namespace hens
