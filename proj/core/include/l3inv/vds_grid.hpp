#pragma once

#include <cstddef>
#include <vector>

namespace l3inv {

/// Uniform drain-source voltage sweep. Point i sits at start + i*step.
struct VdsGrid {
    double start = 0.1;
    double stop = 10.0;
    double step = 0.1;

    /// round((stop - start) / step) + 1
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] double at(std::size_t i) const { return start + static_cast<double>(i) * step; }
    [[nodiscard]] std::vector<double> points() const;

    /// Throws InvalidRange unless step > 0 and stop > start.
    void validate() const;

    friend bool operator==(const VdsGrid&, const VdsGrid&) = default;
};

}  // namespace l3inv
