// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>

namespace thbt {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

/// Gaussian elimination with partial pivoting. Returns nullopt when a pivot
/// magnitude falls below pivot_floor.
std::optional<Vec3> solve3(Mat3 a, Vec3 rhs, double pivot_floor = 1e-12);

/// Accumulates the 3x3 normal equations of a linear least-squares problem
/// row by row.
class NormalEquations3 {
public:
    void add_row(const Vec3& row, double target, double weight = 1.0);
    std::optional<Vec3> solve(double pivot_floor = 1e-12) const { return solve3(ata_, atb_, pivot_floor); }
    const Mat3& gram() const noexcept { return ata_; }

private:
    Mat3 ata_{};
    Vec3 atb_{};
};

} // namespace thbt
