// SPDX-License-Identifier: Apache-2.0
#include "thbt/linalg.hpp"

#include <cmath>
#include <utility>

namespace thbt {

std::optional<Vec3> solve3(Mat3 a, Vec3 rhs, double pivot_floor)
{
    for (int col = 0; col < 3; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 3; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col]))
                pivot = r;
        if (!(std::abs(a[pivot][col]) >= pivot_floor))
            return std::nullopt;
        std::swap(a[col], a[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = col + 1; r < 3; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 3; ++c)
                a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    Vec3 x{};
    for (int r = 2; r >= 0; --r) {
        double acc = rhs[r];
        for (int c = r + 1; c < 3; ++c)
            acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return x;
}

void NormalEquations3::add_row(const Vec3& row, double target, double weight)
{
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j)
            ata_[i][j] += weight * row[i] * row[j];
        atb_[i] += weight * row[i] * target;
    }
}

} // namespace thbt
