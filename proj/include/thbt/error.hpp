// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace thbt {

enum class Errc {
    invalid_config,
    invalid_scenario,
    fresnel_bound_violation,
    empty_path_list,
    degenerate_quadratic,
    no_bracket,
    coverage_violation,
    empty_grid,
    singular_system,
    zero_curvature,
    fit_diverged,
    missing_measurements,
    singular_normal_matrix,
};

const char* errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace thbt
