// SPDX-License-Identifier: Apache-2.0
#include "thbt/error.hpp"

namespace thbt {

const char* errc_name(Errc code) noexcept
{
    switch (code) {
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::invalid_scenario: return "InvalidScenario";
    case Errc::fresnel_bound_violation: return "FresnelBoundViolation";
    case Errc::empty_path_list: return "EmptyPathList";
    case Errc::degenerate_quadratic: return "DegenerateQuadratic";
    case Errc::no_bracket: return "NoBracket";
    case Errc::coverage_violation: return "CoverageViolation";
    case Errc::empty_grid: return "EmptyGrid";
    case Errc::singular_system: return "SingularSystem";
    case Errc::zero_curvature: return "ZeroCurvature";
    case Errc::fit_diverged: return "FitDiverged";
    case Errc::missing_measurements: return "MissingMeasurements";
    case Errc::singular_normal_matrix: return "SingularNormalMatrix";
    }
    return "Unknown";
}

} // namespace thbt
