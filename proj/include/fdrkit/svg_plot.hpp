#pragma once

#include <span>
#include <string>

namespace fdrkit {

/// Scatter of predicted vs true values with a y = x reference line.
std::string scatter_svg(std::span<const double> y_true, std::span<const double> y_pred,
                        const std::string& title);

/// Test samples sorted by ascending true value, true and predicted series
/// overlaid against the sample rank.
std::string sorted_overlay_svg(std::span<const double> y_true, std::span<const double> y_pred,
                               const std::string& title);

} // namespace fdrkit
