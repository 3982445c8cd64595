#pragma once

#include <Eigen/Dense>
#include <functional>

#include "rainfreq/math.hpp"

namespace rainfreq {

/// A differentiable log-density evaluation. A -inf value carries no usable
/// gradient and grad_defined is false there.
struct LogDensity {
    double value = -kInf;
    Eigen::VectorXd grad;
    bool grad_defined = false;
};

using LogDensityFn = std::function<LogDensity(const Eigen::VectorXd&)>;

} // namespace rainfreq
