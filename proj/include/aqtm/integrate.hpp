// integrate.hpp: adaptive explicit Runge-Kutta stepping for the complex linear
// systems produced by the master-equation generators.
#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>

namespace aqtm {

struct AdaptiveOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    double initial_step = 0.0;  // 0 picks a step from the first derivative
    double max_step = std::numeric_limits<double>::infinity();
    long max_steps = 20000000;
};

using OdeRhs = std::function<void(double, const Eigen::VectorXcd&, Eigen::VectorXcd&)>;

// Advances y in place from t0 to t1 with the Dormand-Prince 5(4) pair under
// PI step-size control. Returns the last accepted step size so a caller
// integrating in segments can hand it to the next call. Throws StiffnessError
// when the step underflows or the step budget runs out.
double integrate_adaptive(const OdeRhs& rhs, double t0, double t1, Eigen::VectorXcd& y,
                          const AdaptiveOptions& opt = {});

}  // namespace aqtm
