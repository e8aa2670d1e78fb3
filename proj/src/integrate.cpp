#include "aqtm/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "aqtm/errors.hpp"

namespace aqtm {

namespace {

// Dormand-Prince 5(4) tableau. Row 7 doubles as the fifth-order weights
// (first-same-as-last), kErr holds the difference to the embedded fourth
// order solution.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kA71 = 35.0 / 384, kA73 = 500.0 / 1113, kA74 = 125.0 / 192,
                 kA75 = -2187.0 / 6784, kA76 = 11.0 / 84;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kErr1 = 71.0 / 57600, kErr3 = -71.0 / 16695, kErr4 = 71.0 / 1920,
                 kErr5 = -17253.0 / 339200, kErr6 = 22.0 / 525, kErr7 = -1.0 / 40;

double scaled_norm(const Eigen::VectorXcd& err, const Eigen::VectorXcd& y0,
                   const Eigen::VectorXcd& y1, double atol, double rtol) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < err.size(); ++i) {
        const double scale = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
        const double q = std::abs(err[i]) / scale;
        acc += q * q;
    }
    return std::sqrt(acc / static_cast<double>(err.size()));
}

double first_step_guess(const OdeRhs& rhs, double t0, const Eigen::VectorXcd& y,
                        const Eigen::VectorXcd& f0, double span, const AdaptiveOptions& opt) {
    const double d0 = y.norm() + opt.atol;
    const double d1 = f0.norm() + 1e-300;
    double h = 0.01 * d0 / d1;
    h = std::min(h, 0.1 * span);
    // one Euler probe to catch a rapidly changing derivative
    Eigen::VectorXcd y1 = y + h * f0;
    Eigen::VectorXcd f1(y.size());
    rhs(t0 + h, y1, f1);
    const double d2 = (f1 - f0).norm() / h + 1e-300;
    return std::min({h, std::pow(0.01 / d2, 0.2), opt.max_step, span});
}

}  // namespace

double integrate_adaptive(const OdeRhs& rhs, double t0, double t1, Eigen::VectorXcd& y,
                          const AdaptiveOptions& opt) {
    const double span = t1 - t0;
    if (span <= 0.0) {
        if (span == 0.0) return opt.initial_step;
        throw DomainError("integration interval is reversed");
    }

    const Eigen::Index n = y.size();
    Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_stage(n), y_next(n),
        err(n);
    rhs(t0, y, k1);

    double h = opt.initial_step > 0.0 ? std::min(opt.initial_step, opt.max_step)
                                      : first_step_guess(rhs, t0, y, k1, span, opt);
    double t = t0;
    double err_prev = 1.0;
    bool have_k1 = true;

    for (long steps = 0; steps < opt.max_steps; ++steps) {
        if (t >= t1) return h;
        h = std::min(h, t1 - t);
        if (h < 1e-12 * std::max(1.0, std::abs(t))) {
            throw StiffnessError("step size underflow at t = " + std::to_string(t));
        }
        if (!have_k1) rhs(t, y, k1);

        y_stage = y + h * (kA21 * k1);
        rhs(t + kC2 * h, y_stage, k2);
        y_stage = y + h * (kA31 * k1 + kA32 * k2);
        rhs(t + kC3 * h, y_stage, k3);
        y_stage = y + h * (kA41 * k1 + kA42 * k2 + kA43 * k3);
        rhs(t + kC4 * h, y_stage, k4);
        y_stage = y + h * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
        rhs(t + kC5 * h, y_stage, k5);
        y_stage = y + h * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5);
        rhs(t + h, y_stage, k6);
        y_next = y + h * (kA71 * k1 + kA73 * k3 + kA74 * k4 + kA75 * k5 + kA76 * k6);
        rhs(t + h, y_next, k7);
        err = h * (kErr1 * k1 + kErr3 * k3 + kErr4 * k4 + kErr5 * k5 + kErr6 * k6 + kErr7 * k7);

        const double e = std::max(scaled_norm(err, y, y_next, opt.atol, opt.rtol), 1e-10);
        if (e <= 1.0) {
            t += h;
            y.swap(y_next);
            k1.swap(k7);  // first-same-as-last
            have_k1 = true;
            const double fac = 0.9 * std::pow(e, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
            h = std::min(h * std::clamp(fac, 0.2, 5.0), opt.max_step);
            err_prev = e;
        } else {
            h *= std::clamp(0.9 * std::pow(e, -0.2), 0.1, 1.0);
            have_k1 = true;  // k1 is still valid at the unchanged t
        }
    }
    throw StiffnessError("step budget exhausted before reaching t = " + std::to_string(t1));
}

}  // namespace aqtm
