#pragma once

#include <amble/core.hpp>

namespace amble {

/*!
 * Fourth-order Bézier curve in the Bernstein basis, five coefficients over
 * a phase of duration T. Evaluation clamps the normalized time
 * s = (t - t0)/T to [0, 1]; outside the phase the value holds the endpoint
 * and the derivatives are zero.
 */
struct BezierCurve {
    Eigen::Matrix<double, 5, 1> coeffs = Eigen::Matrix<double, 5, 1>::Zero();
    double duration = 1.0;

    struct Eval {
        double value;
        double d1;
        double d2;
    };

    /// tau is the time since phase start.
    Eval eval(double tau) const;
};

/// Least-squares fit of a 4th-order Bézier to samples of a scalar
/// trajectory over [0, duration]; used when seeding gaits from plans.
BezierCurve fitBezier(const VecX& taus, const VecX& values, double duration);

} // namespace amble
