#include <amble/bezier.hpp>

#include <Eigen/Dense>

namespace amble {

namespace {

double bernstein(int degree, int i, double s)
{
    static const double binom4[5] = {1, 4, 6, 4, 1};
    static const double binom3[4] = {1, 3, 3, 1};
    static const double binom2[3] = {1, 2, 1};
    const double* binom = degree == 4 ? binom4 : (degree == 3 ? binom3 : binom2);
    return binom[i] * std::pow(s, i) * std::pow(1.0 - s, degree - i);
}

} // namespace

BezierCurve::Eval BezierCurve::eval(double tau) const
{
    if (!(duration > 0.0)) {
        throw Error("control/bezier", "phase duration must be positive");
    }
    const double raw = tau / duration;
    const bool inside = raw >= 0.0 && raw <= 1.0;
    const double s = std::min(1.0, std::max(0.0, raw));

    Eval out{0.0, 0.0, 0.0};
    for (int i = 0; i <= 4; ++i) {
        out.value += coeffs[i] * bernstein(4, i, s);
    }
    if (!inside) {
        return out;
    }
    for (int i = 0; i <= 3; ++i) {
        out.d1 += (coeffs[i + 1] - coeffs[i]) * 4.0 * bernstein(3, i, s);
    }
    for (int i = 0; i <= 2; ++i) {
        out.d2 += (coeffs[i + 2] - 2 * coeffs[i + 1] + coeffs[i]) * 12.0
                * bernstein(2, i, s);
    }
    out.d1 /= duration;
    out.d2 /= duration * duration;
    return out;
}

BezierCurve fitBezier(const VecX& taus, const VecX& values, double duration)
{
    if (taus.size() != values.size() || taus.size() < 5) {
        throw Error("control/bezier", "need at least five samples to fit");
    }
    MatX basis(taus.size(), 5);
    for (int r = 0; r < taus.size(); ++r) {
        const double s = std::min(1.0, std::max(0.0, taus[r] / duration));
        for (int i = 0; i <= 4; ++i) {
            basis(r, i) = bernstein(4, i, s);
        }
    }
    BezierCurve out;
    out.duration = duration;
    out.coeffs = basis.colPivHouseholderQr().solve(values);
    return out;
}

} // namespace amble
