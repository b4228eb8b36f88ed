#include <amble/output_control.hpp>

#include <Eigen/Dense>

namespace amble {

OutputsEval evalOutputs(const GeneralizedState& state, double tau,
                        const OutputSpec& spec)
{
    const int ny = spec.count();
    if (spec.alpha.rows() != ny || spec.alpha.cols() != 5) {
        throw Error("control/dimension", "alpha must be n_y x 5");
    }
    OutputsEval out;
    out.y = spec.theta * state.q;
    out.ydot = spec.theta * state.qdot;
    out.ydotdotDesired = VecX::Zero(ny);
    for (int i = 0; i < ny; ++i) {
        BezierCurve curve;
        curve.coeffs = spec.alpha.row(i).transpose();
        curve.duration = spec.duration;
        const auto d = curve.eval(tau);
        out.y[i] -= d.value;
        out.ydot[i] -= d.d1;
        out.ydotdotDesired[i] = d.d2;
    }
    return out;
}

Decoupling decoupling(const RobotModel& model, const ContactSet& contacts,
                      const GeneralizedState& state, const OutputSpec& spec)
{
    if (spec.theta.cols() != model.dof()) {
        throw Error("control/dimension", "theta must have n columns");
    }
    const AccelerationAffine affine =
        accelerationAffineDecomposition(model, contacts, state);
    Decoupling out;
    out.a = spec.theta * affine.inputMatrix;
    out.drift = spec.theta * affine.drift;
    return out;
}

VecX minNormSolve(const MatX& a, const VecX& rhs, double rankTol)
{
    if (a.rows() == 0) {
        return VecX::Zero(a.cols());
    }
    if (a.rows() > a.cols()) {
        throw Error("control/rank",
                    "system has more outputs than inputs ("
                        + std::to_string(a.rows()) + " x "
                        + std::to_string(a.cols()) + ")");
    }
    Eigen::JacobiSVD<MatX> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VecX& sigma = svd.singularValues();
    const double smax = sigma[0];
    const double smin = sigma[sigma.size() - 1];
    if (!(smin > rankTol * smax) || smax == 0.0) {
        throw Error("control/rank",
                    "decoupling matrix is row rank deficient (sigma ratio "
                        + std::to_string(smin / std::max(smax, 1e-300))
                        + " below tolerance " + std::to_string(rankTol) + ")");
    }
    // hard-threshold pseudoinverse; all singular values are above the
    // threshold here, so this is the exact minimum-norm solve
    return svd.matrixV() * sigma.cwiseInverse().asDiagonal()
         * (svd.matrixU().transpose() * rhs);
}

ControlEval controlInput(const RobotModel& model, const ContactSet& contacts,
                         const GeneralizedState& state, double tau,
                         const OutputSpec& spec, const ControllerConfig& config,
                         int disabledActuator)
{
    const int m = model.actuatedCount();
    const OutputsEval outs = evalOutputs(state, tau, spec);

    ControlEval out;
    out.y = outs.y;
    out.ydot = outs.ydot;
    out.auxiliary = -config.kp * outs.y - config.kd * outs.ydot;
    if (spec.count() == 0) {
        out.u = VecX::Zero(m);
        return out;
    }

    const Decoupling dec = decoupling(model, contacts, state, spec);
    const VecX rhs = -dec.drift + outs.ydotdotDesired + out.auxiliary;

    if (config.allocation == AllocationMode::MinNormPseudoinverse) {
        out.u = minNormSolve(dec.a, rhs, config.rankTol);
        return out;
    }

    if (disabledActuator < 0 || disabledActuator >= m) {
        throw Error("control/disable",
                    "disable mode needs a valid actuator index per vertex");
    }
    if (dec.a.rows() != m - 1) {
        throw Error("control/disable",
                    "disable mode needs n_y = m - 1 outputs, got "
                        + std::to_string(dec.a.rows()));
    }
    MatX reduced(dec.a.rows(), m - 1);
    int col = 0;
    for (int j = 0; j < m; ++j) {
        if (j == disabledActuator) {
            continue;
        }
        reduced.col(col++) = dec.a.col(j);
    }
    Eigen::FullPivLU<MatX> lu(reduced);
    lu.setThreshold(config.rankTol);
    if (!lu.isInvertible()) {
        throw Error("control/disable",
                    "reduced decoupling matrix is singular with actuator "
                        + model.actuatorName(disabledActuator) + " disabled");
    }
    const VecX uReduced = lu.solve(rhs);
    out.u = VecX::Zero(m);
    col = 0;
    for (int j = 0; j < m; ++j) {
        if (j == disabledActuator) {
            continue;
        }
        out.u[j] = uReduced[col++];
    }
    return out;
}

} // namespace amble
