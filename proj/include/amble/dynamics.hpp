#pragma once

#include <amble/robot_model.hpp>

namespace amble {

/// Joint-space mass matrix D(q) by the composite-rigid-body algorithm.
/// Symmetric positive definite for any valid configuration.
MatX massMatrix(const RobotModel& model, const VecX& q);

struct BiasGravity {
    VecX bias;    // C(q, qdot) * qdot
    VecX gravity; // G(q)
};

/// Velocity-product and potential terms by recursive Newton-Euler.
BiasGravity biasAndGravity(const RobotModel& model, const VecX& q,
                           const VecX& qdot);

/// Coriolis matrix from the Christoffel symbols of D(q), so that
/// dD/dt - 2C is skew-symmetric and C*qdot matches the bias term.
/// The partial derivatives of D are evaluated by complex-step
/// differentiation of the composite-rigid-body pass (exact to roundoff).
MatX coriolisMatrix(const RobotModel& model, const VecX& q, const VecX& qdot);

struct PointKinematics {
    Vec3 position;     // world frame
    Vec3 velocity;     // J * qdot
    MatX jacobian;     // 3 x n
    Vec3 jdotQdot;     // d/dt(J) * qdot, the acceleration drift term
};

/// Position, velocity, Jacobian and drift of a declared foot point.
PointKinematics pointKinematics(const RobotModel& model, const VecX& q,
                                const VecX& qdot, int footIndex);

/// World pose of the body carrying dof `body`.
struct FramePose {
    Mat3 rotation; // link frame -> world
    Vec3 position;
};
FramePose bodyPose(const RobotModel& model, const VecX& q, int body);

Vec3 footPosition(const RobotModel& model, const VecX& q, int footIndex);

double kineticEnergy(const RobotModel& model, const VecX& q, const VecX& qdot);
double potentialEnergy(const RobotModel& model, const VecX& q);
double totalEnergy(const RobotModel& model, const GeneralizedState& state);

/// |base pitch| beyond which traces are flagged for Tait-Bryan
/// ill-conditioning; gaits stay far away from it.
inline constexpr double kPitchSingularityFlag = 80.0 * 3.14159265358979323846 / 180.0;

} // namespace amble
