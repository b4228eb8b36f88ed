#pragma once

#include <Eigen/Dense>
#include <functional>
#include <random>

#include <amble/contact.hpp>
#include <amble/dynamics.hpp>
#include <amble/robot_model.hpp>

// Shared fixtures: small hand-assembled models and finite-difference
// utilities used as independent oracles.

namespace testutil {

using namespace amble;

inline Mat3 diagInertia(double x, double y, double z)
{
    return Vec3(x, y, z).asDiagonal();
}

/// Free rigid body, no joints: the 6-dof base alone.
inline RobotModel freeBody(double mass = 3.0,
                           const Vec3& com = Vec3::Zero())
{
    ModelDescription d;
    d.name = "free_body";
    d.links.push_back({"body", mass, com, diagInertia(0.02, 0.03, 0.04)});
    JointSpec base;
    base.name = "float";
    base.kind = JointKind::FloatingBase;
    base.parent = "world";
    base.child = "body";
    d.joints.push_back(base);
    return RobotModel::build(d);
}

struct PendulumParams {
    double m1 = 1.2, m2 = 0.7;
    double l1 = 0.5, l2 = 0.4;
    double lc1 = 0.3, lc2 = 0.25;
    double i1 = 0.02, i2 = 0.015; // about the com, swing axis
};

/// Floating base plus a planar two-link pendulum hanging from it.
/// Joint axes are (0,-1,0) so positive angles sweep counterclockwise in
/// the x-z plane measured from +x; with the base locked at identity the
/// joint block of the dynamics matches the textbook two-link closed form.
inline RobotModel doublePendulum(const PendulumParams& p = {})
{
    ModelDescription d;
    d.name = "double_pendulum";
    d.links.push_back({"base", 10.0, Vec3::Zero(), diagInertia(0.1, 0.12, 0.14)});
    d.links.push_back(
        {"link1", p.m1, Vec3(p.lc1, 0, 0), diagInertia(1e-4, p.i1, 1e-4)});
    d.links.push_back(
        {"link2", p.m2, Vec3(p.lc2, 0, 0), diagInertia(1e-4, p.i2, 1e-4)});

    JointSpec base;
    base.name = "float";
    base.kind = JointKind::FloatingBase;
    base.parent = "world";
    base.child = "base";
    d.joints.push_back(base);

    JointSpec j1;
    j1.name = "q1";
    j1.parent = "base";
    j1.child = "link1";
    j1.axis = Vec3(0, -1, 0);
    d.joints.push_back(j1);

    JointSpec j2;
    j2.name = "q2";
    j2.parent = "link1";
    j2.child = "link2";
    j2.axis = Vec3(0, -1, 0);
    j2.originXyz = Vec3(p.l1, 0, 0);
    d.joints.push_back(j2);

    d.actuatedJoints = {"q1", "q2"};
    d.feet.push_back({"tip", "link2", Vec3(p.l2, 0, 0)});
    return RobotModel::build(d);
}

/// Closed-form two-link matrices, angles from +x, gravity -z.
struct PendulumClosedForm {
    Eigen::Matrix2d d;
    Eigen::Matrix2d c;
    Eigen::Vector2d g;
};

inline PendulumClosedForm pendulumClosedForm(const PendulumParams& p,
                                             double q1, double q2,
                                             double qd1, double qd2)
{
    PendulumClosedForm out;
    const double c2 = std::cos(q2);
    const double s2 = std::sin(q2);
    out.d(0, 0) = p.i1 + p.i2 + p.m1 * p.lc1 * p.lc1
                + p.m2 * (p.l1 * p.l1 + p.lc2 * p.lc2 + 2 * p.l1 * p.lc2 * c2);
    out.d(0, 1) = p.i2 + p.m2 * (p.lc2 * p.lc2 + p.l1 * p.lc2 * c2);
    out.d(1, 0) = out.d(0, 1);
    out.d(1, 1) = p.i2 + p.m2 * p.lc2 * p.lc2;

    const double h = p.m2 * p.l1 * p.lc2 * s2;
    out.c(0, 0) = -h * qd2;
    out.c(0, 1) = -h * (qd1 + qd2);
    out.c(1, 0) = h * qd1;
    out.c(1, 1) = 0.0;

    out.g(0) = kGravity
             * ((p.m1 * p.lc1 + p.m2 * p.l1) * std::cos(q1)
                + p.m2 * p.lc2 * std::cos(q1 + q2));
    out.g(1) = kGravity * p.m2 * p.lc2 * std::cos(q1 + q2);
    return out;
}

inline VecX randomVec(std::mt19937_64& rng, int n, double scale)
{
    std::uniform_real_distribution<double> dist(-scale, scale);
    VecX v(n);
    for (int i = 0; i < n; ++i) {
        v[i] = dist(rng);
    }
    return v;
}

/// Plain fixed-step RK4 on xdot = f(t, x); local to the tests so energy
/// checks do not depend on the simulator implementation.
inline VecX rk4Step(const std::function<VecX(double, const VecX&)>& f,
                    double t, const VecX& x, double h)
{
    const VecX k1 = f(t, x);
    const VecX k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
    const VecX k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
    const VecX k4 = f(t + h, x + h * k3);
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4);
}

} // namespace testutil
