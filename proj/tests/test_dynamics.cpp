#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace amble;
using namespace testutil;

TEST_CASE("free body model has six dofs")
{
    const RobotModel model = freeBody();
    CHECK(model.dof() == 6);
    CHECK(model.actuatedCount() == 0);
}

TEST_CASE("build rejects a joint whose parent equals its child")
{
    ModelDescription d;
    d.links.push_back({"base", 1.0, Vec3::Zero(), diagInertia(1, 1, 1) * 0.01});
    JointSpec base;
    base.name = "float";
    base.kind = JointKind::FloatingBase;
    base.parent = "world";
    base.child = "base";
    d.joints.push_back(base);
    JointSpec bad;
    bad.name = "selfloop";
    bad.parent = "base";
    bad.child = "base";
    d.joints.push_back(bad);
    try {
        RobotModel::build(d);
        FAIL("expected model/cycle");
    } catch (const Error& e) {
        CHECK(e.category() == "model/cycle");
    }
}

TEST_CASE("build rejects nonpositive mass and non-spd inertia")
{
    ModelDescription d;
    d.links.push_back({"base", -1.0, Vec3::Zero(), diagInertia(1, 1, 1)});
    JointSpec base;
    base.name = "float";
    base.kind = JointKind::FloatingBase;
    base.parent = "world";
    base.child = "base";
    d.joints.push_back(base);
    try {
        RobotModel::build(d);
        FAIL("expected model/mass");
    } catch (const Error& e) {
        CHECK(e.category() == "model/mass");
    }

    d.links[0].mass = 1.0;
    d.links[0].inertia = diagInertia(1, -1, 1);
    try {
        RobotModel::build(d);
        FAIL("expected model/inertia");
    } catch (const Error& e) {
        CHECK(e.category() == "model/inertia");
    }
}

TEST_CASE("build rejects unknown link references")
{
    ModelDescription d;
    d.links.push_back({"base", 1.0, Vec3::Zero(), diagInertia(1, 1, 1) * 0.01});
    JointSpec base;
    base.name = "float";
    base.kind = JointKind::FloatingBase;
    base.parent = "world";
    base.child = "base";
    d.joints.push_back(base);
    JointSpec j;
    j.name = "j";
    j.parent = "base";
    j.child = "ghost";
    d.joints.push_back(j);
    try {
        RobotModel::build(d);
        FAIL("expected model/unknown_link");
    } catch (const Error& e) {
        CHECK(e.category() == "model/unknown_link");
    }
}

TEST_CASE("free body mass matrix translational block is m*I")
{
    const double mass = 3.7;
    const RobotModel model = freeBody(mass);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const VecX q = randomVec(rng, 6, 0.8);
        const MatX d = massMatrix(model, q);
        CHECK((d.topLeftCorner(3, 3) - mass * Mat3::Identity())
                  .cwiseAbs()
                  .maxCoeff()
              < 1e-12);
    }
}

TEST_CASE("free body gravity vector is (0,0,mg,0,0,0) at zero com")
{
    const double mass = 2.5;
    const RobotModel model = freeBody(mass);
    std::mt19937_64 rng(11);
    const VecX q = randomVec(rng, 6, 0.5);
    const auto bg = biasAndGravity(model, q, VecX::Zero(6));
    VecX expected = VecX::Zero(6);
    expected[2] = mass * kGravity;
    CHECK((bg.gravity - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(bg.bias.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("double pendulum joint block matches the closed form")
{
    PendulumParams p;
    const RobotModel model = doublePendulum(p);
    REQUIRE(model.dof() == 8);
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        VecX q = VecX::Zero(8);
        q[6] = randomVec(rng, 1, 3.0)[0];
        q[7] = randomVec(rng, 1, 3.0)[0];
        VecX qd = VecX::Zero(8);
        qd[6] = randomVec(rng, 1, 2.0)[0];
        qd[7] = randomVec(rng, 1, 2.0)[0];

        const auto oracle = pendulumClosedForm(p, q[6], q[7], qd[6], qd[7]);
        const MatX d = massMatrix(model, q);
        CHECK((d.bottomRightCorner(2, 2) - oracle.d).cwiseAbs().maxCoeff()
              < 1e-10);

        const MatX c = coriolisMatrix(model, q, qd);
        CHECK((c.bottomRightCorner(2, 2) - oracle.c).cwiseAbs().maxCoeff()
              < 1e-9);

        const auto bg = biasAndGravity(model, q, qd);
        CHECK((bg.gravity.tail(2) - oracle.g).cwiseAbs().maxCoeff() < 1e-10);
        const Eigen::Vector2d biasOracle =
            oracle.c * Eigen::Vector2d(qd[6], qd[7]);
        CHECK((bg.bias.tail(2) - biasOracle).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("mass matrix is symmetric positive definite at random states")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const VecX q = randomVec(rng, 8, 2.0);
        const MatX d = massMatrix(model, q);
        CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-10);
        Eigen::SelfAdjointEigenSolver<MatX> eig(d);
        CHECK(eig.eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("bias vanishes at zero velocity and C*qdot equals the bias")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const VecX q = randomVec(rng, 8, 1.5);
        const VecX qd = randomVec(rng, 8, 1.5);

        const auto atRest = biasAndGravity(model, q, VecX::Zero(8));
        CHECK(atRest.bias.cwiseAbs().maxCoeff() == 0.0);

        const auto bg = biasAndGravity(model, q, qd);
        const MatX c = coriolisMatrix(model, q, qd);
        CHECK((c * qd - bg.bias).cwiseAbs().maxCoeff() < 1e-9);

        const MatX czero = coriolisMatrix(model, q, VecX::Zero(8));
        CHECK(czero.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("dD/dt - 2C is skew-symmetric with dD/dt by finite differences")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 10; ++trial) {
        const VecX q = randomVec(rng, 8, 1.2);
        const VecX qd = randomVec(rng, 8, 1.2);
        const double eps = 1e-6;
        const MatX dPlus = massMatrix(model, q + eps * qd);
        const MatX dMinus = massMatrix(model, q - eps * qd);
        const MatX dDot = (dPlus - dMinus) / (2 * eps);
        const MatX c = coriolisMatrix(model, q, qd);
        const MatX s = dDot - 2 * c;
        CHECK((s + s.transpose()).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("foot position at the home pose follows the chain geometry")
{
    PendulumParams p;
    const RobotModel model = doublePendulum(p);
    const VecX q = VecX::Zero(8);
    const Vec3 tip = footPosition(model, q, 0);
    CHECK((tip - Vec3(p.l1 + p.l2, 0, 0)).norm() < 1e-13);
}

TEST_CASE("foot jacobian matches central finite differences")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const VecX q = randomVec(rng, 8, 1.0);
        const VecX qd = randomVec(rng, 8, 1.0);
        const auto pk = pointKinematics(model, q, qd, 0);
        const double eps = 1e-6;
        for (int j = 0; j < 8; ++j) {
            VecX qp = q, qm = q;
            qp[j] += eps;
            qm[j] -= eps;
            const Vec3 col = (footPosition(model, qp, 0)
                              - footPosition(model, qm, 0))
                           / (2 * eps);
            const double scale = std::max(1.0, col.norm());
            CHECK((Vec3(pk.jacobian.col(j)) - col).norm() / scale < 1e-6);
        }
        CHECK((pk.velocity - pk.jacobian * qd).norm() < 1e-12);
    }
}

TEST_CASE("jdot*qdot matches finite differences along a smooth trajectory")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(37);
    const VecX q0 = randomVec(rng, 8, 0.6);
    const VecX amp = randomVec(rng, 8, 0.4);
    const VecX freq = randomVec(rng, 8, 2.0);

    auto qOf = [&](double t) {
        VecX q(8);
        for (int i = 0; i < 8; ++i) {
            q[i] = q0[i] + amp[i] * std::sin(freq[i] * t);
        }
        return q;
    };
    auto qdOf = [&](double t) {
        VecX qd(8);
        for (int i = 0; i < 8; ++i) {
            qd[i] = amp[i] * freq[i] * std::cos(freq[i] * t);
        }
        return qd;
    };
    auto qddOf = [&](double t) {
        VecX qdd(8);
        for (int i = 0; i < 8; ++i) {
            qdd[i] = -amp[i] * freq[i] * freq[i] * std::sin(freq[i] * t);
        }
        return qdd;
    };

    for (double t : {0.1, 0.45, 0.9, 1.7}) {
        const double eps = 1e-5;
        auto velocityAt = [&](double s) -> Vec3 {
            return pointKinematics(model, qOf(s), qdOf(s), 0).velocity;
        };
        const Vec3 dJqd = (velocityAt(t + eps) - velocityAt(t - eps)) / (2 * eps);
        const auto pk = pointKinematics(model, qOf(t), qdOf(t), 0);
        const Vec3 expected = dJqd - Vec3(pk.jacobian * qddOf(t));
        CHECK((pk.jdotQdot - expected).norm() < 1e-5);
    }
}

TEST_CASE("passive free flight conserves energy over 5 s")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(41);
    VecX q = randomVec(rng, 8, 0.3);
    VecX qd = randomVec(rng, 8, 0.4);
    q[2] = 10.0; // start well above ground, contact-free
    const double e0 = totalEnergy(model, GeneralizedState(q, qd));

    auto f = [&](double, const VecX& x) {
        GeneralizedState s(x.head(8), x.tail(8));
        ContactSet none;
        const auto dyn = constrainedForwardDynamics(model, none, s, VecX::Zero(2));
        VecX dx(16);
        dx.head(8) = s.qdot;
        dx.tail(8) = dyn.qddot;
        return dx;
    };

    VecX x(16);
    x << q, qd;
    const double dt = 1e-3;
    for (int k = 0; k < 5000; ++k) {
        x = rk4Step(f, k * dt, x, dt);
    }
    const double e1 =
        totalEnergy(model, GeneralizedState(x.head(8), x.tail(8)));
    CHECK(std::abs(e1 - e0) < 1e-6);
}
