#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "helpers.hpp"

using namespace amble;
using namespace testutil;

namespace {

RobotModel pointMassWithFoot(double mass)
{
    ModelDescription d;
    d.name = "point_mass";
    d.links.push_back(
        {"body", mass, Vec3::Zero(), diagInertia(0.01, 0.01, 0.01)});
    JointSpec base;
    base.name = "float";
    base.kind = JointKind::FloatingBase;
    base.parent = "world";
    base.child = "body";
    d.joints.push_back(base);
    d.feet.push_back({"foot", "body", Vec3::Zero()});
    return RobotModel::build(d);
}

} // namespace

TEST_CASE("free fall without contacts")
{
    const RobotModel model = freeBody(2.0);
    GeneralizedState s = GeneralizedState::zero(6);
    ContactSet none;
    const auto dyn = constrainedForwardDynamics(model, none, s, VecX::Zero(0));
    VecX expected = VecX::Zero(6);
    expected[2] = -kGravity;
    CHECK((dyn.qddot - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("point mass at rest on one contact carries its weight")
{
    const double mass = 4.2;
    const RobotModel model = pointMassWithFoot(mass);
    GeneralizedState s = GeneralizedState::zero(6);
    const ContactSet contacts = makeContacts(model, s.q, {0});
    const auto dyn = constrainedForwardDynamics(model, contacts, s, VecX::Zero(0));
    CHECK(dyn.qddot.cwiseAbs().maxCoeff() < 1e-10);
    CHECK((dyn.forces.force(0) - Vec3(0, 0, mass * kGravity)).norm() < 1e-9);
}

TEST_CASE("kkt plug-back residuals on the pendulum tip contact")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 25; ++trial) {
        VecX q = randomVec(rng, 8, 0.5);
        VecX qd = randomVec(rng, 8, 0.8);
        GeneralizedState s(q, qd);
        const ContactSet contacts = makeContacts(model, q, {0});
        const VecX u = randomVec(rng, 2, 3.0);
        const auto dyn = constrainedForwardDynamics(model, contacts, s, u);

        const MatX d = massMatrix(model, q);
        const auto bg = biasAndGravity(model, q, qd);
        const auto jc = contactJacobian(model, contacts, q, qd);

        const VecX eqA = d * dyn.qddot + bg.bias + bg.gravity
                       - model.scatterActuation(u)
                       - jc.jacobian.transpose() * dyn.forces.lambda;
        const VecX eqB = jc.jacobian * dyn.qddot + jc.drift;
        const double scale =
            std::max(1.0, (d * dyn.qddot).cwiseAbs().maxCoeff());
        CHECK(eqA.cwiseAbs().maxCoeff() / scale < 1e-9);
        CHECK(eqB.cwiseAbs().maxCoeff() / scale < 1e-9);
    }
}

TEST_CASE("acceleration decomposition reproduces the constrained dynamics")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 10; ++trial) {
        GeneralizedState s(randomVec(rng, 8, 0.5), randomVec(rng, 8, 0.5));
        const ContactSet contacts = makeContacts(model, s.q, {0});
        const auto affine =
            accelerationAffineDecomposition(model, contacts, s);

        const auto atZero =
            constrainedForwardDynamics(model, contacts, s, VecX::Zero(2));
        CHECK((atZero.qddot - affine.drift).cwiseAbs().maxCoeff() < 1e-9);

        const VecX u1 = randomVec(rng, 2, 2.0);
        const VecX u2 = randomVec(rng, 2, 2.0);
        const auto d1 = constrainedForwardDynamics(model, contacts, s, u1);
        const auto d2 = constrainedForwardDynamics(model, contacts, s, u2);
        const auto d12 =
            constrainedForwardDynamics(model, contacts, s, VecX(u1 + u2));

        CHECK((d1.qddot - (affine.drift + affine.inputMatrix * u1))
                  .cwiseAbs()
                  .maxCoeff()
              < 1e-9);
        // additivity of the input response
        CHECK(((d12.qddot - affine.drift)
               - ((d1.qddot - affine.drift) + (d2.qddot - affine.drift)))
                  .cwiseAbs()
                  .maxCoeff()
              < 1e-9);

        // columns against finite differences in u
        const double eps = 1e-6;
        for (int j = 0; j < 2; ++j) {
            VecX up = VecX::Zero(2), um = VecX::Zero(2);
            up[j] = eps;
            um[j] = -eps;
            const VecX col =
                (constrainedForwardDynamics(model, contacts, s, up).qddot
                 - constrainedForwardDynamics(model, contacts, s, um).qddot)
                / (2 * eps);
            CHECK((VecX(affine.inputMatrix.col(j)) - col).cwiseAbs().maxCoeff()
                  < 1e-6);
        }
    }
}

TEST_CASE("contact forces do no work against maintained contacts")
{
    const RobotModel model = doublePendulum();
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        VecX q = randomVec(rng, 8, 0.5);
        // velocity consistent with the pinned tip: project a random qdot
        const ContactSet contacts = makeContacts(model, q, {0});
        const auto jc = contactJacobian(model, contacts, q, VecX::Zero(8));
        VecX qd = randomVec(rng, 8, 1.0);
        // least-squares removal of the constraint-space component
        const MatX j = jc.jacobian;
        qd -= j.transpose() * (j * j.transpose()).ldlt().solve(j * qd);
        GeneralizedState s(q, qd);
        const auto dyn =
            constrainedForwardDynamics(model, contacts, s, randomVec(rng, 2, 2.0));
        const double power = dyn.forces.lambda.dot(j * qd);
        CHECK(std::abs(power) < 1e-9);
    }
}

TEST_CASE("rank-deficient contact sets are rejected")
{
    // two coincident point feet on the same rigid body
    ModelDescription d;
    d.name = "two_feet_one_link";
    d.links.push_back({"body", 1.0, Vec3::Zero(), diagInertia(0.01, 0.01, 0.01)});
    JointSpec base;
    base.name = "float";
    base.kind = JointKind::FloatingBase;
    base.parent = "world";
    base.child = "body";
    d.joints.push_back(base);
    d.feet.push_back({"a", "body", Vec3(0.1, 0, 0)});
    d.feet.push_back({"b", "body", Vec3(-0.1, 0, 0)});
    const RobotModel model = RobotModel::build(d);

    GeneralizedState s = GeneralizedState::zero(6);
    const ContactSet contacts = makeContacts(model, s.q, {0, 1});
    try {
        constrainedForwardDynamics(model, contacts, s, VecX::Zero(0));
        FAIL("expected contact/rank");
    } catch (const Error& e) {
        CHECK(e.category() == "contact/rank");
    }
}

TEST_CASE("admissibility entries for cone margins and swing heights")
{
    const RobotModel model = doublePendulum(); // mu = 0.6 default
    GeneralizedState s = GeneralizedState::zero(8);

    SUBCASE("pure normal force is inside the cone")
    {
        const ContactSet contacts = makeContacts(model, s.q, {0});
        ContactForces f;
        f.lambda = VecX::Zero(3);
        f.lambda[2] = 9.81;
        const auto entries = admissibility(model, contacts, s, f);
        REQUIRE(entries.size() == 5); // 4 margins + normal, no swing feet
        for (const auto& e : entries) {
            CHECK(e.value > 0.0);
        }
    }

    SUBCASE("tangential force beyond the pyramid facet flags one margin")
    {
        const ContactSet contacts = makeContacts(model, s.q, {0});
        ContactForces f;
        f.lambda = VecX::Zero(3);
        f.lambda[2] = 10.0;
        f.lambda[0] = model.frictionMu() * 10.0; // outside the inner pyramid
        const auto entries = admissibility(model, contacts, s, f);
        int negative = 0;
        for (const auto& e : entries) {
            if (e.value < 0.0) {
                ++negative;
                CHECK(e.kind == AdmissibilityKind::ConeMargin);
            }
        }
        CHECK(negative == 1);
    }

    SUBCASE("swing foot height is reported verbatim")
    {
        VecX q = VecX::Zero(8);
        q[2] = -0.01 - footPosition(model, VecX::Zero(8), 0).z();
        GeneralizedState state(q, VecX::Zero(8));
        ContactSet none;
        ContactForces f;
        f.lambda = VecX::Zero(0);
        const auto entries = admissibility(model, none, state, f);
        REQUIRE(entries.size() == 1);
        CHECK(entries[0].kind == AdmissibilityKind::SwingHeight);
        CHECK(entries[0].value == doctest::Approx(-0.01).epsilon(1e-9));
    }
}
