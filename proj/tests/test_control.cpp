#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <amble/gait_seed.hpp>
#include <amble/io.hpp>
#include <amble/output_control.hpp>

#include "helpers.hpp"

using namespace amble;
using namespace testutil;

namespace {

const char* kAstroModel = AMBLE_ASSET_DIR "/models/astro.json";

/// de Casteljau evaluation, the independent route for Bézier values.
double deCasteljau(const Eigen::Matrix<double, 5, 1>& coeffs, double s)
{
    std::vector<double> pts(coeffs.data(), coeffs.data() + 5);
    for (int level = 4; level > 0; --level) {
        for (int i = 0; i < level; ++i) {
            pts[i] = (1.0 - s) * pts[i] + s * pts[i + 1];
        }
    }
    return pts[0];
}

/// Reference pseudoinverse solve through the normal equations, kept
/// independent of the SVD route used by the implementation.
VecX normalEquationsMinNorm(const MatX& a, const VecX& rhs)
{
    return a.transpose() * (a * a.transpose()).fullPivLu().solve(rhs);
}

GeneralizedState randomAmbleState(const RobotModel& model,
                                  const GaitParameters& seed,
                                  std::mt19937_64& rng, double scale)
{
    GeneralizedState s = seed.x0.state;
    s.q += randomVec(rng, model.dof(), scale);
    s.q[2] = seed.x0.state.q[2] + 0.2 * scale; // keep the body up
    s.qdot += randomVec(rng, model.dof(), 2.0 * scale);
    return s;
}

} // namespace

TEST_CASE("bezier endpoints and endpoint derivative identities")
{
    BezierCurve curve;
    curve.coeffs << 0.3, -0.1, 0.5, 0.2, 0.9;
    curve.duration = 0.4;
    CHECK(curve.eval(0.0).value == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(curve.eval(0.4).value == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(curve.eval(0.0).d1
          == doctest::Approx(4.0 * (-0.1 - 0.3) / 0.4).epsilon(1e-12));
    // clamped outside the phase
    CHECK(curve.eval(1.0).value == doctest::Approx(0.9));
    CHECK(curve.eval(1.0).d1 == 0.0);
}

TEST_CASE("bezier values match de Casteljau mid-phase")
{
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        BezierCurve curve;
        curve.coeffs = randomVec(rng, 5, 1.0);
        curve.duration = 0.7;
        for (double s : {0.12, 0.37, 0.5, 0.81}) {
            CHECK(curve.eval(s * 0.7).value
                  == doctest::Approx(deCasteljau(curve.coeffs, s))
                         .epsilon(1e-12));
        }
    }
}

TEST_CASE("outputs vanish on the desired trajectory and theta selects joints")
{
    const RobotModel model = doublePendulum();
    OutputSpec spec;
    spec.theta = MatX::Zero(2, 8);
    spec.theta(0, 6) = 1.0;
    spec.theta(1, 7) = 1.0;
    spec.duration = 0.5;
    spec.alpha.resize(2, 5);
    spec.alpha.row(0) << 0.1, 0.2, 0.3, 0.2, 0.1;
    spec.alpha.row(1) << -0.3, 0.0, 0.3, 0.1, -0.1;
    spec.names = {"q1", "q2"};

    const double tau = 0.2;
    GeneralizedState s = GeneralizedState::zero(8);
    for (int i = 0; i < 2; ++i) {
        BezierCurve c;
        c.coeffs = spec.alpha.row(i).transpose();
        c.duration = spec.duration;
        s.q[6 + i] = c.eval(tau).value;
        s.qdot[6 + i] = c.eval(tau).d1;
    }
    const auto out = evalOutputs(s, tau, spec);
    CHECK(out.y.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(out.ydot.cwiseAbs().maxCoeff() < 1e-14);

    // theta as pure selection reads the joint coordinates
    s.q[6] = 0.37;
    CHECK((spec.theta * s.q)[0] == doctest::Approx(0.37));
}

TEST_CASE("output velocity matches finite differences along a trajectory")
{
    const RobotModel model = doublePendulum();
    OutputSpec spec;
    spec.theta = MatX::Random(2, 8);
    spec.duration = 0.6;
    spec.alpha = MatX::Random(2, 5);
    spec.names = {"a", "b"};

    std::mt19937_64 rng(11);
    const VecX q0 = randomVec(rng, 8, 0.5);
    const VecX amp = randomVec(rng, 8, 0.3);
    auto stateAt = [&](double t) {
        GeneralizedState s;
        s.q = q0 + amp * std::sin(3.0 * t);
        s.qdot = amp * 3.0 * std::cos(3.0 * t);
        return s;
    };
    for (double t : {0.1, 0.25, 0.4}) {
        const double eps = 1e-6;
        const auto yPlus = evalOutputs(stateAt(t + eps), t + eps, spec);
        const auto yMinus = evalOutputs(stateAt(t - eps), t - eps, spec);
        const VecX fd = (yPlus.y - yMinus.y) / (2 * eps);
        const auto mid = evalOutputs(stateAt(t), t, spec);
        CHECK((fd - mid.ydot).cwiseAbs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("min-norm solve on hand cases")
{
    MatX a(2, 3);
    a << 1, 0, 0, 0, 1, 0;
    VecX rhs(2);
    rhs << 3, 4;
    const VecX u = minNormSolve(a, rhs, 1e-8);
    CHECK((u - Vec3(3, 4, 0)).norm() < 1e-12);

    MatX a2(1, 2);
    a2 << 1, 1;
    VecX rhs2(1);
    rhs2 << 2;
    const VecX u2 = minNormSolve(a2, rhs2, 1e-8);
    CHECK((u2 - Vec2(1, 1)).norm() < 1e-12);
}

TEST_CASE("min-norm solve matches the oracle and dominates exact solutions")
{
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> nyDist(1, 11);
    for (int trial = 0; trial < 50; ++trial) {
        const int ny = nyDist(rng);
        std::uniform_int_distribution<int> mDist(ny + 1, 12);
        const int m = mDist(rng);
        MatX a(ny, m);
        for (int r = 0; r < ny; ++r) {
            a.row(r) = randomVec(rng, m, 2.0).transpose();
        }
        const VecX rhs = randomVec(rng, ny, 3.0);
        const VecX u = minNormSolve(a, rhs, 1e-8);

        CHECK((a * u - rhs).norm() / std::max(1.0, rhs.norm()) < 1e-9);
        CHECK((u - normalEquationsMinNorm(a, rhs)).norm() < 1e-9);

        // any null-space shift has a larger 2-norm
        Eigen::FullPivLU<MatX> lu(a);
        const MatX null = lu.kernel();
        for (int k = 0; k < 20; ++k) {
            const VecX w = null * randomVec(rng, null.cols(), 1.0);
            CHECK(u.norm() <= (u + w).norm() + 1e-12);
        }
    }
}

TEST_CASE("rank-deficient systems are rejected with the sigma ratio")
{
    MatX a(2, 3);
    a << 1, 2, 3, 2, 4, 6; // parallel rows
    VecX rhs(2);
    rhs << 1, 2;
    try {
        minNormSolve(a, rhs, 1e-8);
        FAIL("expected control/rank");
    } catch (const Error& e) {
        CHECK(e.category() == "control/rank");
        CHECK(std::string(e.what()).find("sigma ratio") != std::string::npos);
    }
}

TEST_CASE("quadruped double-stance decoupling is 11 x 12 with rank 11")
{
    const RobotModel model = loadModel(kAstroModel);
    const GaitGraph graph = GaitGraph::quadrupedAmble(model);
    const GaitParameters seed = seedQuadrupedAmble(model, graph, Vec2(0.2, 0));

    const int v = 0;
    const ContactSet contacts =
        makeContacts(model, seed.x0.state.q, graph.stance(v));
    const Decoupling dec =
        decoupling(model, contacts, seed.x0.state, seed.outputs[v]);
    CHECK(dec.a.rows() == 11);
    CHECK(dec.a.cols() == 12);
    Eigen::JacobiSVD<MatX> svd(dec.a);
    const auto& sv = svd.singularValues();
    CHECK(sv[sv.size() - 1] > 1e-6 * sv[0]);

    // pseudoinverse identity A A+ A = A on the computed matrix
    Eigen::JacobiSVD<MatX> full(dec.a,
                                Eigen::ComputeThinU | Eigen::ComputeThinV);
    const MatX pinv = full.matrixV()
                    * full.singularValues().cwiseInverse().asDiagonal()
                    * full.matrixU().transpose();
    CHECK(((dec.a * pinv * dec.a - dec.a).cwiseAbs().maxCoeff())
          < 1e-9 * dec.a.cwiseAbs().maxCoeff());
}

TEST_CASE("decoupling plug-back through the constrained dynamics")
{
    const RobotModel model = loadModel(kAstroModel);
    const GaitGraph graph = GaitGraph::quadrupedAmble(model);
    const GaitParameters seed = seedQuadrupedAmble(model, graph, Vec2(0.2, 0));
    std::mt19937_64 rng(23);

    for (int trial = 0; trial < 10; ++trial) {
        const GeneralizedState s = randomAmbleState(model, seed, rng, 0.03);
        const ContactSet contacts = makeContacts(model, s.q, graph.stance(0));
        const auto& spec = seed.outputs[0];
        const Decoupling dec = decoupling(model, contacts, s, spec);
        const VecX u = randomVec(rng, 12, 4.0);
        const auto dyn = constrainedForwardDynamics(model, contacts, s, u);
        const VecX lhs = spec.theta * dyn.qddot;
        const VecX rhs = dec.drift + dec.a * u;
        CHECK((lhs - rhs).cwiseAbs().maxCoeff()
              < 1e-9 * std::max(1.0, lhs.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("square decoupling on the biped step vertices")
{
    const RobotModel model =
        loadModel(AMBLE_ASSET_DIR "/models/planar_biped.json");
    const GaitGraph graph = GaitGraph::bipedStep(model);
    const GaitParameters seed = seedBipedStep(model, graph);
    const ContactSet contacts =
        makeContacts(model, seed.x0.state.q, graph.stance(0));
    const Decoupling dec =
        decoupling(model, contacts, seed.x0.state, seed.outputs[0]);
    CHECK(dec.a.rows() == 2);
    CHECK(dec.a.cols() == 2);
    CHECK(std::abs(dec.a.determinant()) > 1e-10);
}

TEST_CASE("control input solves the output dynamics in both modes")
{
    const RobotModel model = loadModel(kAstroModel);
    const GaitGraph graph = GaitGraph::quadrupedAmble(model);
    const GaitParameters seed = seedQuadrupedAmble(model, graph, Vec2(0.2, 0));
    const auto disabledMap = defaultDisabledJoints(model, graph);
    std::mt19937_64 rng(31);

    ControllerConfig mpp;
    ControllerConfig disable;
    disable.allocation = AllocationMode::DisableActuator;

    for (int v = 0; v < graph.count(); ++v) {
        const int disabledIdx =
            model.actuatorIndex(disabledMap.at(graph.vertex(v).id));
        for (int trial = 0; trial < 5; ++trial) {
            const GeneralizedState s = randomAmbleState(model, seed, rng, 0.02);
            const ContactSet contacts =
                makeContacts(model, s.q, graph.stance(v));
            const double tau = 0.1;
            const auto& spec = seed.outputs[v];

            for (int mode = 0; mode < 2; ++mode) {
                const auto& cfg = mode == 0 ? mpp : disable;
                const ControlEval ce = controlInput(
                    model, contacts, s, tau, spec, cfg, disabledIdx);
                const auto dyn =
                    constrainedForwardDynamics(model, contacts, s, ce.u);
                const auto outs = evalOutputs(s, tau, spec);
                // closed loop: theta qddot - yddot_desired = v
                const VecX closed =
                    spec.theta * dyn.qddot - outs.ydotdotDesired;
                CHECK((closed - ce.auxiliary).cwiseAbs().maxCoeff() < 1e-6);
                if (mode == 1) {
                    CHECK(ce.u[disabledIdx] == 0.0);
                }
            }

            // pointwise torque dominance of the minimum-norm mode
            const VecX uMpp =
                controlInput(model, contacts, s, tau, spec, mpp, -1).u;
            const VecX uDis = controlInput(model, contacts, s, tau, spec,
                                           disable, disabledIdx)
                                  .u;
            CHECK(uMpp.norm() <= uDis.norm() + 1e-9);
        }
    }
}

TEST_CASE("control input is locally Lipschitz along the gait")
{
    const RobotModel model = loadModel(kAstroModel);
    const GaitGraph graph = GaitGraph::quadrupedAmble(model);
    const GaitParameters seed = seedQuadrupedAmble(model, graph, Vec2(0.2, 0));
    ControllerConfig cfg;
    std::mt19937_64 rng(37);

    const GeneralizedState base = seed.x0.state;
    const ContactSet contacts = makeContacts(model, base.q, graph.stance(0));
    const VecX u0 =
        controlInput(model, contacts, base, 0.05, seed.outputs[0], cfg, -1).u;

    double worstRatio = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const double eps = 1e-6;
        GeneralizedState s = base;
        const VecX dq = randomVec(rng, model.dof(), eps);
        const VecX dqd = randomVec(rng, model.dof(), eps);
        s.q += dq;
        s.qdot += dqd;
        const VecX u1 =
            controlInput(model, contacts, s, 0.05, seed.outputs[0], cfg, -1).u;
        const double delta = std::sqrt(dq.squaredNorm() + dqd.squaredNorm());
        worstRatio = std::max(worstRatio, (u1 - u0).norm() / delta);
    }
    CHECK(worstRatio < 1e5); // finite difference Lipschitz bound stays sane
}

TEST_CASE("zero outputs give zero torque")
{
    const RobotModel model = doublePendulum();
    OutputSpec spec;
    spec.theta = MatX::Zero(0, 8);
    spec.alpha = MatX::Zero(0, 5);
    spec.duration = 1.0;
    ControllerConfig cfg;
    const ControlEval ce = controlInput(model, ContactSet{},
                                        GeneralizedState::zero(8), 0.0, spec,
                                        cfg, -1);
    CHECK(ce.u.size() == 2);
    CHECK(ce.u.cwiseAbs().maxCoeff() == 0.0);
}
