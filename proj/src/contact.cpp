#include <amble/contact.hpp>

#include <Eigen/Dense>
#include <cmath>

namespace amble {

namespace {

constexpr double kRankTol = 1e-10;

void checkRowRank(const MatX& jc, const char* who)
{
    if (jc.rows() == 0) {
        return;
    }
    Eigen::JacobiSVD<MatX> svd(jc);
    const double smax = svd.singularValues()[0];
    const double smin = svd.singularValues()[svd.singularValues().size() - 1];
    if (jc.rows() > jc.cols() || !(smin > kRankTol * std::max(smax, 1.0))) {
        throw Error("contact/rank",
                    std::string(who)
                        + ": contact Jacobian is row rank deficient (sigma "
                          "ratio "
                        + std::to_string(smin / std::max(smax, 1e-300)) + ")");
    }
}

} // namespace

bool ContactSet::isActive(int footIndex) const
{
    return slot(footIndex) >= 0;
}

int ContactSet::slot(int footIndex) const
{
    for (int i = 0; i < count(); ++i) {
        if (active[i] == footIndex) {
            return i;
        }
    }
    return -1;
}

ContactSet makeContacts(const RobotModel& model, const VecX& q,
                        const std::vector<int>& activeFeet)
{
    ContactSet contacts;
    contacts.active = activeFeet;
    for (int foot : activeFeet) {
        Vec3 anchor = footPosition(model, q, foot);
        anchor.z() = std::max(anchor.z(), 0.0);
        contacts.anchors.push_back(anchor);
    }
    return contacts;
}

ContactJacobian contactJacobian(const RobotModel& model,
                                const ContactSet& contacts, const VecX& q,
                                const VecX& qdot)
{
    ContactJacobian out;
    out.jacobian = MatX::Zero(contacts.rows(), model.dof());
    out.drift = VecX::Zero(contacts.rows());
    for (int i = 0; i < contacts.count(); ++i) {
        const PointKinematics pk =
            pointKinematics(model, q, qdot, contacts.active[i]);
        out.jacobian.middleRows<3>(3 * i) = pk.jacobian;
        out.drift.segment<3>(3 * i) = pk.jdotQdot;
    }
    return out;
}

ConstrainedDynamics constrainedForwardDynamics(const RobotModel& model,
                                               const ContactSet& contacts,
                                               const GeneralizedState& state,
                                               const VecX& u)
{
    const int n = model.dof();
    const int k = contacts.rows();
    if (u.size() != model.actuatedCount()) {
        throw Error("contact/dimension", "input dimension mismatch");
    }

    const MatX d = massMatrix(model, state.q);
    const BiasGravity bg = biasAndGravity(model, state.q, state.qdot);
    const VecX generalizedForce =
        model.scatterActuation(u) - bg.bias - bg.gravity;

    if (k == 0) {
        ConstrainedDynamics out;
        out.qddot = d.ldlt().solve(generalizedForce);
        out.forces.lambda = VecX::Zero(0);
        return out;
    }

    const ContactJacobian jc =
        contactJacobian(model, contacts, state.q, state.qdot);
    checkRowRank(jc.jacobian, "constrained_forward_dynamics");

    MatX kkt = MatX::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = d;
    kkt.topRightCorner(n, k) = jc.jacobian.transpose();
    kkt.bottomLeftCorner(k, n) = jc.jacobian;
    VecX rhs(n + k);
    rhs.head(n) = generalizedForce;
    rhs.tail(k) = -jc.drift;

    Eigen::PartialPivLU<MatX> lu(kkt);
    VecX sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol); // one refinement step

    ConstrainedDynamics out;
    out.qddot = sol.head(n);
    out.forces.lambda = -sol.tail(k);
    return out;
}

AccelerationAffine accelerationAffineDecomposition(const RobotModel& model,
                                                   const ContactSet& contacts,
                                                   const GeneralizedState& state)
{
    const int n = model.dof();
    const int k = contacts.rows();
    const int m = model.actuatedCount();

    const MatX d = massMatrix(model, state.q);
    const BiasGravity bg = biasAndGravity(model, state.q, state.qdot);

    AccelerationAffine out;
    if (k == 0) {
        Eigen::LDLT<MatX> ldlt(d);
        out.drift = ldlt.solve(-bg.bias - bg.gravity);
        MatX b = MatX::Zero(n, m);
        for (int j = 0; j < m; ++j) {
            b(model.actuatedDofs()[j], j) = 1.0;
        }
        out.inputMatrix = ldlt.solve(b);
        return out;
    }

    const ContactJacobian jc =
        contactJacobian(model, contacts, state.q, state.qdot);
    checkRowRank(jc.jacobian, "acceleration_affine_decomposition");

    MatX kkt = MatX::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = d;
    kkt.topRightCorner(n, k) = jc.jacobian.transpose();
    kkt.bottomLeftCorner(k, n) = jc.jacobian;
    Eigen::PartialPivLU<MatX> lu(kkt);

    MatX rhs = MatX::Zero(n + k, m + 1);
    rhs.col(0).head(n) = -bg.bias - bg.gravity;
    rhs.col(0).tail(k) = -jc.drift;
    for (int j = 0; j < m; ++j) {
        rhs(model.actuatedDofs()[j], j + 1) = 1.0;
    }
    MatX sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol);

    out.drift = sol.col(0).head(n);
    out.inputMatrix = sol.rightCols(m).topRows(n);
    return out;
}

std::vector<AdmissibilityEntry> admissibility(const RobotModel& model,
                                              const ContactSet& contacts,
                                              const GeneralizedState& state,
                                              const ContactForces& forces)
{
    if (forces.lambda.size() != contacts.rows()) {
        throw Error("contact/dimension",
                    "force dimension does not match the contact set");
    }
    const double mu = model.frictionMu();
    const double invSqrt2 = 1.0 / std::sqrt(2.0);

    std::vector<AdmissibilityEntry> entries;
    for (int i = 0; i < contacts.count(); ++i) {
        const int foot = contacts.active[i];
        const Vec3 f = forces.force(i);
        const double cap = mu * f.z() * invSqrt2;
        const std::string name = model.feet()[foot].name;
        const double margins[4] = {cap - f.x(), cap + f.x(), cap - f.y(),
                                   cap + f.y()};
        const char* facetNames[4] = {"+x", "-x", "+y", "-y"};
        for (int facet = 0; facet < 4; ++facet) {
            entries.push_back({AdmissibilityKind::ConeMargin, foot, facet,
                               margins[facet],
                               "cone(" + name + "," + facetNames[facet] + ")"});
        }
        entries.push_back({AdmissibilityKind::NormalForce, foot, -1, f.z(),
                           "normal(" + name + ")"});
    }
    for (int foot = 0; foot < static_cast<int>(model.feet().size()); ++foot) {
        if (contacts.isActive(foot)) {
            continue;
        }
        const double height = footPosition(model, state.q, foot).z();
        entries.push_back({AdmissibilityKind::SwingHeight, foot, -1, height,
                           "height(" + model.feet()[foot].name + ")"});
    }
    return entries;
}

} // namespace amble
