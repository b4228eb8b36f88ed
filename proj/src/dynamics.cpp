#include <amble/dynamics.hpp>

#include <complex>
#include <vector>

namespace amble {

namespace {

using spatial::crossForce;
using spatial::crossMotion;
using spatial::spatialInertia;

template <typename S> using Vec3T = spatial::Vec3T<S>;
template <typename S> using Mat3T = spatial::Mat3T<S>;
template <typename S> using Vec6T = spatial::Vec6T<S>;
template <typename S> using Mat6T = spatial::Mat6T<S>;
template <typename S> using TransformT = spatial::TransformT<S>;
template <typename S> using VecXT = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S> using MatXT = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
TransformT<S> jointTransform(const RobotModel::Dof& dof, const S& q)
{
    TransformT<S> x;
    const Vec3T<S> axis = dof.axis.cast<S>();
    if (dof.type == RobotModel::DofType::Revolute) {
        // successor frame rotated by +q about the axis
        x.rotation = spatial::axisRotation<S>(axis, q).transpose();
    } else {
        x.translation = axis * q;
    }
    return x;
}

template <typename S>
TransformT<S> upTransform(const RobotModel::Dof& dof, const S& q)
{
    TransformT<S> tree;
    tree.rotation = dof.tree.rotation.cast<S>();
    tree.translation = dof.tree.translation.cast<S>();
    return jointTransform<S>(dof, q).compose(tree);
}

template <typename S>
Vec6T<S> motionSubspace(const RobotModel::Dof& dof)
{
    Vec6T<S> s = Vec6T<S>::Zero();
    if (dof.type == RobotModel::DofType::Revolute) {
        s.template head<3>() = dof.axis.cast<S>();
    } else {
        s.template tail<3>() = dof.axis.cast<S>();
    }
    return s;
}

/// Composite-rigid-body algorithm, templated so it can run on complex
/// inputs for exact derivatives of D.
template <typename S>
MatXT<S> crba(const RobotModel& model, const VecXT<S>& q)
{
    const int n = model.dof();
    const auto& dofs = model.dofs();

    std::vector<TransformT<S>> up(n);
    std::vector<Mat6T<S>> composite(n);
    std::vector<Vec6T<S>> subspace(n);
    for (int i = 0; i < n; ++i) {
        up[i] = upTransform<S>(dofs[i], q[i]);
        composite[i] = spatialInertia<S>(S(dofs[i].mass), dofs[i].com.cast<S>(),
                                         dofs[i].inertiaCom.cast<S>());
        subspace[i] = motionSubspace<S>(dofs[i]);
    }

    MatXT<S> d = MatXT<S>::Zero(n, n);
    for (int i = n - 1; i >= 0; --i) {
        if (dofs[i].parent >= 0) {
            const Mat6T<S> x = up[i].toMatrix();
            composite[dofs[i].parent] += x.transpose() * composite[i] * x;
        }
        Vec6T<S> f = composite[i] * subspace[i];
        d(i, i) = subspace[i].dot(f);
        int j = i;
        while (dofs[j].parent >= 0) {
            f = up[j].applyForceTranspose(f);
            j = dofs[j].parent;
            d(i, j) = subspace[j].dot(f);
            d(j, i) = d(i, j);
        }
    }
    return d;
}

struct ForwardPass {
    std::vector<spatial::Transform> up;
    std::vector<Vec6> velocity;     // link coordinates
    std::vector<Vec6> acceleration; // link coordinates
};

/// Velocity/acceleration propagation with qddot = 0. With gravity enabled
/// the root acceleration is set to -a_gravity, the standard trick that makes
/// the backward pass produce gravity torques.
ForwardPass forwardPass(const RobotModel& model, const VecX& q,
                        const VecX& qdot, bool gravity)
{
    const int n = model.dof();
    const auto& dofs = model.dofs();
    ForwardPass out;
    out.up.resize(n);
    out.velocity.resize(n);
    out.acceleration.resize(n);

    Vec6 a0 = Vec6::Zero();
    if (gravity) {
        a0[5] = kGravity; // -(-g z)
    }
    for (int i = 0; i < n; ++i) {
        out.up[i] = upTransform<double>(dofs[i], q[i]);
        const Vec6 s = motionSubspace<double>(dofs[i]);
        const Vec6 vParent =
            dofs[i].parent >= 0 ? out.velocity[dofs[i].parent] : Vec6::Zero();
        const Vec6 aParent =
            dofs[i].parent >= 0 ? out.acceleration[dofs[i].parent] : a0;
        const Vec6 vj = s * qdot[i];
        out.velocity[i] = out.up[i].applyMotion(vParent) + vj;
        out.acceleration[i] = out.up[i].applyMotion(aParent)
                            + crossMotion<double>(out.velocity[i], vj);
    }
    return out;
}

VecX rnea(const RobotModel& model, const VecX& q, const VecX& qdot,
          bool gravity)
{
    const int n = model.dof();
    const auto& dofs = model.dofs();
    const ForwardPass fwd = forwardPass(model, q, qdot, gravity);

    std::vector<Vec6> force(n);
    for (int i = 0; i < n; ++i) {
        const Mat6 inertia = spatialInertia<double>(dofs[i].mass, dofs[i].com,
                                                    dofs[i].inertiaCom);
        force[i] = inertia * fwd.acceleration[i]
                 + crossForce<double>(fwd.velocity[i],
                                      Vec6(inertia * fwd.velocity[i]));
    }
    VecX tau(n);
    for (int i = n - 1; i >= 0; --i) {
        tau[i] = motionSubspace<double>(dofs[i]).dot(force[i]);
        if (dofs[i].parent >= 0) {
            force[dofs[i].parent] += fwd.up[i].applyForceTranspose(force[i]);
        }
    }
    return tau;
}

struct WorldPoses {
    std::vector<Mat3> rotation; // link -> world
    std::vector<Vec3> position;
};

WorldPoses worldPoses(const RobotModel& model, const VecX& q)
{
    const int n = model.dof();
    const auto& dofs = model.dofs();
    WorldPoses out;
    out.rotation.resize(n);
    out.position.resize(n);
    for (int i = 0; i < n; ++i) {
        const auto up = upTransform<double>(dofs[i], q[i]);
        const Mat3 parentR =
            dofs[i].parent >= 0 ? out.rotation[dofs[i].parent] : Mat3::Identity();
        const Vec3 parentP =
            dofs[i].parent >= 0 ? out.position[dofs[i].parent] : Vec3::Zero();
        out.rotation[i] = parentR * up.rotation.transpose();
        out.position[i] = parentP + parentR * up.translation;
    }
    return out;
}

} // namespace

MatX massMatrix(const RobotModel& model, const VecX& q)
{
    if (q.size() != model.dof()) {
        throw Error("model/dimension", "configuration dimension mismatch");
    }
    return crba<double>(model, q);
}

BiasGravity biasAndGravity(const RobotModel& model, const VecX& q,
                           const VecX& qdot)
{
    if (q.size() != model.dof() || qdot.size() != model.dof()) {
        throw Error("model/dimension", "state dimension mismatch");
    }
    BiasGravity out;
    out.gravity = rnea(model, q, VecX::Zero(model.dof()), true);
    out.bias = rnea(model, q, qdot, false);
    return out;
}

MatX coriolisMatrix(const RobotModel& model, const VecX& q, const VecX& qdot)
{
    const int n = model.dof();
    if (q.size() != n || qdot.size() != n) {
        throw Error("model/dimension", "state dimension mismatch");
    }
    using Cplx = std::complex<double>;
    const double h = 1e-20;

    // dD/dq_k by complex step, then Christoffel symbols of the first kind:
    // C_ij = 1/2 sum_k (dD_ij/dq_k + dD_ik/dq_j - dD_jk/dq_i) qdot_k
    std::vector<MatX> dD(n);
    VecXT<Cplx> qc = q.cast<Cplx>();
    for (int k = 0; k < n; ++k) {
        qc[k] += Cplx(0.0, h);
        const MatXT<Cplx> dk = crba<Cplx>(model, qc);
        dD[k] = dk.imag() / h;
        qc[k] = Cplx(q[k], 0.0);
    }

    MatX c = MatX::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double cij = 0.0;
            for (int k = 0; k < n; ++k) {
                cij += (dD[k](i, j) + dD[j](i, k) - dD[i](j, k)) * qdot[k];
            }
            c(i, j) = 0.5 * cij;
        }
    }
    return c;
}

PointKinematics pointKinematics(const RobotModel& model, const VecX& q,
                                const VecX& qdot, int footIndex)
{
    if (footIndex < 0 || footIndex >= static_cast<int>(model.feet().size())) {
        throw Error("model/unknown_foot",
                    "foot index " + std::to_string(footIndex)
                        + " out of range");
    }
    const auto& foot = model.feet()[footIndex];
    const auto& dofs = model.dofs();
    const WorldPoses poses = worldPoses(model, q);

    PointKinematics out;
    out.position = poses.position[foot.body] + poses.rotation[foot.body] * foot.offset;

    // geometric Jacobian: contributions from every dof on the root path
    out.jacobian = MatX::Zero(3, model.dof());
    std::vector<char> onPath(model.dof(), 0);
    for (int i = foot.body; i >= 0; i = dofs[i].parent) {
        onPath[i] = 1;
    }
    for (int i = 0; i < model.dof(); ++i) {
        if (!onPath[i]) {
            continue;
        }
        const Vec3 axisWorld = poses.rotation[i] * dofs[i].axis;
        if (dofs[i].type == RobotModel::DofType::Prismatic) {
            out.jacobian.col(i) = axisWorld;
        } else {
            out.jacobian.col(i) =
                axisWorld.cross(out.position - poses.position[i]);
        }
    }
    out.velocity = out.jacobian * qdot;

    // drift term from the zero-qddot spatial acceleration of the foot body
    const ForwardPass fwd = forwardPass(model, q, qdot, false);
    const Vec3 w = fwd.velocity[foot.body].head<3>();
    const Vec3 v0 = fwd.velocity[foot.body].tail<3>();
    const Vec3 wd = fwd.acceleration[foot.body].head<3>();
    const Vec3 a0 = fwd.acceleration[foot.body].tail<3>();
    const Vec3 r = foot.offset;
    const Vec3 accLocal = a0 + wd.cross(r) + w.cross(v0 + w.cross(r));
    out.jdotQdot = poses.rotation[foot.body] * accLocal;
    return out;
}

FramePose bodyPose(const RobotModel& model, const VecX& q, int body)
{
    const WorldPoses poses = worldPoses(model, q);
    return FramePose{poses.rotation.at(body), poses.position.at(body)};
}

Vec3 footPosition(const RobotModel& model, const VecX& q, int footIndex)
{
    const auto& foot = model.feet().at(footIndex);
    const WorldPoses poses = worldPoses(model, q);
    return poses.position[foot.body] + poses.rotation[foot.body] * foot.offset;
}

double kineticEnergy(const RobotModel& model, const VecX& q, const VecX& qdot)
{
    return 0.5 * qdot.dot(massMatrix(model, q) * qdot);
}

double potentialEnergy(const RobotModel& model, const VecX& q)
{
    const WorldPoses poses = worldPoses(model, q);
    const auto& dofs = model.dofs();
    double v = 0.0;
    for (int i = 0; i < model.dof(); ++i) {
        if (dofs[i].mass > 0.0) {
            const Vec3 com = poses.position[i] + poses.rotation[i] * dofs[i].com;
            v += dofs[i].mass * kGravity * com.z();
        }
    }
    return v;
}

double totalEnergy(const RobotModel& model, const GeneralizedState& state)
{
    return kineticEnergy(model, state.q, state.qdot)
         + potentialEnergy(model, state.q);
}

} // namespace amble
