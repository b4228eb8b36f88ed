#pragma once

#include <string>
#include <vector>

#include <amble/core.hpp>
#include <amble/spatial.hpp>

namespace amble {

enum class JointKind { FloatingBase, Revolute };

struct LinkSpec {
    std::string name;
    double mass = 0.0;
    Vec3 com = Vec3::Zero();   // offset of the center of mass in the link frame
    Mat3 inertia = Mat3::Zero(); // rotational inertia about the com, link frame
};

struct JointSpec {
    std::string name;
    JointKind kind = JointKind::Revolute;
    std::string parent; // "world" for the floating base
    std::string child;
    Vec3 axis = Vec3::UnitZ();     // in the joint frame, revolute only
    Vec3 originXyz = Vec3::Zero(); // joint frame pose in the parent link frame
    Vec3 originRpy = Vec3::Zero(); // intrinsic X-Y-Z angles
};

struct FootSpec {
    std::string name; // position in the feet list fixes the foot index
    std::string link;
    Vec3 offset = Vec3::Zero();
};

struct MotorParams {
    double torqueConstant = 0.29; // K_t, N*m/A
    double resistance = 0.55;     // R, ohm
    double gearRatio = 6.0;       // N, joint torque = N * motor torque
};

struct ModelDescription {
    std::string name;
    std::vector<LinkSpec> links;
    std::vector<JointSpec> joints;
    std::vector<FootSpec> feet;
    std::vector<std::string> actuatedJoints;
    MotorParams motor;
    double frictionMu = 0.6;
};

struct GeneralizedState {
    VecX q;
    VecX qdot;

    GeneralizedState() = default;
    GeneralizedState(VecX q_, VecX qdot_) : q(std::move(q_)), qdot(std::move(qdot_)) {}
    static GeneralizedState zero(int n)
    {
        return GeneralizedState(VecX::Zero(n), VecX::Zero(n));
    }
};

/*!
 * Immutable floating-base kinematic tree.
 *
 * The generalized coordinates are q = (base position xyz, base orientation
 * as intrinsic X-Y-Z Tait-Bryan angles, then one angle per revolute joint
 * in description order). Internally the base is expanded into a chain of
 * three prismatic and three revolute single-dof joints so that the standard
 * recursive dynamics algorithms apply uniformly; the expansion reproduces
 * the world rotation Rx(roll)*Ry(pitch)*Rz(yaw).
 *
 * Instances are immutable after build() and safe to share across threads.
 */
class RobotModel {
public:
    enum class DofType { Prismatic, Revolute };

    struct Dof {
        int parent = -1;         // parent dof index, -1 attaches to world
        spatial::Transform tree; // parent link frame -> joint predecessor frame
        DofType type = DofType::Revolute;
        Vec3 axis = Vec3::UnitZ();
        double mass = 0.0; // zero for the intermediate base-chain bodies
        Vec3 com = Vec3::Zero();
        Mat3 inertiaCom = Mat3::Zero();
        std::string label;
    };

    struct Foot {
        std::string name;
        int body = -1; // dof index of the body carrying the foot
        Vec3 offset = Vec3::Zero();
    };

    /// Validates the description and assembles the internal chain.
    /// Throws Error with categories model/cycle, model/mass, model/inertia,
    /// model/unknown_link, model/structure, model/actuation.
    static RobotModel build(const ModelDescription& description);

    int dof() const { return static_cast<int>(dofs_.size()); }
    int actuatedCount() const { return static_cast<int>(actuated_.size()); }
    const std::vector<int>& actuatedDofs() const { return actuated_; }
    const std::vector<Dof>& dofs() const { return dofs_; }
    const std::vector<Foot>& feet() const { return feet_; }
    const MotorParams& motor() const { return motor_; }
    double frictionMu() const { return frictionMu_; }
    double totalMass() const { return totalMass_; }
    const std::string& name() const { return name_; }
    const ModelDescription& description() const { return description_; }

    int footIndex(const std::string& name) const;
    const std::string& coordinateName(int i) const { return dofs_[i].label; }
    /// Name of the joint driven by actuator column i of B.
    const std::string& actuatorName(int i) const;
    /// Dof index of a named revolute joint, -1 if unknown.
    int jointDof(const std::string& name) const;
    /// Column of B (actuator index) for a named joint, -1 if not actuated.
    int actuatorIndex(const std::string& jointName) const;

    /// Scatters actuator torques into generalized forces (B * u).
    VecX scatterActuation(const VecX& u) const;

private:
    RobotModel() = default;

    std::string name_;
    ModelDescription description_;
    std::vector<Dof> dofs_;
    std::vector<Foot> feet_;
    std::vector<int> actuated_; // dof index per actuator column
    MotorParams motor_;
    double frictionMu_ = 0.6;
    double totalMass_ = 0.0;
};

} // namespace amble
