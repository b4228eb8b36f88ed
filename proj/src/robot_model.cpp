#include <amble/robot_model.hpp>

#include <Eigen/Eigenvalues>
#include <map>
#include <set>

namespace amble {

namespace {

Mat3 rpyRotation(const Vec3& rpy)
{
    // intrinsic X-Y-Z: world rotation Rx(roll) * Ry(pitch) * Rz(yaw)
    return (Eigen::AngleAxisd(rpy.x(), Vec3::UnitX())
            * Eigen::AngleAxisd(rpy.y(), Vec3::UnitY())
            * Eigen::AngleAxisd(rpy.z(), Vec3::UnitZ()))
        .toRotationMatrix();
}

void checkInertia(const LinkSpec& link)
{
    if (!(link.mass > 0.0)) {
        throw Error("model/mass",
                    "link '" + link.name + "' has nonpositive mass");
    }
    if ((link.inertia - link.inertia.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw Error("model/inertia",
                    "inertia of link '" + link.name + "' is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(link.inertia);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw Error("model/inertia",
                    "inertia of link '" + link.name
                        + "' is not positive definite");
    }
}

} // namespace

RobotModel RobotModel::build(const ModelDescription& description)
{
    std::map<std::string, int> linkByName;
    for (int i = 0; i < static_cast<int>(description.links.size()); ++i) {
        const auto& link = description.links[i];
        if (linkByName.count(link.name) != 0) {
            throw Error("model/structure",
                        "duplicate link name '" + link.name + "'");
        }
        checkInertia(link);
        linkByName[link.name] = i;
    }
    if (description.links.empty()) {
        throw Error("model/structure", "description has no links");
    }

    const JointSpec* base = nullptr;
    std::map<std::string, const JointSpec*> parentJointOfLink;
    std::set<std::string> jointNames;
    for (const auto& joint : description.joints) {
        if (!jointNames.insert(joint.name).second) {
            throw Error("model/structure",
                        "duplicate joint name '" + joint.name + "'");
        }
        if (joint.parent == joint.child) {
            throw Error("model/cycle",
                        "joint '" + joint.name
                            + "' connects a link to itself");
        }
        if (linkByName.count(joint.child) == 0) {
            throw Error("model/unknown_link",
                        "joint '" + joint.name + "' references unknown child '"
                            + joint.child + "'");
        }
        if (joint.kind == JointKind::FloatingBase) {
            if (base != nullptr) {
                throw Error("model/structure",
                            "more than one floating-base joint");
            }
            base = &joint;
        } else {
            if (linkByName.count(joint.parent) == 0) {
                throw Error("model/unknown_link",
                            "joint '" + joint.name
                                + "' references unknown parent '" + joint.parent
                                + "'");
            }
            if (joint.axis.norm() < 1e-12) {
                throw Error("model/structure",
                            "joint '" + joint.name + "' has a zero axis");
            }
        }
        if (parentJointOfLink.count(joint.child) != 0) {
            throw Error("model/cycle",
                        "link '" + joint.child + "' has two parent joints");
        }
        parentJointOfLink[joint.child] = &joint;
    }
    if (base == nullptr) {
        throw Error("model/structure", "description has no floating-base joint");
    }

    RobotModel model;
    model.name_ = description.name;
    model.description_ = description;
    model.motor_ = description.motor;
    model.frictionMu_ = description.frictionMu;
    if (!(model.motor_.torqueConstant > 0.0) || !(model.motor_.resistance > 0.0)
        || !(model.motor_.gearRatio > 0.0)) {
        throw Error("model/structure", "motor constants must be positive");
    }

    // Floating base: chain of three world-axis prismatic dofs and three
    // intrinsic X-Y-Z revolute dofs; the base link inertia rides on the last.
    const LinkSpec& baseLink = description.links[linkByName.at(base->child)];
    const char* baseLabels[6] = {"base_x",    "base_y",     "base_z",
                                 "base_roll", "base_pitch", "base_yaw"};
    for (int i = 0; i < 6; ++i) {
        Dof dof;
        dof.parent = static_cast<int>(model.dofs_.size()) - 1;
        dof.type = i < 3 ? DofType::Prismatic : DofType::Revolute;
        dof.axis = Vec3::Unit(i % 3);
        dof.label = baseLabels[i];
        if (i == 5) {
            dof.mass = baseLink.mass;
            dof.com = baseLink.com;
            dof.inertiaCom = baseLink.inertia;
        }
        model.dofs_.push_back(dof);
    }

    std::map<std::string, int> bodyOfLink;
    bodyOfLink[base->child] = 5;

    // Attach revolute joints outward from the base; cycles reachable from the
    // root would revisit a link and were already rejected above, unattached
    // subtrees are rejected after the sweep.
    std::vector<const JointSpec*> pending;
    for (const auto& joint : description.joints) {
        if (joint.kind == JointKind::Revolute) {
            pending.push_back(&joint);
        }
    }
    std::map<std::string, int> jointDofByName;
    while (!pending.empty()) {
        bool attached = false;
        for (auto it = pending.begin(); it != pending.end(); ++it) {
            const JointSpec& joint = **it;
            auto parentBody = bodyOfLink.find(joint.parent);
            if (parentBody == bodyOfLink.end()) {
                continue;
            }
            if (bodyOfLink.count(joint.child) != 0) {
                throw Error("model/cycle",
                            "link '" + joint.child
                                + "' is reached by two paths");
            }
            const LinkSpec& child = description.links[linkByName.at(joint.child)];
            Dof dof;
            dof.parent = parentBody->second;
            dof.tree.rotation = rpyRotation(joint.originRpy).transpose();
            dof.tree.translation = joint.originXyz;
            dof.type = DofType::Revolute;
            dof.axis = joint.axis.normalized();
            dof.mass = child.mass;
            dof.com = child.com;
            dof.inertiaCom = child.inertia;
            dof.label = joint.name;
            jointDofByName[joint.name] = static_cast<int>(model.dofs_.size());
            bodyOfLink[joint.child] = static_cast<int>(model.dofs_.size());
            model.dofs_.push_back(dof);
            pending.erase(it);
            attached = true;
            break;
        }
        if (!attached) {
            throw Error("model/cycle",
                        "joint graph contains a cycle or a subtree detached "
                        "from the base");
        }
    }
    for (const auto& [linkName, index] : linkByName) {
        (void)index;
        if (bodyOfLink.count(linkName) == 0) {
            throw Error("model/structure",
                        "link '" + linkName + "' is not connected to the base");
        }
    }

    // Actuation: all revolute joints and only those, so the base contributes
    // exactly the six unactuated dofs and B = [0, I]^T up to row ordering.
    std::set<std::string> actuatedSeen;
    for (const auto& jointName : description.actuatedJoints) {
        auto it = jointDofByName.find(jointName);
        if (it == jointDofByName.end()) {
            throw Error("model/actuation",
                        "actuated joint '" + jointName + "' is unknown");
        }
        if (!actuatedSeen.insert(jointName).second) {
            throw Error("model/actuation",
                        "actuated joint '" + jointName + "' listed twice");
        }
        model.actuated_.push_back(it->second);
    }
    if (actuatedSeen.size() != jointDofByName.size()) {
        throw Error("model/actuation",
                    "every revolute joint must be actuated (base dofs are the "
                    "only unactuated ones)");
    }

    for (const auto& foot : description.feet) {
        auto it = bodyOfLink.find(foot.link);
        if (it == bodyOfLink.end()) {
            throw Error("model/unknown_link",
                        "foot '" + foot.name + "' references unknown link '"
                            + foot.link + "'");
        }
        model.feet_.push_back(Foot{foot.name, it->second, foot.offset});
    }

    model.totalMass_ = 0.0;
    for (const auto& link : description.links) {
        model.totalMass_ += link.mass;
    }
    return model;
}

int RobotModel::footIndex(const std::string& name) const
{
    for (int i = 0; i < static_cast<int>(feet_.size()); ++i) {
        if (feet_[i].name == name) {
            return i;
        }
    }
    throw Error("model/unknown_foot", "unknown foot '" + name + "'");
}

const std::string& RobotModel::actuatorName(int i) const
{
    return dofs_[actuated_.at(i)].label;
}

int RobotModel::jointDof(const std::string& name) const
{
    for (int i = 0; i < dof(); ++i) {
        if (dofs_[i].label == name) {
            return i;
        }
    }
    return -1;
}

int RobotModel::actuatorIndex(const std::string& jointName) const
{
    for (int i = 0; i < actuatedCount(); ++i) {
        if (dofs_[actuated_[i]].label == jointName) {
            return i;
        }
    }
    return -1;
}

VecX RobotModel::scatterActuation(const VecX& u) const
{
    VecX out = VecX::Zero(dof());
    for (int i = 0; i < actuatedCount(); ++i) {
        out[actuated_[i]] += u[i];
    }
    return out;
}

} // namespace amble
