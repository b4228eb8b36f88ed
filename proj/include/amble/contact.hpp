#pragma once

#include <string>
#include <vector>

#include <amble/dynamics.hpp>
#include <amble/robot_model.hpp>

namespace amble {

/*!
 * Active no-slip point contacts. Anchors are the world positions that the
 * holonomic constraints p_foot(q) = anchor hold; they are captured whenever
 * a contact domain is entered.
 */
struct ContactSet {
    std::vector<int> active;  // foot indices, in foot-list order
    std::vector<Vec3> anchors; // one per active foot, anchor z >= 0

    int count() const { return static_cast<int>(active.size()); }
    int rows() const { return 3 * count(); }
    bool isActive(int footIndex) const;
    /// Position of `footIndex` within `active`, -1 when not active.
    int slot(int footIndex) const;
};

/// Captures anchors at the current configuration; landing feet sit within
/// event tolerance of the ground, so z is clamped to stay nonnegative.
ContactSet makeContacts(const RobotModel& model, const VecX& q,
                        const std::vector<int>& activeFeet);

/// Stacked constraint-force multipliers, (x, y, z) per active foot.
struct ContactForces {
    VecX lambda;

    Vec3 force(int slot) const { return lambda.segment<3>(3 * slot); }
};

struct ConstrainedDynamics {
    VecX qddot;
    ContactForces forces;
};

/// Stacked contact Jacobian and its velocity-product drift.
struct ContactJacobian {
    MatX jacobian; // 3k x n
    VecX drift;    // d/dq (Jc qdot) qdot, 3k
};

ContactJacobian contactJacobian(const RobotModel& model,
                                const ContactSet& contacts, const VecX& q,
                                const VecX& qdot);

/*!
 * Forward dynamics under the no-slip constraints: solves the dense KKT
 * system
 *     [ D  Jc^T ] [ qddot ]   [ B u - C qdot - G ]
 *     [ Jc  0   ] [ -lam  ] = [ -Jcdot qdot      ]
 * with one step of iterative refinement. Throws contact/rank when the
 * stacked Jacobian loses row rank (kinematically singular contact set).
 */
ConstrainedDynamics constrainedForwardDynamics(const RobotModel& model,
                                               const ContactSet& contacts,
                                               const GeneralizedState& state,
                                               const VecX& u);

/// qddot(x, u) = drift + inputMatrix * u, the control-affine form of the
/// constrained dynamics.
struct AccelerationAffine {
    VecX drift;      // n
    MatX inputMatrix; // n x m
};

AccelerationAffine accelerationAffineDecomposition(const RobotModel& model,
                                                   const ContactSet& contacts,
                                                   const GeneralizedState& state);

enum class AdmissibilityKind { ConeMargin, NormalForce, SwingHeight };

struct AdmissibilityEntry {
    AdmissibilityKind kind;
    int foot;      // foot index in the model's foot list
    int facet;     // 0..3 for cone margins, -1 otherwise
    double value;  // >= 0 when admissible
    std::string label;
};

/*!
 * Domain admissibility vector: per active foot the four pyramid margins
 * mu*lz/sqrt(2) +- lx and mu*lz/sqrt(2) +- ly, plus lz itself, and per
 * swing foot its height above the ground. Negative entries are data for
 * guards and penalties, not errors.
 */
std::vector<AdmissibilityEntry> admissibility(const RobotModel& model,
                                              const ContactSet& contacts,
                                              const GeneralizedState& state,
                                              const ContactForces& forces);

} // namespace amble
