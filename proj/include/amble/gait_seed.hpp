#pragma once

#include <map>

#include <amble/synthesis.hpp>

namespace amble {

// Kinematic gait seeds: hand-planned foot/base trajectories turned into
// Bézier rows by inverse kinematics and least squares. They give the
// synthesizer its starting point and ship as the baseline scenarios.

/// Revolute dofs between the base and a foot, root-to-tip order.
std::vector<int> legDofs(const RobotModel& model, int footIndex);

/// Damped-Newton position IK on one leg chain; q is updated in place.
/// Returns false when the target is out of reach at the tolerance.
bool legInverseKinematics(const RobotModel& model, VecX& q, int footIndex,
                          const Vec3& target,
                          const std::vector<int>& dofs, int maxIters = 80,
                          double tol = 1e-11);

struct AmbleSeedOptions {
    double diagonalDuration = 0.24; // two-foot diagonal support phases
    double lateralDuration = 0.06;  // brief same-side transfer phases
    double baseHeight = 0.22;
    double stepHeight = 0.08;
    double landingDepth = 0.012; // planned foot depth below ground at s = 1
    double homeX = 0.26;         // nominal footprint half length
    double homeY = 0.32;         // nominal footprint half width
    double swayAmplitude = 0.0;  // lateral base shift toward the loaded pair
    double swingApexSkew = 0.6;  // >0 moves the swing apex earlier
    int samplesPerPhase = 25;
};

/// Quadruped amble seed for GaitGraph::quadrupedAmble. Outputs per vertex
/// are the twelve leg joints minus the rear-stance hip pitch.
GaitParameters seedQuadrupedAmble(const RobotModel& model,
                                  const GaitGraph& graph, const Vec2& vDes,
                                  const AmbleSeedOptions& options = {});

struct BipedSeedOptions {
    double swingDuration = 0.35; // nominal phase length, near the fall time
    double legSpread = 0.20;     // plant angles -+legSpread, rad
    double liftAngle = 0.25;     // swing bump amplitude, rad
    int samplesPerPhase = 25;
};

/*!
 * In-place stepping seed for GaitGraph::bipedStep. Each phase balances the
 * base pitch on the stance foot (n_y = m = 2 together with the free hip),
 * lifts the free leg and presses it back past its touchdown; the staggered
 * plant keeps the body between the feet so the single-stance fall always
 * heads toward the foot being replanted, and the landing swap catches it.
 */
GaitParameters seedBipedStep(const RobotModel& model, const GaitGraph& graph,
                             const BipedSeedOptions& options = {});

/// The rear foot of a vertex's stance pair (smaller home-pose x).
int rearStanceFoot(const RobotModel& model, const GaitGraph& graph, int vertex);

/// Baseline disable choice: the rear stance hip pitch of each vertex,
/// by the joint naming convention "<foot>_hip_pitch".
std::map<std::string, std::string> defaultDisabledJoints(
    const RobotModel& model, const GaitGraph& graph);

/// Remove the constraint-space component of qdot for the given stance set.
void projectStanceVelocity(const RobotModel& model, const VecX& q,
                           const std::vector<int>& stance, VecX& qdot);

} // namespace amble
