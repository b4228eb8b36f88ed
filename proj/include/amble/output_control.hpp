#pragma once

#include <string>
#include <vector>

#include <amble/bezier.hpp>
#include <amble/contact.hpp>
#include <amble/gait_graph.hpp>

namespace amble {

/*!
 * Output definition for one contact domain: actual outputs y_a = theta * q
 * and desired outputs as 4th-order Bézier curves over the phase, one row
 * of alpha per output. All outputs are relative-degree-2 position
 * combinations, so the linearizing feedback works on second derivatives.
 */
struct OutputSpec {
    MatX theta;                     // n_y x n, full row rank
    MatX alpha;                     // n_y x 5
    double duration = 0.2;          // nominal phase duration, s
    std::vector<std::string> names; // one label per output

    int count() const { return static_cast<int>(theta.rows()); }
};

enum class AllocationMode { MinNormPseudoinverse, DisableActuator };

struct ControllerConfig {
    double kp = 100.0; // 1/s^2
    double kd = 20.0;  // 1/s, critical damping with the default kp
    AllocationMode allocation = AllocationMode::MinNormPseudoinverse;
    double rankTol = 1e-8; // relative singular value threshold
};

/// Per-vertex output specs plus the shared gains/allocation choice.
struct GaitController {
    std::vector<OutputSpec> outputs;   // indexed by graph vertex
    std::vector<int> disabledActuator; // per vertex, used in disable mode
    ControllerConfig config;
};

struct OutputsEval {
    VecX y;
    VecX ydot;
    VecX ydotdotDesired; // feedforward from the desired curves
};

/// y = theta q - y_d(tau), ydot likewise; tau is time since phase start.
OutputsEval evalOutputs(const GeneralizedState& state, double tau,
                        const OutputSpec& spec);

struct Decoupling {
    MatX a;     // n_y x m
    VecX drift; // n_y
};

/// A = theta * inputMatrix, drift = theta * accelerationDrift; the output
/// dynamics are yddot = drift + A u - yddot_desired.
Decoupling decoupling(const RobotModel& model, const ContactSet& contacts,
                      const GeneralizedState& state, const OutputSpec& spec);

/*!
 * Minimum-2-norm exact solution of the underdetermined system A u = rhs,
 * via singular value decomposition with a hard relative threshold. Throws
 * control/rank (naming the singular value ratio) when A loses row rank.
 */
VecX minNormSolve(const MatX& a, const VecX& rhs, double rankTol);

struct ControlEval {
    VecX u;
    VecX y;
    VecX ydot;
    VecX auxiliary; // v = -Kp y - Kd ydot
};

/*!
 * Input-output linearizing torque command. Solves A u = -drift + yddot_d + v
 * either exactly on all actuators via the pseudoinverse (minimum-norm mode)
 * or on the square system left after zeroing one actuator (disable mode).
 */
ControlEval controlInput(const RobotModel& model, const ContactSet& contacts,
                         const GeneralizedState& state, double tau,
                         const OutputSpec& spec, const ControllerConfig& config,
                         int disabledActuator = -1);

} // namespace amble
