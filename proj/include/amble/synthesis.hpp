#pragma once

#include <cstdint>
#include <optional>

#include <amble/simulation.hpp>

namespace amble {

/*!
 * Everything that defines a periodic gait candidate: desired-output Bézier
 * rows and phase durations per vertex (inside OutputSpec), the output
 * combination matrices, the starting hybrid state and the commanded
 * horizontal velocity.
 */
struct GaitParameters {
    Vec2 vDesXy = Vec2::Zero();
    std::vector<OutputSpec> outputs; // per graph vertex
    HybridState x0;
};

GaitController makeController(const GaitParameters& params,
                              const ControllerConfig& config,
                              std::vector<int> disabledActuator = {});

struct PeriodicityResidual {
    VecX residual; // 2n, position rows first
    double norm = 0.0;
};

/*!
 * Boundary-condition residual of a one-cycle trace: initial state plus the
 * commanded horizontal drift over the cycle, minus the reset applied to the
 * final state. The trace must end at its closing guard event.
 */
PeriodicityResidual periodicityResidual(const SimulationTrace& trace,
                                        const Vec2& vDesXy);

struct SynthesisSettings {
    int budget = 400;          // candidate evaluations after the guess
    std::uint64_t seed = 0;
    double wPeriodicity = 1e4;
    double wAdmissibility = 1e3;
    double initialStep = 0.02; // evolution-strategy step size
    IntegratorSettings integrator;
    ControllerConfig controller; // minimum-norm allocation throughout
    bool optimizeInitialState = true;
    int burnInCycles = 0; // advance x0 along the flow before optimizing
    double targetResidual = 0.0; // stop early below this, 0 disables
};

struct SynthesisReport {
    GaitParameters best;
    double objective = 0.0;
    double torqueCost = 0.0;   // (1/T) integral of |u|^2
    double residualNorm = 0.0;
    double admissibilityPenalty = 0.0;
    std::vector<double> history; // objective after each accepted step
    int evaluations = 0;
    bool budgetExhausted = false;
};

/*!
 * Shooting-based search for periodic gait parameters minimizing the
 * time-normalized squared torque plus periodicity and admissibility
 * penalties, with a seeded (1+1) evolution strategy over Bézier rows,
 * durations and the initial state. Deterministic for a fixed seed.
 */
SynthesisReport synthesizeGait(const RobotModel& model, const GaitGraph& graph,
                               const Vec2& vDesXy,
                               const SynthesisSettings& settings,
                               std::optional<GaitParameters> initialGuess =
                                   std::nullopt);

/// Objective of a parameter set under the same penalties the optimizer
/// uses; lets reports be re-checked by re-simulation.
struct ObjectiveBreakdown {
    double objective = 0.0;
    double torqueCost = 0.0;
    double residualNorm = 0.0;
    double admissibilityPenalty = 0.0;
    bool simulated = false;
};

ObjectiveBreakdown evaluateGait(const RobotModel& model, const GaitGraph& graph,
                                const GaitParameters& params,
                                const SynthesisSettings& settings);

} // namespace amble
