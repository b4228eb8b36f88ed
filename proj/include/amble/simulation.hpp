#pragma once

#include <functional>
#include <optional>

#include <amble/output_control.hpp>
#include <amble/trace.hpp>

namespace amble {

struct IntegratorSettings {
    double dt = 1e-3;             // fixed RK4 step, s
    double eventTol = 1e-10;      // |H| at accepted crossings
    int maxBisection = 60;
    double maxPhaseFactor = 5.0;  // times the nominal phase duration
    double forceTol = 0.5;        // admissibility slack on force entries, N
    double heightTol = 2e-3;      // admissibility slack on height entries, m
    bool monitorAdmissibility = false; // record violations instead of failing
};

struct SimulationHorizon {
    int cycles = -1;      // stop at the N-th closing of the graph cycle
    double seconds = -1.0; // or after a fixed time, whichever is set
};

/*!
 * Plastic impact: the impulsive constraint force of the new contact set
 * changes qdot so the new contact points stop dead, q is unchanged;
 * momentum is conserved through D (qdot+ - qdot-) = Jc^T lambda_impulse.
 */
struct ImpactResult {
    VecX qdotPlus;
    VecX impulse;
};

ImpactResult impactMap(const RobotModel& model, const VecX& q,
                       const VecX& qdotMinus, const ContactSet& newContacts);

/*!
 * Bisection for a guard crossing of H(t) sampled on a step grid. Accepts
 * only descents through zero (H > 0 before, H < 0 after, the discrete
 * form of the negative one-sided derivative); grazing touches that stay
 * nonnegative return nothing. The crossing satisfies |H(t*)| < tol.
 */
std::optional<double> detectEvent(const std::function<double(double)>& guard,
                                  double tBegin, double tEnd, double step,
                                  double tol = 1e-10, int maxIter = 60);

/*!
 * Event-driven closed-loop simulation: fixed-step RK4 within a phase, the
 * vertex's guard checked at every step, crossings pinned by bisection,
 * the edge's reset applied (plastic impact against the successor contact
 * set, identity for liftoff) and contact anchors recaptured on entry.
 * Deterministic: identical inputs produce identical traces.
 *
 * Errors: sim/inadmissible_start, sim/admissibility (a non-guard entry
 * violated beyond tolerance), sim/phase_timeout, plus propagated module
 * errors.
 */
SimulationTrace simulate(const RobotModel& model, const GaitGraph& graph,
                         const GaitController& controller,
                         const HybridState& initial,
                         const SimulationHorizon& horizon,
                         const IntegratorSettings& settings = {});

/// Exception-free variant used by optimization loops.
struct SimulationOutcome {
    SimulationTrace trace;
    bool failed = false;
    std::string failCategory;
    std::string failMessage;
    int failVertex = -1;
};

SimulationOutcome simulateOutcome(const RobotModel& model,
                                  const GaitGraph& graph,
                                  const GaitController& controller,
                                  const HybridState& initial,
                                  const SimulationHorizon& horizon,
                                  const IntegratorSettings& settings = {});

} // namespace amble
