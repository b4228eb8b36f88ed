#include <amble/synthesis.hpp>

#include <amble/gait_seed.hpp>

#include <random>

namespace amble {

GaitController makeController(const GaitParameters& params,
                              const ControllerConfig& config,
                              std::vector<int> disabledActuator)
{
    GaitController out;
    out.outputs = params.outputs;
    out.config = config;
    if (disabledActuator.empty()) {
        disabledActuator.assign(params.outputs.size(), -1);
    }
    out.disabledActuator = std::move(disabledActuator);
    return out;
}

PeriodicityResidual periodicityResidual(const SimulationTrace& trace,
                                        const Vec2& vDesXy)
{
    if (trace.samples.empty() || trace.events.empty()
        || trace.cyclesCompleted < 1) {
        throw Error("synthesis/incomplete_cycle",
                    "trace does not span a full cycle ending at its guard");
    }
    const TraceSample& first = trace.samples.front();
    const TraceEvent& closing = trace.events.back();
    const int n = static_cast<int>(first.q.size());
    const double tf = closing.t;
    const double t0 = first.t;

    PeriodicityResidual out;
    out.residual.resize(2 * n);
    VecX qShifted = first.q;
    qShifted[0] += (tf - t0) * vDesXy.x();
    qShifted[1] += (tf - t0) * vDesXy.y();
    out.residual.head(n) = qShifted - closing.qPre; // q is reset-invariant
    out.residual.tail(n) = first.qdot - closing.qdotPost;
    out.norm = out.residual.norm();
    return out;
}

namespace {

double torqueCostOf(const SimulationTrace& trace)
{
    if (trace.samples.size() < 2) {
        return 0.0;
    }
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < trace.samples.size(); ++k) {
        const auto& a = trace.samples[k];
        const auto& b = trace.samples[k + 1];
        const double dt = b.t - a.t;
        if (dt <= 0.0) {
            continue;
        }
        integral += 0.5 * dt * (a.u.squaredNorm() + b.u.squaredNorm());
    }
    const double span =
        trace.samples.back().t - trace.samples.front().t;
    return span > 0.0 ? integral / span : 0.0;
}

double violationPenalty(const SimulationTrace& trace, double dt)
{
    double penalty = 0.0;
    for (const auto& v : trace.violations) {
        penalty += std::abs(v.value) * dt;
    }
    return penalty;
}

/// Endpoint continuity: alpha0 of an output in the successor vertex is
/// pinned to alpha4 of the same-named output in the current vertex.
void enforceContinuity(GaitParameters& params, const GaitGraph& graph)
{
    for (int v = 0; v < graph.count(); ++v) {
        const int w = graph.successor(v);
        const auto& from = params.outputs[v];
        auto& to = params.outputs[w];
        for (int j = 0; j < to.count(); ++j) {
            for (int i = 0; i < from.count(); ++i) {
                if (from.names[i] == to.names[j]) {
                    to.alpha(j, 0) = from.alpha(i, 4);
                    break;
                }
            }
        }
    }
}

struct ParamCodec {
    const GaitGraph& graph;
    bool withState;
    int stateDim;

    int size(const GaitParameters& p) const
    {
        int total = 0;
        for (const auto& spec : p.outputs) {
            total += static_cast<int>(spec.alpha.size()) + 1; // + duration
        }
        if (withState) {
            total += 2 * stateDim;
        }
        return total;
    }

    VecX encode(const GaitParameters& p) const
    {
        VecX x(size(p));
        int at = 0;
        for (const auto& spec : p.outputs) {
            for (int r = 0; r < spec.alpha.rows(); ++r) {
                for (int c = 0; c < 5; ++c) {
                    x[at++] = spec.alpha(r, c);
                }
            }
            x[at++] = spec.duration;
        }
        if (withState) {
            x.segment(at, stateDim) = p.x0.state.q;
            x.segment(at + stateDim, stateDim) = p.x0.state.qdot;
        }
        return x;
    }

    GaitParameters decode(const GaitParameters& base, const VecX& x) const
    {
        GaitParameters p = base;
        int at = 0;
        for (auto& spec : p.outputs) {
            for (int r = 0; r < spec.alpha.rows(); ++r) {
                for (int c = 0; c < 5; ++c) {
                    spec.alpha(r, c) = x[at++];
                }
            }
            spec.duration = std::max(x[at++], 0.02);
        }
        if (withState) {
            p.x0.state.q = x.segment(at, stateDim);
            p.x0.state.qdot = x.segment(at + stateDim, stateDim);
        }
        enforceContinuity(p, graph);
        return p;
    }

    VecX scales(const GaitParameters& p) const
    {
        VecX s(size(p));
        int at = 0;
        for (const auto& spec : p.outputs) {
            for (int i = 0; i < spec.alpha.size(); ++i) {
                s[at++] = 0.02;
            }
            s[at++] = 0.01 * spec.duration;
        }
        if (withState) {
            for (int i = 0; i < stateDim; ++i) {
                s[at++] = 0.004;
            }
            for (int i = 0; i < stateDim; ++i) {
                s[at++] = 0.01;
            }
        }
        return s;
    }
};

} // namespace

ObjectiveBreakdown evaluateGait(const RobotModel& model, const GaitGraph& graph,
                                const GaitParameters& params,
                                const SynthesisSettings& settings)
{
    GaitController controller =
        makeController(params, settings.controller);
    IntegratorSettings integ = settings.integrator;
    integ.monitorAdmissibility = true;
    SimulationHorizon horizon;
    horizon.cycles = 1;
    const SimulationOutcome outcome = simulateOutcome(
        model, graph, controller, params.x0, horizon, integ);

    ObjectiveBreakdown out;
    if (outcome.failed || outcome.trace.cyclesCompleted < 1) {
        const double progress = outcome.trace.samples.empty()
                                    ? 0.0
                                    : outcome.trace.samples.back().t
                                          - params.x0.t;
        out.objective = 1e8 - 1e5 * progress;
        out.simulated = false;
        return out;
    }
    out.simulated = true;
    out.torqueCost = torqueCostOf(outcome.trace);
    out.residualNorm =
        periodicityResidual(outcome.trace, params.vDesXy).norm;
    out.admissibilityPenalty =
        violationPenalty(outcome.trace, settings.integrator.dt);
    out.objective = out.torqueCost
                  + settings.wPeriodicity * out.residualNorm * out.residualNorm
                  + settings.wAdmissibility * out.admissibilityPenalty;
    return out;
}

SynthesisReport synthesizeGait(const RobotModel& model, const GaitGraph& graph,
                               const Vec2& vDesXy,
                               const SynthesisSettings& settings,
                               std::optional<GaitParameters> initialGuess)
{
    GaitParameters guess;
    if (initialGuess.has_value()) {
        guess = std::move(*initialGuess);
    } else if (graph.name() == "quadruped-amble") {
        guess = seedQuadrupedAmble(model, graph, vDesXy);
    } else if (graph.name() == "biped-step") {
        guess = seedBipedStep(model, graph);
    } else {
        throw Error("synthesis/initial_guess",
                    "no built-in seed for graph '" + graph.name()
                        + "'; pass an initial guess");
    }
    guess.vDesXy = vDesXy;
    enforceContinuity(guess, graph);

    // optional burn-in: if the seeded orbit is attracting, starting the
    // shooting from a later cycle leaves much less residual to close
    if (settings.burnInCycles > 0) {
        GaitController controller = makeController(guess, settings.controller);
        IntegratorSettings integ = settings.integrator;
        integ.monitorAdmissibility = true;
        SimulationHorizon horizon;
        horizon.cycles = settings.burnInCycles;
        const SimulationOutcome outcome = simulateOutcome(
            model, graph, controller, guess.x0, horizon, integ);
        for (auto it = outcome.trace.events.rbegin();
             it != outcome.trace.events.rend(); ++it) {
            if (it->toVertex == guess.x0.vertex) {
                guess.x0.t = 0.0;
                guess.x0.state = GeneralizedState(it->qPre, it->qdotPost);
                guess.x0.state.q[0] = 0.0;
                guess.x0.state.q[1] = 0.0;
                break;
            }
        }
    }

    // the guess must complete one cycle; report the failing phase otherwise
    {
        GaitController controller = makeController(guess, settings.controller);
        IntegratorSettings integ = settings.integrator;
        integ.monitorAdmissibility = true;
        SimulationHorizon horizon;
        horizon.cycles = 1;
        const SimulationOutcome outcome = simulateOutcome(
            model, graph, controller, guess.x0, horizon, integ);
        if (outcome.failed) {
            throw Error("synthesis/initial_guess",
                        "initial guess failed in vertex "
                            + (outcome.failVertex >= 0
                                   ? graph.vertex(outcome.failVertex).id
                                   : std::string("?"))
                            + ": " + outcome.failMessage);
        }
    }

    ParamCodec codec{graph, settings.optimizeInitialState, model.dof()};
    VecX x = codec.encode(guess);
    const VecX scales = codec.scales(guess);

    SynthesisReport report;
    report.best = guess;
    {
        const ObjectiveBreakdown b = evaluateGait(model, graph, guess, settings);
        report.objective = b.objective;
        report.torqueCost = b.torqueCost;
        report.residualNorm = b.residualNorm;
        report.admissibilityPenalty = b.admissibilityPenalty;
        report.history.push_back(b.objective);
        report.evaluations = 1;
    }

    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sigma = settings.initialStep;

    auto tryCandidate = [&](const VecX& xCand) -> bool {
        const GaitParameters cand = codec.decode(report.best, xCand);
        const ObjectiveBreakdown b = evaluateGait(model, graph, cand, settings);
        ++report.evaluations;
        if (b.objective < report.objective) {
            report.best = cand;
            report.objective = b.objective;
            report.torqueCost = b.torqueCost;
            report.residualNorm = b.residualNorm;
            report.admissibilityPenalty = b.admissibilityPenalty;
            report.history.push_back(b.objective);
            x = codec.encode(cand);
            return true;
        }
        return false;
    };
    auto reachedTarget = [&] {
        return settings.targetResidual > 0.0
            && report.residualNorm < settings.targetResidual;
    };

    // exploration: seeded (1+1) evolution strategy over all parameters
    const int exploreBudget = settings.budget / 4;
    for (int eval = 0; eval < exploreBudget && !reachedTarget(); ++eval) {
        VecX xCand = x;
        for (int i = 0; i < x.size(); ++i) {
            xCand[i] += sigma * scales[i] * normal(rng);
        }
        if (tryCandidate(xCand)) {
            sigma = std::min(sigma * 1.4, 1.0);
        } else {
            sigma = std::max(sigma * 0.82, 1e-4);
        }
    }

    // refinement: coordinate pattern search with per-coordinate step
    // adaptation; deterministic sweep order
    VecX delta = settings.initialStep * scales;
    while (report.evaluations < settings.budget + 1 && !reachedTarget()) {
        bool improvedSweep = false;
        for (int i = 0; i < x.size() && report.evaluations < settings.budget + 1
                        && !reachedTarget();
             ++i) {
            VecX xCand = x;
            xCand[i] += delta[i];
            if (tryCandidate(xCand)) {
                delta[i] *= 1.6;
                improvedSweep = true;
                continue;
            }
            if (report.evaluations >= settings.budget + 1 || reachedTarget()) {
                break;
            }
            xCand[i] = x[i] - delta[i];
            if (tryCandidate(xCand)) {
                delta[i] *= -1.6; // keep moving in the productive direction
                improvedSweep = true;
            } else {
                delta[i] *= 0.55;
            }
        }
        if (!improvedSweep) {
            delta *= 0.55;
            if (delta.cwiseAbs().maxCoeff()
                < 1e-7 * scales.cwiseAbs().maxCoeff()) {
                break; // converged to step resolution
            }
        }
    }
    report.budgetExhausted = settings.budget > 0;
    return report;
}

} // namespace amble
