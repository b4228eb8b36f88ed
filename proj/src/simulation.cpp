#include <amble/simulation.hpp>

#include <Eigen/Dense>
#include <cmath>

namespace amble {

namespace {

// guards stay inactive until their value has cleared an arming threshold
// once: a just-released foot cannot retrigger its own impact edge and a
// landing transient cannot fire a liftoff edge before the foot is loaded
constexpr double kImpactArmHeight = 1e-4;
constexpr double kLiftoffArmForce = 1.0;

struct FullEval {
    ControlEval control;
    ConstrainedDynamics dynamics;
};

struct PhaseContext {
    const RobotModel& model;
    const GaitGraph& graph;
    const GaitController& controller;
    int vertex;
    ContactSet contacts;
    double phaseStart;

    const OutputSpec& spec() const { return controller.outputs.at(vertex); }

    int disabled() const
    {
        if (controller.config.allocation != AllocationMode::DisableActuator) {
            return -1;
        }
        return controller.disabledActuator.at(vertex);
    }

    FullEval full(double t, const GeneralizedState& s) const
    {
        FullEval out;
        out.control = controlInput(model, contacts, s, t - phaseStart, spec(),
                                   controller.config, disabled());
        out.dynamics =
            constrainedForwardDynamics(model, contacts, s, out.control.u);
        return out;
    }

    VecX stateDerivative(double t, const VecX& x) const
    {
        const int n = model.dof();
        GeneralizedState s(x.head(n), x.tail(n));
        const FullEval e = full(t, s);
        VecX dx(2 * n);
        dx.head(n) = s.qdot;
        dx.tail(n) = e.dynamics.qddot;
        return dx;
    }

    VecX rk4(double t, const VecX& x, double h) const
    {
        const VecX k1 = stateDerivative(t, x);
        const VecX k2 = stateDerivative(t + 0.5 * h, x + (0.5 * h) * k1);
        const VecX k3 = stateDerivative(t + 0.5 * h, x + (0.5 * h) * k2);
        const VecX k4 = stateDerivative(t + h, x + h * k3);
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    double guardValue(double t, const GeneralizedState& s,
                      const FullEval* cached = nullptr) const
    {
        const auto& vert = graph.vertex(vertex);
        const int foot = graph.guardFootIndex(vertex);
        if (vert.edgeKind == EdgeKind::Impact) {
            return footPosition(model, s.q, foot).z();
        }
        const int slot = contacts.slot(foot);
        if (cached != nullptr) {
            return cached->dynamics.forces.force(slot).z();
        }
        const FullEval e = full(t, s);
        return e.dynamics.forces.force(slot).z();
    }
};

} // namespace

ImpactResult impactMap(const RobotModel& model, const VecX& q,
                       const VecX& qdotMinus, const ContactSet& newContacts)
{
    const int n = model.dof();
    const int k = newContacts.rows();
    ImpactResult out;
    if (k == 0) {
        out.qdotPlus = qdotMinus;
        out.impulse = VecX::Zero(0);
        return out;
    }
    const ContactJacobian jc =
        contactJacobian(model, newContacts, q, VecX::Zero(n));
    {
        Eigen::JacobiSVD<MatX> svd(jc.jacobian);
        const double smax = svd.singularValues()[0];
        const double smin =
            svd.singularValues()[svd.singularValues().size() - 1];
        if (jc.jacobian.rows() > jc.jacobian.cols()
            || !(smin > 1e-10 * std::max(smax, 1.0))) {
            throw Error("hybrid/impact_rank",
                        "impact Jacobian is row rank deficient");
        }
    }
    const MatX d = massMatrix(model, q);
    MatX kkt = MatX::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = d;
    kkt.topRightCorner(n, k) = jc.jacobian.transpose();
    kkt.bottomLeftCorner(k, n) = jc.jacobian;
    VecX rhs = VecX::Zero(n + k);
    rhs.head(n) = d * qdotMinus;

    Eigen::PartialPivLU<MatX> lu(kkt);
    VecX sol = lu.solve(rhs);
    sol += lu.solve(rhs - kkt * sol);

    out.qdotPlus = sol.head(n);
    out.impulse = -sol.tail(k);
    return out;
}

std::optional<double> detectEvent(const std::function<double(double)>& guard,
                                  double tBegin, double tEnd, double step,
                                  double tol, int maxIter)
{
    if (!(step > 0.0) || tEnd <= tBegin) {
        return std::nullopt;
    }
    double t = tBegin;
    double h = guard(t);
    while (t < tEnd) {
        const double tNext = std::min(t + step, tEnd);
        const double hNext = guard(tNext);
        if (h == 0.0 && hNext < 0.0) {
            return t; // already descending through zero at a grid point
        }
        if (h > 0.0 && hNext < 0.0) {
            double lo = t, hi = tNext;
            for (int i = 0; i < maxIter; ++i) {
                const double mid = 0.5 * (lo + hi);
                const double hm = guard(mid);
                if (std::abs(hm) < tol) {
                    return mid;
                }
                if (hm > 0.0) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        t = tNext;
        h = hNext;
    }
    return std::nullopt;
}

SimulationTrace simulate(const RobotModel& model, const GaitGraph& graph,
                         const GaitController& controller,
                         const HybridState& initial,
                         const SimulationHorizon& horizon,
                         const IntegratorSettings& settings)
{
    SimulationOutcome outcome = simulateOutcome(model, graph, controller,
                                                initial, horizon, settings);
    if (outcome.failed) {
        throw Error(outcome.failCategory, outcome.failMessage);
    }
    return outcome.trace;
}

SimulationOutcome simulateOutcome(const RobotModel& model,
                                  const GaitGraph& graph,
                                  const GaitController& controller,
                                  const HybridState& initial,
                                  const SimulationHorizon& horizon,
                                  const IntegratorSettings& settings)
{
    SimulationOutcome outcome;
    SimulationTrace& trace = outcome.trace;
    const int n = model.dof();

    if (static_cast<int>(controller.outputs.size()) != graph.count()) {
        outcome.failed = true;
        outcome.failCategory = "sim/config";
        outcome.failMessage = "controller must define outputs per vertex";
        return outcome;
    }
    if (initial.state.q.size() != n || initial.state.qdot.size() != n) {
        outcome.failed = true;
        outcome.failCategory = "sim/config";
        outcome.failMessage = "initial state dimension mismatch";
        return outcome;
    }
    if (horizon.cycles == 0 || horizon.seconds == 0.0) {
        return outcome; // empty but valid trace
    }

    int vertex = initial.vertex;
    double t = initial.t;
    VecX x(2 * n);
    x << initial.state.q, initial.state.qdot;
    bool pitchFlagged = false;
    bool first = true;

    auto fail = [&](const std::string& category, const std::string& message) {
        outcome.failed = true;
        outcome.failCategory = category;
        outcome.failMessage = message;
        outcome.failVertex = vertex;
    };

    try {
        while (true) {
            PhaseContext ctx{model,
                             graph,
                             controller,
                             vertex,
                             makeContacts(model, VecX(x.head(n)),
                                          graph.stance(vertex)),
                             t};
            const auto& vert = graph.vertex(vertex);
            const bool impactGuard = vert.edgeKind == EdgeKind::Impact;
            const double armThreshold =
                impactGuard ? kImpactArmHeight : kLiftoffArmForce;
            const double maxDuration =
                settings.maxPhaseFactor * ctx.spec().duration;
            bool armed = false;

            auto record = [&](double st, const GeneralizedState& s,
                              const FullEval& e) -> bool {
                TraceSample sample;
                sample.t = st;
                sample.vertex = vertex;
                sample.q = s.q;
                sample.qdot = s.qdot;
                sample.u = e.control.u;
                sample.lambda = e.dynamics.forces.lambda;
                sample.y = e.control.y;
                sample.ydot = e.control.ydot;
                trace.samples.push_back(std::move(sample));
                trace.maxLambdaSize = std::max(
                    trace.maxLambdaSize, static_cast<int>(ctx.contacts.rows()));
                trace.maxOutputSize =
                    std::max(trace.maxOutputSize, ctx.spec().count());

                if (!pitchFlagged
                    && std::abs(s.q[4]) > kPitchSingularityFlag) {
                    trace.warnings.push_back(
                        "base pitch passed the Tait-Bryan conditioning limit");
                    pitchFlagged = true;
                }

                const auto entries = admissibility(model, ctx.contacts, s,
                                                   e.dynamics.forces);
                for (const auto& entry : entries) {
                    const bool isGuardElement =
                        entry.foot == graph.guardFootIndex(vertex)
                        && ((impactGuard
                             && entry.kind == AdmissibilityKind::SwingHeight)
                            || (!impactGuard
                                && entry.kind
                                       == AdmissibilityKind::NormalForce));
                    if (isGuardElement) {
                        continue;
                    }
                    const double tol =
                        entry.kind == AdmissibilityKind::SwingHeight
                            ? settings.heightTol
                            : settings.forceTol;
                    if (entry.value < -tol) {
                        if (settings.monitorAdmissibility) {
                            trace.violations.push_back(
                                {st, vertex, entry.label, entry.value});
                        } else {
                            fail(first ? "sim/inadmissible_start"
                                       : "sim/admissibility",
                                 "admissibility entry " + entry.label + " = "
                                     + std::to_string(entry.value) + " at t="
                                     + std::to_string(st) + " in vertex "
                                     + vert.id);
                            return false;
                        }
                    }
                }
                first = false;
                return true;
            };

            bool phaseDone = false;
            while (!phaseDone) {
                GeneralizedState s(x.head(n), x.tail(n));
                const FullEval here = ctx.full(t, s);
                if (!record(t, s, here)) {
                    return outcome;
                }
                if (horizon.seconds > 0.0
                    && t - initial.t >= horizon.seconds - 1e-15) {
                    return outcome;
                }
                double hHere = ctx.guardValue(t, s, &here);
                if (!armed && hHere > armThreshold) {
                    armed = true;
                }

                double step = settings.dt;
                if (horizon.seconds > 0.0) {
                    step = std::min(step,
                                    initial.t + horizon.seconds - t);
                }
                const VecX xNext = ctx.rk4(t, x, step);
                GeneralizedState sNext(xNext.head(n), xNext.tail(n));
                const double hNext = ctx.guardValue(t + step, sNext);

                const bool crossing =
                    armed
                    && ((hHere > 0.0 && hNext < 0.0)
                        || (hHere == 0.0 && hNext < 0.0));
                if (!crossing) {
                    x = xNext;
                    t += step;
                    if (t - ctx.phaseStart > maxDuration) {
                        fail("sim/phase_timeout",
                             "vertex " + vert.id + " exceeded "
                                 + std::to_string(maxDuration)
                                 + " s without reaching its guard");
                        return outcome;
                    }
                    continue;
                }

                // pin the crossing by bisection on the step fraction
                double tStar = t;
                VecX xStar = x;
                double hStar = hHere;
                if (hHere != 0.0) {
                    double lo = 0.0, hi = step;
                    for (int it = 0; it < settings.maxBisection; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        const VecX xm = ctx.rk4(t, x, mid);
                        GeneralizedState sm(xm.head(n), xm.tail(n));
                        const double hm = ctx.guardValue(t + mid, sm);
                        if (std::abs(hm) < settings.eventTol) {
                            tStar = t + mid;
                            xStar = xm;
                            hStar = hm;
                            break;
                        }
                        if (hm > 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                        tStar = t + mid;
                        xStar = xm;
                        hStar = hm;
                    }
                }

                GeneralizedState sStar(xStar.head(n), xStar.tail(n));
                const FullEval atStar = ctx.full(tStar, sStar);
                if (tStar > t) {
                    if (!record(tStar, sStar, atStar)) {
                        return outcome;
                    }
                }

                const int next = graph.successor(vertex);
                TraceEvent event;
                event.t = tStar;
                event.fromVertex = vertex;
                event.toVertex = next;
                event.kind = vert.edgeKind;
                event.guardFoot = vert.guardFoot;
                event.guardValue = std::abs(hStar);
                event.qPre = sStar.q;
                event.qdotPre = sStar.qdot;
                if (vert.edgeKind == EdgeKind::Impact) {
                    const ContactSet newContacts = makeContacts(
                        model, sStar.q, graph.stance(next));
                    const ImpactResult impact =
                        impactMap(model, sStar.q, sStar.qdot, newContacts);
                    event.qdotPost = impact.qdotPlus;
                    event.impulse = impact.impulse;
                } else {
                    event.qdotPost = sStar.qdot;
                    event.impulse = VecX::Zero(0);
                }
                trace.events.push_back(event);

                x.head(n) = sStar.q;
                x.tail(n) = event.qdotPost;
                t = tStar;
                vertex = next;
                if (vertex == initial.vertex) {
                    ++trace.cyclesCompleted;
                    if (horizon.cycles > 0
                        && trace.cyclesCompleted >= horizon.cycles) {
                        return outcome;
                    }
                }
                phaseDone = true;
            }
        }
    } catch (const Error& e) {
        fail(e.category(), e.what());
        return outcome;
    }
}

} // namespace amble
