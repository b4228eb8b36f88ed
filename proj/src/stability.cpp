#include <amble/stability.hpp>

#include <Eigen/Eigenvalues>
#include <random>

namespace amble {

VecX reduceState(const GeneralizedState& state)
{
    const int n = static_cast<int>(state.q.size());
    VecX z(2 * n - 2);
    z.head(n - 2) = state.q.tail(n - 2);
    z.tail(n) = state.qdot;
    return z;
}

GeneralizedState reconstructState(const VecX& z)
{
    const int n = static_cast<int>((z.size() + 2) / 2);
    GeneralizedState s;
    s.q = VecX::Zero(n);
    s.q.tail(n - 2) = z.head(n - 2);
    s.qdot = z.tail(n);
    return s;
}

namespace {

GeneralizedState applyEdgeReset(const RobotModel& model, const GaitGraph& graph,
                                int anchorVertex, const GeneralizedState& pre)
{
    const int next = graph.successor(anchorVertex);
    GeneralizedState post = pre;
    if (graph.vertex(anchorVertex).edgeKind == EdgeKind::Impact) {
        const ContactSet contacts =
            makeContacts(model, pre.q, graph.stance(next));
        post.qdot = impactMap(model, pre.q, pre.qdot, contacts).qdotPlus;
    }
    return post;
}

} // namespace

ReducedMap makePoincareMap(const RobotModel& model, const GaitGraph& graph,
                           const GaitController& controller, int anchorVertex,
                           const IntegratorSettings& settings)
{
    return [&model, &graph, controller, anchorVertex,
            settings](const VecX& z) -> VecX {
        const GeneralizedState pre = reconstructState(z);
        const GeneralizedState post =
            applyEdgeReset(model, graph, anchorVertex, pre);
        HybridState start;
        start.vertex = graph.successor(anchorVertex);
        start.t = 0.0;
        start.state = post;
        SimulationHorizon horizon;
        horizon.cycles = 1;
        const SimulationTrace trace =
            simulate(model, graph, controller, start, horizon, settings);
        if (trace.events.empty()
            || trace.events.back().fromVertex != anchorVertex) {
            throw Error("stability/cycle",
                        "flow did not return to the section guard");
        }
        const auto& e = trace.events.back();
        return reduceState(GeneralizedState(e.qPre, e.qdotPre));
    };
}

VecX sectionStateFrom(const RobotModel& model, const GaitGraph& graph,
                      const GaitController& controller, const HybridState& x0,
                      int anchorVertex, const IntegratorSettings& settings)
{
    // flow forward until the anchor guard fires once
    HybridState start = x0;
    SimulationHorizon horizon;
    horizon.cycles = graph.count() + 1; // more than enough phases
    SimulationOutcome outcome =
        simulateOutcome(model, graph, controller, start, horizon, settings);
    for (const auto& e : outcome.trace.events) {
        if (e.fromVertex == anchorVertex) {
            return reduceState(GeneralizedState(e.qPre, e.qdotPre));
        }
    }
    throw Error("stability/cycle",
                outcome.failed
                    ? ("no section crossing before failure: "
                       + outcome.failMessage)
                    : "no section crossing within the horizon");
}

VecX findFixedPoint(const ReducedMap& map, const VecX& guess,
                    const FixedPointSettings& settings)
{
    const int dim = static_cast<int>(guess.size());
    VecX z = guess;
    VecX residual = map(z) - z;

    for (int iter = 0; iter < settings.maxIterations; ++iter) {
        if (residual.norm() < settings.tolerance) {
            return z;
        }
        // forward-difference Jacobian of P
        MatX jac(dim, dim);
        const VecX pz = residual + z;
        bool jacobianOk = true;
        try {
            for (int j = 0; j < dim; ++j) {
                VecX zp = z;
                const double h =
                    settings.fdStep * std::max(1.0, std::abs(z[j]));
                zp[j] += h;
                jac.col(j) = (map(zp) - pz) / h;
            }
        } catch (const Error&) {
            jacobianOk = false;
        }

        bool stepped = false;
        if (jacobianOk) {
            const MatX a = jac - MatX::Identity(dim, dim);
            const VecX delta = a.fullPivLu().solve(-residual);
            double alpha = 1.0;
            for (int back = 0; back < 6; ++back) {
                const VecX zTrial = z + alpha * delta;
                try {
                    const VecX rTrial = map(zTrial) - zTrial;
                    if (rTrial.norm() < residual.norm()) {
                        z = zTrial;
                        residual = rTrial;
                        stepped = true;
                        break;
                    }
                } catch (const Error&) {
                    // shrink into the feasible basin
                }
                alpha *= 0.5;
            }
        }
        if (!stepped) {
            // Picard fallback for contractive maps Newton cannot improve on
            for (int k = 0; k < settings.picardFallback; ++k) {
                z = residual + z; // P(z)
                residual = map(z) - z;
                if (residual.norm() < settings.tolerance) {
                    return z;
                }
            }
            throw Error("stability/no_convergence",
                        "fixed-point iteration stalled at residual "
                            + std::to_string(residual.norm()));
        }
    }
    if (residual.norm() < settings.tolerance) {
        return z;
    }
    throw Error("stability/no_convergence",
                "fixed point not found in "
                    + std::to_string(settings.maxIterations)
                    + " iterations (residual "
                    + std::to_string(residual.norm()) + ")");
}

SpectralAnalysis spectralRadius(const ReducedMap& map, const VecX& fixedPoint,
                                double step)
{
    const int dim = static_cast<int>(fixedPoint.size());
    SpectralAnalysis out;
    out.step = step;
    out.jacobian.resize(dim, dim);
    for (int j = 0; j < dim; ++j) {
        const double h = step * std::max(1.0, std::abs(fixedPoint[j]));
        VecX zp = fixedPoint, zm = fixedPoint;
        zp[j] += h;
        zm[j] -= h;
        try {
            out.jacobian.col(j) = (map(zp) - map(zm)) / (2.0 * h);
        } catch (const Error& e) {
            throw Error("stability/column",
                        "perturbation of coordinate " + std::to_string(j)
                            + " failed: " + e.what());
        }
    }
    Eigen::EigenSolver<MatX> eig(out.jacobian);
    out.eigenvalues = eig.eigenvalues();
    out.rho = out.eigenvalues.cwiseAbs().maxCoeff();
    return out;
}

namespace {

/// Refit the desired curves so y_d tracks theta * q_ref(t) along the
/// stored nominal cycle; keeps outputs consistent when theta changes.
GaitParameters refitDesired(const GaitParameters& base,
                            const std::vector<MatX>& theta,
                            const SimulationTrace& nominal,
                            const GaitGraph& graph)
{
    GaitParameters out = base;
    for (int v = 0; v < graph.count(); ++v) {
        out.outputs[v].theta = theta[v];
    }
    // group samples per vertex with per-phase time
    std::vector<std::vector<const TraceSample*>> perVertex(graph.count());
    std::vector<double> phaseStart(graph.count(), -1.0);
    int current = -1;
    for (const auto& s : nominal.samples) {
        if (s.vertex != current) {
            current = s.vertex;
            phaseStart[current] = s.t;
            perVertex[current].clear(); // keep the last pass through a vertex
        }
        perVertex[current].push_back(&s);
    }
    for (int v = 0; v < graph.count(); ++v) {
        const auto& samples = perVertex[v];
        if (static_cast<int>(samples.size()) < 5) {
            throw Error("stability/refit",
                        "not enough samples in vertex "
                            + graph.vertex(v).id);
        }
        const int k = static_cast<int>(samples.size());
        VecX taus(k);
        MatX values(k, theta[v].rows());
        for (int i = 0; i < k; ++i) {
            taus[i] = samples[i]->t - phaseStart[v];
            values.row(i) = (theta[v] * samples[i]->q).transpose();
        }
        const double duration = out.outputs[v].duration;
        for (int r = 0; r < theta[v].rows(); ++r) {
            out.outputs[v].alpha.row(r) =
                fitBezier(taus, values.col(r), duration).coeffs.transpose();
        }
    }
    return out;
}

bool thetaHasFullRank(const MatX& theta, double tol)
{
    Eigen::JacobiSVD<MatX> svd(theta);
    const auto& s = svd.singularValues();
    return s.size() > 0 && s[s.size() - 1] > tol * s[0];
}

} // namespace

RetuneResult retuneOutputs(const RobotModel& model, const GaitGraph& graph,
                           const GaitParameters& gait,
                           const ControllerConfig& config,
                           const RetuneSettings& settings)
{
    for (const auto& spec : gait.outputs) {
        if (!thetaHasFullRank(spec.theta, settings.thetaRankTol)) {
            throw Error("stability/theta_rank",
                        "initial theta is row rank deficient");
        }
    }
    const int anchor = [&] {
        for (int v = 0; v < graph.count(); ++v) {
            if (graph.successor(v) == gait.x0.vertex) {
                return v;
            }
        }
        return graph.count() - 1;
    }();

    GaitController controller = makeController(gait, config);
    const ReducedMap map0 =
        makePoincareMap(model, graph, controller, anchor, settings.integrator);
    VecX z = findFixedPoint(map0,
                            sectionStateFrom(model, graph, controller, gait.x0,
                                             anchor, settings.integrator),
                            settings.fixedPoint);
    double rho = spectralRadius(map0, z, settings.fdStep).rho;

    // nominal cycle used to refit y_d under candidate thetas
    SimulationTrace nominal;
    {
        const GeneralizedState pre = reconstructState(z);
        HybridState start;
        start.vertex = graph.successor(anchor);
        start.t = 0.0;
        start.state.q = pre.q;
        start.state.qdot =
            graph.vertex(anchor).edgeKind == EdgeKind::Impact
                ? impactMap(model, pre.q, pre.qdot,
                            makeContacts(model, pre.q,
                                         graph.stance(graph.successor(anchor))))
                      .qdotPlus
                : pre.qdot;
        SimulationHorizon horizon;
        horizon.cycles = 1;
        nominal = simulate(model, graph, controller, start, horizon,
                           settings.integrator);
    }

    RetuneResult result;
    result.gait = gait;
    result.rho = rho;
    result.fixedPoint = z;
    result.rhoHistory = {rho};
    result.evaluations = 0;

    std::mt19937_64 rng(settings.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double sigma = settings.initialStep;
    std::vector<MatX> theta(graph.count());
    for (int v = 0; v < graph.count(); ++v) {
        theta[v] = gait.outputs[v].theta;
    }

    for (int eval = 0; eval < settings.budget; ++eval) {
        std::vector<MatX> candidate = theta;
        bool rankOk = true;
        for (int v = 0; v < graph.count(); ++v) {
            for (int r = 0; r < candidate[v].rows(); ++r) {
                for (int c = 0; c < candidate[v].cols(); ++c) {
                    double mask = 1.0;
                    if (settings.sparsityMask.size() > 0) {
                        mask = settings.sparsityMask(
                            r % settings.sparsityMask.rows(),
                            c % settings.sparsityMask.cols());
                    }
                    candidate[v](r, c) += sigma * mask * normal(rng);
                }
            }
            if (!thetaHasFullRank(candidate[v], settings.thetaRankTol)) {
                rankOk = false;
            }
        }
        ++result.evaluations;
        if (!rankOk) {
            sigma = std::max(sigma * 0.8, 1e-4);
            continue;
        }
        try {
            const GaitParameters candGait =
                refitDesired(result.gait, candidate, nominal, graph);
            const GaitController candController =
                makeController(candGait, config);
            const ReducedMap candMap = makePoincareMap(
                model, graph, candController, anchor, settings.integrator);
            FixedPointSettings warm = settings.fixedPoint;
            const VecX zCand = findFixedPoint(candMap, z, warm);
            const double rhoCand =
                spectralRadius(candMap, zCand, settings.fdStep).rho;
            if (rhoCand < rho) {
                rho = rhoCand;
                z = zCand;
                theta = candidate;
                result.gait = candGait;
                result.rho = rho;
                result.fixedPoint = z;
                result.rhoHistory.push_back(rho);
                sigma = std::min(sigma * 1.3, 0.5);
            } else {
                sigma = std::max(sigma * 0.85, 1e-4);
            }
        } catch (const Error&) {
            sigma = std::max(sigma * 0.8, 1e-4); // candidate rejected
        }
    }
    return result;
}

} // namespace amble
