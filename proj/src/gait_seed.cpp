#include <amble/gait_seed.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace amble {

namespace {

double smoothstep(double s)
{
    s = std::clamp(s, 0.0, 1.0);
    return s * s * (3.0 - 2.0 * s);
}

MatX selectionRows(const RobotModel& model, const std::vector<int>& dofs)
{
    MatX theta = MatX::Zero(static_cast<int>(dofs.size()), model.dof());
    for (int r = 0; r < static_cast<int>(dofs.size()); ++r) {
        theta(r, dofs[r]) = 1.0;
    }
    return theta;
}

} // namespace

std::vector<int> legDofs(const RobotModel& model, int footIndex)
{
    const auto& foot = model.feet().at(footIndex);
    std::vector<int> path;
    for (int i = foot.body; i >= 6; i = model.dofs()[i].parent) {
        path.push_back(i);
    }
    std::reverse(path.begin(), path.end());
    return path;
}

bool legInverseKinematics(const RobotModel& model, VecX& q, int footIndex,
                          const Vec3& target, const std::vector<int>& dofs,
                          int maxIters, double tol)
{
    const VecX qdotZero = VecX::Zero(model.dof());
    for (int iter = 0; iter < maxIters; ++iter) {
        const PointKinematics pk = pointKinematics(model, q, qdotZero, footIndex);
        const Vec3 err = target - pk.position;
        if (err.norm() < tol) {
            for (int dof : dofs) {
                q[dof] = std::remainder(q[dof], 2.0 * M_PI);
            }
            return true;
        }
        MatX j(3, static_cast<int>(dofs.size()));
        for (int c = 0; c < static_cast<int>(dofs.size()); ++c) {
            j.col(c) = pk.jacobian.col(dofs[c]);
        }
        const double damping = 1e-8;
        const Mat3 jjT =
            (j * j.transpose() + damping * Mat3::Identity());
        const VecX dq = j.transpose() * jjT.ldlt().solve(err);
        for (int c = 0; c < static_cast<int>(dofs.size()); ++c) {
            q[dofs[c]] += dq[c];
        }
    }
    const Vec3 err =
        target - pointKinematics(model, q, qdotZero, footIndex).position;
    if (err.norm() < 1e-6) {
        // wrap the solution into the principal branch; the kinematics are
        // 2*pi periodic and downstream fits want small numbers
        for (int dof : dofs) {
            q[dof] = std::remainder(q[dof], 2.0 * M_PI);
        }
        return true;
    }
    return false;
}

int rearStanceFoot(const RobotModel& model, const GaitGraph& graph, int vertex)
{
    const VecX home = VecX::Zero(model.dof());
    int rear = -1;
    double bestX = std::numeric_limits<double>::max();
    for (int foot : graph.stance(vertex)) {
        const double x = footPosition(model, home, foot).x();
        if (x < bestX) {
            bestX = x;
            rear = foot;
        }
    }
    return rear;
}

std::map<std::string, std::string> defaultDisabledJoints(
    const RobotModel& model, const GaitGraph& graph)
{
    std::map<std::string, std::string> out;
    for (int v = 0; v < graph.count(); ++v) {
        const int foot = rearStanceFoot(model, graph, v);
        const std::string joint = model.feet()[foot].name + "_hip_pitch";
        if (model.actuatorIndex(joint) < 0) {
            throw Error("control/disable",
                        "no actuator named '" + joint
                            + "' for the default disable choice");
        }
        out[graph.vertex(v).id] = joint;
    }
    return out;
}

void projectStanceVelocity(const RobotModel& model, const VecX& q,
                           const std::vector<int>& stance, VecX& qdot)
{
    if (stance.empty()) {
        return;
    }
    const ContactSet contacts = makeContacts(model, q, stance);
    const ContactJacobian jc = contactJacobian(model, contacts, q, qdot);
    const MatX& j = jc.jacobian;
    qdot -= j.transpose() * (j * j.transpose()).ldlt().solve(j * qdot);
}

GaitParameters seedQuadrupedAmble(const RobotModel& model,
                                  const GaitGraph& graph, const Vec2& vDes,
                                  const AmbleSeedOptions& options)
{
    const int phases = graph.count();
    const double vx = vDes.x();
    const int footCount = static_cast<int>(model.feet().size());

    std::vector<Vec3> home(footCount);
    for (int f = 0; f < footCount; ++f) {
        const std::string& name = model.feet()[f].name;
        const double sx = name[0] == 'f' ? 1.0 : -1.0;
        const double sy = name[1] == 'l' ? 1.0 : -1.0;
        home[f] = Vec3(sx * options.homeX, sy * options.homeY, 0.0);
    }

    // diagonal support phases run long, same-side transfer phases short
    auto isLateral = [&](int v) {
        const auto& stance = graph.stance(v);
        return home[stance[0]].y() * home[stance[1]].y() > 0.0;
    };
    std::vector<double> duration(phases);
    std::vector<double> phaseStart(phases + 1, 0.0);
    for (int v = 0; v < phases; ++v) {
        duration[v] = isLateral(v) ? options.lateralDuration
                                   : options.diagonalDuration;
        phaseStart[v + 1] = phaseStart[v] + duration[v];
    }
    const double tCycle = phaseStart[phases];
    const double stride = vx * tCycle;

    // landing time of each foot = end of the phase guarding on it
    std::vector<double> landTime(footCount, -1.0);
    std::vector<double> liftTime(footCount, -1.0);
    for (int v = 0; v < phases; ++v) {
        landTime[graph.guardFootIndex(v)] = phaseStart[v + 1];
        const auto& stance = graph.stance(v);
        const auto& next = graph.stance(graph.successor(v));
        for (int f : stance) {
            if (std::find(next.begin(), next.end(), f) == next.end()) {
                liftTime[f] = phaseStart[v + 1];
            }
        }
    }
    std::vector<double> swingDur(footCount);
    std::vector<double> stanceDur(footCount);
    for (int f = 0; f < footCount; ++f) {
        double d = landTime[f] - liftTime[f];
        while (d <= 0.0) {
            d += tCycle;
        }
        swingDur[f] = d;
        stanceDur[f] = tCycle - d;
    }

    // lateral sway: hold over the loaded same-side pair, transfer during
    // the diagonal phases
    std::vector<double> swayStart(phases), swayEnd(phases);
    for (int v = 0; v < phases; ++v) {
        if (isLateral(v)) {
            const double side =
                home[graph.stance(v)[0]].y() > 0.0 ? 1.0 : -1.0;
            swayStart[v] = swayEnd[v] = side * options.swayAmplitude;
        }
    }
    for (int v = 0; v < phases; ++v) {
        if (!isLateral(v)) {
            int prev = 0;
            for (int w = 0; w < phases; ++w) {
                if (graph.successor(w) == v) {
                    prev = w;
                }
            }
            swayStart[v] = isLateral(prev) ? swayEnd[prev] : 0.0;
            const int next = graph.successor(v);
            swayEnd[v] = isLateral(next) ? swayStart[next] : 0.0;
        }
    }
    auto baseY = [&](double tc) {
        for (int v = 0; v < phases; ++v) {
            if (tc <= phaseStart[v + 1] + 1e-12) {
                const double s = (tc - phaseStart[v]) / duration[v];
                return swayStart[v]
                     + (swayEnd[v] - swayStart[v]) * smoothstep(s);
            }
        }
        return swayEnd[phases - 1];
    };

    auto anchorAt = [&](int f, double tLand) {
        const double ahead = 0.5 * vx * stanceDur[f];
        return Vec3(vx * tLand + home[f].x() + ahead, home[f].y(), 0.0);
    };

    // world foot target, cyclic in t with the per-cycle x shift
    auto footWorld = [&](int f, double t) -> Vec3 {
        double shift = 0.0;
        double tc = t;
        while (tc < 0.0) {
            tc += tCycle;
            shift -= stride;
        }
        while (tc >= tCycle) {
            tc -= tCycle;
            shift += stride;
        }
        const double land = landTime[f];
        const double lift = liftTime[f];
        double rel = tc - land;
        while (rel < 0.0) {
            rel += tCycle;
        }
        if (rel < stanceDur[f]) {
            // anchored since the landing that started this stance window
            const double tLand = tc < land ? land - tCycle : land;
            Vec3 a = anchorAt(f, tLand);
            a.x() += shift;
            return a;
        }
        const double tLift = tc < lift ? lift - tCycle : lift;
        const double sigma =
            std::clamp((tc - tLift) / swingDur[f], 0.0, 1.0);
        Vec3 from = anchorAt(f, tLift - stanceDur[f]);
        Vec3 to = anchorAt(f, tLift + swingDur[f]);
        from.x() += shift;
        to.x() += shift;
        Vec3 p;
        p.x() = from.x() + (to.x() - from.x()) * smoothstep(sigma);
        p.y() = home[f].y();
        const double skew = options.swingApexSkew;
        const double warped = (1.0 + skew) * sigma - skew * sigma * sigma;
        p.z() = options.stepHeight * std::sin(M_PI * warped)
              - options.landingDepth * sigma * sigma;
        return p;
    };

    std::vector<std::vector<int>> dofsPerLeg(footCount);
    for (int f = 0; f < footCount; ++f) {
        dofsPerLeg[f] = legDofs(model, f);
    }

    // nominal joint guess so the per-sample IK starts near the solution
    VecX qWork = VecX::Zero(model.dof());
    qWork[2] = options.baseHeight;
    for (int f = 0; f < footCount; ++f) {
        if (!legInverseKinematics(model, qWork, f,
                                  Vec3(home[f].x(), home[f].y(), 0.0),
                                  dofsPerLeg[f], 200, 1e-11)) {
            throw Error("synthesis/initial_guess",
                        "home footprint unreachable for foot "
                            + model.feet()[f].name);
        }
    }

    auto configAt = [&](double t) -> VecX {
        VecX q = qWork;
        q[0] = vx * t;
        q[1] = baseY(t < 0.0 ? t + tCycle : std::fmod(t, tCycle));
        q[2] = options.baseHeight;
        q[3] = q[4] = q[5] = 0.0;
        for (int f = 0; f < footCount; ++f) {
            if (!legInverseKinematics(model, q, f, footWorld(f, t),
                                      dofsPerLeg[f])) {
                throw Error("synthesis/initial_guess",
                            "amble plan unreachable for foot "
                                + model.feet()[f].name + " at t="
                                + std::to_string(t));
            }
        }
        qWork = q; // warm start for the next sample
        return q;
    };

    GaitParameters params;
    params.vDesXy = vDes;
    const int K = options.samplesPerPhase;
    for (int v = 0; v < phases; ++v) {
        const int rear = rearStanceFoot(model, graph, v);
        const std::string excluded = model.feet()[rear].name + "_hip_pitch";
        std::vector<int> outDofs;
        std::vector<std::string> names;
        for (int a = 0; a < model.actuatedCount(); ++a) {
            if (model.actuatorName(a) == excluded) {
                continue;
            }
            names.push_back(model.actuatorName(a));
            outDofs.push_back(model.actuatedDofs()[a]);
        }

        OutputSpec spec;
        spec.duration = duration[v];
        spec.names = names;
        spec.theta = selectionRows(model, outDofs);
        spec.alpha.resize(static_cast<int>(outDofs.size()), 5);

        VecX taus(K);
        MatX values(K, static_cast<int>(outDofs.size()));
        for (int k = 0; k < K; ++k) {
            const double tau = duration[v] * k / (K - 1);
            const VecX q = configAt(phaseStart[v] + tau);
            taus[k] = tau;
            for (int c = 0; c < static_cast<int>(outDofs.size()); ++c) {
                values(k, c) = q[outDofs[c]];
            }
        }
        for (int c = 0; c < static_cast<int>(outDofs.size()); ++c) {
            spec.alpha.row(c) =
                fitBezier(taus, values.col(c), duration[v]).coeffs.transpose();
        }
        params.outputs.push_back(std::move(spec));
    }

    // initial hybrid state at the cycle start; forward difference into the
    // phase (the plan is discontinuous across the landing at t = 0), then
    // project the stance-space component out
    const double dEps = 1e-5;
    const VecX q0 = configAt(0.0);
    const VecX qPlus = configAt(dEps);
    VecX qd0 = (qPlus - q0) / dEps;
    projectStanceVelocity(model, q0, graph.stance(0), qd0);

    params.x0.vertex = 0;
    params.x0.t = 0.0;
    params.x0.state = GeneralizedState(q0, qd0);
    return params;
}

GaitParameters seedBipedStep(const RobotModel& model, const GaitGraph& graph,
                             const BipedSeedOptions& options)
{
    const int left = model.footIndex("left");
    const int right = model.footIndex("right");
    const std::vector<int> legLeft = legDofs(model, left);
    const std::vector<int> legRight = legDofs(model, right);
    if (legLeft.size() != 1 || legRight.size() != 1) {
        throw Error("synthesis/initial_guess",
                    "biped seed expects single-joint legs");
    }
    const int hipL = legLeft[0];
    const int hipR = legRight[0];
    const int pitchDof = 4;
    const double spread = options.legSpread;
    const double thetaL0 = -spread; // left foot plants ahead
    const double thetaR0 = spread;  // right foot plants behind

    auto makeSpec = [&](double duration, const std::vector<int>& rows,
                        const std::vector<std::string>& names) {
        OutputSpec spec;
        spec.duration = duration;
        spec.names = names;
        spec.theta = selectionRows(model, rows);
        spec.alpha.resize(static_cast<int>(rows.size()), 5);
        return spec;
    };
    auto fitRow = [&](OutputSpec& spec, int row,
                      const std::function<double(double)>& f) {
        const int K = options.samplesPerPhase;
        VecX taus(K), vals(K);
        for (int k = 0; k < K; ++k) {
            taus[k] = spec.duration * k / (K - 1);
            vals[k] = f(taus[k]);
        }
        spec.alpha.row(row) =
            fitBezier(taus, vals, spec.duration).coeffs.transpose();
    };

    GaitParameters params;
    params.vDesXy = Vec2::Zero();
    params.outputs.resize(graph.count());

    // Both phases balance the base pitch while the free leg lifts and
    // presses back past its touchdown; the staggered plant keeps the body
    // between the feet, so each single-stance fall heads toward the foot
    // being replanted.
    const double tPhase = options.swingDuration;
    auto swingRow = [&](OutputSpec& spec, int row, double hold, double sign) {
        fitRow(spec, row, [&](double tau) {
            const double s01 = tau / tPhase;
            return hold
                 + sign * options.liftAngle
                       * std::sin(2.0 * M_PI * std::min(s01, 1.0));
        });
    };
    {
        auto& spec = params.outputs[graph.index("ss_l")] = makeSpec(
            tPhase, {pitchDof, hipR}, {"base_pitch", "right_hip"});
        fitRow(spec, 0, [&](double) { return 0.0; });
        swingRow(spec, 1, thetaR0, 1.0);
    }
    {
        auto& spec = params.outputs[graph.index("ss_r")] = makeSpec(
            tPhase, {pitchDof, hipL}, {"base_pitch", "left_hip"});
        fitRow(spec, 0, [&](double) { return 0.0; });
        swingRow(spec, 1, thetaL0, -1.0);
    }

    // start in left stance with both feet at ground height and the base
    // centered between them
    const int n = model.dof();
    VecX q0 = VecX::Zero(n);
    q0[hipL] = thetaL0;
    q0[hipR] = thetaR0;
    q0[2] = 1.0;
    for (int iter = 0; iter < 60; ++iter) {
        const double err = footPosition(model, q0, left).z();
        if (std::abs(err) < 1e-12) {
            break;
        }
        q0[2] -= err;
    }

    VecX qd0 = VecX::Zero(n);
    params.x0.vertex = graph.index("ss_l");
    params.x0.t = 0.0;
    params.x0.state = GeneralizedState(q0, qd0);
    return params;
}

} // namespace amble
