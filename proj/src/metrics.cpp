#include <amble/metrics.hpp>

#include <cmath>

namespace amble {

double mechPower(double torque, double angularVelocity)
{
    return std::max(torque * angularVelocity, 0.0);
}

double heatPower(double torque, const MotorParams& motor)
{
    const double motorTorque = torque / motor.gearRatio;
    const double current = motorTorque / motor.torqueConstant;
    return motor.resistance * current * current;
}

MetricsReport costOfTransport(const SimulationTrace& trace,
                              const RobotModel& model,
                              const MotorParams& motor)
{
    if (trace.samples.empty()) {
        throw Error("metrics/empty_trace", "trace has no samples");
    }
    const int m = model.actuatedCount();
    MetricsReport report;
    report.perActuator.resize(m);
    for (int j = 0; j < m; ++j) {
        report.perActuator[j].name = model.actuatorName(j);
    }

    const auto& first = trace.samples.front();
    const auto& last = trace.samples.back();
    report.distance = std::hypot(last.q[0] - first.q[0], last.q[1] - first.q[1]);
    report.duration = last.t - first.t;
    if (report.distance <= 1e-6) {
        throw Error("metrics/zero_displacement",
                    "base moved " + std::to_string(report.distance)
                        + " m; cost of transport is undefined for a standing "
                          "trace");
    }

    auto totalPower = [&](const TraceSample& s, int j, bool heat) {
        const int dof = model.actuatedDofs()[j];
        return heat ? heatPower(s.u[j], motor)
                    : mechPower(s.u[j], s.qdot[dof]);
    };
    for (std::size_t k = 0; k + 1 < trace.samples.size(); ++k) {
        const auto& a = trace.samples[k];
        const auto& b = trace.samples[k + 1];
        const double dt = b.t - a.t;
        if (dt <= 0.0) {
            continue; // phase-boundary duplicates carry no area
        }
        for (int j = 0; j < m; ++j) {
            report.perActuator[j].mechanical +=
                0.5 * dt * (totalPower(a, j, false) + totalPower(b, j, false));
            report.perActuator[j].heat +=
                0.5 * dt * (totalPower(a, j, true) + totalPower(b, j, true));
        }
    }
    for (const auto& a : report.perActuator) {
        report.mechanicalEnergy += a.mechanical;
        report.heatEnergy += a.heat;
    }
    report.costOfTransport = (report.mechanicalEnergy + report.heatEnergy)
                           / (model.totalMass() * kGravity * report.distance);

    const TorqueStats stats = torqueStats(trace);
    report.peakTorque = stats.peak;
    report.rmsTorque = stats.rms;
    return report;
}

TorqueStats torqueStats(const SimulationTrace& trace)
{
    if (trace.samples.empty()) {
        throw Error("metrics/empty_trace", "trace has no samples");
    }
    TorqueStats stats;
    double sumSq = 0.0;
    long count = 0;
    for (const auto& s : trace.samples) {
        for (int j = 0; j < s.u.size(); ++j) {
            stats.peak = std::max(stats.peak, std::abs(s.u[j]));
            sumSq += s.u[j] * s.u[j];
            ++count;
        }
    }
    stats.rms = count > 0 ? std::sqrt(sumSq / static_cast<double>(count)) : 0.0;
    return stats;
}

} // namespace amble
