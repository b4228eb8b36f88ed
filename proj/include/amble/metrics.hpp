#pragma once

#include <amble/robot_model.hpp>
#include <amble/trace.hpp>

namespace amble {

/*!
 * Per-actuator energy accounting over a trace: mechanical work without
 * recuperation plus Joule heating from the motor winding.
 */
struct ActuatorEnergy {
    std::string name;
    double mechanical = 0.0; // J
    double heat = 0.0;       // J
};

struct MetricsReport {
    double costOfTransport = 0.0;
    double peakTorque = 0.0;     // N*m
    double rmsTorque = 0.0;      // N*m
    double distance = 0.0;       // m, planar base displacement
    double duration = 0.0;       // s
    double mechanicalEnergy = 0.0;
    double heatEnergy = 0.0;
    std::vector<ActuatorEnergy> perActuator;
};

/// max(tau * omega, 0): absorbed mechanical power is not recuperated.
double mechPower(double torque, double angularVelocity);

/// R * (tau / (N * K_t))^2, the winding loss for a joint torque tau.
double heatPower(double torque, const MotorParams& motor);

/// Trapezoidal energy integral over the trace samples and CoT = E/(m g d).
/// Throws metrics/zero_displacement when the base does not move.
MetricsReport costOfTransport(const SimulationTrace& trace,
                              const RobotModel& model,
                              const MotorParams& motor);

struct TorqueStats {
    double peak = 0.0;
    double rms = 0.0;
};

/// Peak and RMS over all actuator-samples; metrics/empty_trace when there
/// are no samples.
TorqueStats torqueStats(const SimulationTrace& trace);

} // namespace amble
