#pragma once

#include <string>
#include <vector>

#include <amble/core.hpp>
#include <amble/gait_graph.hpp>

namespace amble {

struct TraceSample {
    double t = 0.0;
    int vertex = 0;
    VecX q;
    VecX qdot;
    VecX u;
    VecX lambda; // stacked forces of the vertex's active feet
    VecX y;
    VecX ydot;
};

struct TraceEvent {
    double t = 0.0;
    int fromVertex = 0;
    int toVertex = 0;
    EdgeKind kind = EdgeKind::Impact;
    std::string guardFoot;
    double guardValue = 0.0; // |H| at the bisected crossing
    VecX qPre;
    VecX qdotPre;
    VecX qdotPost; // q is continuous across every reset
    VecX impulse;  // successor-contact impulse, empty on liftoff edges
};

struct AdmissibilityViolation {
    double t = 0.0;
    int vertex = 0;
    std::string label;
    double value = 0.0;
};

struct SimulationTrace {
    std::vector<TraceSample> samples;
    std::vector<TraceEvent> events;
    std::vector<AdmissibilityViolation> violations; // monitor mode only
    std::vector<std::string> warnings;
    int cyclesCompleted = 0;
    int maxLambdaSize = 0;
    int maxOutputSize = 0;
};

} // namespace amble
