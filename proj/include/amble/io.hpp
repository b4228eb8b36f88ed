#pragma once

#include <map>
#include <string>

#include <amble/metrics.hpp>
#include <amble/synthesis.hpp>

namespace amble {

// Structured-text file handling. Models, gaits, graphs and scenarios are
// JSON documents with the field names documented in the README; traces are
// CSV. All numbers are written with 17 significant digits so every file
// round-trips to the exact in-memory value.

RobotModel loadModel(const std::string& path);
ModelDescription loadModelDescription(const std::string& path);
void saveModelDescription(const std::string& path, const ModelDescription& d);

/// Built-in graph names: "quadruped-amble", "biped-walk",
/// "standing:<guard foot>"; anything else is read as a graph file path.
GaitGraph resolveGraph(const std::string& selection, const RobotModel& model,
                       const std::string& baseDir = "");

GaitParameters loadGait(const std::string& path);
void saveGait(const std::string& path, const GaitParameters& params);

struct Scenario {
    std::string name;
    std::string modelPath;
    std::string graphSelection;
    std::string gaitPath;
    ControllerConfig controller;
    std::map<std::string, std::string> disabledJointByVertex;
    IntegratorSettings integrator;
    SimulationHorizon horizon;
    std::uint64_t seed = 0;

    // resolved on load
    std::string baseDir;
};

Scenario loadScenario(const std::string& path);
void saveScenario(const std::string& path, const Scenario& scenario);

struct LoadedScenario {
    Scenario scenario;
    RobotModel model;
    GaitGraph graph;
    GaitParameters gait;
    GaitController controller;
};

/// Loads and cross-checks a scenario: referenced files must parse, output
/// counts and foot names must be consistent (io/inconsistent otherwise).
LoadedScenario openScenario(const std::string& path);

void writeTraceCsv(const std::string& path, const SimulationTrace& trace);
SimulationTrace readTraceCsv(const std::string& path);

void writeEventsReport(const std::string& path, const SimulationTrace& trace,
                       const GaitGraph& graph);

void writeMetricsReport(const std::string& path, const MetricsReport& report);

} // namespace amble
