#pragma once

#include <complex>
#include <functional>

#include <amble/synthesis.hpp>

namespace amble {

// Orbital stability tooling on the Poincaré return map taken at the guard
// that closes the gait cycle, in coordinates modulo the horizontal base
// position (q with x, y dropped, full qdot): 2n - 2 dimensions.

using ReducedMap = std::function<VecX(const VecX&)>;

VecX reduceState(const GeneralizedState& state);
GeneralizedState reconstructState(const VecX& z);

/*!
 * Simulator-backed return map anchored at the guard of `anchorVertex`
 * (default: the predecessor of the gait's initial vertex, i.e. the edge
 * that closes the cycle). The map takes the reduced pre-event state on
 * the section, applies the edge's reset and flows one full cycle to the
 * next crossing of the same guard. Propagates simulation failures.
 */
ReducedMap makePoincareMap(const RobotModel& model, const GaitGraph& graph,
                           const GaitController& controller, int anchorVertex,
                           const IntegratorSettings& settings = {});

/// Reduced pre-event state of the cycle-closing guard reached from x0;
/// the natural starting guess for the fixed-point search.
VecX sectionStateFrom(const RobotModel& model, const GaitGraph& graph,
                      const GaitController& controller, const HybridState& x0,
                      int anchorVertex, const IntegratorSettings& settings = {});

struct FixedPointSettings {
    double tolerance = 1e-8;
    int maxIterations = 40;
    double fdStep = 1e-6;
    int picardFallback = 60; // iterations if Newton stalls
};

/// Damped Newton on P(z) - z with a finite-difference Jacobian, Picard
/// fallback; stability/no_convergence when neither converges.
VecX findFixedPoint(const ReducedMap& map, const VecX& guess,
                    const FixedPointSettings& settings = {});

struct SpectralAnalysis {
    double rho = 0.0;
    Eigen::VectorXcd eigenvalues;
    MatX jacobian;
    double step = 0.0;
};

/// Central-difference linearization around the fixed point, column j using
/// +-h*max(1, |z_j|); rho is the largest eigenvalue magnitude. Column
/// failures rethrow as stability/column with the column index.
SpectralAnalysis spectralRadius(const ReducedMap& map, const VecX& fixedPoint,
                                double step = 1e-6);

struct RetuneSettings {
    int budget = 30;
    std::uint64_t seed = 0;
    double initialStep = 0.02;
    double fdStep = 1e-6;
    double thetaRankTol = 1e-8;
    MatX sparsityMask; // optional, same layout as one theta row-stack
    IntegratorSettings integrator;
    FixedPointSettings fixedPoint;
};

struct RetuneResult {
    GaitParameters gait; // retuned theta with refit desired curves
    double rho = 0.0;
    VecX fixedPoint;
    std::vector<double> rhoHistory; // accepted values, non-increasing
    int evaluations = 0;
};

/*!
 * Derivative-free search over the output-combination weights minimizing
 * the spectral radius of the return map. Candidates that lose theta row
 * rank or whose fixed point cannot be re-found are rejected. This is a
 * documented substitute for the BMI-constrained reshaping of the cited
 * literature, and reports must say so.
 */
RetuneResult retuneOutputs(const RobotModel& model, const GaitGraph& graph,
                           const GaitParameters& gait,
                           const ControllerConfig& config,
                           const RetuneSettings& settings);

inline constexpr const char* kRetuneMethodNote =
    "spectral radius minimized by a seeded derivative-free search over "
    "output weights; not a BMI-based synthesis";

} // namespace amble
