#pragma once

#include <string>
#include <vector>

#include <amble/robot_model.hpp>

namespace amble {

enum class EdgeKind { Liftoff, Impact };

/*!
 * One contact domain and its outgoing transition. The guard is a single
 * admissibility entry: the normal force of the departing foot for liftoff
 * edges, the height of the landing foot for impact edges. An impact edge
 * may simultaneously release one stance foot (the landing swap used by
 * two-foot gaits); the plastic impulse is computed against the successor's
 * full contact set.
 */
struct GaitVertex {
    std::string id;
    std::vector<std::string> stanceFeet;
    EdgeKind edgeKind = EdgeKind::Impact;
    std::string guardFoot;
    std::string successor;
};

class GaitGraph {
public:
    static GaitGraph make(std::string name, std::vector<GaitVertex> vertices,
                          const RobotModel& model);

    /// Diagonal/lateral two-foot amble for a quadruped with feet named
    /// fl, rl, fr, rr. Four impact-swap phases per cycle:
    ///   {rl,fr} -fl-> {rl,fl} -rr-> {fl,rr} -fr-> {rr,fr} -rl-> {rl,fr}
    static GaitGraph quadrupedAmble(const RobotModel& model);

    /// Double/single support walk for a biped with feet named left, right:
    ///   {L,R} -liftoff R-> {L} -impact R-> {R,L} -liftoff L-> {R} -impact L->
    static GaitGraph bipedWalk(const RobotModel& model);

    /// Alternating single stance with landing swaps, stepping in place:
    ///   {L} -impact right-> {R} -impact left-> {L}
    static GaitGraph bipedStep(const RobotModel& model);

    /// Single vertex on all feet with an impact guard that never fires;
    /// used for posture-hold scenarios.
    static GaitGraph standing(const RobotModel& model,
                              const std::string& guardFoot);

    const std::string& name() const { return name_; }
    int count() const { return static_cast<int>(vertices_.size()); }
    const GaitVertex& vertex(int v) const { return vertices_.at(v); }
    int successor(int v) const { return successorIndex_.at(v); }
    int index(const std::string& id) const;
    /// Feet indices of a vertex's stance set, in model foot order.
    const std::vector<int>& stance(int v) const { return stanceIndices_.at(v); }
    int guardFootIndex(int v) const { return guardFootIndex_.at(v); }
    const std::vector<GaitVertex>& vertices() const { return vertices_; }

private:
    std::string name_;
    std::vector<GaitVertex> vertices_;
    std::vector<int> successorIndex_;
    std::vector<std::vector<int>> stanceIndices_;
    std::vector<int> guardFootIndex_;
};

struct HybridState {
    int vertex = 0;
    double t = 0.0;
    GeneralizedState state;
};

} // namespace amble
