#include <amble/gait_graph.hpp>

#include <algorithm>
#include <set>

namespace amble {

GaitGraph GaitGraph::make(std::string name, std::vector<GaitVertex> vertices,
                          const RobotModel& model)
{
    if (vertices.empty()) {
        throw Error("graph/structure", "gait graph has no vertices");
    }
    GaitGraph g;
    g.name_ = std::move(name);
    g.vertices_ = std::move(vertices);

    for (const auto& v : g.vertices_) {
        std::vector<int> stance;
        for (const auto& foot : v.stanceFeet) {
            stance.push_back(model.footIndex(foot));
        }
        std::sort(stance.begin(), stance.end());
        g.stanceIndices_.push_back(stance);
        g.guardFootIndex_.push_back(model.footIndex(v.guardFoot));
        g.successorIndex_.push_back(-1);
    }
    for (int v = 0; v < g.count(); ++v) {
        g.successorIndex_[v] = g.index(g.vertices_[v].successor);
    }

    // successor map must trace a single cycle through every vertex
    std::set<int> seen;
    int v = 0;
    for (int i = 0; i < g.count(); ++i) {
        if (!seen.insert(v).second) {
            throw Error("graph/structure",
                        "successor map revisits '" + g.vertices_[v].id
                            + "' before closing the cycle");
        }
        v = g.successorIndex_[v];
    }
    if (v != 0 && g.count() > 1) {
        throw Error("graph/structure",
                    "successor map does not close a single cycle");
    }

    for (int i = 0; i < g.count(); ++i) {
        const auto& vert = g.vertices_[i];
        const auto& stance = g.stanceIndices_[i];
        const auto& next = g.stanceIndices_[g.successorIndex_[i]];
        const int guard = g.guardFootIndex_[i];
        const bool guardInStance =
            std::find(stance.begin(), stance.end(), guard) != stance.end();
        if (vert.edgeKind == EdgeKind::Liftoff) {
            if (!guardInStance) {
                throw Error("graph/guard",
                            "liftoff guard foot of '" + vert.id
                                + "' is not in stance");
            }
            std::vector<int> expected = stance;
            expected.erase(
                std::find(expected.begin(), expected.end(), guard));
            if (next != expected) {
                throw Error("graph/guard",
                            "liftoff successor of '" + vert.id
                                + "' must drop exactly the guard foot");
            }
        } else {
            if (guardInStance) {
                throw Error("graph/guard",
                            "impact guard foot of '" + vert.id
                                + "' is already in stance");
            }
            if (std::find(next.begin(), next.end(), guard) == next.end()) {
                throw Error("graph/guard",
                            "impact successor of '" + vert.id
                                + "' must contain the landing foot");
            }
            int departed = 0;
            for (int f : stance) {
                if (std::find(next.begin(), next.end(), f) == next.end()) {
                    ++departed;
                }
            }
            for (int f : next) {
                if (f != guard
                    && std::find(stance.begin(), stance.end(), f)
                           == stance.end()) {
                    throw Error("graph/guard",
                                "impact successor of '" + vert.id
                                    + "' adds a foot other than the landing "
                                      "one");
                }
            }
            if (departed > 1) {
                throw Error("graph/guard",
                            "impact edge of '" + vert.id
                                + "' releases more than one foot");
            }
        }
    }
    return g;
}

int GaitGraph::index(const std::string& id) const
{
    for (int i = 0; i < count(); ++i) {
        if (vertices_[i].id == id) {
            return i;
        }
    }
    throw Error("graph/structure", "unknown vertex '" + id + "'");
}

GaitGraph GaitGraph::quadrupedAmble(const RobotModel& model)
{
    std::vector<GaitVertex> v(4);
    v[0] = {"ds_rl_fr", {"rl", "fr"}, EdgeKind::Impact, "fl", "ds_rl_fl"};
    v[1] = {"ds_rl_fl", {"rl", "fl"}, EdgeKind::Impact, "rr", "ds_fl_rr"};
    v[2] = {"ds_fl_rr", {"fl", "rr"}, EdgeKind::Impact, "fr", "ds_rr_fr"};
    v[3] = {"ds_rr_fr", {"rr", "fr"}, EdgeKind::Impact, "rl", "ds_rl_fr"};
    return make("quadruped-amble", std::move(v), model);
}

GaitGraph GaitGraph::bipedWalk(const RobotModel& model)
{
    std::vector<GaitVertex> v(4);
    v[0] = {"ds_lr", {"left", "right"}, EdgeKind::Liftoff, "right", "ss_l"};
    v[1] = {"ss_l", {"left"}, EdgeKind::Impact, "right", "ds_rl"};
    v[2] = {"ds_rl", {"right", "left"}, EdgeKind::Liftoff, "left", "ss_r"};
    v[3] = {"ss_r", {"right"}, EdgeKind::Impact, "left", "ds_lr"};
    return make("biped-walk", std::move(v), model);
}

GaitGraph GaitGraph::bipedStep(const RobotModel& model)
{
    std::vector<GaitVertex> v(2);
    v[0] = {"ss_l", {"left"}, EdgeKind::Impact, "right", "ss_r"};
    v[1] = {"ss_r", {"right"}, EdgeKind::Impact, "left", "ss_l"};
    return make("biped-step", std::move(v), model);
}

GaitGraph GaitGraph::standing(const RobotModel& model,
                              const std::string& guardFoot)
{
    std::vector<std::string> all;
    std::vector<std::string> rest;
    for (const auto& foot : model.feet()) {
        all.push_back(foot.name);
        if (foot.name != guardFoot) {
            rest.push_back(foot.name);
        }
    }
    // The liftoff guard of a statically loaded foot never fires, so the
    // second vertex exists only to close a valid cycle.
    std::vector<GaitVertex> v(2);
    v[0] = {"stand", all, EdgeKind::Liftoff, guardFoot, "stand_unloaded"};
    v[1] = {"stand_unloaded", rest, EdgeKind::Impact, guardFoot, "stand"};
    return make("standing", std::move(v), model);
}

} // namespace amble
