#include <amble/io.hpp>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace amble {

namespace {

using nlohmann::json;

json readJsonFile(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("io/missing_file", "cannot open '" + path + "'");
    }
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw Error("io/parse", "while reading '" + path + "': " + e.what());
    }
    return j;
}

void writeTextFile(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("io/write", "cannot write '" + path + "'");
    }
    out << text;
}

std::string fullPrecision(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

Vec3 vec3FromJson(const json& j, const char* what)
{
    if (!j.is_array() || j.size() != 3) {
        throw Error("io/parse", std::string(what) + " must be a 3-array");
    }
    return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vec3ToJson(const Vec3& v)
{
    return json::array({v.x(), v.y(), v.z()});
}

Mat3 mat3FromJson(const json& j, const char* what)
{
    Mat3 m;
    if (!j.is_array() || j.size() != 3) {
        throw Error("io/parse", std::string(what) + " must be a 3x3 array");
    }
    for (int r = 0; r < 3; ++r) {
        if (!j[r].is_array() || j[r].size() != 3) {
            throw Error("io/parse", std::string(what) + " must be a 3x3 array");
        }
        for (int c = 0; c < 3; ++c) {
            m(r, c) = j[r][c].get<double>();
        }
    }
    return m;
}

json mat3ToJson(const Mat3& m)
{
    json rows = json::array();
    for (int r = 0; r < 3; ++r) {
        rows.push_back(json::array({m(r, 0), m(r, 1), m(r, 2)}));
    }
    return rows;
}

VecX vecFromJson(const json& j)
{
    VecX v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<int>(i)] = j[i].get<double>();
    }
    return v;
}

json vecToJson(const VecX& v)
{
    json out = json::array();
    for (int i = 0; i < v.size(); ++i) {
        out.push_back(v[i]);
    }
    return out;
}

MatX matFromJson(const json& j)
{
    if (j.empty()) {
        return MatX(0, 0);
    }
    MatX m(j.size(), j[0].size());
    for (std::size_t r = 0; r < j.size(); ++r) {
        for (std::size_t c = 0; c < j[r].size(); ++c) {
            m(static_cast<int>(r), static_cast<int>(c)) = j[r][c].get<double>();
        }
    }
    return m;
}

json matToJson(const MatX& m)
{
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(row);
    }
    return rows;
}

std::string resolvePath(const std::string& baseDir, const std::string& path)
{
    namespace fs = std::filesystem;
    fs::path p(path);
    if (p.is_absolute() || baseDir.empty()) {
        return path;
    }
    return (fs::path(baseDir) / p).string();
}

} // namespace

ModelDescription loadModelDescription(const std::string& path)
{
    const json j = readJsonFile(path);
    ModelDescription d;
    d.name = j.value("name", std::string("model"));
    if (!j.contains("links") || !j.contains("joints")) {
        throw Error("io/parse", "model needs 'links' and 'joints' sections");
    }
    for (const auto& lj : j.at("links")) {
        LinkSpec link;
        link.name = lj.at("name").get<std::string>();
        link.mass = lj.at("mass").get<double>();
        link.com = vec3FromJson(lj.at("com"), "link com");
        link.inertia = mat3FromJson(lj.at("inertia"), "link inertia");
        d.links.push_back(link);
    }
    for (const auto& jj : j.at("joints")) {
        JointSpec joint;
        joint.name = jj.at("name").get<std::string>();
        const std::string kind = jj.at("kind").get<std::string>();
        if (kind == "floating-base") {
            joint.kind = JointKind::FloatingBase;
        } else if (kind == "revolute") {
            joint.kind = JointKind::Revolute;
        } else {
            throw Error("io/parse", "unknown joint kind '" + kind + "'");
        }
        joint.parent = jj.at("parent").get<std::string>();
        joint.child = jj.at("child").get<std::string>();
        if (jj.contains("axis")) {
            joint.axis = vec3FromJson(jj.at("axis"), "joint axis");
        }
        if (jj.contains("origin")) {
            const auto& oj = jj.at("origin");
            if (oj.contains("xyz")) {
                joint.originXyz = vec3FromJson(oj.at("xyz"), "origin xyz");
            }
            if (oj.contains("rpy")) {
                joint.originRpy = vec3FromJson(oj.at("rpy"), "origin rpy");
            }
        }
        d.joints.push_back(joint);
    }
    if (j.contains("feet")) {
        for (const auto& fj : j.at("feet")) {
            FootSpec foot;
            foot.name = fj.at("name").get<std::string>();
            foot.link = fj.at("link").get<std::string>();
            foot.offset = vec3FromJson(fj.at("offset"), "foot offset");
            d.feet.push_back(foot);
        }
    }
    if (j.contains("actuation")) {
        for (const auto& aj : j.at("actuation").at("actuated_joints")) {
            d.actuatedJoints.push_back(aj.get<std::string>());
        }
    }
    if (j.contains("motor")) {
        const auto& mj = j.at("motor");
        d.motor.torqueConstant = mj.value("K_t", d.motor.torqueConstant);
        d.motor.resistance = mj.value("R", d.motor.resistance);
        d.motor.gearRatio = mj.value("N_gear", d.motor.gearRatio);
    }
    if (j.contains("contact")) {
        d.frictionMu = j.at("contact").value("friction_mu", d.frictionMu);
    }
    return d;
}

void saveModelDescription(const std::string& path, const ModelDescription& d)
{
    json j;
    j["name"] = d.name;
    j["links"] = json::array();
    for (const auto& link : d.links) {
        json lj;
        lj["name"] = link.name;
        lj["mass"] = link.mass;
        lj["com"] = vec3ToJson(link.com);
        lj["inertia"] = mat3ToJson(link.inertia);
        j["links"].push_back(lj);
    }
    j["joints"] = json::array();
    for (const auto& joint : d.joints) {
        json jj;
        jj["name"] = joint.name;
        jj["kind"] =
            joint.kind == JointKind::FloatingBase ? "floating-base" : "revolute";
        jj["parent"] = joint.parent;
        jj["child"] = joint.child;
        jj["axis"] = vec3ToJson(joint.axis);
        jj["origin"] = {{"xyz", vec3ToJson(joint.originXyz)},
                        {"rpy", vec3ToJson(joint.originRpy)}};
        j["joints"].push_back(jj);
    }
    j["feet"] = json::array();
    for (const auto& foot : d.feet) {
        j["feet"].push_back({{"name", foot.name},
                             {"link", foot.link},
                             {"offset", vec3ToJson(foot.offset)}});
    }
    j["actuation"] = {{"actuated_joints", d.actuatedJoints}};
    j["motor"] = {{"K_t", d.motor.torqueConstant},
                  {"R", d.motor.resistance},
                  {"N_gear", d.motor.gearRatio}};
    j["contact"] = {{"friction_mu", d.frictionMu}};
    writeTextFile(path, j.dump(2) + "\n");
}

RobotModel loadModel(const std::string& path)
{
    return RobotModel::build(loadModelDescription(path));
}

GaitGraph resolveGraph(const std::string& selection, const RobotModel& model,
                       const std::string& baseDir)
{
    if (selection == "quadruped-amble") {
        return GaitGraph::quadrupedAmble(model);
    }
    if (selection == "biped-walk") {
        return GaitGraph::bipedWalk(model);
    }
    if (selection == "biped-step") {
        return GaitGraph::bipedStep(model);
    }
    if (selection.rfind("standing:", 0) == 0) {
        return GaitGraph::standing(model, selection.substr(9));
    }
    const json j = readJsonFile(resolvePath(baseDir, selection));
    std::vector<GaitVertex> vertices;
    for (const auto& vj : j.at("vertices")) {
        GaitVertex v;
        v.id = vj.at("id").get<std::string>();
        for (const auto& f : vj.at("stance")) {
            v.stanceFeet.push_back(f.get<std::string>());
        }
        const std::string kind = vj.at("edge").get<std::string>();
        if (kind == "impact") {
            v.edgeKind = EdgeKind::Impact;
        } else if (kind == "liftoff") {
            v.edgeKind = EdgeKind::Liftoff;
        } else {
            throw Error("io/parse", "unknown edge kind '" + kind + "'");
        }
        v.guardFoot = vj.at("guard_foot").get<std::string>();
        v.successor = vj.at("successor").get<std::string>();
        vertices.push_back(v);
    }
    return GaitGraph::make(j.value("name", selection), std::move(vertices),
                           model);
}

GaitParameters loadGait(const std::string& path)
{
    const json j = readJsonFile(path);
    GaitParameters p;
    const auto& vd = j.at("v_des_xy");
    p.vDesXy = Vec2(vd[0].get<double>(), vd[1].get<double>());
    for (const auto& vj : j.at("vertices")) {
        OutputSpec spec;
        spec.duration = vj.at("duration").get<double>();
        if (!(spec.duration > 0.0)) {
            throw Error("io/parse", "phase durations must be positive");
        }
        spec.theta = matFromJson(vj.at("theta"));
        spec.alpha = matFromJson(vj.at("alpha"));
        for (const auto& nj : vj.at("outputs")) {
            spec.names.push_back(nj.get<std::string>());
        }
        p.outputs.push_back(std::move(spec));
    }
    const auto& xj = j.at("x0");
    p.x0.vertex = xj.at("vertex").get<int>();
    p.x0.t = xj.value("t", 0.0);
    p.x0.state.q = vecFromJson(xj.at("q"));
    p.x0.state.qdot = vecFromJson(xj.at("qdot"));
    return p;
}

void saveGait(const std::string& path, const GaitParameters& p)
{
    json j;
    j["v_des_xy"] = json::array({p.vDesXy.x(), p.vDesXy.y()});
    j["vertices"] = json::array();
    for (const auto& spec : p.outputs) {
        json vj;
        vj["duration"] = spec.duration;
        vj["outputs"] = spec.names;
        vj["alpha"] = matToJson(spec.alpha);
        vj["theta"] = matToJson(spec.theta);
        j["vertices"].push_back(vj);
    }
    j["x0"] = {{"vertex", p.x0.vertex},
               {"t", p.x0.t},
               {"q", vecToJson(p.x0.state.q)},
               {"qdot", vecToJson(p.x0.state.qdot)}};
    writeTextFile(path, j.dump(2) + "\n");
}

Scenario loadScenario(const std::string& path)
{
    const json j = readJsonFile(path);
    Scenario s;
    s.baseDir = std::filesystem::path(path).parent_path().string();
    s.name = j.value("name", std::string("scenario"));
    s.modelPath = j.at("model").get<std::string>();
    s.graphSelection = j.at("graph").get<std::string>();
    s.gaitPath = j.at("gait").get<std::string>();
    if (j.contains("controller")) {
        const auto& cj = j.at("controller");
        s.controller.kp = cj.value("kp", s.controller.kp);
        s.controller.kd = cj.value("kd", s.controller.kd);
        s.controller.rankTol = cj.value("rank_tol", s.controller.rankTol);
        const std::string mode = cj.value("allocation", std::string("mpp"));
        if (mode == "mpp") {
            s.controller.allocation = AllocationMode::MinNormPseudoinverse;
        } else if (mode == "disable") {
            s.controller.allocation = AllocationMode::DisableActuator;
        } else {
            throw Error("io/parse", "unknown allocation mode '" + mode + "'");
        }
        if (cj.contains("disabled_joints")) {
            for (const auto& [vertexId, jointName] :
                 cj.at("disabled_joints").items()) {
                s.disabledJointByVertex[vertexId] =
                    jointName.get<std::string>();
            }
        }
    }
    if (j.contains("sim")) {
        const auto& sj = j.at("sim");
        s.integrator.dt = sj.value("dt", s.integrator.dt);
        s.integrator.eventTol = sj.value("event_tol", s.integrator.eventTol);
        s.integrator.maxBisection =
            sj.value("max_bisection", s.integrator.maxBisection);
        s.integrator.maxPhaseFactor =
            sj.value("max_phase_factor", s.integrator.maxPhaseFactor);
        s.integrator.forceTol = sj.value("force_tol", s.integrator.forceTol);
        s.integrator.heightTol = sj.value("height_tol", s.integrator.heightTol);
        if (sj.contains("cycles")) {
            s.horizon.cycles = sj.at("cycles").get<int>();
        }
        if (sj.contains("seconds")) {
            s.horizon.seconds = sj.at("seconds").get<double>();
        }
    }
    s.seed = j.value("seed", std::uint64_t(0));
    return s;
}

void saveScenario(const std::string& path, const Scenario& s)
{
    json j;
    j["name"] = s.name;
    j["model"] = s.modelPath;
    j["graph"] = s.graphSelection;
    j["gait"] = s.gaitPath;
    json cj;
    cj["kp"] = s.controller.kp;
    cj["kd"] = s.controller.kd;
    cj["rank_tol"] = s.controller.rankTol;
    cj["allocation"] =
        s.controller.allocation == AllocationMode::MinNormPseudoinverse
            ? "mpp"
            : "disable";
    if (!s.disabledJointByVertex.empty()) {
        json dj;
        for (const auto& [vertexId, jointName] : s.disabledJointByVertex) {
            dj[vertexId] = jointName;
        }
        cj["disabled_joints"] = dj;
    }
    j["controller"] = cj;
    json sj;
    sj["dt"] = s.integrator.dt;
    sj["event_tol"] = s.integrator.eventTol;
    sj["max_bisection"] = s.integrator.maxBisection;
    sj["max_phase_factor"] = s.integrator.maxPhaseFactor;
    sj["force_tol"] = s.integrator.forceTol;
    sj["height_tol"] = s.integrator.heightTol;
    if (s.horizon.cycles >= 0) {
        sj["cycles"] = s.horizon.cycles;
    }
    if (s.horizon.seconds >= 0) {
        sj["seconds"] = s.horizon.seconds;
    }
    j["sim"] = sj;
    j["seed"] = s.seed;
    writeTextFile(path, j.dump(2) + "\n");
}

LoadedScenario openScenario(const std::string& path)
{
    Scenario s = loadScenario(path);
    RobotModel model = loadModel(resolvePath(s.baseDir, s.modelPath));
    GaitGraph graph = resolveGraph(s.graphSelection, model, s.baseDir);
    GaitParameters gait = loadGait(resolvePath(s.baseDir, s.gaitPath));
    LoadedScenario out{std::move(s), std::move(model), std::move(graph),
                       std::move(gait), GaitController{}};

    if (static_cast<int>(out.gait.outputs.size()) != out.graph.count()) {
        throw Error("io/inconsistent",
                    "gait defines " + std::to_string(out.gait.outputs.size())
                        + " vertices, graph has "
                        + std::to_string(out.graph.count()));
    }
    for (const auto& spec : out.gait.outputs) {
        if (spec.theta.cols() != out.model.dof()
            || spec.alpha.rows() != spec.theta.rows() || spec.alpha.cols() != 5
            || static_cast<int>(spec.names.size()) != spec.theta.rows()) {
            throw Error("io/inconsistent",
                        "output spec dimensions do not match the model");
        }
    }
    if (out.gait.x0.vertex < 0 || out.gait.x0.vertex >= out.graph.count()
        || out.gait.x0.state.q.size() != out.model.dof()) {
        throw Error("io/inconsistent", "gait initial state is malformed");
    }

    const Scenario& sc = out.scenario;
    std::vector<int> disabled(out.graph.count(), -1);
    if (sc.controller.allocation == AllocationMode::DisableActuator) {
        for (int v = 0; v < out.graph.count(); ++v) {
            const auto it =
                sc.disabledJointByVertex.find(out.graph.vertex(v).id);
            if (it == sc.disabledJointByVertex.end()) {
                throw Error("io/inconsistent",
                            "disable mode needs a disabled joint for vertex '"
                                + out.graph.vertex(v).id + "'");
            }
            const int idx = out.model.actuatorIndex(it->second);
            if (idx < 0) {
                throw Error("io/inconsistent",
                            "unknown disabled joint '" + it->second + "'");
            }
            disabled[v] = idx;
        }
    }
    out.controller = makeController(out.gait, sc.controller, disabled);
    return out;
}

void writeTraceCsv(const std::string& path, const SimulationTrace& trace)
{
    std::ostringstream out;
    int n = 0, m = 0;
    if (!trace.samples.empty()) {
        n = static_cast<int>(trace.samples.front().q.size());
        m = static_cast<int>(trace.samples.front().u.size());
    }
    const int lam = trace.maxLambdaSize;
    const int ny = trace.maxOutputSize;

    out << "t,vertex";
    for (int i = 0; i < n; ++i) {
        out << ",q" << i;
    }
    for (int i = 0; i < n; ++i) {
        out << ",dq" << i;
    }
    for (int i = 0; i < m; ++i) {
        out << ",u" << i;
    }
    for (int i = 0; i < lam; ++i) {
        out << ",lam" << i;
    }
    for (int i = 0; i < ny; ++i) {
        out << ",y" << i;
    }
    for (int i = 0; i < ny; ++i) {
        out << ",dy" << i;
    }
    out << "\n";

    auto emitPadded = [&](const VecX& v, int count) {
        for (int i = 0; i < count; ++i) {
            out << "," << fullPrecision(i < v.size() ? v[i] : 0.0);
        }
    };
    for (const auto& s : trace.samples) {
        out << fullPrecision(s.t) << "," << s.vertex;
        emitPadded(s.q, n);
        emitPadded(s.qdot, n);
        emitPadded(s.u, m);
        emitPadded(s.lambda, lam);
        emitPadded(s.y, ny);
        emitPadded(s.ydot, ny);
        out << "\n";
    }
    writeTextFile(path, out.str());
}

SimulationTrace readTraceCsv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("io/missing_file", "cannot open '" + path + "'");
    }
    std::string header;
    if (!std::getline(in, header)) {
        throw Error("io/parse", "trace csv has no header");
    }
    int n = 0, m = 0, lam = 0, ny = 0;
    {
        std::stringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (col.rfind("dq", 0) == 0) {
                // counted with q
            } else if (col.rfind("q", 0) == 0) {
                ++n;
            } else if (col.rfind("u", 0) == 0) {
                ++m;
            } else if (col.rfind("lam", 0) == 0) {
                ++lam;
            } else if (col.rfind("dy", 0) == 0) {
                // counted with y
            } else if (col.rfind("y", 0) == 0) {
                ++ny;
            }
        }
    }
    SimulationTrace trace;
    trace.maxLambdaSize = lam;
    trace.maxOutputSize = ny;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::stringstream ls(line);
        std::string cell;
        std::vector<double> cells;
        int vertex = 0;
        int idx = 0;
        while (std::getline(ls, cell, ',')) {
            if (idx == 1) {
                vertex = std::stoi(cell);
            } else {
                cells.push_back(std::strtod(cell.c_str(), nullptr));
            }
            ++idx;
        }
        const int expected = 1 + 2 * n + m + lam + 2 * ny;
        if (static_cast<int>(cells.size()) != expected) {
            throw Error("io/parse", "trace row has wrong column count");
        }
        TraceSample s;
        s.t = cells[0];
        s.vertex = vertex;
        auto take = [&](int offset, int count) {
            VecX v(count);
            for (int i = 0; i < count; ++i) {
                v[i] = cells[offset + i];
            }
            return v;
        };
        int off = 1;
        s.q = take(off, n);
        off += n;
        s.qdot = take(off, n);
        off += n;
        s.u = take(off, m);
        off += m;
        s.lambda = take(off, lam);
        off += lam;
        s.y = take(off, ny);
        off += ny;
        s.ydot = take(off, ny);
        trace.samples.push_back(std::move(s));
    }
    return trace;
}

void writeEventsReport(const std::string& path, const SimulationTrace& trace,
                       const GaitGraph& graph)
{
    json j;
    j["cycles_completed"] = trace.cyclesCompleted;
    j["warnings"] = trace.warnings;
    j["events"] = json::array();
    for (const auto& e : trace.events) {
        json ej;
        ej["t"] = e.t;
        ej["from"] = graph.vertex(e.fromVertex).id;
        ej["to"] = graph.vertex(e.toVertex).id;
        ej["kind"] = e.kind == EdgeKind::Impact ? "impact" : "liftoff";
        ej["guard_foot"] = e.guardFoot;
        ej["guard_value"] = e.guardValue;
        ej["q_pre"] = vecToJson(e.qPre);
        ej["qdot_pre"] = vecToJson(e.qdotPre);
        ej["qdot_post"] = vecToJson(e.qdotPost);
        ej["impulse"] = vecToJson(e.impulse);
        j["events"].push_back(ej);
    }
    j["violations"] = json::array();
    for (const auto& v : trace.violations) {
        j["violations"].push_back({{"t", v.t},
                                   {"vertex", graph.vertex(v.vertex).id},
                                   {"entry", v.label},
                                   {"value", v.value}});
    }
    writeTextFile(path, j.dump(2) + "\n");
}

void writeMetricsReport(const std::string& path, const MetricsReport& report)
{
    json j;
    j["cost_of_transport"] = report.costOfTransport;
    j["peak_torque"] = report.peakTorque;
    j["rms_torque"] = report.rmsTorque;
    j["distance"] = report.distance;
    j["duration"] = report.duration;
    j["mechanical_energy"] = report.mechanicalEnergy;
    j["heat_energy"] = report.heatEnergy;
    j["per_actuator"] = json::array();
    for (const auto& a : report.perActuator) {
        j["per_actuator"].push_back({{"name", a.name},
                                     {"mechanical", a.mechanical},
                                     {"heat", a.heat}});
    }
    writeTextFile(path, j.dump(2) + "\n");
}

} // namespace amble
