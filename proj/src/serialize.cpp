#include "dsaht/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace dsaht {

namespace {

std::string format_double(double x) {
    if (!std::isfinite(x)) return "null";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    std::string s(buf);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

void write(std::ostringstream& out, const Json& j, int indent, int level) {
    const std::string pad(static_cast<std::size_t>(indent * (level + 1)), ' ');
    const std::string close_pad(static_cast<std::size_t>(indent * level), ' ');
    if (j.is_object()) {
        if (j.empty()) {
            out << "{}";
            return;
        }
        out << "{\n";
        bool first = true;
        for (const auto& [k, v] : j.items()) {
            if (!first) out << ",\n";
            first = false;
            out << pad << Json(k).dump() << ": ";
            write(out, v, indent, level + 1);
        }
        out << "\n" << close_pad << "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out << "[]";
            return;
        }
        const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return is_scalar(e); });
        if (flat) {
            out << "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out << ", ";
                write(out, j[i], indent, level + 1);
            }
            out << "]";
            return;
        }
        out << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i) out << ",\n";
            out << pad;
            write(out, j[i], indent, level + 1);
        }
        out << "\n" << close_pad << "]";
    } else if (j.is_number_float()) {
        out << format_double(j.get<double>());
    } else {
        out << j.dump();
    }
}

Json vec(std::span<const double> v) {
    Json a = Json::array();
    for (double x : v) a.push_back(x);
    return a;
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
    std::ostringstream out;
    write(out, j, indent, 0);
    out << "\n";
    return out.str();
}

Json to_json(const ProblemSpec& spec) {
    Json j;
    j["x1_size"] = spec.x1_size;
    j["x2_size"] = spec.x2_size;
    j["z_size"] = spec.z_size;
    j["m1"] = spec.m1;
    j["m2"] = spec.m2;
    j["log_base"] = to_string(spec.log_base);
    return j;
}

ProblemSpec spec_from_json(const Json& j) {
    ProblemSpec s;
    s.x1_size = j.at("x1_size").get<int>();
    s.x2_size = j.at("x2_size").get<int>();
    s.z_size = j.at("z_size").get<int>();
    s.m1 = j.at("m1").get<int>();
    s.m2 = j.at("m2").get<int>();
    s.log_base = parse_log_base(j.value("log_base", std::string("bits")));
    s.validate();
    return s;
}

Json to_json(const Channel& ch) {
    Json rows = Json::array();
    for (int x1 = 0; x1 < ch.x1_size(); ++x1)
        for (int x2 = 0; x2 < ch.x2_size(); ++x2) rows.push_back(vec(ch.row(x1, x2)));
    return rows;
}

Json to_json(const JointAction& a) {
    Json j;
    j["e1"] = a.e1.map;
    j["e2"] = a.e2.map;
    return j;
}

JointAction action_from_json(const Json& j, const ProblemSpec& spec) {
    JointAction a{{User::One, j.at("e1").get<std::vector<int>>()}, {User::Two, j.at("e2").get<std::vector<int>>()}};
    a.validate(spec);
    return a;
}

Json to_json(const PolicyTree& policy) {
    Json j;
    j["spec"] = to_json(policy.spec());
    j["horizon"] = policy.horizon();
    j["objective"] = to_string(policy.objective());
    j["restricted"] = policy.restricted();
    Json nodes = Json::array();
    const auto& all = policy.nodes();
    for (NodeId id = 0; id < all.size(); ++id) {
        const auto& n = all[id];
        Json node;
        node["id"] = id;
        node["depth"] = n.depth;
        node["belief"] = vec(n.belief.values());
        if (n.action_index) {
            Json act = to_json(n.action);
            act["index"] = *n.action_index;
            node["action"] = std::move(act);
        } else {
            node["action"] = nullptr;
        }
        node["value"] = n.value;
        node["pruned_mass"] = n.pruned_mass;
        Json children = Json::array();
        for (const auto& b : n.children) {
            Json c;
            c["z"] = b.z;
            c["prob"] = b.prob;
            c["child"] = b.child;
            children.push_back(std::move(c));
        }
        node["children"] = std::move(children);
        nodes.push_back(std::move(node));
    }
    j["nodes"] = std::move(nodes);
    return j;
}

PolicyTree policy_from_json(const Json& j) {
    try {
        const auto spec = spec_from_json(j.at("spec"));
        const int horizon = j.at("horizon").get<int>();
        const auto objective = parse_cost_kind(j.value("objective", std::string("error_probability")));
        const ActionSpace space(spec);
        std::vector<PolicyNode> nodes;
        const auto& arr = j.at("nodes");
        for (std::size_t i = 0; i < arr.size(); ++i) {
            const auto& jn = arr[i];
            if (jn.contains("id") && jn["id"].get<std::size_t>() != i)
                fail(ErrorCode::InvalidArgument, "policy node ids must be 0..N-1 in order");
            PolicyNode n;
            n.depth = jn.at("depth").get<int>();
            n.belief = JointBelief(spec.m1, spec.m2, jn.at("belief").get<std::vector<double>>());
            if (!jn.at("action").is_null()) {
                n.action = action_from_json(jn["action"], spec);
                n.action_index = space.index(n.action);
            }
            n.value = jn.value("value", 0.0);
            n.pruned_mass = jn.value("pruned_mass", 0.0);
            for (const auto& c : jn.value("children", Json::array())) {
                const auto child = c.at("child").get<std::size_t>();
                if (child >= arr.size()) fail(ErrorCode::InvalidArgument, "policy child id out of range");
                n.children.push_back({c.at("z").get<int>(), c.at("prob").get<double>(), child});
            }
            nodes.push_back(std::move(n));
        }
        return PolicyTree(spec, horizon, objective, std::move(nodes), j.value("restricted", false));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::InvalidArgument, std::string("malformed policy JSON: ") + e.what());
    }
}

Json to_json(const MonteCarloResult& r) {
    Json j;
    j["estimate"] = r.estimate;
    j["ci_half_width"] = r.half_width;
    j["trials"] = r.trials;
    j["errors"] = r.errors;
    return j;
}

Json to_json(const TelescopingReport& r) {
    Json j;
    j["lhs"] = r.lhs;
    j["rhs"] = r.rhs;
    j["residual"] = r.residual;
    j["saturated"] = r.saturated;
    return j;
}

Json to_json(const FixedPointResult& r, const SimplexGrid& grid, const ProblemSpec& spec) {
    const ActionSpace space(spec);
    Json j;
    j["mode"] = to_string(r.mode);
    j["grid_resolution"] = r.resolution;
    j["grid_points"] = grid.size();
    j["anchor"] = r.anchor;
    j["gain"] = r.gain;
    j["near_zero_gain"] = r.near_zero_gain;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["converged"] = r.converged;
    j["max_projection_error"] = r.max_projection_error;
    j["saturated"] = r.saturated;
    j["value_at_anchor"] = r.value.empty() ? 0.0 : r.value[r.anchor];
    Json points = Json::array();
    for (std::size_t g = 0; g < grid.size(); ++g) {
        Json p;
        p["counts"] = grid.counts(g);
        p["value"] = r.value[g];
        Json act = to_json(space.action(r.greedy_action[g]));
        act["index"] = r.greedy_action[g];
        p["greedy_action"] = std::move(act);
        points.push_back(std::move(p));
    }
    j["points"] = std::move(points);
    return j;
}

Json to_json(const LambdaWeights& l) { return Json::array({l.l1, l.l2, l.l3}); }

Json to_json(const DirectedInfoBreakdown& d) {
    Json j;
    j["bound_type"] = kBoundType;
    j["lambda"] = to_json(d.lambda);
    j["In_lambda"] = d.weighted;
    j["I1"] = d.i1;
    j["I2"] = d.i2;
    j["I3"] = d.i3;
    j["i1_t"] = vec(d.i1_t);
    j["i2_t"] = vec(d.i2_t);
    j["i3_t"] = vec(d.i3_t);
    if (d.message_information) j["message_information"] = *d.message_information;
    j["clipped"] = d.clipped;
    j["states"] = d.states;
    return j;
}

Json to_json(const DeviationReport& r) {
    Json j;
    j["max_deviation"] = r.max_deviation;
    j["histories"] = r.histories;
    j["passed"] = r.passed;
    return j;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::string out = "λ1,λ2,λ3,In_lambda,I1,I2,I3\n";
    for (const auto& r : rows) {
        out += format_double(r.lambda.l1) + "," + format_double(r.lambda.l2) + "," + format_double(r.lambda.l3);
        if (r.result) {
            const auto& b = r.result->breakdown;
            out += "," + format_double(b.weighted) + "," + format_double(b.i1) + "," + format_double(b.i2) + "," +
                   format_double(b.i3);
        } else {
            out += ",,,,";
        }
        out += "\n";
    }
    return out;
}

}  // namespace dsaht
