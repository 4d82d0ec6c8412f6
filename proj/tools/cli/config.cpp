#include "config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace dsaht::cli {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kObjectives = {"error_probability", "joint_entropy_drift",
                                           "conditional_entropy_drift_user1", "conditional_entropy_drift_user2",
                                           "ejs"};

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

void check_keys(const YAML::Node& node, const std::string& where, const std::set<std::string>& allowed) {
    if (!node.IsMap()) bad(where + " must be a mapping");
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) bad("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out) {
    if (!node[key]) return;
    try {
        out = node[key].as<T>();
    } catch (const YAML::Exception&) {
        bad(std::string("key '") + key + "' has the wrong type");
    }
}

Lambda read_lambda(const YAML::Node& node, const std::string& where) {
    std::vector<double> v;
    try {
        v = node.as<std::vector<double>>();
    } catch (const YAML::Exception&) {
        bad(where + " must be a list of three numbers");
    }
    if (v.size() != 3) bad(where + " must have exactly three entries");
    for (double x : v)
        if (!(x >= 0.0)) bad(where + " entries must be non-negative");
    if (v[0] == 0.0 && v[1] == 0.0 && v[2] == 0.0) bad(where + " must not be all zero");
    return {v[0], v[1], v[2]};
}

std::string resolve(const std::string& path, const std::string& base_dir) {
    fs::path p(path);
    if (p.is_relative()) p = fs::path(base_dir) / p;
    return p.lexically_normal().string();
}

void validate(const ExperimentConfig& c) {
    for (int v : {c.x1_size, c.x2_size, c.z_size, c.m1, c.m2})
        if (v < 1) bad("alphabet and message sizes must be positive");
    if (c.m1 * c.m2 < 2) bad("need at least two message pairs");
    if (c.log_base != "bits" && c.log_base != "nats") bad("log_base must be 'bits' or 'nats'");
    const int sources = (c.channel.generator ? 1 : 0) + (c.channel.matrix ? 1 : 0) + (c.channel.file ? 1 : 0);
    if (sources != 1) bad("channel needs exactly one of generator, matrix or file");
    if (c.channel.file && !fs::exists(*c.channel.file)) bad("channel file not found: " + *c.channel.file);
    if (c.horizon < 1) bad("horizon must be at least 1");
    if (!kObjectives.count(c.objective)) bad("unknown objective '" + c.objective + "'");
    const auto& p = c.policy;
    if (p.kind != "dp" && p.kind != "file" && p.kind != "constant" && p.kind != "seeded")
        bad("policy kind must be dp, file, constant or seeded");
    if (p.kind == "file" && !fs::exists(p.file)) bad("policy file not found: " + p.file);
    if (p.kind == "constant" && (static_cast<int>(p.e1.size()) != c.m1 || static_cast<int>(p.e2.size()) != c.m2))
        bad("constant policy needs e1 with m1 entries and e2 with m2 entries");
    const auto& k = c.caps;
    if (k.nodes == 0 || k.strategies == 0 || k.histories == 0 || k.policies == 0) bad("caps must be positive");
    if (c.trials == 0) bad("trials must be positive");
    const auto& f = c.fixed_point;
    if (!kObjectives.count(f.cost) || f.cost == "error_probability")
        bad("fixed_point.cost must be an instantaneous cost kind");
    if (f.grid < 2) bad("fixed_point.grid must be at least 2");
    if (f.mode != "discounted" && f.mode != "average") bad("fixed_point.mode must be discounted or average");
    if (!(f.beta > 0.0 && f.beta < 1.0)) bad("fixed_point.beta must lie in (0, 1)");
    if (!(f.tol > 0.0) || f.max_iter < 1) bad("fixed_point.tol and max_iter must be positive");
    if (c.out.empty()) bad("output directory must not be empty");
}

ExperimentConfig parse_config_impl(const std::string& text, const std::string& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        bad(std::string("config is not valid YAML: ") + e.what());
    }
    if (!root || root.IsNull()) bad("config is empty");
    check_keys(root, "config", {"problem", "prior", "channel", "horizon", "objective", "lambda", "lambdas", "policy",
                                "oracle", "rational", "caps", "seed", "trials", "fixed_point", "output"});
    ExperimentConfig c;

    if (const auto pr = root["prior"]; pr && !(pr.IsScalar() && pr.Scalar() == "uniform"))
        bad("only the uniform message prior is supported");

    if (const auto p = root["problem"]) {
        check_keys(p, "problem", {"x1_size", "x2_size", "z_size", "m1", "m2", "log_base"});
        read(p, "x1_size", c.x1_size);
        read(p, "x2_size", c.x2_size);
        read(p, "z_size", c.z_size);
        read(p, "m1", c.m1);
        read(p, "m2", c.m2);
        read(p, "log_base", c.log_base);
    }

    if (const auto ch = root["channel"]) {
        check_keys(ch, "channel", {"generator", "matrix", "file"});
        if (ch["generator"]) c.channel.generator = ch["generator"].as<std::string>();
        if (ch["matrix"]) {
            try {
                c.channel.matrix = ch["matrix"].as<std::vector<std::vector<double>>>();
            } catch (const YAML::Exception&) {
                bad("channel.matrix must be a list of numeric rows");
            }
        }
        if (ch["file"]) c.channel.file = resolve(ch["file"].as<std::string>(), base_dir);
    }

    read(root, "horizon", c.horizon);
    read(root, "objective", c.objective);
    if (root["lambda"]) c.lambda = read_lambda(root["lambda"], "lambda");
    if (const auto ls = root["lambdas"]) {
        if (!ls.IsSequence()) bad("lambdas must be a list");
        for (std::size_t i = 0; i < ls.size(); ++i) c.lambdas.push_back(read_lambda(ls[i], "lambdas[" + std::to_string(i) + "]"));
    }

    if (const auto p = root["policy"]) {
        check_keys(p, "policy", {"kind", "file", "e1", "e2", "seed"});
        read(p, "kind", c.policy.kind);
        if (p["file"]) c.policy.file = resolve(p["file"].as<std::string>(), base_dir);
        read(p, "e1", c.policy.e1);
        read(p, "e2", c.policy.e2);
        read(p, "seed", c.policy.seed);
    }

    read(root, "oracle", c.oracle);
    read(root, "rational", c.rational);
    if (const auto k = root["caps"]) {
        check_keys(k, "caps", {"nodes", "strategies", "histories", "policies"});
        read(k, "nodes", c.caps.nodes);
        read(k, "strategies", c.caps.strategies);
        read(k, "histories", c.caps.histories);
        read(k, "policies", c.caps.policies);
    }
    read(root, "seed", c.seed);
    read(root, "trials", c.trials);
    if (const auto f = root["fixed_point"]) {
        check_keys(f, "fixed_point", {"cost", "grid", "mode", "beta", "tol", "max_iter"});
        read(f, "cost", c.fixed_point.cost);
        read(f, "grid", c.fixed_point.grid);
        read(f, "mode", c.fixed_point.mode);
        read(f, "beta", c.fixed_point.beta);
        read(f, "tol", c.fixed_point.tol);
        read(f, "max_iter", c.fixed_point.max_iter);
    }
    if (const auto o = root["output"]) {
        check_keys(o, "output", {"dir"});
        if (o["dir"]) c.out = resolve(o["dir"].as<std::string>(), base_dir);
    }
    validate(c);
    return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
    try {
        return parse_config_impl(text, base_dir);
    } catch (const YAML::Exception& e) {
        bad(std::string("malformed config: ") + e.what());
    }
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) bad("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

std::string to_yaml(const ExperimentConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "problem" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "x1_size" << YAML::Value << c.x1_size;
    out << YAML::Key << "x2_size" << YAML::Value << c.x2_size;
    out << YAML::Key << "z_size" << YAML::Value << c.z_size;
    out << YAML::Key << "m1" << YAML::Value << c.m1;
    out << YAML::Key << "m2" << YAML::Value << c.m2;
    out << YAML::Key << "log_base" << YAML::Value << c.log_base;
    out << YAML::EndMap;
    out << YAML::Key << "prior" << YAML::Value << "uniform";

    out << YAML::Key << "channel" << YAML::Value << YAML::BeginMap;
    if (c.channel.generator) out << YAML::Key << "generator" << YAML::Value << *c.channel.generator;
    if (c.channel.matrix) {
        out << YAML::Key << "matrix" << YAML::Value << YAML::BeginSeq;
        for (const auto& row : *c.channel.matrix) out << YAML::Flow << row;
        out << YAML::EndSeq;
    }
    if (c.channel.file) out << YAML::Key << "file" << YAML::Value << *c.channel.file;
    out << YAML::EndMap;

    out << YAML::Key << "horizon" << YAML::Value << c.horizon;
    out << YAML::Key << "objective" << YAML::Value << c.objective;
    out << YAML::Key << "lambda" << YAML::Value << YAML::Flow << std::vector<double>(c.lambda.begin(), c.lambda.end());
    if (!c.lambdas.empty()) {
        out << YAML::Key << "lambdas" << YAML::Value << YAML::BeginSeq;
        for (const auto& l : c.lambdas) out << YAML::Flow << std::vector<double>(l.begin(), l.end());
        out << YAML::EndSeq;
    }

    out << YAML::Key << "policy" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "kind" << YAML::Value << c.policy.kind;
    if (!c.policy.file.empty()) out << YAML::Key << "file" << YAML::Value << c.policy.file;
    if (!c.policy.e1.empty()) out << YAML::Key << "e1" << YAML::Value << YAML::Flow << c.policy.e1;
    if (!c.policy.e2.empty()) out << YAML::Key << "e2" << YAML::Value << YAML::Flow << c.policy.e2;
    out << YAML::Key << "seed" << YAML::Value << c.policy.seed;
    out << YAML::EndMap;

    out << YAML::Key << "oracle" << YAML::Value << c.oracle;
    out << YAML::Key << "rational" << YAML::Value << c.rational;
    out << YAML::Key << "caps" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "nodes" << YAML::Value << c.caps.nodes;
    out << YAML::Key << "strategies" << YAML::Value << c.caps.strategies;
    out << YAML::Key << "histories" << YAML::Value << c.caps.histories;
    out << YAML::Key << "policies" << YAML::Value << c.caps.policies;
    out << YAML::EndMap;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "trials" << YAML::Value << c.trials;
    out << YAML::Key << "fixed_point" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "cost" << YAML::Value << c.fixed_point.cost;
    out << YAML::Key << "grid" << YAML::Value << c.fixed_point.grid;
    out << YAML::Key << "mode" << YAML::Value << c.fixed_point.mode;
    out << YAML::Key << "beta" << YAML::Value << c.fixed_point.beta;
    out << YAML::Key << "tol" << YAML::Value << c.fixed_point.tol;
    out << YAML::Key << "max_iter" << YAML::Value << c.fixed_point.max_iter;
    out << YAML::EndMap;
    out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "dir" << YAML::Value << c.out;
    out << YAML::EndMap;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<double> channel_table(const ExperimentConfig& c) {
    std::vector<double> q;
    if (c.channel.matrix) {
        for (const auto& row : *c.channel.matrix) {
            if (static_cast<int>(row.size()) != c.z_size) bad("channel.matrix rows must have z_size entries");
            q.insert(q.end(), row.begin(), row.end());
        }
        return q;
    }
    if (c.channel.file) {
        std::ifstream in(*c.channel.file);
        if (!in) bad("cannot open channel file " + *c.channel.file);
        std::string token;
        while (in >> token) {
            try {
                std::size_t used = 0;
                q.push_back(std::stod(token, &used));
                if (used != token.size()) throw std::invalid_argument(token);
            } catch (const std::exception&) {
                bad("channel file contains a non-numeric token '" + token + "'");
            }
        }
        return q;
    }
    bad("channel is given by a generator, not a table");
}

}  // namespace dsaht::cli
