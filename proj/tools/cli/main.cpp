#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "dsaht/dsaht.h"

namespace fs = std::filesystem;
using dsaht::cli::ExperimentConfig;

namespace {

enum Exit { kOk = 0, kFailure = 1, kValidation = 2, kBudget = 3, kInvariant = 4 };

/// Carries a library status out of a subcommand.
struct StatusError {
    dsaht_status status;
    std::string message;
};

int exit_code(dsaht_status s) {
    switch (s) {
        case DSAHT_OK: return kOk;
        case DSAHT_BUDGET_EXCEEDED: return kBudget;
        case DSAHT_NEGATIVE_INFORMATION: return kInvariant;
        case DSAHT_INTERNAL: return kFailure;
        default: return kValidation;
    }
}

void check(dsaht_status s) {
    if (s != DSAHT_OK) throw StatusError{s, dsaht_last_error_message()};
}

struct ProblemDeleter {
    void operator()(dsaht_problem* p) const { dsaht_problem_destroy(p); }
};
struct PolicyDeleter {
    void operator()(dsaht_policy* p) const { dsaht_policy_destroy(p); }
};
using Problem = std::unique_ptr<dsaht_problem, ProblemDeleter>;
using Policy = std::unique_ptr<dsaht_policy, PolicyDeleter>;

/// Takes ownership of a string returned by the library.
std::string take(char* s) {
    std::string out = s ? s : "";
    dsaht_string_free(s);
    return out;
}

void write_atomic(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

class Runner {
public:
    explicit Runner(ExperimentConfig cfg) : cfg_(std::move(cfg)) {}

    int run(const std::string& command) {
        if (command == "validate") return validate();
        problem_ = make_problem();
        if (command == "solve-dp") return solve_dp();
        if (command == "eval-policy") return emit(command, report([&](char** j) {
            return dsaht_policy_evaluate_report(problem_.get(), policy().get(), j);
        }));
        if (command == "simulate") return emit(command, report([&](char** j) {
            return dsaht_simulate_report(problem_.get(), policy().get(), cfg_.trials, cfg_.seed, j);
        }));
        if (command == "oracle-unstructured") return emit(command, report([&](char** j) {
            return dsaht_oracle_unstructured(problem_.get(), cfg_.horizon, cfg_.rational, cfg_.caps.strategies, j);
        }));
        if (command == "costs") return emit(command, report([&](char** j) {
            return dsaht_costs_report(problem_.get(), policy().get(), j);
        }));
        if (command == "fixed-point") return fixed_point();
        if (command == "capacity-eval") return emit(command, report([&](char** j) {
            return dsaht_capacity_eval(problem_.get(), policy().get(), cfg_.horizon, cfg_.lambda.data(), cfg_.oracle,
                                       &caps_, j);
        }));
        if (command == "capacity-search") return emit(command, report([&](char** j) {
            return dsaht_capacity_search(problem_.get(), cfg_.horizon, cfg_.lambda.data(), &caps_, j);
        }));
        if (command == "lambda-sweep") return lambda_sweep();
        if (command == "check-invariants") return check_invariants();
        throw std::logic_error("unhandled subcommand " + command);
    }

private:
    dsaht_spec spec() const {
        return {cfg_.x1_size, cfg_.x2_size, cfg_.z_size, cfg_.m1, cfg_.m2,
                cfg_.log_base == "nats" ? DSAHT_NATS : DSAHT_BITS};
    }

    Problem make_problem() {
        caps_ = {cfg_.caps.nodes, cfg_.caps.strategies, cfg_.caps.histories, cfg_.caps.policies};
        const auto s = spec();
        dsaht_problem* p = nullptr;
        if (cfg_.channel.generator) {
            check(dsaht_problem_create_generated(&s, cfg_.channel.generator->c_str(), &p));
        } else {
            const auto q = dsaht::cli::channel_table(cfg_);
            check(dsaht_problem_create(&s, q.data(), q.size(), &p));
        }
        return Problem(p);
    }

    Policy policy() {
        dsaht_policy* p = nullptr;
        const auto& src = cfg_.policy;
        if (src.kind == "dp") {
            check(dsaht_solve_dp(problem_.get(), cfg_.horizon, cfg_.objective.c_str(), &caps_, 0, &p, nullptr));
        } else if (src.kind == "constant") {
            check(dsaht_policy_constant(problem_.get(), cfg_.horizon, src.e1.data(), src.e2.data(), &p));
        } else if (src.kind == "seeded") {
            check(dsaht_policy_seeded(problem_.get(), cfg_.horizon, src.seed, &p));
        } else {
            std::ifstream in(src.file);
            std::stringstream ss;
            ss << in.rdbuf();
            check(dsaht_policy_from_json(ss.str().c_str(), &p));
        }
        return Policy(p);
    }

    template <typename F>
    std::string report(F&& call) {
        char* j = nullptr;
        const auto s = call(&j);
        std::string text = take(j);
        if (s != DSAHT_OK) throw StatusError{s, dsaht_last_error_message()};
        return text;
    }

    int emit(const std::string& name, const std::string& json, int code = kOk) {
        write_atomic(fs::path(cfg_.out) / (name + ".json"), json);
        std::cout << json;
        return code;
    }

    int validate() {
        try {
            problem_ = make_problem();
        } catch (const StatusError& e) {
            nlohmann::ordered_json j;
            j["stochastic"] = false;
            j["status"] = dsaht_status_string(e.status);
            j["error"] = e.message;
            emit("validate", j.dump(2) + "\n");
            throw;
        }
        char* j = nullptr;
        check(dsaht_problem_describe(problem_.get(), &j));
        return emit("validate", take(j));
    }

    int solve_dp() {
        dsaht_policy* p = nullptr;
        char* rep = nullptr;
        const auto s = dsaht_solve_dp(problem_.get(), cfg_.horizon, cfg_.objective.c_str(), &caps_, cfg_.rational, &p,
                                      &rep);
        std::string text = take(rep);
        check(s);
        Policy owned(p);
        char* pj = nullptr;
        check(dsaht_policy_to_json(owned.get(), &pj));
        write_atomic(fs::path(cfg_.out) / "policy.json", take(pj));
        return emit("solve-dp", text);
    }

    int fixed_point() {
        dsaht_fixed_point_options o;
        dsaht_fixed_point_options_default(&o);
        o.resolution = cfg_.fixed_point.grid;
        o.average = cfg_.fixed_point.mode == "average";
        o.beta = cfg_.fixed_point.beta;
        o.tol = cfg_.fixed_point.tol;
        o.max_iter = cfg_.fixed_point.max_iter;
        char* j = nullptr;
        const auto s = dsaht_fixed_point(problem_.get(), cfg_.fixed_point.cost.c_str(), &o, &j);
        std::string text = take(j);
        if (s == DSAHT_NOT_CONVERGED) {
            std::cerr << "warning: " << dsaht_last_error_message() << "; reporting the last iterate\n";
            return emit("fixed-point", text);
        }
        check(s);
        return emit("fixed-point", text);
    }

    int lambda_sweep() {
        std::vector<double> flat;
        const auto& ls = cfg_.lambdas.empty() ? std::vector<dsaht::cli::Lambda>{cfg_.lambda} : cfg_.lambdas;
        for (const auto& l : ls) flat.insert(flat.end(), l.begin(), l.end());
        char* j = nullptr;
        char* csv = nullptr;
        check(dsaht_lambda_sweep(problem_.get(), cfg_.horizon, flat.data(), ls.size(), &caps_, &j, &csv));
        write_atomic(fs::path(cfg_.out) / "lambda-sweep.csv", take(csv));
        return emit("lambda-sweep", take(j));
    }

    int check_invariants() {
        char* j = nullptr;
        int passed = 0;
        check(dsaht_check_invariants(problem_.get(), cfg_.horizon, &caps_, cfg_.policy.seed, &j, &passed));
        const int code = passed ? kOk : kInvariant;
        if (!passed) std::cerr << "error: at least one invariant check exceeded its tolerance\n";
        return emit("check-invariants", take(j), code);
    }

    ExperimentConfig cfg_;
    Problem problem_;
    dsaht_caps caps_{};
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized sequential hypothesis testing and directed-information bounds over a two-user MAC"};
    app.set_version_flag("--version", std::string(dsaht_version()));
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> cap_nodes;
    bool rational = false;
    std::optional<std::string> log_base;
    app.add_option("--config", config_path, "Experiment config (YAML)")->required();
    app.add_option("--out", out_dir, "Output directory (overrides output.dir)");
    app.add_option("--seed", seed, "Random seed (overrides seed)");
    app.add_option("--cap-nodes", cap_nodes, "Belief-tree node cap (overrides caps.nodes)");
    app.add_flag("--rational", rational, "Exact rational arithmetic for oracle computations");
    app.add_option("--log-base", log_base, "Logarithm base")->check(CLI::IsMember({"bits", "nats"}));

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"validate", "Check the channel and report it"},
        {"solve-dp", "Backward dynamic program over the reachable belief tree"},
        {"eval-policy", "Exact error probability of the configured policy"},
        {"simulate", "Monte Carlo error rate of the configured policy"},
        {"oracle-unstructured", "Brute force over all deterministic feedback encoders"},
        {"costs", "Instantaneous cost table and telescoping checks"},
        {"fixed-point", "Infinite-horizon fixed point on a simplex grid"},
        {"capacity-eval", "Directed informations of the configured policy"},
        {"capacity-search", "Best weighted directed information over structured policies"},
        {"lambda-sweep", "capacity-search for each weight vector in lambdas"},
        {"check-invariants", "Belief, factorization, stage-function and kernel consistency checks"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        auto cfg = dsaht::cli::load_config(config_path);
        if (out_dir) cfg.out = *out_dir;
        if (seed) cfg.seed = *seed;
        if (cap_nodes) {
            if (*cap_nodes == 0) throw dsaht::cli::ConfigError("--cap-nodes must be positive");
            cfg.caps.nodes = *cap_nodes;
        }
        if (rational) cfg.rational = true;
        if (log_base) cfg.log_base = *log_base;
        return Runner(std::move(cfg)).run(command);
    } catch (const dsaht::cli::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kValidation;
    } catch (const StatusError& e) {
        std::cerr << "error (" << dsaht_status_string(e.status) << "): " << e.message << "\n";
        return exit_code(e.status);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
}
