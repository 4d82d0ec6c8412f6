#pragma once

#include <string>

#include <json.hpp>

#include "dsaht/capacity.hpp"
#include "dsaht/dp.hpp"
#include "dsaht/objectives.hpp"

namespace dsaht {

using Json = nlohmann::ordered_json;

/// Canonical text form: keys in insertion order, two-space indent, every
/// floating value printed with 17 significant digits, non-finite as null.
std::string dump_json(const Json& j, int indent = 2);

Json to_json(const ProblemSpec& spec);
ProblemSpec spec_from_json(const Json& j);

Json to_json(const Channel& ch);
Json to_json(const JointAction& a);
JointAction action_from_json(const Json& j, const ProblemSpec& spec);

/// Node list with id, depth, belief, action (two value sequences plus joint
/// index), value, pruned mass and z -> (probability, child) branches.
Json to_json(const PolicyTree& policy);
PolicyTree policy_from_json(const Json& j);

Json to_json(const MonteCarloResult& r);
Json to_json(const TelescopingReport& r);
Json to_json(const FixedPointResult& r, const SimplexGrid& grid, const ProblemSpec& spec);
Json to_json(const LambdaWeights& l);
Json to_json(const DirectedInfoBreakdown& d);
Json to_json(const DeviationReport& r);

/// CSV with header "λ1,λ2,λ3,In_lambda,I1,I2,I3"; failed rows leave the
/// numeric columns empty.
std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace dsaht
