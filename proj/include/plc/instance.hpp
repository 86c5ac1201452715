#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "plc/codes.hpp"
#include "plc/protocol.hpp"
#include "plc/storage.hpp"

namespace plc {

/// One fully wired experiment: field, storage code, candidate functions,
/// rate matrix and interference matrices, plus the requested index and the
/// user's seed. Everything downstream (plans, verifiers, reports) is built
/// from this.
struct Instance {
    PrimeField field;
    LinearCode code;
    FunctionSpec spec;
    RateMatrix rate;
    InterferencePair pair;
    std::size_t v = 0; // requested function, 0-based
    std::uint64_t seed = 1;
    bool fixed_randomness = false;

    std::size_t beta() const { return static_cast<std::size_t>(ipow(rate.nu, spec.mu)); }
    std::size_t message_length() const { return beta() * code.k; } // L

    /// Build, sign and prune the plan for the given requested index.
    QueryPlan make_plan(std::size_t req, std::uint64_t plan_seed) const {
        QGenOptions opt;
        opt.fixed_randomness = fixed_randomness;
        QueryPlan plan = q_gen(req, spec, rate, pair, plan_seed, opt);
        sign_and_prune(plan, spec, code, pair);
        return plan;
    }

    /// If lambda_rows is empty the rate matrix is searched for.
    static Instance make(std::uint32_t q, const std::vector<std::vector<long long>>& g_rows,
                         const std::vector<std::vector<long long>>& v_rows, std::size_t v_req,
                         const std::vector<std::vector<std::uint8_t>>& lambda_rows,
                         std::uint64_t seed, bool fixed_randomness = false);
};

} // namespace plc
