#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plc/codes.hpp"
#include "plc/field.hpp"
#include "plc/storage.hpp"

namespace plc {

enum class Kind { Desired, Undesired };

/// One signed virtual-message symbol inside a query:
/// sign * U^(func)_{row, db}. Rows are pre-permutation indices; the
/// permutation is applied only when a query is flattened for a database.
struct Term {
    std::size_t func = 0; // 0-based candidate-function index
    std::size_t row = 0;  // 0-based row in [0, beta)
    int sign = 1;         // +1 or -1

    bool operator==(const Term& o) const {
        return func == o.func && row == o.row && sign == o.sign;
    }
};

/// Provenance of the side-information part merged into a desired sum: the
/// source block label, source round, and the source terms with their own
/// signs. The merged copy carries the negated source coefficients, so the
/// decoder can subtract the source value wholesale.
struct SiRef {
    std::size_t block = 0;
    std::size_t round = 0;
    std::vector<Term> terms;
};

/// A signed formal sum of `round` distinct virtual-message symbols queried
/// at one database. Terms are kept sorted by function index; the set of
/// function indices is the sum's type.
struct TauSum {
    std::size_t db = 0;    // 0-based database coordinate
    std::size_t round = 0; // 1-based tau
    std::size_t block = 0; // aux label u it was generated under
    Kind kind = Kind::Desired;
    std::vector<Term> terms;
    std::optional<SiRef> si; // desired sums of rounds >= 2

    std::vector<std::size_t> type() const;
    const Term& fresh(std::size_t v) const; // the requested-function term
};

/// Canonical plan order: (round, type, rows, block).
bool canonical_less(const TauSum& a, const TauSum& b);

/// Global per-(function, row) sign table sigma, +1/-1.
struct SigmaTable {
    std::size_t mu = 0;
    std::size_t beta = 0;
    std::vector<std::int8_t> s; // mu x beta, row-major

    int at(std::size_t func, std::size_t row) const { return s[func * beta + row]; }
};

struct QueryRef {
    std::size_t db = 0;
    std::size_t index = 0; // into the finalized per-database query list
    bool operator<(const QueryRef& o) const {
        return db != o.db ? db < o.db : index < o.index;
    }
};

/// A removed query together with the recipe that reconstructs its value as
/// a field-linear combination of retained query values.
struct PrunedQuery {
    TauSum sum;
    std::vector<std::pair<QueryRef, std::uint32_t>> recipe;
};

struct QueryPlan {
    // Parameter echo.
    std::size_t v = 0; // requested function, 0-based
    std::size_t n = 0, mu = 0, f = 0, beta = 0, nu = 0, kappa = 0, r = 0;
    std::uint32_t q = 3;
    std::uint64_t seed = 0;
    bool fixed_randomness = false;
    bool finalized = false;

    Permutation pi;
    SigmaTable sigma;

    std::vector<std::vector<TauSum>> queries; // per database; canonical once finalized
    std::vector<PrunedQuery> pruned;          // the pruning ledger

    std::size_t total_queries() const;
    std::vector<std::size_t> per_round_counts() const; // index tau-1
};

struct QGenOptions {
    bool fixed_randomness = false;    // pi = identity, sigma all +1
    bool skip_message_symmetry = false; // diagnostic mutation, breaks symmetry on purpose
};

struct PruneOptions {
    // Diagnostic mutation: additionally remove every sum of the given
    // (round, type) combinations. Types are 0-based function-index sets.
    std::vector<std::pair<std::size_t, std::vector<std::size_t>>> extra_prunes;
    // Diagnostic: negate specific sigma entries (function, row) after the
    // table is drawn, for obliviousness checks.
    std::vector<std::pair<std::size_t, std::size_t>> sigma_flips;
};

// ---------------------------------------------------------------------------
// Algorithm building blocks, exposed for direct testing.
// ---------------------------------------------------------------------------

/// First-round auxiliary sets for block u at database j: alpha1 desired
/// singletons at rows u*alpha1 + l and the matching undesired singletons of
/// every other function at the same rows.
std::pair<std::vector<TauSum>, std::vector<TauSum>>
initial_round(std::size_t u, long long alpha1, std::size_t j, std::size_t v, std::size_t mu);

/// Fresh desired symbols for round tau at rows l*nu + u, l in
/// [alpha_prev, alpha_tau).
std::vector<TauSum> desired_q(std::size_t u, long long alpha_prev, long long alpha_tau,
                              std::size_t j, std::size_t v, std::size_t nu, std::size_t round);

/// Reproduce the block-u undesired set of round tau-1 from the first source
/// database (row-major scan of A, j' ascending, j' != j) at coordinate j.
std::vector<TauSum> exploit_si(std::size_t u,
                               const std::vector<std::vector<TauSum>>& undesired_by_db,
                               const InterferencePair& pair, std::size_t j);

/// Split the side-information union into kappa parts (each residual type is
/// split evenly, chunks in canonical order) and element-wise add part i to
/// the block-a(i,j) desired set. Throws NotDivisible on a counting bug.
void merge_side_information(std::vector<std::vector<TauSum>>& desired_per_block,
                            const std::vector<TauSum>& si_union, std::size_t kappa,
                            bool lenient = false);

/// Message symmetry: one undesired tau-sum per desired tau-sum per type not
/// containing v, rows mirrored from the desired sums of matching residual
/// type, signs alternating over the sorted function indices.
std::vector<TauSum> m_sym(const std::vector<TauSum>& desired, std::size_t j, std::size_t v,
                          std::size_t round, std::size_t mu);

/// Assemble the full unsigned, unpruned plan (Algorithm rounds 1..mu).
QueryPlan q_gen(std::size_t v, const FunctionSpec& spec, const RateMatrix& rate,
                const InterferencePair& pair, std::uint64_t seed, const QGenOptions& opt = {});

/// Apply the global sign table and remove the redundant types (subsets of
/// the dependent index set, rounds 1..mu-r), recording a validated
/// reconstruction recipe for every removed sum.
void sign_and_prune(QueryPlan& plan, const FunctionSpec& spec, const LinearCode& code,
                    const InterferencePair& pair, const PruneOptions& opt = {});

/// What database j actually receives: one coefficient vector over its
/// beta*f stored symbols per retained query, in plan order. Kind, block and
/// grouping annotations do not survive the flattening.
std::vector<std::vector<std::uint32_t>>
db_query_vectors(const QueryPlan& plan, const FunctionSpec& spec, std::size_t j);

/// Same, with explicit permutation and sign table (used by the exhaustive
/// privacy enumeration).
std::vector<std::vector<std::uint32_t>>
db_query_vectors_with(const QueryPlan& plan, const FunctionSpec& spec, std::size_t j,
                      const Permutation& pi, const SigmaTable& sigma);

/// The database side: evaluate each received coefficient vector over the
/// shard column.
std::vector<std::uint32_t> answer(const DatabaseShard& sh,
                                  const std::vector<std::vector<std::uint32_t>>& queries);

/// User-side decoding: reconstruct pruned values from the ledger, peel side
/// information round by round, solve an information set per row, undo the
/// permutation. Returns X^(v) as a beta x k matrix.
FMatrix decode(const std::vector<std::vector<std::uint32_t>>& answers, const QueryPlan& plan,
               const FunctionSpec& spec, const LinearCode& code, const InterferencePair& pair);

/// Retained queries over all databases; one downloaded symbol each.
std::size_t download_cost(const QueryPlan& plan);

/// Golden dump: one line per retained query,
/// `j tau kind sign1*U[v1,t1] sign2*U[v2,t2] ...`, 1-based, canonical order.
std::string dump_plan(const QueryPlan& plan);

/// Round/type/count profile per database, the structural privacy observable.
using TypeProfile = std::vector<std::map<std::pair<std::size_t, std::vector<std::size_t>>, std::size_t>>;
TypeProfile type_profile(const QueryPlan& plan);

} // namespace plc
