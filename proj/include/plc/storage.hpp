#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "plc/codes.hpp"
#include "plc/field.hpp"

namespace plc {

using Permutation = std::vector<std::size_t>; // bijection on [0, beta)

/// The f stored messages, each a beta x k matrix over GF(q).
struct MessageArray {
    std::size_t f = 0;
    std::size_t beta = 0;
    std::size_t k = 0;
    std::uint32_t q = 3;
    std::vector<FMatrix> w;

    static MessageArray random(std::size_t f, std::size_t beta, std::size_t k,
                               const PrimeField& field, std::uint64_t seed);

    /// Plain-text format: one message per block, beta lines of k
    /// space-separated integers mod q, blocks separated by blank lines.
    static MessageArray load(std::istream& in, std::size_t f, std::size_t beta, std::size_t k,
                             const PrimeField& field);
    void save(std::ostream& out) const;
};

/// Every message row encoded with the [n,k] storage code, rows grouped by
/// message then row index: row m*beta + t holds the codeword of W^(m) row t.
struct CodeArray {
    std::size_t f = 0;
    std::size_t beta = 0;
    FMatrix c; // (f*beta) x n
};

CodeArray encode_dss(const MessageArray& w, const LinearCode& code);

/// One database's column of the code array, an immutable snapshot.
struct DatabaseShard {
    std::size_t db = 0; // 0-based coordinate
    std::size_t f = 0;
    std::size_t beta = 0;
    std::uint32_t q = 3;
    std::vector<std::uint32_t> column; // [m*beta + t]

    std::uint32_t symbol(std::size_t m, std::size_t t) const { return column[m * beta + t]; }
};

DatabaseShard shard(const CodeArray& c, std::size_t j);

/// The mu candidate linear functions: V (mu x f), its rank, the first
/// independent rows, and expansions of the dependent rows over them.
struct FunctionSpec {
    FMatrix v;        // mu x f
    std::size_t mu = 0;
    std::size_t f = 0;
    std::size_t r = 0;
    RowBasis basis;

    static FunctionSpec make(const FMatrix& v);

    bool is_dependent(std::size_t row) const { return !basis.is_basis_row(row); }
};

/// The t-th permuted code symbol of virtual message vprime at the shard's
/// database: sum over m of V[vprime][m] * C^(m)[pi[t]][j].
std::uint32_t virtual_symbol(const FunctionSpec& spec, std::size_t vprime,
                             const DatabaseShard& sh, const Permutation& pi, std::size_t t);

} // namespace plc
