#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "plc/field.hpp"

namespace plc {

/// An [n,k] linear code over GF(q), held by its generator matrix.
struct LinearCode {
    std::uint32_t q = 3;
    std::size_t n = 0;
    std::size_t k = 0;
    FMatrix G;

    /// Validates 1 <= k <= n and rank(G) = k.
    static LinearCode make(const FMatrix& g);
};

/// All information sets (k-subsets I with G|_I invertible), lexicographic,
/// 0-based coordinates.
std::vector<std::vector<std::size_t>> information_sets(const LinearCode& code);

/// True iff the support contains an information set, i.e. the columns of G
/// indexed by `support` still have full rank k.
bool contains_information_set(const LinearCode& code, const std::vector<std::size_t>& support);

/// Binary nu x n matrix steering the query protocol: every column has
/// Hamming weight kappa and every row support contains an information set.
/// capacity_achieving is the exact-fraction test kappa/nu == k/n.
struct RateMatrix {
    std::size_t nu = 0;
    std::size_t n = 0;
    std::size_t kappa = 0;
    std::vector<std::uint8_t> lambda; // row-major nu x n
    bool capacity_achieving = false;

    bool at(std::size_t u, std::size_t j) const { return lambda[u * n + j] != 0; }
    std::vector<std::size_t> row_support(std::size_t u) const;
};

struct RateMatrixViolation {
    Errc code;          // NonUniformColumnWeight or RowLacksInformationSet
    std::size_t index;  // offending column resp. row, 0-based
    std::string detail;
};

/// Checks the two defining conditions; kappa is inferred from the columns.
std::variant<RateMatrix, RateMatrixViolation>
validate_rate_matrix(const std::vector<std::vector<std::uint8_t>>& rows, const LinearCode& code);

/// Backtracking search for the minimal rate matrix with
/// kappa = k/gcd(n,k), nu = n/gcd(n,k). Columns are assigned left to right,
/// each from the ascending kappa-subsets of rows, so the first complete
/// assignment is canonical. Returns nullopt when the search space is
/// exhausted. Codes with n > 12 are rejected with SearchCutoff; supply the
/// matrix explicitly in that case.
std::optional<RateMatrix> find_rate_matrix(const LinearCode& code);

/// Matrix over block labels [0, nu): one of the two interference matrices.
struct BlockMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> e; // row-major block labels

    std::size_t at(std::size_t i, std::size_t j) const { return e[i * cols + j]; }
};

/// Per-coordinate bookkeeping of which rate-matrix rows are on (a) or
/// off (b) at each database. Column entries are listed in ascending label
/// order, which fixes the assignment the definition leaves free.
struct InterferencePair {
    BlockMatrix a; // kappa x n, labels u with lambda[u][j] = 1
    BlockMatrix b; // (nu-kappa) x n, labels u with lambda[u][j] = 0
};

InterferencePair interference_pair(const RateMatrix& rate);

/// Columns of M containing the label u, ascending.
std::vector<std::size_t> coord_set(std::size_t u, const BlockMatrix& m);

} // namespace plc
