#include "plc/codes.hpp"

#include <algorithm>
#include <numeric>

namespace plc {

LinearCode LinearCode::make(const FMatrix& g) {
    LinearCode c;
    c.q = g.modulus();
    c.k = g.rows();
    c.n = g.cols();
    if (c.k < 1 || c.k > c.n)
        throw Error(Errc::InvalidParameters, "need 1 <= k <= n");
    if (mat_rank(g) != c.k)
        throw Error(Errc::InvalidParameters, "generator matrix is rank deficient");
    c.G = g;
    return c;
}

namespace {

// Enumerate k-subsets of [0, n) in lexicographic order.
bool next_subset(std::vector<std::size_t>& s, std::size_t n) {
    std::size_t k = s.size();
    for (std::size_t i = k; i-- > 0;) {
        if (s[i] + (k - i) < n) {
            ++s[i];
            for (std::size_t j = i + 1; j < k; ++j) s[j] = s[j - 1] + 1;
            return true;
        }
    }
    return false;
}

} // namespace

std::vector<std::vector<std::size_t>> information_sets(const LinearCode& code) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> s(code.k);
    std::iota(s.begin(), s.end(), 0);
    do {
        if (mat_rank(code.G.columns(s)) == code.k) out.push_back(s);
    } while (next_subset(s, code.n));
    return out;
}

bool contains_information_set(const LinearCode& code, const std::vector<std::size_t>& support) {
    if (support.size() < code.k) return false;
    return mat_rank(code.G.columns(support)) == code.k;
}

std::vector<std::size_t> RateMatrix::row_support(std::size_t u) const {
    std::vector<std::size_t> s;
    for (std::size_t j = 0; j < n; ++j)
        if (at(u, j)) s.push_back(j);
    return s;
}

std::variant<RateMatrix, RateMatrixViolation>
validate_rate_matrix(const std::vector<std::vector<std::uint8_t>>& rows, const LinearCode& code) {
    std::size_t nu = rows.size();
    if (nu == 0) return RateMatrixViolation{Errc::InvalidParameters, 0, "empty matrix"};
    std::size_t n = rows[0].size();
    if (n != code.n) return RateMatrixViolation{Errc::InvalidParameters, 0, "column count differs from n"};
    for (std::size_t u = 0; u < nu; ++u)
        if (rows[u].size() != n)
            return RateMatrixViolation{Errc::InvalidParameters, u, "ragged row"};

    RateMatrix rm;
    rm.nu = nu;
    rm.n = n;
    rm.lambda.assign(nu * n, 0);
    for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t j = 0; j < n; ++j) rm.lambda[u * n + j] = rows[u][j] ? 1 : 0;

    std::size_t kappa = 0;
    for (std::size_t u = 0; u < nu; ++u) kappa += rm.at(u, 0) ? 1 : 0;
    for (std::size_t j = 1; j < n; ++j) {
        std::size_t w = 0;
        for (std::size_t u = 0; u < nu; ++u) w += rm.at(u, j) ? 1 : 0;
        if (w != kappa)
            return RateMatrixViolation{Errc::NonUniformColumnWeight, j,
                                       "column " + std::to_string(j + 1) + " has weight " +
                                           std::to_string(w) + ", expected " + std::to_string(kappa)};
    }
    if (kappa == 0)
        return RateMatrixViolation{Errc::NonUniformColumnWeight, 0, "zero column weight"};
    for (std::size_t u = 0; u < nu; ++u) {
        if (!contains_information_set(code, rm.row_support(u)))
            return RateMatrixViolation{Errc::RowLacksInformationSet, u,
                                       "row " + std::to_string(u + 1) +
                                           " support lacks an information set"};
    }
    rm.kappa = kappa;
    // kappa/nu == k/n as exact fractions.
    rm.capacity_achieving =
        Fraction(static_cast<long long>(kappa), static_cast<long long>(nu)) ==
        Fraction(static_cast<long long>(code.k), static_cast<long long>(code.n));
    return rm;
}

namespace {

struct Finder {
    const LinearCode& code;
    std::size_t nu, kappa;
    std::vector<std::uint8_t> lambda;             // nu x n, being built
    std::vector<std::vector<std::size_t>> column_choices; // kappa-subsets of [0, nu)

    explicit Finder(const LinearCode& c, std::size_t nu_, std::size_t kappa_)
        : code(c), nu(nu_), kappa(kappa_), lambda(nu_ * c.n, 0) {
        std::vector<std::size_t> s(kappa);
        std::iota(s.begin(), s.end(), 0);
        do column_choices.push_back(s);
        while (next_subset(s, nu));
    }

    bool row_feasible(std::size_t u, std::size_t next_col) const {
        // A row can still reach an information set using its current support
        // plus every not-yet-assigned column.
        std::vector<std::size_t> sup;
        for (std::size_t j = 0; j < next_col; ++j)
            if (lambda[u * code.n + j]) sup.push_back(j);
        for (std::size_t j = next_col; j < code.n; ++j) sup.push_back(j);
        return mat_rank(code.G.columns(sup)) == code.k;
    }

    bool assign(std::size_t col) {
        if (col == code.n) {
            for (std::size_t u = 0; u < nu; ++u) {
                std::vector<std::size_t> sup;
                for (std::size_t j = 0; j < code.n; ++j)
                    if (lambda[u * code.n + j]) sup.push_back(j);
                if (mat_rank(code.G.columns(sup)) != code.k) return false;
            }
            return true;
        }
        for (const auto& pick : column_choices) {
            for (std::size_t u : pick) lambda[u * code.n + col] = 1;
            bool ok = true;
            for (std::size_t u = 0; u < nu && ok; ++u) ok = row_feasible(u, col + 1);
            if (ok && assign(col + 1)) return true;
            for (std::size_t u : pick) lambda[u * code.n + col] = 0;
        }
        return false;
    }
};

} // namespace

std::optional<RateMatrix> find_rate_matrix(const LinearCode& code) {
    if (code.n > 12)
        throw Error(Errc::SearchCutoff,
                    "rate-matrix search is limited to n <= 12; supply the matrix in the config");
    std::size_t g = std::gcd(code.n, code.k);
    std::size_t kappa = code.k / g;
    std::size_t nu = code.n / g;
    Finder fd(code, nu, kappa);
    if (!fd.assign(0)) return std::nullopt;

    std::vector<std::vector<std::uint8_t>> rows(nu, std::vector<std::uint8_t>(code.n, 0));
    for (std::size_t u = 0; u < nu; ++u)
        for (std::size_t j = 0; j < code.n; ++j) rows[u][j] = fd.lambda[u * code.n + j];
    auto res = validate_rate_matrix(rows, code);
    if (std::holds_alternative<RateMatrixViolation>(res))
        throw Error(Errc::InternalMismatch, "search produced an invalid rate matrix");
    return std::get<RateMatrix>(res);
}

InterferencePair interference_pair(const RateMatrix& rate) {
    InterferencePair p;
    p.a.rows = rate.kappa;
    p.a.cols = rate.n;
    p.a.e.assign(rate.kappa * rate.n, 0);
    p.b.rows = rate.nu - rate.kappa;
    p.b.cols = rate.n;
    p.b.e.assign(p.b.rows * rate.n, 0);
    for (std::size_t j = 0; j < rate.n; ++j) {
        std::size_t ia = 0, ib = 0;
        for (std::size_t u = 0; u < rate.nu; ++u) {
            if (rate.at(u, j))
                p.a.e[(ia++) * rate.n + j] = u;
            else
                p.b.e[(ib++) * rate.n + j] = u;
        }
    }
    return p;
}

std::vector<std::size_t> coord_set(std::size_t u, const BlockMatrix& m) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < m.cols; ++j) {
        for (std::size_t i = 0; i < m.rows; ++i) {
            if (m.at(i, j) == u) {
                out.push_back(j);
                break;
            }
        }
    }
    return out;
}

} // namespace plc
