#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plc/error.hpp"

namespace plc {

/// Arithmetic provider for the prime field GF(q).
///
/// Elements are plain uint32_t values kept fully reduced into [0, q-1].
/// Construction validates primality by trial division and rejects q < 3;
/// the sign assignment of the query protocol needs +1 != -1.
class PrimeField {
public:
    explicit PrimeField(std::uint32_t q);

    std::uint32_t modulus() const { return q_; }

    std::uint32_t add(std::uint32_t a, std::uint32_t b) const { return norm(std::uint64_t(a) + b); }
    std::uint32_t sub(std::uint32_t a, std::uint32_t b) const { return norm(std::uint64_t(a) + q_ - b); }
    std::uint32_t mul(std::uint32_t a, std::uint32_t b) const { return std::uint32_t(std::uint64_t(a) * b % q_); }
    std::uint32_t neg(std::uint32_t a) const { return a == 0 ? 0 : q_ - a; }
    std::uint32_t inv(std::uint32_t a) const;
    std::uint32_t pow(std::uint32_t a, std::uint64_t e) const;

    /// Reduce an arbitrary signed integer into [0, q-1].
    std::uint32_t from_signed(long long x) const {
        long long m = x % static_cast<long long>(q_);
        if (m < 0) m += q_;
        return static_cast<std::uint32_t>(m);
    }

    bool operator==(const PrimeField& o) const { return q_ == o.q_; }

private:
    std::uint32_t norm(std::uint64_t v) const { return std::uint32_t(v % q_); }
    std::uint32_t q_;
};

/// Exact rational number, always in lowest terms with positive denominator.
/// All rate and capacity accounting goes through this type; verdicts never
/// touch floating point.
struct Fraction {
    long long num = 0;
    long long den = 1;

    Fraction() = default;
    Fraction(long long n, long long d);
    static Fraction whole(long long n) { return Fraction(n, 1); }

    Fraction operator+(const Fraction& o) const;
    Fraction operator-(const Fraction& o) const;
    Fraction operator*(const Fraction& o) const;
    Fraction operator/(const Fraction& o) const;
    Fraction pow(unsigned e) const;

    bool operator==(const Fraction& o) const { return num == o.num && den == o.den; }
    bool operator!=(const Fraction& o) const { return !(*this == o); }
    bool operator<(const Fraction& o) const;
    bool operator<=(const Fraction& o) const { return *this < o || *this == o; }

    std::string str() const;
    double approx() const { return double(num) / double(den); }
};

/// Row-major matrix over GF(q). All entries share one modulus; mixing
/// moduli in any binary operation raises FieldMismatch.
class FMatrix {
public:
    FMatrix() : rows_(0), cols_(0), q_(3) {}
    FMatrix(std::size_t rows, std::size_t cols, std::uint32_t q)
        : rows_(rows), cols_(cols), q_(q), a_(rows * cols, 0) {}

    static FMatrix identity(std::size_t n, std::uint32_t q);
    static FMatrix from_rows(const std::vector<std::vector<long long>>& rows, std::uint32_t q);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::uint32_t modulus() const { return q_; }

    std::uint32_t at(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }
    void set(std::size_t i, std::size_t j, std::uint32_t v) { a_[i * cols_ + j] = v % q_; }

    std::span<const std::uint32_t> row(std::size_t i) const { return {a_.data() + i * cols_, cols_}; }

    FMatrix mul(const FMatrix& o) const;
    FMatrix transpose() const;

    /// Submatrix restricted to the given column indices, in the given order.
    FMatrix columns(std::span<const std::size_t> idx) const;

    bool operator==(const FMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && q_ == o.q_ && a_ == o.a_;
    }

private:
    std::size_t rows_, cols_;
    std::uint32_t q_;
    std::vector<std::uint32_t> a_;
};

/// Rank over GF(q) by Gaussian elimination on a working copy.
std::size_t mat_rank(const FMatrix& m);

/// Basis of the row space plus expansions of the dependent rows.
///
/// basis holds the lexicographically first maximal independent subset
/// (scan top-down, keep a row iff it increases the rank). For every
/// dependent row d, expansion[d] holds coefficients c with
/// row_d = sum_l c[l] * row_{basis[l]}; basis rows carry no expansion.
struct RowBasis {
    std::vector<std::size_t> basis;
    std::vector<std::optional<std::vector<std::uint32_t>>> expansion;

    bool is_basis_row(std::size_t i) const { return !expansion[i].has_value(); }
};

RowBasis row_basis(const FMatrix& v);

/// Any x with A*x = b, or nullopt when the system is inconsistent.
std::optional<std::vector<std::uint32_t>> solve(const FMatrix& a, std::span<const std::uint32_t> b);

/// Binomial coefficient with C(m, n) = 0 whenever m < n.
long long binomial(long long m, long long n);

/// Integer power, small exponents only.
long long ipow(long long base, unsigned e);

} // namespace plc
