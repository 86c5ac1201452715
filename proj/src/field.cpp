#include "plc/field.hpp"

#include <algorithm>
#include <numeric>

namespace plc {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::NotPrime: return "NotPrime";
        case Errc::FieldTooSmall: return "FieldTooSmall";
        case Errc::Unsolvable: return "Unsolvable";
        case Errc::NonUniformColumnWeight: return "NonUniformColumnWeight";
        case Errc::RowLacksInformationSet: return "RowLacksInformationSet";
        case Errc::NotFound: return "NotFound";
        case Errc::SearchCutoff: return "SearchCutoff";
        case Errc::FieldMismatch: return "FieldMismatch";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::NoSource: return "NoSource";
        case Errc::NotDivisible: return "NotDivisible";
        case Errc::UnreconstructiblePrune: return "UnreconstructiblePrune";
        case Errc::DecodeFailure: return "DecodeFailure";
        case Errc::BudgetExceeded: return "BudgetExceeded";
        case Errc::InvalidParameters: return "InvalidParameters";
        case Errc::InternalMismatch: return "InternalMismatch";
        case Errc::ConfigError: return "ConfigError";
    }
    return "Unknown";
}

namespace {

bool is_prime(std::uint32_t q) {
    if (q < 2) return false;
    for (std::uint64_t d = 2; d * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

} // namespace

PrimeField::PrimeField(std::uint32_t q) : q_(q) {
    if (q < 3) throw Error(Errc::FieldTooSmall, "q must be at least 3, got " + std::to_string(q));
    if (!is_prime(q)) throw Error(Errc::NotPrime, std::to_string(q) + " is composite");
}

std::uint32_t PrimeField::pow(std::uint32_t a, std::uint64_t e) const {
    std::uint64_t base = a % q_, acc = 1;
    while (e) {
        if (e & 1) acc = acc * base % q_;
        base = base * base % q_;
        e >>= 1;
    }
    return std::uint32_t(acc);
}

std::uint32_t PrimeField::inv(std::uint32_t a) const {
    a %= q_;
    if (a == 0) throw Error(Errc::InvalidParameters, "inverse of zero");
    return pow(a, q_ - 2);
}

Fraction::Fraction(long long n, long long d) {
    if (d == 0) throw Error(Errc::InvalidParameters, "zero denominator");
    if (d < 0) { n = -n; d = -d; }
    long long g = std::gcd(n < 0 ? -n : n, d);
    if (g == 0) g = 1;
    num = n / g;
    den = d / g;
}

namespace {

long long checked_ll(__int128 v, const char* what) {
    if (v > __int128(0x7fffffffffffffffLL) || v < -__int128(0x7fffffffffffffffLL))
        throw Error(Errc::InvalidParameters, std::string("rational overflow in ") + what);
    return static_cast<long long>(v);
}

Fraction make_frac128(__int128 n, __int128 d, const char* what) {
    if (d < 0) { n = -n; d = -d; }
    __int128 an = n < 0 ? -n : n;
    __int128 g = d;
    while (an) { __int128 t = g % an; g = an; an = t; }
    if (g == 0) g = 1;
    return Fraction(checked_ll(n / g, what), checked_ll(d / g, what));
}

} // namespace

Fraction Fraction::operator+(const Fraction& o) const {
    return make_frac128(__int128(num) * o.den + __int128(o.num) * den, __int128(den) * o.den, "+");
}

Fraction Fraction::operator-(const Fraction& o) const {
    return make_frac128(__int128(num) * o.den - __int128(o.num) * den, __int128(den) * o.den, "-");
}

Fraction Fraction::operator*(const Fraction& o) const {
    return make_frac128(__int128(num) * o.num, __int128(den) * o.den, "*");
}

Fraction Fraction::operator/(const Fraction& o) const {
    if (o.num == 0) throw Error(Errc::InvalidParameters, "division by zero fraction");
    return make_frac128(__int128(num) * o.den, __int128(den) * o.num, "/");
}

Fraction Fraction::pow(unsigned e) const {
    Fraction acc = whole(1);
    for (unsigned i = 0; i < e; ++i) acc = acc * *this;
    return acc;
}

bool Fraction::operator<(const Fraction& o) const {
    return __int128(num) * o.den < __int128(o.num) * den;
}

std::string Fraction::str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
}

FMatrix FMatrix::identity(std::size_t n, std::uint32_t q) {
    FMatrix m(n, n, q);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
}

FMatrix FMatrix::from_rows(const std::vector<std::vector<long long>>& rows, std::uint32_t q) {
    PrimeField f(q);
    std::size_t r = rows.size();
    std::size_t c = r == 0 ? 0 : rows[0].size();
    FMatrix m(r, c, q);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c)
            throw Error(Errc::InvalidParameters, "ragged row list");
        for (std::size_t j = 0; j < c; ++j) m.set(i, j, f.from_signed(rows[i][j]));
    }
    return m;
}

FMatrix FMatrix::mul(const FMatrix& o) const {
    if (q_ != o.q_) throw Error(Errc::FieldMismatch, "matrix product across moduli");
    if (cols_ != o.rows_) throw Error(Errc::InvalidParameters, "inner dimensions differ");
    FMatrix out(rows_, o.cols_, q_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t k = 0; k < cols_; ++k) {
            std::uint64_t aik = at(i, k);
            if (!aik) continue;
            for (std::size_t j = 0; j < o.cols_; ++j)
                out.a_[i * o.cols_ + j] =
                    std::uint32_t((out.a_[i * o.cols_ + j] + aik * o.at(k, j)) % q_);
        }
    return out;
}

FMatrix FMatrix::transpose() const {
    FMatrix out(cols_, rows_, q_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) out.set(j, i, at(i, j));
    return out;
}

FMatrix FMatrix::columns(std::span<const std::size_t> idx) const {
    FMatrix out(rows_, idx.size(), q_);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        if (idx[j] >= cols_) throw Error(Errc::IndexOutOfRange, "column index");
        for (std::size_t i = 0; i < rows_; ++i) out.set(i, j, at(i, idx[j]));
    }
    return out;
}

std::size_t mat_rank(const FMatrix& m) {
    PrimeField f(m.modulus());
    std::size_t rows = m.rows(), cols = m.cols();
    std::vector<std::vector<std::uint32_t>> a(rows, std::vector<std::uint32_t>(cols));
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j) a[i][j] = m.at(i, j);

    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rank;
        while (piv < rows && a[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(a[piv], a[rank]);
        std::uint32_t s = f.inv(a[rank][col]);
        for (std::size_t j = col; j < cols; ++j) a[rank][j] = f.mul(a[rank][j], s);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == rank || a[i][col] == 0) continue;
            std::uint32_t c = a[i][col];
            for (std::size_t j = col; j < cols; ++j)
                a[i][j] = f.sub(a[i][j], f.mul(c, a[rank][j]));
        }
        ++rank;
    }
    return rank;
}

RowBasis row_basis(const FMatrix& v) {
    PrimeField f(v.modulus());
    std::size_t cols = v.cols();
    RowBasis out;
    out.expansion.resize(v.rows());

    // Reduced rows kept so far, each augmented with its expression over the
    // original basis rows collected so far: red[k].row == sum expr[j]*V_basis[j].
    struct Reduced {
        std::vector<std::uint32_t> row;
        std::vector<std::uint32_t> expr;
        std::size_t pivot;
    };
    std::vector<Reduced> red;

    for (std::size_t i = 0; i < v.rows(); ++i) {
        std::vector<std::uint32_t> row(v.row(i).begin(), v.row(i).end());
        std::vector<std::uint32_t> sub(out.basis.size(), 0);
        for (const Reduced& r : red) {
            std::uint32_t c = row[r.pivot];
            if (c == 0) continue;
            for (std::size_t j = 0; j < cols; ++j) row[j] = f.sub(row[j], f.mul(c, r.row[j]));
            for (std::size_t j = 0; j < r.expr.size(); ++j)
                sub[j] = f.add(sub[j], f.mul(c, r.expr[j]));
        }
        // Now V_i == row + sum sub[j]*V_basis[j].
        std::size_t piv = 0;
        while (piv < cols && row[piv] == 0) ++piv;
        if (piv == cols) {
            out.expansion[i] = std::move(sub);
            continue;
        }
        // Independent: V_i joins the basis. The stored reduced row is
        // s*(V_i - sum sub[j]*V_basis[j]).
        std::uint32_t s = f.inv(row[piv]);
        for (std::size_t j = 0; j < cols; ++j) row[j] = f.mul(row[j], s);
        std::vector<std::uint32_t> expr(out.basis.size() + 1, 0);
        for (std::size_t j = 0; j < sub.size(); ++j) expr[j] = f.mul(f.neg(sub[j]), s);
        expr.back() = s;
        out.basis.push_back(i);
        for (Reduced& r : red) r.expr.resize(out.basis.size(), 0);
        red.push_back({std::move(row), std::move(expr), piv});
        // Keep earlier reduced rows fully reduced against the new pivot.
        const Reduced& nw = red.back();
        for (std::size_t k = 0; k + 1 < red.size(); ++k) {
            std::uint32_t c = red[k].row[piv];
            if (c == 0) continue;
            for (std::size_t j = 0; j < cols; ++j)
                red[k].row[j] = f.sub(red[k].row[j], f.mul(c, nw.row[j]));
            for (std::size_t j = 0; j < nw.expr.size(); ++j)
                red[k].expr[j] = f.sub(red[k].expr[j], f.mul(c, nw.expr[j]));
        }
    }
    // Expansions computed early are over a prefix of the final basis; pad them.
    for (auto& e : out.expansion)
        if (e.has_value()) e->resize(out.basis.size(), 0);
    return out;
}

std::optional<std::vector<std::uint32_t>> solve(const FMatrix& a, std::span<const std::uint32_t> b) {
    if (b.size() != a.rows()) throw Error(Errc::InvalidParameters, "rhs length");
    PrimeField f(a.modulus());
    std::size_t rows = a.rows(), cols = a.cols();
    std::vector<std::vector<std::uint32_t>> m(rows, std::vector<std::uint32_t>(cols + 1));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) m[i][j] = a.at(i, j);
        m[i][cols] = b[i] % a.modulus();
    }

    std::vector<std::size_t> pivot_col;
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t piv = rank;
        while (piv < rows && m[piv][col] == 0) ++piv;
        if (piv == rows) continue;
        std::swap(m[piv], m[rank]);
        std::uint32_t s = f.inv(m[rank][col]);
        for (std::size_t j = col; j <= cols; ++j) m[rank][j] = f.mul(m[rank][j], s);
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == rank || m[i][col] == 0) continue;
            std::uint32_t c = m[i][col];
            for (std::size_t j = col; j <= cols; ++j) m[i][j] = f.sub(m[i][j], f.mul(c, m[rank][j]));
        }
        pivot_col.push_back(col);
        ++rank;
    }
    for (std::size_t i = rank; i < rows; ++i)
        if (m[i][cols] != 0) return std::nullopt;

    std::vector<std::uint32_t> x(cols, 0);
    for (std::size_t i = 0; i < rank; ++i) x[pivot_col[i]] = m[i][cols];
    return x;
}

long long binomial(long long m, long long n) {
    if (n < 0 || m < n) return 0;
    n = std::min(n, m - n);
    long long acc = 1;
    for (long long i = 1; i <= n; ++i) acc = acc * (m - n + i) / i;
    return acc;
}

long long ipow(long long base, unsigned e) {
    long long acc = 1;
    for (unsigned i = 0; i < e; ++i) acc *= base;
    return acc;
}

} // namespace plc
