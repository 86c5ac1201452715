#include "plc/storage.hpp"

#include "plc/rng.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace plc {

MessageArray MessageArray::random(std::size_t f, std::size_t beta, std::size_t k,
                                  const PrimeField& field, std::uint64_t seed) {
    MessageArray out;
    out.f = f;
    out.beta = beta;
    out.k = k;
    out.q = field.modulus();
    Rng rng(seed);
    for (std::size_t m = 0; m < f; ++m) {
        FMatrix w(beta, k, field.modulus());
        for (std::size_t t = 0; t < beta; ++t)
            for (std::size_t j = 0; j < k; ++j)
                w.set(t, j, static_cast<std::uint32_t>(rng.below(field.modulus())));
        out.w.push_back(std::move(w));
    }
    return out;
}

MessageArray MessageArray::load(std::istream& in, std::size_t f, std::size_t beta, std::size_t k,
                                const PrimeField& field) {
    MessageArray out;
    out.f = f;
    out.beta = beta;
    out.k = k;
    out.q = field.modulus();
    std::string line;
    std::size_t m = 0, t = 0;
    FMatrix cur(beta, k, field.modulus());
    while (m < f && std::getline(in, line)) {
        std::istringstream ls(line);
        long long v;
        std::size_t j = 0;
        while (ls >> v) {
            if (j >= k) throw Error(Errc::ConfigError, "message row longer than k");
            cur.set(t, j++, field.from_signed(v));
        }
        if (j == 0) continue; // blank separator line
        if (j != k) throw Error(Errc::ConfigError, "message row shorter than k");
        if (++t == beta) {
            out.w.push_back(cur);
            cur = FMatrix(beta, k, field.modulus());
            t = 0;
            ++m;
        }
    }
    if (m != f) throw Error(Errc::ConfigError, "message file ended early");
    return out;
}

void MessageArray::save(std::ostream& out) const {
    for (std::size_t m = 0; m < f; ++m) {
        for (std::size_t t = 0; t < beta; ++t) {
            for (std::size_t j = 0; j < k; ++j) out << (j ? " " : "") << w[m].at(t, j);
            out << "\n";
        }
        if (m + 1 < f) out << "\n";
    }
}

CodeArray encode_dss(const MessageArray& w, const LinearCode& code) {
    if (w.q != code.q) throw Error(Errc::FieldMismatch, "message and code moduli differ");
    if (w.k != code.k) throw Error(Errc::InvalidParameters, "message width differs from code dimension");
    CodeArray out;
    out.f = w.f;
    out.beta = w.beta;
    out.c = FMatrix(w.f * w.beta, code.n, code.q);
    PrimeField field(code.q);
    for (std::size_t m = 0; m < w.f; ++m) {
        FMatrix enc = w.w[m].mul(code.G); // beta x n
        for (std::size_t t = 0; t < w.beta; ++t)
            for (std::size_t j = 0; j < code.n; ++j) out.c.set(m * w.beta + t, j, enc.at(t, j));
    }
    return out;
}

DatabaseShard shard(const CodeArray& c, std::size_t j) {
    if (j >= c.c.cols()) throw Error(Errc::IndexOutOfRange, "database index " + std::to_string(j + 1));
    DatabaseShard s;
    s.db = j;
    s.f = c.f;
    s.beta = c.beta;
    s.q = c.c.modulus();
    s.column.resize(c.f * c.beta);
    for (std::size_t i = 0; i < s.column.size(); ++i) s.column[i] = c.c.at(i, j);
    return s;
}

FunctionSpec FunctionSpec::make(const FMatrix& v) {
    FunctionSpec s;
    s.v = v;
    s.mu = v.rows();
    s.f = v.cols();
    s.basis = row_basis(v);
    s.r = s.basis.basis.size();
    if (s.r == 0) throw Error(Errc::InvalidParameters, "function matrix is zero");
    return s;
}

std::uint32_t virtual_symbol(const FunctionSpec& spec, std::size_t vprime,
                             const DatabaseShard& sh, const Permutation& pi, std::size_t t) {
    PrimeField field(sh.q);
    std::size_t row = pi[t];
    std::uint64_t acc = 0;
    for (std::size_t m = 0; m < spec.f; ++m)
        acc += std::uint64_t(spec.v.at(vprime, m)) * sh.symbol(m, row) % sh.q;
    return std::uint32_t(acc % sh.q);
}

} // namespace plc
