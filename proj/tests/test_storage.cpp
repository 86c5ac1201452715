#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "plc/rng.hpp"
#include "plc/storage.hpp"

using namespace plc;

namespace {

LinearCode example_code() {
    return LinearCode::make(FMatrix::from_rows({{1, 0, 1, 1}, {0, 1, 1, 1}}, 5));
}

FunctionSpec example_spec() {
    return FunctionSpec::make(FMatrix::from_rows({{1, 0, 0, 1}, {1, 1, 0, 0}, {2, 1, 0, 1}}, 5));
}

Permutation identity_perm(std::size_t n) {
    Permutation p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    return p;
}

} // namespace

TEST_CASE("encoding a row of the example code") {
    PrimeField f(5);
    MessageArray w;
    w.f = 1;
    w.beta = 1;
    w.k = 2;
    w.q = 5;
    w.w.push_back(FMatrix::from_rows({{1, 2}}, 5));
    CodeArray c = encode_dss(w, example_code());
    CHECK(c.c.at(0, 0) == 1);
    CHECK(c.c.at(0, 1) == 2);
    CHECK(c.c.at(0, 2) == 3);
    CHECK(c.c.at(0, 3) == 3);

    DatabaseShard s3 = shard(c, 2);
    CHECK(s3.symbol(0, 0) == 3);
}

TEST_CASE("identity storage code keeps messages verbatim") {
    auto id = LinearCode::make(FMatrix::identity(3, 7));
    MessageArray w = MessageArray::random(2, 4, 3, PrimeField(7), 99);
    CodeArray c = encode_dss(w, id);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t t = 0; t < 4; ++t)
            for (std::size_t j = 0; j < 3; ++j) CHECK(c.c.at(m * 4 + t, j) == w.w[m].at(t, j));
}

TEST_CASE("zero messages encode to the zero array") {
    MessageArray w;
    w.f = 2;
    w.beta = 2;
    w.k = 2;
    w.q = 5;
    w.w.assign(2, FMatrix(2, 2, 5));
    CodeArray c = encode_dss(w, example_code());
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(c.c.at(i, j) == 0);
}

TEST_CASE("decoding any information set recovers the message row") {
    LinearCode code = example_code();
    Rng rng(5);
    for (int iter = 0; iter < 40; ++iter) {
        MessageArray w = MessageArray::random(1, 1, 2, PrimeField(5), rng.next());
        CodeArray c = encode_dss(w, code);
        for (const auto& info : information_sets(code)) {
            std::vector<std::uint32_t> vals(code.k);
            for (std::size_t x = 0; x < code.k; ++x) vals[x] = c.c.at(0, info[x]);
            auto m = solve(code.G.columns(info).transpose(), vals);
            REQUIRE(m.has_value());
            for (std::size_t x = 0; x < code.k; ++x) CHECK((*m)[x] == w.w[0].at(0, x));
        }
    }
}

TEST_CASE("shard bounds and layout") {
    MessageArray w = MessageArray::random(2, 3, 2, PrimeField(5), 17);
    CodeArray c = encode_dss(w, example_code());
    CHECK_THROWS_AS(shard(c, 4), Error);
    DatabaseShard s = shard(c, 1);
    CHECK(s.db == 1);
    for (std::size_t m = 0; m < 2; ++m)
        for (std::size_t t = 0; t < 3; ++t) CHECK(s.symbol(m, t) == c.c.at(m * 3 + t, 1));

    auto rep = LinearCode::make(FMatrix::from_rows({{1}}, 5));
    MessageArray w1 = MessageArray::random(1, 2, 1, PrimeField(5), 3);
    CodeArray c1 = encode_dss(w1, rep);
    DatabaseShard only = shard(c1, 0);
    CHECK(only.column.size() == 2); // n = 1: the shard is the whole array
}

TEST_CASE("candidate-function layout of the example") {
    FunctionSpec spec = example_spec();
    CHECK(spec.mu == 3);
    CHECK(spec.f == 4);
    CHECK(spec.r == 2);
    CHECK(spec.basis.basis == std::vector<std::size_t>{0, 1});
    CHECK(spec.is_dependent(2));
}

TEST_CASE("virtual symbols: identity rows pick stored rows") {
    LinearCode code = example_code();
    FunctionSpec spec = FunctionSpec::make(FMatrix::identity(4, 5));
    MessageArray w = MessageArray::random(4, 4, 2, PrimeField(5), 21);
    CodeArray c = encode_dss(w, code);
    Permutation pi = identity_perm(4);
    for (std::size_t j = 0; j < 4; ++j) {
        DatabaseShard s = shard(c, j);
        for (std::size_t vp = 0; vp < 4; ++vp)
            for (std::size_t t = 0; t < 4; ++t)
                CHECK(virtual_symbol(spec, vp, s, pi, t) == s.symbol(vp, t));
    }
}

TEST_CASE("virtual symbols respect the basis expansion pointwise") {
    // Row 3 of the example functions equals row 1 + row 2, so the same holds for
    // every virtual symbol at every database and row.
    LinearCode code = example_code();
    FunctionSpec spec = example_spec();
    PrimeField f(5);
    Rng rng(31);
    for (int iter = 0; iter < 20; ++iter) {
        MessageArray w = MessageArray::random(4, 8, 2, PrimeField(5), rng.next());
        CodeArray c = encode_dss(w, code);
        Permutation pi = Rng(rng.next()).permutation(8);
        for (std::size_t j = 0; j < 4; ++j) {
            DatabaseShard s = shard(c, j);
            for (std::size_t t = 0; t < 8; ++t) {
                std::uint32_t u1 = virtual_symbol(spec, 0, s, pi, t);
                std::uint32_t u2 = virtual_symbol(spec, 1, s, pi, t);
                std::uint32_t u3 = virtual_symbol(spec, 2, s, pi, t);
                CHECK(u3 == f.add(u1, u2));
            }
        }
    }
}

TEST_CASE("virtual symbol vectors are codewords of the storage code") {
    LinearCode code = example_code();
    FunctionSpec spec = example_spec();
    Rng rng(77);
    MessageArray w = MessageArray::random(4, 8, 2, PrimeField(5), rng.next());
    CodeArray c = encode_dss(w, code);
    Permutation pi = Rng(rng.next()).permutation(8);
    std::vector<DatabaseShard> shards;
    for (std::size_t j = 0; j < 4; ++j) shards.push_back(shard(c, j));
    auto info = information_sets(code)[0];
    for (std::size_t vp = 0; vp < 3; ++vp) {
        for (std::size_t t = 0; t < 8; ++t) {
            std::vector<std::uint32_t> vals(code.k);
            for (std::size_t x = 0; x < code.k; ++x)
                vals[x] = virtual_symbol(spec, vp, shards[info[x]], pi, t);
            auto m = solve(code.G.columns(info).transpose(), vals);
            REQUIRE(m.has_value());
            // The information set determines every other coordinate.
            PrimeField f(5);
            for (std::size_t j = 0; j < 4; ++j) {
                std::uint32_t acc = 0;
                for (std::size_t x = 0; x < code.k; ++x)
                    acc = f.add(acc, f.mul((*m)[x], code.G.at(x, j)));
                CHECK(acc == virtual_symbol(spec, vp, shards[j], pi, t));
            }
        }
    }
}

TEST_CASE("message space at q=3, f=2, L=1 has exactly nine equally likely states") {
    // The joint message space is enumerable: all 9 (W1, W2) pairs occur and
    // seeded random draws stay inside it.
    std::set<std::pair<std::uint32_t, std::uint32_t>> space;
    for (std::uint32_t a = 0; a < 3; ++a)
        for (std::uint32_t b = 0; b < 3; ++b) space.insert({a, b});
    CHECK(space.size() == 9);

    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        MessageArray w = MessageArray::random(2, 1, 1, PrimeField(3), seed);
        seen.insert({w.w[0].at(0, 0), w.w[1].at(0, 0)});
    }
    CHECK(seen == space);
}

TEST_CASE("message file round-trip") {
    PrimeField f(5);
    MessageArray w = MessageArray::random(3, 2, 4, f, 123);
    std::ostringstream os;
    w.save(os);
    std::istringstream is(os.str());
    MessageArray back = MessageArray::load(is, 3, 2, 4, f);
    for (std::size_t m = 0; m < 3; ++m) CHECK(back.w[m] == w.w[m]);

    std::istringstream bad("1 2 3\n");
    CHECK_THROWS_AS(MessageArray::load(bad, 1, 1, 4, f), Error);
}
