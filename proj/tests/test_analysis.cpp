#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numeric>

#include "plc/analysis.hpp"
#include "plc/rng.hpp"

using namespace plc;

namespace {

Instance example_instance(std::size_t v, std::uint64_t seed) {
    return Instance::make(5, {{1, 0, 1, 1}, {0, 1, 1, 1}},
                          {{1, 0, 0, 1}, {1, 1, 0, 0}, {2, 1, 0, 1}}, v,
                          {{1, 0, 1, 0}, {0, 1, 0, 1}}, seed);
}

Instance tiny_instance(std::uint64_t seed) {
    return Instance::make(3, {{1, 1}}, {{1, 0}, {0, 1}}, 0, {}, seed);
}

} // namespace

TEST_CASE("capacity values") {
    CHECK(plc_capacity(4, 2, 2) == Fraction(2, 3));
    CHECK(plc_capacity(7, 3, 1) == Fraction(1, 1));
    CHECK(plc_capacity(4, 2, 4) == Fraction(8, 15));
    CHECK(mds_pir_capacity(2, 1, 2) == Fraction(2, 3));
    CHECK(mds_pir_capacity(9, 4, 1) == Fraction(1, 1));
    // Degenerate full-rate storage: the limit value 1/r.
    CHECK(plc_capacity(3, 3, 4) == Fraction(1, 4));
    CHECK_THROWS_AS(plc_capacity(2, 3, 1), Error);
    CHECK_THROWS_AS(plc_capacity(2, 0, 1), Error);
    CHECK_THROWS_AS(plc_capacity(2, 1, 0), Error);
}

TEST_CASE("the two capacity formulas coincide") {
    for (std::size_t n = 1; n <= 10; ++n)
        for (std::size_t k = 1; k <= n; ++k)
            for (std::size_t f = 1; f <= 6; ++f)
                CHECK(plc_capacity(n, k, f) == mds_pir_capacity(n, k, f));
}

TEST_CASE("capacity strictly decreases in the rank for k < n") {
    for (std::size_t n = 2; n <= 10; ++n)
        for (std::size_t k = 1; k < n; ++k)
            for (std::size_t r = 1; r < 6; ++r)
                CHECK(plc_capacity(n, k, r + 1) < plc_capacity(n, k, r));
}

TEST_CASE("achievable rate examples") {
    CHECK(achievable_rate(1, 2, 3, 2).value == Fraction(2, 3));
    CHECK(achievable_rate(2, 3, 2, 2).value == Fraction(3, 5));
    for (std::size_t mu = 1; mu <= 5; ++mu)
        CHECK(achievable_rate(1, 2, mu, mu).value == mds_pir_capacity(2, 1, mu));
    CHECK_THROWS_AS(achievable_rate(3, 2, 2, 2), Error);
}

TEST_CASE("per-round accounting meets the closed form across the grid") {
    for (std::size_t n = 2; n <= 10; ++n) {
        for (std::size_t k = 1; k < n; ++k) {
            std::size_t g = std::gcd(n, k);
            std::size_t kappa = k / g, nu = n / g;
            for (std::size_t r = 1; r <= 6; ++r) {
                for (std::size_t mu = r; mu <= r + 2; ++mu) {
                    AchievableRate ar = achievable_rate(kappa, nu, mu, r);
                    CHECK(ar.value == plc_capacity(n, k, r));
                    CHECK(ar.sum_form == ar.value);
                }
            }
        }
    }
}

TEST_CASE("expected download cost matches executed plans") {
    struct Cfg {
        std::uint32_t q;
        std::vector<std::vector<long long>> g;
        std::size_t mu, r;
    };
    // mu = r and mu = r + 1 shapes over the small code pool.
    for (const Cfg& c : std::vector<Cfg>{
             {5, {{1, 1}}, 2, 2},
             {5, {{1, 1}}, 3, 2},
             {5, {{1, 1, 1}}, 2, 2},
             {5, {{1, 0, 1}, {0, 1, 1}}, 2, 1},
             {5, {{1, 0, 1, 1}, {0, 1, 1, 1}}, 3, 2},
         }) {
        // Rank-r function matrix with mu rows: identity prefix plus sums.
        std::size_t f = c.r;
        std::vector<std::vector<long long>> vrows;
        for (std::size_t i = 0; i < c.mu; ++i) {
            std::vector<long long> row(f, 0);
            if (i < c.r)
                row[i] = 1;
            else
                for (std::size_t x = 0; x < f; ++x) row[x] = 1 + static_cast<long long>(i + x) % 2;
            vrows.push_back(row);
        }
        Instance inst = Instance::make(c.q, c.g, vrows, 0, {}, 3);
        REQUIRE(inst.spec.r == c.r);
        QueryPlan plan = inst.make_plan(0, 3);
        long long want = expected_download_cost(inst.code.n, inst.rate.kappa, inst.rate.nu,
                                                c.mu, c.r);
        CHECK(download_cost(plan) == static_cast<std::size_t>(want));
        RateReport rep = make_rate_report(inst, plan);
        CHECK(rep.rate == plc_capacity(inst.code.n, inst.code.k, c.r));
    }
}

TEST_CASE("recovery verification passes on the example, serial and parallel agree") {
    for (std::size_t v = 0; v < 3; ++v) {
        Instance inst = example_instance(v, 2027);
        RecoveryReport serial = verify_recovery(inst, 24, Exec::Serial);
        RecoveryReport parallel = verify_recovery(inst, 24, Exec::Parallel);
        CHECK(serial.pass);
        CHECK(parallel.pass);
        CHECK(serial.trials == parallel.trials);
    }
}

TEST_CASE("recovery over fixed message contents") {
    Instance inst = example_instance(2, 8);
    MessageArray w = MessageArray::random(4, inst.beta(), 2, inst.field, 3);
    CHECK(verify_recovery_fixed(inst, w, 6, Exec::Serial).pass);

    MessageArray bad = MessageArray::random(3, inst.beta(), 2, inst.field, 3);
    CHECK_THROWS_AS(verify_recovery_fixed(inst, bad, 1, Exec::Serial), Error);
}

TEST_CASE("recovery verification on the PIR special case") {
    Instance inst = Instance::make(5, {{1, 0, 1, 1}, {0, 1, 1, 1}}, {{1, 0}, {0, 1}}, 0,
                                   {{1, 0, 1, 0}, {0, 1, 0, 1}}, 5);
    CHECK(verify_recovery(inst, 16, Exec::Serial).pass);
}

TEST_CASE("a corrupted answer yields a located counterexample") {
    Instance inst = example_instance(0, 99);
    QueryPlan plan = inst.make_plan(0, 99);
    MessageArray w = MessageArray::random(4, plan.beta, 2, inst.field, 98);
    CodeArray coded = encode_dss(w, inst.code);
    std::vector<std::vector<std::uint32_t>> answers(4);
    for (std::size_t j = 0; j < 4; ++j)
        answers[j] = answer(shard(coded, j), db_query_vectors(plan, inst.spec, j));
    answers[0][0] = (answers[0][0] + 3) % 5;
    bool located = false;
    try {
        FMatrix x = decode(answers, plan, inst.spec, inst.code, inst.pair);
        auto ce = compare_to_oracle(inst, w, plan, x);
        located = ce.has_value();
    } catch (const Error& e) {
        located = e.code() == Errc::DecodeFailure;
    }
    CHECK(located);
}

TEST_CASE("structural privacy holds on the example and catches a skipped M-Sym") {
    Instance inst = example_instance(0, 1);
    StructuralReport ok = verify_privacy_structural(inst);
    CHECK(ok.pass);

    StructuralReport broken = verify_privacy_structural(inst, true);
    CHECK_FALSE(broken.pass);
    CHECK(!broken.detail.empty());
}

TEST_CASE("structural privacy is vacuous for a single candidate function") {
    Instance inst = Instance::make(5, {{1, 1}}, {{1, 1}}, 0, {}, 1);
    CHECK(verify_privacy_structural(inst).pass);
}

TEST_CASE("exhaustive privacy on the tiny replicated configuration") {
    Instance inst = tiny_instance(1);
    REQUIRE(inst.beta() == 4);
    ExhaustiveReport rep = verify_privacy_exhaustive(inst, 1ULL << 24, Exec::Serial);
    CHECK(rep.pass);
    CHECK(rep.tv == Fraction::whole(0));
    CHECK(rep.states == 24ULL * 256ULL);

    ExhaustiveReport par = verify_privacy_exhaustive(inst, 1ULL << 24, Exec::Parallel);
    CHECK(par.pass == rep.pass);
    CHECK(par.tv == rep.tv);
}

TEST_CASE("exhaustive privacy is vacuous with a single candidate function") {
    Instance inst = Instance::make(5, {{1, 1}}, {{2, 1}}, 0, {}, 1);
    ExhaustiveReport rep = verify_privacy_exhaustive(inst, 1ULL << 20, Exec::Serial);
    CHECK(rep.pass);
    CHECK(rep.tv == Fraction::whole(0));
}

TEST_CASE("single database, single message: rate 1 and trivially private") {
    Instance inst = Instance::make(5, {{1}}, {{1}}, 0, {}, 1);
    QueryPlan plan = inst.make_plan(0, 1);
    RateReport rep = make_rate_report(inst, plan);
    CHECK(rep.message_length == 1);
    CHECK(rep.download == 1);
    CHECK(rep.rate == Fraction(1, 1));
    CHECK(verify_recovery(inst, 10, Exec::Serial).pass);
    CHECK(verify_privacy_structural(inst).pass);
}

TEST_CASE("full-rate storage degenerates to the 1/r limit") {
    // k = n: only first-round singletons survive, r of them per database.
    Instance inst = Instance::make(5, {{1, 0}, {0, 1}}, {{1, 0}, {0, 1}, {1, 1}}, 0, {}, 2);
    REQUIRE(inst.rate.nu == 1);
    QueryPlan plan = inst.make_plan(0, 2);
    RateReport rep = make_rate_report(inst, plan);
    CHECK(rep.rate == Fraction(1, 2)); // r = 2
    CHECK(rep.capacity == Fraction(1, 2));
    CHECK(verify_recovery(inst, 10, Exec::Serial).pass);
}

TEST_CASE("exhaustive privacy rejects a fixed all-positive sign table") {
    Instance inst = tiny_instance(1);
    ExhaustiveReport rep = verify_privacy_exhaustive(inst, 1ULL << 24, Exec::Serial, true);
    CHECK_FALSE(rep.pass);
    CHECK(Fraction::whole(0) < rep.tv);
}

TEST_CASE("exhaustive privacy respects the enumeration budget") {
    Instance inst = example_instance(0, 1); // beta = 8: 8! * 2^24 states
    CHECK_THROWS_AS(verify_privacy_exhaustive(inst, 1000, Exec::Serial), Error);
}

TEST_CASE("pivot-function tuples are exactly uniform") {
    CHECK(verify_function_uniformity(FMatrix::from_rows({{1, 0}, {1, 1}}, 3), 2));
    CHECK(verify_function_uniformity(FMatrix::from_rows({{2, 1, 1}}, 5), 1));
    // The example's function matrix reduced mod 3.
    FMatrix v3 = FMatrix::from_rows({{1, 0, 0, 1}, {1, 1, 0, 0}, {2, 1, 0, 1}}, 3);
    CHECK(verify_function_uniformity(v3, 2));
    CHECK(verify_function_uniformity(v3, 1));

    Rng rng(555);
    int tested = 0;
    while (tested < 20) {
        std::uint32_t q = rng.coin() ? 3 : 5;
        std::size_t f = 1 + rng.below(4);
        std::size_t mu = 1 + rng.below(3);
        FMatrix v(mu, f, q);
        bool nonzero = false;
        for (std::size_t i = 0; i < mu; ++i)
            for (std::size_t j = 0; j < f; ++j) {
                std::uint32_t x = static_cast<std::uint32_t>(rng.below(q));
                v.set(i, j, x);
                nonzero |= x != 0;
            }
        if (!nonzero) continue;
        FunctionSpec spec = FunctionSpec::make(v);
        for (std::size_t h = 1; h <= spec.r; ++h) CHECK(verify_function_uniformity(v, h));
        ++tested;
    }
}

TEST_CASE("rate report for the example") {
    Instance inst = example_instance(0, 31);
    QueryPlan plan = inst.make_plan(0, 31);
    RateReport rep = make_rate_report(inst, plan);
    CHECK(rep.message_length == 16);
    CHECK(rep.download == 24);
    CHECK(rep.rate == Fraction(2, 3));
    CHECK(rep.capacity == Fraction(2, 3));
    CHECK(rep.achieves_capacity);
    CHECK(rep.lambda_capacity_achieving);
    CHECK(rep.per_round == std::vector<std::size_t>{8, 12, 4});

    std::string machine = render_machine(rep);
    CHECK(machine.find("rate=2/3") != std::string::npos);
    CHECK(machine.find("capacity=2/3") != std::string::npos);
    CHECK(machine.find("match=true") != std::string::npos);
    CHECK(machine.find("D=24") != std::string::npos);
    CHECK(machine.find("L=16") != std::string::npos);
    std::string human = render_human(rep);
    CHECK(human.find("2/3") != std::string::npos);
}

TEST_CASE("reports replay byte-identically from the same seed") {
    Instance a = example_instance(1, 77), b = example_instance(1, 77);
    QueryPlan pa = a.make_plan(1, 77), pb = b.make_plan(1, 77);
    CHECK(render_machine(make_rate_report(a, pa)) == render_machine(make_rate_report(b, pb)));
    CHECK(dump_plan(pa) == dump_plan(pb));
}
