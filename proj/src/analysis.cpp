#include "plc/analysis.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "plc/rng.hpp"

namespace plc {

Instance Instance::make(std::uint32_t q, const std::vector<std::vector<long long>>& g_rows,
                        const std::vector<std::vector<long long>>& v_rows, std::size_t v_req,
                        const std::vector<std::vector<std::uint8_t>>& lambda_rows,
                        std::uint64_t seed, bool fixed_randomness) {
    PrimeField field(q);
    LinearCode code = LinearCode::make(FMatrix::from_rows(g_rows, q));
    FunctionSpec spec = FunctionSpec::make(FMatrix::from_rows(v_rows, q));
    if (v_req >= spec.mu) throw Error(Errc::InvalidParameters, "requested index exceeds mu");

    RateMatrix rate;
    if (lambda_rows.empty()) {
        auto found = find_rate_matrix(code);
        if (!found)
            throw Error(Errc::NotFound, "no rate matrix exists at kappa/nu = k/n for this code");
        rate = *found;
    } else {
        auto res = validate_rate_matrix(lambda_rows, code);
        if (std::holds_alternative<RateMatrixViolation>(res)) {
            const auto& viol = std::get<RateMatrixViolation>(res);
            throw Error(viol.code, viol.detail);
        }
        rate = std::get<RateMatrix>(res);
    }
    InterferencePair pair = interference_pair(rate);
    return Instance{std::move(field), std::move(code), std::move(spec), std::move(rate),
                    std::move(pair), v_req, seed, fixed_randomness};
}

Fraction plc_capacity(std::size_t n, std::size_t k, std::size_t r) {
    if (k < 1 || k > n || r < 1) throw Error(Errc::InvalidParameters, "need 1 <= k <= n, r >= 1");
    if (k == n) return Fraction(1, static_cast<long long>(r)); // degenerate limit
    Fraction ratio(static_cast<long long>(k), static_cast<long long>(n));
    return (Fraction::whole(1) - ratio) / (Fraction::whole(1) - ratio.pow(static_cast<unsigned>(r)));
}

Fraction mds_pir_capacity(std::size_t n, std::size_t k, std::size_t f) {
    if (f < 1) throw Error(Errc::InvalidParameters, "need f >= 1");
    return plc_capacity(n, k, f);
}

long long expected_download_cost(std::size_t n, std::size_t kappa, std::size_t nu, std::size_t mu,
                                 std::size_t r) {
    long long total = 0;
    for (std::size_t tau = 1; tau <= mu; ++tau) {
        long long types = binomial(static_cast<long long>(mu), static_cast<long long>(tau)) -
                          binomial(static_cast<long long>(mu - r), static_cast<long long>(tau));
        total += types *
                 ipow(static_cast<long long>(kappa), static_cast<unsigned>(mu - tau + 1)) *
                 ipow(static_cast<long long>(nu - kappa), static_cast<unsigned>(tau - 1));
    }
    return static_cast<long long>(n) * total;
}

AchievableRate achievable_rate(std::size_t kappa, std::size_t nu, std::size_t mu, std::size_t r) {
    if (kappa > nu || r > mu || r < 1)
        throw Error(Errc::InvalidParameters, "need kappa <= nu and 1 <= r <= mu");
    long long denom = expected_download_cost(nu, kappa, nu, mu, r); // n = nu cancels later
    Fraction sum_form(ipow(static_cast<long long>(kappa), 1) *
                          ipow(static_cast<long long>(nu), static_cast<unsigned>(mu)),
                      denom);
    Fraction closed = plc_capacity(nu, kappa, r);
    if (sum_form != closed)
        throw Error(Errc::InternalMismatch,
                    "per-round accounting " + sum_form.str() + " differs from closed form " +
                        closed.str());
    return {closed, sum_form};
}

namespace {

FMatrix oracle_function(const Instance& inst, const MessageArray& w) {
    PrimeField f(inst.field);
    FMatrix x(w.beta, w.k, w.q);
    for (std::size_t m = 0; m < w.f; ++m) {
        std::uint32_t c = inst.spec.v.at(inst.v, m);
        if (c == 0) continue;
        for (std::size_t t = 0; t < w.beta; ++t)
            for (std::size_t col = 0; col < w.k; ++col)
                x.set(t, col, f.add(x.at(t, col), f.mul(c, w.w[m].at(t, col))));
    }
    return x;
}

struct TrialOutcome {
    bool failed = false;
    Counterexample ce;
};

TrialOutcome run_trial(const Instance& inst, std::size_t trial, const MessageArray* fixed_w) {
    std::uint64_t trial_seed = Rng::derive(inst.seed, 0x7000 + trial);
    MessageArray w = fixed_w ? *fixed_w
                             : MessageArray::random(inst.spec.f, inst.beta(), inst.code.k,
                                                    inst.field, Rng::derive(trial_seed, 2));
    QueryPlan plan = inst.make_plan(inst.v, trial_seed);
    CodeArray coded = encode_dss(w, inst.code);
    std::vector<std::vector<std::uint32_t>> answers(inst.code.n);
    for (std::size_t j = 0; j < inst.code.n; ++j)
        answers[j] = answer(shard(coded, j), db_query_vectors(plan, inst.spec, j));
    FMatrix decoded = decode(answers, plan, inst.spec, inst.code, inst.pair);

    TrialOutcome out;
    auto ce = compare_to_oracle(inst, w, plan, decoded);
    if (ce) {
        out.failed = true;
        out.ce = *ce;
        out.ce.trial = trial;
        out.ce.trial_seed = trial_seed;
    }
    return out;
}

RecoveryReport run_recovery(const Instance& inst, const MessageArray* fixed_w, std::size_t trials,
                            Exec exec) {
    RecoveryReport rep;
    rep.trials = trials;
    rep.pass = true;
    std::vector<TrialOutcome> outcomes(trials);

    // Exceptions may not escape an OpenMP region; surface them as failures.
    auto guarded = [&](std::size_t i) {
        try {
            outcomes[i] = run_trial(inst, i, fixed_w);
        } catch (const std::exception&) {
            outcomes[i].failed = true;
            outcomes[i].ce = Counterexample{i, 0, 0, 0, 0, 0};
        }
    };

    if (exec == Exec::Parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < static_cast<long long>(trials); ++i)
            guarded(static_cast<std::size_t>(i));
#else
        for (std::size_t i = 0; i < trials; ++i) guarded(i);
#endif
    } else {
        for (std::size_t i = 0; i < trials; ++i) guarded(i);
    }

    for (const TrialOutcome& o : outcomes) {
        if (o.failed) {
            rep.pass = false;
            rep.first_failure = o.ce;
            break;
        }
    }
    return rep;
}

} // namespace

std::optional<Counterexample> compare_to_oracle(const Instance& inst, const MessageArray& w,
                                                const QueryPlan& plan, const FMatrix& decoded) {
    (void)plan;
    FMatrix want = oracle_function(inst, w);
    for (std::size_t t = 0; t < want.rows(); ++t)
        for (std::size_t col = 0; col < want.cols(); ++col)
            if (decoded.at(t, col) != want.at(t, col)) {
                Counterexample ce;
                ce.row = t;
                ce.col = col;
                ce.got = decoded.at(t, col);
                ce.want = want.at(t, col);
                return ce;
            }
    return std::nullopt;
}

RecoveryReport verify_recovery(const Instance& inst, std::size_t trials, Exec exec) {
    return run_recovery(inst, nullptr, trials, exec);
}

RecoveryReport verify_recovery_fixed(const Instance& inst, const MessageArray& w,
                                     std::size_t trials, Exec exec) {
    if (w.f != inst.spec.f || w.beta != inst.beta() || w.k != inst.code.k ||
        w.q != inst.field.modulus())
        throw Error(Errc::InvalidParameters, "message array dimensions do not match the instance");
    return run_recovery(inst, &w, trials, exec);
}

StructuralReport verify_privacy_structural(const Instance& inst, bool skip_message_symmetry) {
    StructuralReport rep;
    rep.pass = true;
    std::vector<TypeProfile> profiles;
    for (std::size_t req = 0; req < inst.spec.mu; ++req) {
        QGenOptions opt;
        opt.fixed_randomness = true; // structure does not depend on randomness
        opt.skip_message_symmetry = skip_message_symmetry;
        QueryPlan plan = q_gen(req, inst.spec, inst.rate, inst.pair, inst.seed, opt);
        sign_and_prune(plan, inst.spec, inst.code, inst.pair);
        profiles.push_back(type_profile(plan));
    }
    for (std::size_t req = 1; req < profiles.size(); ++req) {
        for (std::size_t j = 0; j < inst.code.n; ++j) {
            if (profiles[req][j] == profiles[0][j]) continue;
            rep.pass = false;
            std::ostringstream os;
            os << "database " << (j + 1) << ": profile for v=" << (req + 1)
               << " differs from v=1";
            for (const auto& [key, cnt] : profiles[req][j]) {
                auto it = profiles[0][j].find(key);
                std::size_t base = it == profiles[0][j].end() ? 0 : it->second;
                if (base == cnt) continue;
                os << "; round " << key.first << " type {";
                for (std::size_t x = 0; x < key.second.size(); ++x)
                    os << (x ? "," : "") << (key.second[x] + 1);
                os << "} count " << cnt << " vs " << base;
            }
            for (const auto& [key, cnt] : profiles[0][j]) {
                if (profiles[req][j].count(key)) continue;
                os << "; round " << key.first << " type {";
                for (std::size_t x = 0; x < key.second.size(); ++x)
                    os << (x ? "," : "") << (key.second[x] + 1);
                os << "} count 0 vs " << cnt;
            }
            rep.detail = os.str();
            return rep;
        }
    }
    return rep;
}

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, bool& overflow) {
    if (a != 0 && b > ~0ULL / a) {
        overflow = true;
        return ~0ULL;
    }
    return a * b;
}

std::string serialize_vectors(const std::vector<std::vector<std::uint32_t>>& vecs) {
    std::string s;
    s.reserve(vecs.size() * (vecs.empty() ? 1 : vecs[0].size() + 1) * 2);
    for (const auto& v : vecs) {
        for (std::uint32_t x : v) {
            s.append(std::to_string(x));
            s.push_back(',');
        }
        s.push_back('|');
    }
    return s;
}

using Tally = std::map<std::string, std::uint64_t>;

// How the sign table is drawn: independent per-symbol flips when only the
// first round prunes, product-form flips otherwise (mirrors build time).
enum class SigmaSpace { Fixed, Independent, Product };

SigmaTable sigma_from_bits(SigmaSpace space, std::size_t mu, std::size_t beta,
                           std::uint64_t bits) {
    SigmaTable sg;
    sg.mu = mu;
    sg.beta = beta;
    sg.s.assign(mu * beta, 1);
    if (space == SigmaSpace::Independent) {
        for (std::size_t x = 0; x < mu * beta; ++x)
            if ((bits >> x) & 1ULL) sg.s[x] = -1;
    } else if (space == SigmaSpace::Product) {
        for (std::size_t vp = 0; vp < mu; ++vp)
            for (std::size_t t = 0; t < beta; ++t) {
                int g = ((bits >> vp) & 1ULL) ? -1 : 1;
                int h = ((bits >> (mu + t)) & 1ULL) ? -1 : 1;
                sg.s[vp * beta + t] = static_cast<std::int8_t>(g * h);
            }
    }
    return sg;
}

void enumerate_shard(const Instance& inst, const QueryPlan& plan,
                     const std::vector<Permutation>& perms, std::size_t lo, std::size_t hi,
                     std::uint64_t sigma_count, SigmaSpace space, std::vector<Tally>& per_db) {
    std::size_t mu = plan.mu, beta = plan.beta;
    for (std::size_t p = lo; p < hi; ++p) {
        const Permutation& pi = perms[p];
        for (std::uint64_t bits = 0; bits < sigma_count; ++bits) {
            SigmaTable sg = sigma_from_bits(space, mu, beta, bits);
            for (std::size_t j = 0; j < inst.code.n; ++j) {
                auto vecs = db_query_vectors_with(plan, inst.spec, j, pi, sg);
                per_db[j][serialize_vectors(vecs)]++;
            }
        }
    }
}

} // namespace

ExhaustiveReport verify_privacy_exhaustive(const Instance& inst, std::uint64_t budget, Exec exec,
                                           bool diagnostic_fixed_signs) {
    ExhaustiveReport rep;
    std::size_t mu = inst.spec.mu;
    std::size_t beta = inst.beta();

    SigmaSpace space = SigmaSpace::Independent;
    if (diagnostic_fixed_signs)
        space = SigmaSpace::Fixed;
    else if (mu - inst.spec.r > 1 && inst.spec.r > 1)
        space = SigmaSpace::Product;
    std::size_t sigma_bits = space == SigmaSpace::Fixed  ? 0
                             : space == SigmaSpace::Product ? mu + beta
                                                            : mu * beta;

    bool overflow = false;
    std::uint64_t n_perm = 1;
    for (std::size_t x = 2; x <= beta; ++x) n_perm = checked_mul(n_perm, x, overflow);
    std::uint64_t n_sigma = 1;
    if (sigma_bits >= 63)
        overflow = true;
    else
        n_sigma = 1ULL << sigma_bits;
    std::uint64_t states = checked_mul(n_perm, n_sigma, overflow);
    if (overflow || states > budget)
        throw Error(Errc::BudgetExceeded,
                    "exhaustive enumeration needs " +
                        (overflow ? std::string("more than 2^64") : std::to_string(states)) +
                        " states, budget is " + std::to_string(budget));
    rep.states = states;

    std::vector<Permutation> perms;
    Permutation pi(beta);
    for (std::size_t x = 0; x < beta; ++x) pi[x] = x;
    do perms.push_back(pi);
    while (std::next_permutation(pi.begin(), pi.end()));

    // One structural plan per requested index; only (pi, sigma) vary.
    std::vector<std::vector<Tally>> tallies(mu, std::vector<Tally>(inst.code.n));
    for (std::size_t req = 0; req < mu; ++req) {
        QGenOptions opt;
        opt.fixed_randomness = true;
        QueryPlan plan = q_gen(req, inst.spec, inst.rate, inst.pair, inst.seed, opt);
        sign_and_prune(plan, inst.spec, inst.code, inst.pair);

        if (exec == Exec::Parallel) {
#ifdef _OPENMP
            int threads = omp_get_max_threads();
            std::vector<std::vector<Tally>> partial(threads,
                                                    std::vector<Tally>(inst.code.n));
#pragma omp parallel num_threads(threads)
            {
                int tid = omp_get_thread_num();
                std::size_t chunk = (perms.size() + threads - 1) / threads;
                std::size_t lo = std::min(perms.size(), chunk * static_cast<std::size_t>(tid));
                std::size_t hi = std::min(perms.size(), lo + chunk);
                enumerate_shard(inst, plan, perms, lo, hi, n_sigma, space,
                                partial[tid]);
            }
            for (const auto& part : partial)
                for (std::size_t j = 0; j < inst.code.n; ++j)
                    for (const auto& [key, cnt] : part[j]) tallies[req][j][key] += cnt;
#else
            enumerate_shard(inst, plan, perms, 0, perms.size(), n_sigma, space,
                            tallies[req]);
#endif
        } else {
            enumerate_shard(inst, plan, perms, 0, perms.size(), n_sigma, space,
                            tallies[req]);
        }
    }

    rep.pass = true;
    rep.tv = Fraction::whole(0);
    for (std::size_t req = 1; req < mu; ++req) {
        for (std::size_t j = 0; j < inst.code.n; ++j) {
            if (tallies[req][j] == tallies[0][j]) continue;
            rep.pass = false;
            // Exact total-variation distance between the two distributions.
            std::uint64_t l1 = 0;
            for (const auto& [key, cnt] : tallies[req][j]) {
                auto it = tallies[0][j].find(key);
                std::uint64_t base = it == tallies[0][j].end() ? 0 : it->second;
                l1 += cnt > base ? cnt - base : base - cnt;
            }
            for (const auto& [key, cnt] : tallies[0][j])
                if (!tallies[req][j].count(key)) l1 += cnt;
            Fraction tv(static_cast<long long>(l1), 2 * static_cast<long long>(states));
            if (rep.tv < tv) {
                rep.tv = tv;
                std::ostringstream os;
                os << "database " << (j + 1) << ": query distribution for v=" << (req + 1)
                   << " differs from v=1, TV = " << tv.str();
                rep.detail = os.str();
            }
        }
    }
    return rep;
}

bool verify_function_uniformity(const FMatrix& v, std::size_t h) {
    FunctionSpec spec = FunctionSpec::make(v);
    if (h < 1 || h > spec.r) throw Error(Errc::InvalidParameters, "need 1 <= h <= rank");
    std::uint32_t q = v.modulus();
    PrimeField field(q);
    std::size_t f = spec.f;
    double states = 1;
    for (std::size_t x = 0; x < f; ++x) states *= q;
    if (states > 2e7) throw Error(Errc::BudgetExceeded, "q^f enumeration too large");

    std::map<std::vector<std::uint32_t>, std::uint64_t> counts;
    std::vector<std::uint32_t> w(f, 0);
    std::uint64_t total = static_cast<std::uint64_t>(states);
    for (std::uint64_t it = 0; it < total; ++it) {
        std::uint64_t x = it;
        for (std::size_t m = 0; m < f; ++m) {
            w[m] = static_cast<std::uint32_t>(x % q);
            x /= q;
        }
        std::vector<std::uint32_t> tuple(h);
        for (std::size_t i = 0; i < h; ++i) {
            std::size_t row = spec.basis.basis[i];
            std::uint64_t acc = 0;
            for (std::size_t m = 0; m < f; ++m)
                acc = (acc + std::uint64_t(v.at(row, m)) * w[m]) % q;
            tuple[i] = static_cast<std::uint32_t>(acc);
        }
        counts[tuple]++;
    }
    std::uint64_t outcomes = 1;
    for (std::size_t i = 0; i < h; ++i) outcomes *= q;
    if (counts.size() != outcomes) return false;
    std::uint64_t expected = total / outcomes;
    for (const auto& [tuple, cnt] : counts)
        if (cnt != expected) return false;
    return true;
}

RateReport make_rate_report(const Instance& inst, const QueryPlan& plan) {
    RateReport r;
    r.n = inst.code.n;
    r.k = inst.code.k;
    r.kappa = inst.rate.kappa;
    r.nu = inst.rate.nu;
    r.f = inst.spec.f;
    r.mu = inst.spec.mu;
    r.r = inst.spec.r;
    r.q = inst.field.modulus();
    r.seed = inst.seed;
    r.v = inst.v + 1;
    r.message_length = inst.message_length();
    r.download = download_cost(plan);
    r.rate = Fraction(static_cast<long long>(r.message_length), static_cast<long long>(r.download));
    r.capacity = plc_capacity(r.n, r.k, r.r);
    r.achieves_capacity = r.rate == r.capacity;
    r.lambda_capacity_achieving = inst.rate.capacity_achieving;
    r.per_round = plan.per_round_counts();
    return r;
}

std::string render_human(const RateReport& r) {
    std::ostringstream os;
    os << "PLC simulation report\n"
       << "  code            [" << r.n << "," << r.k << "] over GF(" << r.q << ")\n"
       << "  rate matrix     kappa=" << r.kappa << " nu=" << r.nu
       << (r.lambda_capacity_achieving ? " (capacity-achieving)" : " (not capacity-achieving)")
       << "\n"
       << "  functions       f=" << r.f << " mu=" << r.mu << " rank=" << r.r << " v=" << r.v << "\n"
       << "  seed            " << r.seed << "\n"
       << "  L (function)    " << r.message_length << "\n"
       << "  D (download)    " << r.download << "\n";
    os << "  per-round       ";
    for (std::size_t i = 0; i < r.per_round.size(); ++i)
        os << (i ? " " : "") << "tau" << (i + 1) << "=" << r.per_round[i];
    os << "\n";
    os << "  rate            " << r.rate.str() << " (" << r.rate.approx() << ")\n"
       << "  capacity        " << r.capacity.str() << " (" << r.capacity.approx() << ")\n"
       << "  rate==capacity  " << (r.achieves_capacity ? "yes" : "no") << "\n";
    return os.str();
}

std::string render_machine(const RateReport& r) {
    std::ostringstream os;
    os << "n=" << r.n << "\nk=" << r.k << "\nq=" << r.q << "\nkappa=" << r.kappa
       << "\nnu=" << r.nu << "\nf=" << r.f << "\nmu=" << r.mu << "\nr=" << r.r << "\nv=" << r.v
       << "\nseed=" << r.seed << "\nL=" << r.message_length << "\nD=" << r.download
       << "\nrate=" << r.rate.str() << "\ncapacity=" << r.capacity.str()
       << "\nmatch=" << (r.achieves_capacity ? "true" : "false")
       << "\nlambda_capacity_achieving=" << (r.lambda_capacity_achieving ? "true" : "false")
       << "\n";
    for (std::size_t i = 0; i < r.per_round.size(); ++i)
        os << "round" << (i + 1) << "=" << r.per_round[i] << "\n";
    return os.str();
}

} // namespace plc
