#include "plc/protocol.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "plc/rng.hpp"

namespace plc {

std::vector<std::size_t> TauSum::type() const {
    std::vector<std::size_t> t;
    t.reserve(terms.size());
    for (const Term& x : terms) t.push_back(x.func);
    return t;
}

const Term& TauSum::fresh(std::size_t v) const {
    for (const Term& x : terms)
        if (x.func == v) return x;
    throw Error(Errc::InternalMismatch, "desired sum lacks the requested function");
}

bool canonical_less(const TauSum& a, const TauSum& b) {
    if (a.round != b.round) return a.round < b.round;
    auto ta = a.type(), tb = b.type();
    if (ta != tb) return ta < tb;
    std::vector<std::size_t> ra, rb;
    for (const Term& x : a.terms) ra.push_back(x.row);
    for (const Term& x : b.terms) rb.push_back(x.row);
    if (ra != rb) return ra < rb;
    return a.block < b.block;
}

std::size_t QueryPlan::total_queries() const {
    std::size_t c = 0;
    for (const auto& qs : queries) c += qs.size();
    return c;
}

std::vector<std::size_t> QueryPlan::per_round_counts() const {
    std::vector<std::size_t> c(mu, 0);
    for (const auto& qs : queries)
        for (const TauSum& s : qs) c[s.round - 1]++;
    return c;
}

namespace {

void sort_terms(std::vector<Term>& terms) {
    std::sort(terms.begin(), terms.end(),
              [](const Term& a, const Term& b) { return a.func < b.func; });
}

// alpha_tau = kappa^(mu-1) + sum_{h=1}^{tau-1} C(mu-1,h) kappa^(mu-h-1) (nu-kappa)^h
std::vector<long long> alpha_sequence(std::size_t mu, std::size_t kappa, std::size_t nu) {
    std::vector<long long> alpha(mu + 1, 0);
    long long base = ipow(static_cast<long long>(kappa), static_cast<unsigned>(mu - 1));
    for (std::size_t tau = 1; tau <= mu; ++tau) {
        long long a = base;
        for (std::size_t h = 1; h + 1 <= tau; ++h)
            a += binomial(static_cast<long long>(mu - 1), static_cast<long long>(h)) *
                 ipow(static_cast<long long>(kappa), static_cast<unsigned>(mu - h - 1)) *
                 ipow(static_cast<long long>(nu - kappa), static_cast<unsigned>(h));
        alpha[tau] = a;
    }
    return alpha;
}

std::string sum_sig(const TauSum& s) {
    std::ostringstream os;
    os << s.block << '|' << s.round;
    for (const Term& t : s.terms) os << '|' << t.func << ',' << t.row << ',' << t.sign;
    return os.str();
}

std::string si_sig(const SiRef& r) {
    std::ostringstream os;
    os << r.block << '|' << r.round;
    for (const Term& t : r.terms) os << '|' << t.func << ',' << t.row << ',' << t.sign;
    return os.str();
}

} // namespace

std::pair<std::vector<TauSum>, std::vector<TauSum>>
initial_round(std::size_t u, long long alpha1, std::size_t j, std::size_t v, std::size_t mu) {
    std::vector<TauSum> desired, undesired;
    for (long long l = 0; l < alpha1; ++l) {
        std::size_t row = static_cast<std::size_t>(u * alpha1 + l);
        desired.push_back({j, 1, u, Kind::Desired, {{v, row, +1}}, std::nullopt});
        for (std::size_t vp = 0; vp < mu; ++vp) {
            if (vp == v) continue;
            undesired.push_back({j, 1, u, Kind::Undesired, {{vp, row, +1}}, std::nullopt});
        }
    }
    return {std::move(desired), std::move(undesired)};
}

std::vector<TauSum> desired_q(std::size_t u, long long alpha_prev, long long alpha_tau,
                              std::size_t j, std::size_t v, std::size_t nu, std::size_t round) {
    std::vector<TauSum> out;
    for (long long l = alpha_prev; l < alpha_tau; ++l) {
        std::size_t row = static_cast<std::size_t>(l * static_cast<long long>(nu) + u);
        out.push_back({j, round, u, Kind::Desired, {{v, row, +1}}, std::nullopt});
    }
    return out;
}

std::vector<TauSum> exploit_si(std::size_t u,
                               const std::vector<std::vector<TauSum>>& undesired_by_db,
                               const InterferencePair& pair, std::size_t j) {
    for (std::size_t i = 0; i < pair.a.rows; ++i) {
        for (std::size_t jp = 0; jp < pair.a.cols; ++jp) {
            if (jp == j || pair.a.at(i, jp) != u) continue;
            std::vector<TauSum> out = undesired_by_db[jp];
            for (TauSum& s : out) s.db = j;
            return out;
        }
    }
    throw Error(Errc::NoSource, "block " + std::to_string(u + 1) +
                                    " has no source database outside column " + std::to_string(j + 1));
}

void merge_side_information(std::vector<std::vector<TauSum>>& desired_per_block,
                            const std::vector<TauSum>& si_union, std::size_t kappa,
                            bool lenient) {
    std::vector<TauSum> pool = si_union;
    std::sort(pool.begin(), pool.end(), canonical_less);

    // Each residual type is split evenly across the kappa parts; a ragged
    // split would starve some block of a type and break message symmetry.
    std::vector<std::vector<TauSum>> parts(kappa);
    std::size_t i = 0;
    while (i < pool.size()) {
        std::size_t e = i;
        while (e < pool.size() && pool[e].type() == pool[i].type()) ++e;
        std::size_t run = e - i;
        if (run % kappa != 0)
            throw Error(Errc::NotDivisible,
                        "side-information type count " + std::to_string(run) +
                            " not divisible by kappa = " + std::to_string(kappa));
        std::size_t chunk = run / kappa;
        for (std::size_t g = 0; g < kappa; ++g)
            for (std::size_t x = 0; x < chunk; ++x) parts[g].push_back(pool[i + g * chunk + x]);
        i = e;
    }

    for (std::size_t g = 0; g < kappa; ++g) {
        std::vector<TauSum>& fresh = desired_per_block[g];
        std::sort(fresh.begin(), fresh.end(), canonical_less);
        if (parts[g].size() != fresh.size()) {
            if (!lenient)
                throw Error(Errc::InternalMismatch,
                            "side-information part size " + std::to_string(parts[g].size()) +
                                " differs from fresh desired count " + std::to_string(fresh.size()));
        }
        std::size_t m = std::min(parts[g].size(), fresh.size());
        for (std::size_t x = 0; x < m; ++x) {
            TauSum& d = fresh[x];
            const TauSum& s = parts[g][x];
            SiRef ref{s.block, s.round, s.terms};
            for (const Term& t : s.terms) d.terms.push_back({t.func, t.row, -t.sign});
            sort_terms(d.terms);
            d.round = s.round + 1;
            d.si = ref;
        }
    }
}

std::vector<TauSum> m_sym(const std::vector<TauSum>& desired, std::size_t j, std::size_t v,
                          std::size_t round, std::size_t mu) {
    std::vector<TauSum> out;
    if (desired.empty()) return out;
    std::size_t block = desired[0].block;

    std::map<std::vector<std::size_t>, std::vector<const TauSum*>> groups;
    for (const TauSum& d : desired) {
        std::vector<std::size_t> residual;
        for (const Term& t : d.terms)
            if (t.func != v) residual.push_back(t.func);
        groups[residual].push_back(&d);
    }
    for (auto& [res, g] : groups)
        std::sort(g.begin(), g.end(), [&](const TauSum* a, const TauSum* b) {
            return a->fresh(v).row < b->fresh(v).row;
        });
    std::size_t w_count = groups.begin()->second.size();
    for (const auto& [res, g] : groups)
        if (g.size() != w_count)
            throw Error(Errc::InternalMismatch, "uneven residual groups in message symmetry");

    // Lexicographic tau-subsets of [0, mu) excluding v.
    std::vector<std::size_t> pool;
    for (std::size_t x = 0; x < mu; ++x)
        if (x != v) pool.push_back(x);
    if (pool.size() < round) return out;
    std::vector<std::size_t> idx(round);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
        std::vector<std::size_t> type(round);
        for (std::size_t z = 0; z < round; ++z) type[z] = pool[idx[z]];
        for (std::size_t w = 0; w < w_count; ++w) {
            TauSum s{j, round, block, Kind::Undesired, {}, std::nullopt};
            for (std::size_t z = 0; z < round; ++z) {
                std::vector<std::size_t> residual;
                for (std::size_t x = 0; x < round; ++x)
                    if (x != z) residual.push_back(type[x]);
                auto it = groups.find(residual);
                if (it == groups.end())
                    throw Error(Errc::InternalMismatch, "missing residual group in message symmetry");
                std::size_t row = it->second[w]->fresh(v).row;
                s.terms.push_back({type[z], row, (z % 2 == 0) ? +1 : -1});
            }
            sort_terms(s.terms);
            out.push_back(std::move(s));
        }
        // next subset
        std::size_t z = round;
        while (z-- > 0) {
            if (idx[z] + (round - z) < pool.size()) {
                ++idx[z];
                for (std::size_t y = z + 1; y < round; ++y) idx[y] = idx[y - 1] + 1;
                break;
            }
            if (z == 0) return out;
        }
    }
}

QueryPlan q_gen(std::size_t v, const FunctionSpec& spec, const RateMatrix& rate,
                const InterferencePair& pair, std::uint64_t seed, const QGenOptions& opt) {
    std::size_t mu = spec.mu, nu = rate.nu, kappa = rate.kappa, n = rate.n;
    if (v >= mu) throw Error(Errc::IndexOutOfRange, "requested function index");
    long long beta_ll = ipow(static_cast<long long>(nu), static_cast<unsigned>(mu));
    if (beta_ll <= 0 || beta_ll > (1LL << 22))
        throw Error(Errc::InvalidParameters, "beta = nu^mu too large to simulate");
    std::size_t beta = static_cast<std::size_t>(beta_ll);

    QueryPlan plan;
    plan.v = v;
    plan.n = n;
    plan.mu = mu;
    plan.f = spec.f;
    plan.beta = beta;
    plan.nu = nu;
    plan.kappa = kappa;
    plan.r = spec.r;
    plan.q = spec.v.modulus();
    plan.seed = seed;
    plan.fixed_randomness = opt.fixed_randomness;
    plan.queries.resize(n);

    if (opt.fixed_randomness) {
        plan.pi.resize(beta);
        std::iota(plan.pi.begin(), plan.pi.end(), 0);
    } else {
        Rng rng(Rng::derive(seed, 0));
        plan.pi = rng.permutation(beta);
    }

    std::vector<long long> alpha = alpha_sequence(mu, kappa, nu);

    // aux[j][u][kind][tau]
    auto idx = [&](std::size_t j, std::size_t u, int kind, std::size_t tau) {
        return ((j * nu + u) * 2 + static_cast<std::size_t>(kind)) * (mu + 1) + tau;
    };
    std::vector<std::vector<TauSum>> aux(n * nu * 2 * (mu + 1));

    std::vector<std::vector<std::size_t>> sa(nu), sb(nu);
    for (std::size_t u = 0; u < nu; ++u) {
        sa[u] = coord_set(u, pair.a);
        sb[u] = coord_set(u, pair.b);
    }

    for (std::size_t tau = 1; tau <= mu; ++tau) {
        if (tau == 1) {
            for (std::size_t u = 0; u < nu; ++u)
                for (std::size_t j : sa[u]) {
                    auto [d, un] = initial_round(u, alpha[1], j, v, mu);
                    aux[idx(j, u, 0, 1)] = std::move(d);
                    aux[idx(j, u, 1, 1)] = std::move(un);
                }
        } else {
            for (std::size_t u = 0; u < nu; ++u) {
                for (std::size_t j : sa[u])
                    aux[idx(j, u, 0, tau)] = desired_q(u, alpha[tau - 1], alpha[tau], j, v, nu, tau);
                std::vector<std::vector<TauSum>> und(n);
                for (std::size_t j = 0; j < n; ++j) und[j] = aux[idx(j, u, 1, tau - 1)];
                for (std::size_t j : sb[u])
                    aux[idx(j, u, 1, tau - 1)] = exploit_si(u, und, pair, j);
            }
            for (std::size_t j = 0; j < n; ++j) {
                std::vector<TauSum> si_union;
                for (std::size_t i = 0; i < pair.b.rows; ++i) {
                    std::size_t u = pair.b.at(i, j);
                    const auto& s = aux[idx(j, u, 1, tau - 1)];
                    si_union.insert(si_union.end(), s.begin(), s.end());
                }
                std::vector<std::vector<TauSum>> per_block(kappa);
                for (std::size_t i = 0; i < kappa; ++i)
                    per_block[i] = std::move(aux[idx(j, pair.a.at(i, j), 0, tau)]);
                merge_side_information(per_block, si_union, kappa, opt.skip_message_symmetry);
                for (std::size_t i = 0; i < kappa; ++i)
                    aux[idx(j, pair.a.at(i, j), 0, tau)] = std::move(per_block[i]);
            }
            if (!opt.skip_message_symmetry) {
                for (std::size_t u = 0; u < nu; ++u)
                    for (std::size_t j : sa[u])
                        aux[idx(j, u, 1, tau)] = m_sym(aux[idx(j, u, 0, tau)], j, v, tau, mu);
            }
        }
        for (std::size_t u = 0; u < nu; ++u)
            for (std::size_t j : sa[u]) {
                auto& d = aux[idx(j, u, 0, tau)];
                auto& un = aux[idx(j, u, 1, tau)];
                plan.queries[j].insert(plan.queries[j].end(), d.begin(), d.end());
                plan.queries[j].insert(plan.queries[j].end(), un.begin(), un.end());
            }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Sign assignment, pruning, and the reconstruction-recipe engine.
// ---------------------------------------------------------------------------

namespace {

// Linear combination of retained query values.
using Lin = std::map<QueryRef, std::uint32_t>;

void lin_add(const PrimeField& f, Lin& acc, const Lin& x, std::uint32_t coeff) {
    if (coeff == 0) return;
    for (const auto& [ref, c] : x) {
        std::uint32_t v = f.add(acc.count(ref) ? acc[ref] : 0, f.mul(c, coeff));
        if (v == 0)
            acc.erase(ref);
        else
            acc[ref] = v;
    }
}

class RecipeEngine {
public:
    RecipeEngine(QueryPlan& plan, const FunctionSpec& spec, const LinearCode& code,
                 const InterferencePair& pair)
        : plan_(plan), spec_(spec), code_(code), pair_(pair), field_(code.q) {
        retained_by_sig_.resize(plan.n);
        for (std::size_t j = 0; j < plan.n; ++j)
            for (std::size_t i = 0; i < plan.queries[j].size(); ++i)
                retained_by_sig_[j][sum_sig(plan.queries[j][i])] = i;
        pruned_lin_.resize(plan.n);
        // Expansion of every candidate function over the basis rows.
        expansion_.resize(spec.mu);
        for (std::size_t vp = 0; vp < spec.mu; ++vp) {
            if (spec.basis.is_basis_row(vp)) {
                std::vector<std::uint32_t> e(spec.r, 0);
                for (std::size_t l = 0; l < spec.r; ++l)
                    if (spec.basis.basis[l] == vp) e[l] = 1;
                expansion_[vp] = e;
            } else {
                expansion_[vp] = *spec.basis.expansion[vp];
            }
        }
    }

    /// Compute recipes for all pruned sums, ascending rounds so that every
    /// side-information reference resolves to already-processed material.
    void run(std::vector<PrunedQuery>& pruned) {
        std::stable_sort(pruned.begin(), pruned.end(),
                         [](const PrunedQuery& a, const PrunedQuery& b) {
                             if (a.sum.round != b.sum.round) return a.sum.round < b.sum.round;
                             if (a.sum.db != b.sum.db) return a.sum.db < b.sum.db;
                             return canonical_less(a.sum, b.sum);
                         });
        // Group by (db, block, round); solve each group once.
        std::size_t i = 0;
        while (i < pruned.size()) {
            std::size_t e = i;
            while (e < pruned.size() && pruned[e].sum.db == pruned[i].sum.db &&
                   pruned[e].sum.block == pruned[i].sum.block &&
                   pruned[e].sum.round == pruned[i].sum.round)
                ++e;
            solve_group(pruned, i, e);
            i = e;
        }
    }

private:
    struct Equation {
        std::vector<std::uint32_t> lhs; // over group unknowns
        Lin rhs;
    };

    void solve_group(std::vector<PrunedQuery>& pruned, std::size_t lo, std::size_t hi) {
        std::size_t j = pruned[lo].sum.db;
        std::size_t u = pruned[lo].sum.block;
        std::size_t tau = pruned[lo].sum.round;

        // Unknowns: basis-function symbols at this group's own rows.
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> col; // (basis pos, row) -> col
        auto own_rows = [&](const TauSum& s, std::vector<std::size_t>& rows) {
            if (s.kind == Kind::Desired)
                rows.push_back(s.fresh(plan_.v).row);
            else
                for (const Term& t : s.terms) rows.push_back(t.row);
        };
        std::vector<const TauSum*> group_retained;
        for (const TauSum& s : plan_.queries[j])
            if (s.block == u && s.round == tau) group_retained.push_back(&s);
        std::vector<std::size_t> rows;
        for (const TauSum* s : group_retained) own_rows(*s, rows);
        for (std::size_t x = lo; x < hi; ++x) own_rows(pruned[x].sum, rows);
        for (std::size_t row : rows)
            for (std::size_t l = 0; l < spec_.r; ++l)
                col.emplace(std::make_pair(l, row), col.size());

        auto expand_term = [&](std::vector<std::uint32_t>& lhs, const Term& t) {
            const auto& e = expansion_[t.func];
            for (std::size_t l = 0; l < spec_.r; ++l) {
                if (e[l] == 0) continue;
                auto it = col.find({l, t.row});
                if (it == col.end())
                    throw Error(Errc::UnreconstructiblePrune, "term row outside local group");
                std::uint32_t c = t.sign > 0 ? e[l] : field_.neg(e[l]);
                lhs[it->second] = field_.add(lhs[it->second], c);
            }
        };

        std::vector<Equation> eqs;
        for (const TauSum* s : group_retained) {
            Equation eq;
            eq.lhs.assign(col.size(), 0);
            std::size_t idx = retained_by_sig_[j].at(sum_sig(*s));
            eq.rhs[{j, idx}] = 1;
            if (s->kind == Kind::Desired) {
                expand_term(eq.lhs, s->fresh(plan_.v));
                // value = fresh_part - source_value, so fresh_part = value + source.
                if (s->si) lin_add(field_, eq.rhs, si_value_lin(*s->si, j), 1);
            } else {
                for (const Term& t : s->terms) expand_term(eq.lhs, t);
            }
            eqs.push_back(std::move(eq));
        }

        // Row-echelon elimination over the group equations.
        std::vector<std::size_t> pivot_of; // equation index -> pivot column
        for (std::size_t ei = 0; ei < eqs.size(); ++ei) {
            Equation& eq = eqs[ei];
            for (std::size_t pe = 0; pe < pivot_of.size(); ++pe) {
                std::uint32_t c = eq.lhs[pivot_of[pe]];
                if (c == 0) continue;
                subtract_scaled(eq, eqs[pe], c);
            }
            std::size_t piv = 0;
            while (piv < eq.lhs.size() && eq.lhs[piv] == 0) ++piv;
            if (piv == eq.lhs.size()) continue; // redundant equation
            std::uint32_t inv = field_.inv(eq.lhs[piv]);
            scale(eq, inv);
            // Keep reduced equations at the front, in pivot order.
            std::size_t slot = pivot_of.size();
            if (ei != slot) std::swap(eqs[ei], eqs[slot]);
            pivot_of.push_back(piv);
            for (std::size_t pe = 0; pe + 1 < pivot_of.size(); ++pe) {
                std::uint32_t c = eqs[pe].lhs[piv];
                if (c != 0) subtract_scaled(eqs[pe], eqs[slot], c);
            }
        }

        for (std::size_t x = lo; x < hi; ++x) {
            PrunedQuery& p = pruned[x];
            Equation target;
            target.lhs.assign(col.size(), 0);
            if (p.sum.kind == Kind::Desired) {
                expand_term(target.lhs, p.sum.fresh(plan_.v));
            } else {
                for (const Term& t : p.sum.terms) expand_term(target.lhs, t);
            }
            // Reduce the target; the residual must vanish.
            for (std::size_t pe = 0; pe < pivot_of.size(); ++pe) {
                std::uint32_t c = target.lhs[pivot_of[pe]];
                if (c == 0) continue;
                for (std::size_t y = 0; y < target.lhs.size(); ++y)
                    target.lhs[y] = field_.sub(target.lhs[y], field_.mul(c, eqs[pe].lhs[y]));
                lin_add(field_, target.rhs, eqs[pe].rhs, c);
            }
            for (std::uint32_t cval : target.lhs)
                if (cval != 0)
                    throw Error(Errc::UnreconstructiblePrune,
                                "pruned sum at database " + std::to_string(j + 1) + ", round " +
                                    std::to_string(tau) +
                                    " is not a combination of retained queries");
            Lin recipe = target.rhs;
            // Desired sums subtract their side information again.
            if (p.sum.kind == Kind::Desired && p.sum.si)
                lin_add(field_, recipe, si_value_lin(*p.sum.si, j), field_.neg(1));
            p.recipe.assign(recipe.begin(), recipe.end());
            pruned_lin_[j][sum_sig(p.sum)] = std::move(recipe);
        }
    }

    void subtract_scaled(Equation& a, const Equation& b, std::uint32_t c) {
        for (std::size_t y = 0; y < a.lhs.size(); ++y)
            a.lhs[y] = field_.sub(a.lhs[y], field_.mul(c, b.lhs[y]));
        lin_add(field_, a.rhs, b.rhs, field_.neg(c));
    }
    void scale(Equation& a, std::uint32_t c) {
        for (auto& x : a.lhs) x = field_.mul(x, c);
        Lin r;
        lin_add(field_, r, a.rhs, c);
        a.rhs = std::move(r);
    }

    /// Value of a standalone undesired sum (identified by its provenance
    /// signature) at coordinate j, as a combination of retained queries:
    /// decode its codeword from an information set of its source databases
    /// and extend to column j.
    const Lin& si_value_lin(const SiRef& ref, std::size_t j) {
        std::string key = si_sig(ref) + "@" + std::to_string(j);
        auto hit = si_cache_.find(key);
        if (hit != si_cache_.end()) return hit->second;

        std::vector<std::size_t> sources = coord_set(ref.block, pair_.a);
        const std::vector<std::size_t>& info = block_info_set(ref.block, sources);
        std::string sig = si_sig(ref);

        // Weights w = (G|_I)^{-1} G_col(j).
        FMatrix gi = code_.G.columns(info);
        std::vector<std::uint32_t> gcol(code_.k);
        for (std::size_t x = 0; x < code_.k; ++x) gcol[x] = code_.G.at(x, j);
        auto w = solve(gi, gcol);
        if (!w) throw Error(Errc::InternalMismatch, "information set failed to invert");

        Lin out;
        for (std::size_t x = 0; x < info.size(); ++x) {
            if ((*w)[x] == 0) continue;
            std::size_t jp = info[x];
            auto it = retained_by_sig_[jp].find(sig);
            if (it != retained_by_sig_[jp].end()) {
                Lin one;
                one[{jp, it->second}] = 1;
                lin_add(field_, out, one, (*w)[x]);
                continue;
            }
            auto pit = pruned_lin_[jp].find(sig);
            if (pit == pruned_lin_[jp].end())
                throw Error(Errc::UnreconstructiblePrune,
                            "side information source missing at database " + std::to_string(jp + 1));
            lin_add(field_, out, pit->second, (*w)[x]);
        }
        return si_cache_.emplace(key, std::move(out)).first->second;
    }

    const std::vector<std::size_t>& block_info_set(std::size_t u,
                                                   const std::vector<std::size_t>& sources) {
        auto hit = info_sets_.find(u);
        if (hit != info_sets_.end()) return hit->second;
        // Lexicographically first k-subset of the sources with invertible columns.
        std::vector<std::size_t> pick;
        std::vector<std::size_t> idx(code_.k);
        if (sources.size() < code_.k)
            throw Error(Errc::InternalMismatch, "block support smaller than k");
        std::iota(idx.begin(), idx.end(), 0);
        while (true) {
            std::vector<std::size_t> cand(code_.k);
            for (std::size_t x = 0; x < code_.k; ++x) cand[x] = sources[idx[x]];
            if (mat_rank(code_.G.columns(cand)) == code_.k) {
                pick = cand;
                break;
            }
            std::size_t z = code_.k;
            bool advanced = false;
            while (z-- > 0) {
                if (idx[z] + (code_.k - z) < sources.size()) {
                    ++idx[z];
                    for (std::size_t y = z + 1; y < code_.k; ++y) idx[y] = idx[y - 1] + 1;
                    advanced = true;
                    break;
                }
            }
            if (!advanced)
                throw Error(Errc::InternalMismatch, "no information set within block support");
        }
        return info_sets_.emplace(u, std::move(pick)).first->second;
    }

    QueryPlan& plan_;
    const FunctionSpec& spec_;
    const LinearCode& code_;
    const InterferencePair& pair_;
    PrimeField field_;
    std::vector<std::map<std::string, std::size_t>> retained_by_sig_;
    std::vector<std::map<std::string, Lin>> pruned_lin_;
    std::map<std::string, Lin> si_cache_;
    std::map<std::size_t, std::vector<std::size_t>> info_sets_;
    std::vector<std::vector<std::uint32_t>> expansion_;
};

SigmaTable build_sigma(const QueryPlan& plan, const FunctionSpec& spec) {
    SigmaTable sg;
    sg.mu = plan.mu;
    sg.beta = plan.beta;
    sg.s.assign(plan.mu * plan.beta, +1);
    if (plan.fixed_randomness) return sg;
    Rng rng(Rng::derive(plan.seed, 1));
    bool sign_free = (plan.mu - spec.r <= 1) || (spec.r <= 1);
    if (sign_free) {
        for (auto& x : sg.s) x = rng.coin() ? 1 : -1;
    } else {
        // Deeper pruning couples signs across symbols; product-form flips
        // keep every reconstruction identity intact while every individual
        // sigma stays uniform.
        std::vector<std::int8_t> g(plan.mu), h(plan.beta);
        for (auto& x : g) x = rng.coin() ? 1 : -1;
        for (auto& x : h) x = rng.coin() ? 1 : -1;
        for (std::size_t vp = 0; vp < plan.mu; ++vp)
            for (std::size_t t = 0; t < plan.beta; ++t)
                sg.s[vp * plan.beta + t] = static_cast<std::int8_t>(g[vp] * h[t]);
    }
    return sg;
}

} // namespace

void sign_and_prune(QueryPlan& plan, const FunctionSpec& spec, const LinearCode& code,
                    const InterferencePair& pair, const PruneOptions& opt) {
    if (plan.finalized) throw Error(Errc::InvalidParameters, "plan already finalized");

    plan.sigma = build_sigma(plan, spec);
    for (auto [func, row] : opt.sigma_flips)
        plan.sigma.s[func * plan.beta + row] = -plan.sigma.s[func * plan.beta + row];
    for (auto& qs : plan.queries)
        for (TauSum& s : qs) {
            for (Term& t : s.terms) t.sign *= plan.sigma.at(t.func, t.row);
            if (s.si)
                for (Term& t : s.si->terms) t.sign *= plan.sigma.at(t.func, t.row);
        }

    // Redundant types: subsets of the dependent index set, rounds 1..mu-r.
    std::set<std::size_t> dependent;
    for (std::size_t vp = 0; vp < plan.mu; ++vp)
        if (spec.is_dependent(vp)) dependent.insert(vp);

    auto is_pruned = [&](const TauSum& s) {
        if (s.round <= plan.mu - spec.r) {
            bool all_dep = true;
            for (const Term& t : s.terms)
                if (!dependent.count(t.func)) {
                    all_dep = false;
                    break;
                }
            if (all_dep) return true;
        }
        for (const auto& [round, type] : opt.extra_prunes)
            if (s.round == round && s.type() == type) return true;
        return false;
    };

    std::vector<PrunedQuery> pruned;
    for (auto& qs : plan.queries) {
        std::vector<TauSum> keep;
        for (TauSum& s : qs) {
            if (is_pruned(s))
                pruned.push_back({std::move(s), {}});
            else
                keep.push_back(std::move(s));
        }
        std::sort(keep.begin(), keep.end(), canonical_less);
        qs = std::move(keep);
    }

    RecipeEngine engine(plan, spec, code, pair);
    engine.run(pruned);
    plan.pruned = std::move(pruned);
    plan.finalized = true;
}

std::vector<std::vector<std::uint32_t>>
db_query_vectors_with(const QueryPlan& plan, const FunctionSpec& spec, std::size_t j,
                      const Permutation& pi, const SigmaTable& sigma) {
    PrimeField field(plan.q);
    std::vector<std::vector<std::uint32_t>> out;
    out.reserve(plan.queries[j].size());
    for (const TauSum& s : plan.queries[j]) {
        std::vector<std::uint32_t> vec(plan.beta * plan.f, 0);
        for (const Term& t : s.terms) {
            int sign = t.sign * sigma.at(t.func, t.row);
            std::size_t row = pi[t.row];
            for (std::size_t m = 0; m < plan.f; ++m) {
                std::uint32_t c = spec.v.at(t.func, m);
                if (c == 0) continue;
                if (sign < 0) c = field.neg(c);
                std::size_t pos = m * plan.beta + row;
                vec[pos] = field.add(vec[pos], c);
            }
        }
        out.push_back(std::move(vec));
    }
    return out;
}

std::vector<std::vector<std::uint32_t>>
db_query_vectors(const QueryPlan& plan, const FunctionSpec& spec, std::size_t j) {
    if (!plan.finalized) throw Error(Errc::InvalidParameters, "plan not finalized");
    SigmaTable unit;
    unit.mu = plan.mu;
    unit.beta = plan.beta;
    unit.s.assign(plan.mu * plan.beta, 1); // signs already folded into the terms
    return db_query_vectors_with(plan, spec, j, plan.pi, unit);
}

std::vector<std::uint32_t> answer(const DatabaseShard& sh,
                                  const std::vector<std::vector<std::uint32_t>>& queries) {
    PrimeField field(sh.q);
    std::vector<std::uint32_t> out;
    out.reserve(queries.size());
    for (const auto& vec : queries) {
        if (vec.size() != sh.column.size())
            throw Error(Errc::InvalidParameters, "query vector length differs from shard size");
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < vec.size(); ++i)
            acc = (acc + std::uint64_t(vec[i]) * sh.column[i]) % sh.q;
        out.push_back(static_cast<std::uint32_t>(acc));
    }
    return out;
}

namespace {

struct CodewordTable {
    // Signature of a standalone undesired sum -> decoded information vector.
    std::map<std::string, std::vector<std::uint32_t>> info_vec;
};

} // namespace

FMatrix decode(const std::vector<std::vector<std::uint32_t>>& answers, const QueryPlan& plan,
               const FunctionSpec& spec, const LinearCode& code, const InterferencePair& pair) {
    (void)spec;
    if (!plan.finalized) throw Error(Errc::DecodeFailure, "plan not finalized");
    if (answers.size() != plan.n) throw Error(Errc::DecodeFailure, "answer set count");
    for (std::size_t j = 0; j < plan.n; ++j)
        if (answers[j].size() != plan.queries[j].size())
            throw Error(Errc::DecodeFailure, "answer length differs from plan at database " +
                                                 std::to_string(j + 1));
    PrimeField field(plan.q);

    // (i) reconstruct every pruned value from the ledger.
    std::vector<std::map<std::string, std::uint32_t>> value_of(plan.n);
    for (const PrunedQuery& p : plan.pruned) {
        std::uint64_t acc = 0;
        for (const auto& [ref, c] : p.recipe)
            acc = (acc + std::uint64_t(c) * answers[ref.db][ref.index]) % plan.q;
        value_of[p.sum.db][sum_sig(p.sum)] = static_cast<std::uint32_t>(acc);
    }

    // Standalone undesired sums, keyed by provenance signature: collect the
    // per-source values and decode each codeword's information vector.
    std::map<std::string, std::map<std::size_t, std::uint32_t>> standalone; // sig -> db -> value
    std::map<std::string, std::size_t> block_of;
    auto note = [&](const TauSum& s, std::uint32_t val) {
        if (s.kind != Kind::Undesired) return;
        std::string sig = sum_sig(s);
        standalone[sig][s.db] = val;
        block_of[sig] = s.block;
    };
    for (std::size_t j = 0; j < plan.n; ++j)
        for (std::size_t i = 0; i < plan.queries[j].size(); ++i) note(plan.queries[j][i], answers[j][i]);
    for (const PrunedQuery& p : plan.pruned) note(p.sum, value_of[p.sum.db].at(sum_sig(p.sum)));

    std::map<std::size_t, std::vector<std::size_t>> block_info;
    auto info_set_for = [&](std::size_t u) -> const std::vector<std::size_t>& {
        auto hit = block_info.find(u);
        if (hit != block_info.end()) return hit->second;
        std::vector<std::size_t> sources = coord_set(u, pair.a);
        std::vector<std::size_t> idx(code.k);
        std::iota(idx.begin(), idx.end(), 0);
        if (sources.size() < code.k) throw Error(Errc::DecodeFailure, "block support smaller than k");
        while (true) {
            std::vector<std::size_t> cand(code.k);
            for (std::size_t x = 0; x < code.k; ++x) cand[x] = sources[idx[x]];
            if (mat_rank(code.G.columns(cand)) == code.k)
                return block_info.emplace(u, std::move(cand)).first->second;
            std::size_t z = code.k;
            bool advanced = false;
            while (z-- > 0) {
                if (idx[z] + (code.k - z) < sources.size()) {
                    ++idx[z];
                    for (std::size_t y = z + 1; y < code.k; ++y) idx[y] = idx[y - 1] + 1;
                    advanced = true;
                    break;
                }
            }
            if (!advanced) throw Error(Errc::DecodeFailure, "no information set within block support");
        }
    };

    auto solve_info = [&](const std::vector<std::size_t>& info,
                          const std::vector<std::uint32_t>& vals) {
        FMatrix git = code.G.columns(info).transpose();
        auto m = solve(git, vals);
        if (!m) throw Error(Errc::DecodeFailure, "inconsistent information-set solve");
        return *m;
    };

    CodewordTable table;
    for (const auto& [sig, by_db] : standalone) {
        std::size_t u = block_of[sig];
        const auto& info = info_set_for(u);
        std::vector<std::uint32_t> vals(code.k);
        for (std::size_t x = 0; x < code.k; ++x) {
            auto it = by_db.find(info[x]);
            if (it == by_db.end())
                throw Error(Errc::DecodeFailure, "missing side-information source value");
            vals[x] = it->second;
        }
        table.info_vec[sig] = solve_info(info, vals);
    }
    auto codeword_at = [&](const std::string& sig, std::size_t j) {
        auto it = table.info_vec.find(sig);
        if (it == table.info_vec.end())
            throw Error(Errc::DecodeFailure, "unknown side-information reference");
        std::uint64_t acc = 0;
        for (std::size_t x = 0; x < code.k; ++x)
            acc = (acc + std::uint64_t(it->second[x]) * code.G.at(x, j)) % plan.q;
        return static_cast<std::uint32_t>(acc);
    };

    // (ii) isolate the desired symbols; (iii) solve an information set per row.
    std::map<std::size_t, std::map<std::size_t, std::uint32_t>> desired_vals; // row -> db -> value
    std::map<std::size_t, std::size_t> row_block;
    auto process_desired = [&](const TauSum& s, std::uint32_t val) {
        if (s.kind != Kind::Desired) return;
        const Term& fr = s.fresh(plan.v);
        std::uint32_t adj = val;
        if (s.si) adj = field.add(adj, codeword_at(si_sig(*s.si), s.db));
        if (fr.sign < 0) adj = field.neg(adj);
        desired_vals[fr.row][s.db] = adj;
        row_block[fr.row] = s.block;
    };
    for (std::size_t j = 0; j < plan.n; ++j)
        for (std::size_t i = 0; i < plan.queries[j].size(); ++i)
            process_desired(plan.queries[j][i], answers[j][i]);
    for (const PrunedQuery& p : plan.pruned)
        process_desired(p.sum, value_of[p.sum.db].at(sum_sig(p.sum)));

    if (desired_vals.size() != plan.beta)
        throw Error(Errc::DecodeFailure, "desired rows incomplete: have " +
                                             std::to_string(desired_vals.size()) + " of " +
                                             std::to_string(plan.beta));

    // (iv) undo the permutation and emit all beta*k symbols.
    FMatrix x(plan.beta, code.k, plan.q);
    for (const auto& [row, by_db] : desired_vals) {
        const auto& info = info_set_for(row_block[row]);
        std::vector<std::uint32_t> vals(code.k);
        for (std::size_t y = 0; y < code.k; ++y) {
            auto it = by_db.find(info[y]);
            if (it == by_db.end()) throw Error(Errc::DecodeFailure, "missing desired symbol");
            vals[y] = it->second;
        }
        auto m = solve_info(info, vals);
        for (std::size_t y = 0; y < code.k; ++y) x.set(plan.pi[row], y, m[y]);
    }
    return x;
}

std::size_t download_cost(const QueryPlan& plan) {
    if (!plan.finalized) throw Error(Errc::InvalidParameters, "plan not finalized");
    return plan.total_queries();
}

std::string dump_plan(const QueryPlan& plan) {
    std::ostringstream os;
    for (std::size_t j = 0; j < plan.n; ++j) {
        for (const TauSum& s : plan.queries[j]) {
            os << (j + 1) << ' ' << s.round << ' ' << (s.kind == Kind::Desired ? 'D' : 'U');
            for (const Term& t : s.terms)
                os << ' ' << (t.sign > 0 ? '+' : '-') << "U[" << (t.func + 1) << ',' << (t.row + 1)
                   << ']';
            os << '\n';
        }
    }
    return os.str();
}

TypeProfile type_profile(const QueryPlan& plan) {
    TypeProfile prof(plan.n);
    for (std::size_t j = 0; j < plan.n; ++j)
        for (const TauSum& s : plan.queries[j]) prof[j][{s.round, s.type()}]++;
    return prof;
}

} // namespace plc
