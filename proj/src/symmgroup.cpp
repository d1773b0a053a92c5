#include "bellcanon/symmgroup.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bellcanon {

// ---------------------------------------------------------------------------
// Relabeling group generators and combinatorial order

GeneratorSet relabeling_group(const Scenario &s) {
    if (!s.is_canonical())
        throw UserError("relabeling group requires a canonical-form scenario");
    int n = s.party_count();
    GeneratorSet out;
    out.order = 1;

    // outcome swaps: adjacent outcomes of every setting
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < s.setting_count(i); ++j) {
            int k = s.outcome_count(i, j);
            out.order *= factorial(k);
            for (int z = 0; z < k - 1; ++z) {
                Relabeling r = Relabeling::identity(s);
                std::swap(r.outcome_to[i][j][z], r.outcome_to[i][j][z + 1]);
                out.gens.push_back(r.to_perm(s));
            }
        }

    // setting swaps: adjacent settings with equal outcome counts
    for (int i = 0; i < n; ++i) {
        int run = 1;
        for (int j = 0; j < s.setting_count(i); ++j) {
            if (j + 1 < s.setting_count(i) &&
                s.outcome_count(i, j) == s.outcome_count(i, j + 1)) {
                ++run;
                Relabeling r = Relabeling::identity(s);
                std::swap(r.setting_to[i][j], r.setting_to[i][j + 1]);
                out.gens.push_back(r.to_perm(s));
            } else {
                out.order *= factorial(run);
                run = 1;
            }
        }
    }

    // party swaps: adjacent identical parties
    {
        int run = 1;
        for (int i = 0; i < n; ++i) {
            if (i + 1 < n && s.party(i) == s.party(i + 1)) {
                ++run;
                Relabeling r = Relabeling::identity(s);
                std::swap(r.party_to[i], r.party_to[i + 1]);
                std::swap(r.setting_to[i], r.setting_to[i + 1]);
                std::swap(r.outcome_to[i], r.outcome_to[i + 1]);
                out.gens.push_back(r.to_perm(s));
            } else {
                out.order *= factorial(run);
                run = 1;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Stabilizer chains

Int StabilizerChain::order() const { return suborder(0); }

Int StabilizerChain::suborder(int from_level) const {
    Int o = 1;
    for (size_t l = from_level; l < levels.size(); ++l)
        o *= (long)levels[l].orbit.size();
    return o;
}

int StabilizerChain::level_at(int position) const {
    int l = 0;
    while (l < (int)levels.size() && levels[l].base < position)
        ++l;
    return l;
}

Perm StabilizerChain::sift(const Perm &g, int from_level) const {
    Perm h = g;
    for (size_t l = from_level; l < levels.size(); ++l) {
        const ChainLevel &lev = levels[l];
        int p = h[lev.base];
        if (p == lev.base)
            continue;
        int t = lev.slot[p];
        if (t < 0)
            return h;
        h = mul(h, lev.transversal[t].inverse());
    }
    return h;
}

bool StabilizerChain::contains(const Perm &g) const {
    return sift(g).is_identity();
}

namespace {

// Orbit of lev.base under the generators of its level group (the union of
// the generator lists at this level and deeper), with a transversal.
void recompute_orbit(StabilizerChain &chain, int li) {
    ChainLevel &lev = chain.levels[li];
    std::vector<Perm> gens;
    for (size_t m = li; m < chain.levels.size(); ++m)
        for (const Perm &g : chain.levels[m].gens)
            gens.push_back(g);
    int degree = chain.degree;
    std::vector<Perm> reps(degree);
    std::vector<int32_t> seen(degree, 0);
    std::vector<int32_t> queue;
    queue.push_back(lev.base);
    seen[lev.base] = 1;
    reps[lev.base] = Perm::identity(degree);
    for (size_t qi = 0; qi < queue.size(); ++qi) {
        int p = queue[qi];
        for (const Perm &g : gens) {
            int q = g[p];
            if (!seen[q]) {
                seen[q] = 1;
                reps[q] = mul(reps[p], g);
                queue.push_back(q);
            }
        }
    }
    std::sort(queue.begin(), queue.end());
    lev.orbit.assign(queue.begin(), queue.end());
    lev.transversal.clear();
    lev.slot.assign(degree, -1);
    for (size_t t = 0; t < lev.orbit.size(); ++t) {
        lev.transversal.push_back(reps[lev.orbit[t]]);
        lev.slot[lev.orbit[t]] = (int32_t)t;
    }
}

int smallest_moved(const Perm &g) {
    for (int i = 0; i < g.size(); ++i)
        if (g[i] != i)
            return i;
    return -1;
}

// Adds a sifted residual (which fixes every point below its smallest moved
// point) as a strong generator, creating its level if needed. Returns the
// level index.
int insert_residual(StabilizerChain &chain, const Perm &h) {
    int p = smallest_moved(h);
    int li = 0;
    while (li < (int)chain.levels.size() && chain.levels[li].base < p)
        ++li;
    if (li == (int)chain.levels.size() || chain.levels[li].base != p) {
        ChainLevel lev;
        lev.base = p;
        chain.levels.insert(chain.levels.begin() + li, std::move(lev));
    }
    chain.levels[li].gens.push_back(h);
    recompute_orbit(chain, li);
    return li;
}

Perm schreier_generator(const StabilizerChain &chain, int li, int t, const Perm &s) {
    const ChainLevel &lev = chain.levels[li];
    Perm g = mul(lev.transversal[t], s);
    int image = g[lev.base];
    int slot = lev.slot[image];
    if (slot < 0)
        throw InternalError("orbit not closed under its own generators");
    return mul(g, lev.transversal[slot].inverse());
}

void deterministic_closure(StabilizerChain &chain, const Int *known_order) {
    int li = (int)chain.levels.size() - 1;
    while (li >= 0) {
        if (known_order && chain.order() == *known_order)
            return;
        recompute_orbit(chain, li);
        bool clean = true;
        std::vector<Perm> gens;
        for (size_t m = li; m < chain.levels.size(); ++m)
            for (const Perm &g : chain.levels[m].gens)
                gens.push_back(g);
        for (size_t t = 0; t < chain.levels[li].orbit.size() && clean; ++t) {
            for (const Perm &s : gens) {
                Perm sg = schreier_generator(chain, li, (int)t, s);
                Perm res = chain.sift(sg, li + 1);
                if (!res.is_identity()) {
                    li = insert_residual(chain, res);
                    clean = false;
                    break;
                }
            }
        }
        if (clean)
            --li;
    }
}

} // namespace

StabilizerChain build_chain_unverified(const std::vector<Perm> &gens, int degree) {
    StabilizerChain chain;
    chain.degree = degree;
    for (const Perm &g : gens) {
        if (g.size() != degree)
            throw InternalError("generator degree mismatch");
        Perm res = chain.sift(g);
        if (!res.is_identity())
            insert_residual(chain, res);
    }
    deterministic_closure(chain, nullptr);
    return chain;
}

StabilizerChain build_chain(const std::vector<Perm> &gens, const Int &known_order,
                            int degree, const ChainOptions &opts) {
    StabilizerChain chain;
    chain.degree = degree;
    for (const Perm &g : gens) {
        if (g.size() != degree)
            throw InternalError("generator degree mismatch");
        Perm res = chain.sift(g);
        if (!res.is_identity())
            insert_residual(chain, res);
    }
    if (opts.randomized && !gens.empty()) {
        // random subproducts sifted in until the order is reached; any gap
        // left by bad luck is closed deterministically below
        std::mt19937_64 rng(0x5eed);
        Perm acc = Perm::identity(degree);
        int stall = 0;
        while (chain.order() != known_order && stall < 512) {
            acc = mul(acc, gens[rng() % gens.size()]);
            if (rng() & 1)
                acc = mul(acc, gens[rng() % gens.size()]);
            Perm res = chain.sift(acc);
            if (res.is_identity()) {
                ++stall;
            } else {
                insert_residual(chain, res);
                stall = 0;
            }
        }
    }
    if (chain.order() != known_order)
        deterministic_closure(chain, &known_order);
    if (chain.order() != known_order)
        throw InternalError("stabilizer chain order " + to_string(chain.order()) +
                            " does not match the group order " + to_string(known_order));
    return chain;
}

// ---------------------------------------------------------------------------
// Backtrack search for coloring stabilizers

namespace {

struct StabSearch {
    const StabilizerChain &chain;
    std::span<const int> color;
    int from_level;
    StabilizerChain result;

    StabSearch(const StabilizerChain &c, int fl, std::span<const int> col)
        : chain(c), color(col), from_level(fl) {
        result.degree = c.degree;
    }

    bool preserves(const Perm &g) const {
        for (int i = 0; i < g.size(); ++i)
            if (color[g[i]] != color[i])
                return false;
        return true;
    }

    void dfs(size_t li, const Perm &tau) {
        if (li == chain.levels.size()) {
            if (!tau.is_identity() && preserves(tau) && !result.contains(tau)) {
                Perm res = result.sift(tau);
                if (!res.is_identity()) {
                    insert_residual(result, res);
                    deterministic_closure(result, nullptr);
                }
            }
            return;
        }
        const ChainLevel &lev = chain.levels[li];
        bool spine = tau.is_identity();
        for (size_t t = 0; t < lev.orbit.size(); ++t) {
            int p = tau[lev.orbit[t]];
            if (color[p] != color[lev.base])
                continue;
            // with an identity prefix, images already reachable by the found
            // subgroup need not be explored again
            if (spine && t > 0 && reachable_from_smaller(li, p))
                continue;
            dfs(li + 1, mul(lev.transversal[t], tau));
        }
    }

    // true if some element of the found subgroup fixing the bases above
    // level li maps a smaller color-compatible orbit point to p
    bool reachable_from_smaller(size_t li, int p) const {
        std::vector<Perm> gens;
        for (const auto &lev : result.levels)
            if (lev.base >= chain.levels[li].base)
                for (const Perm &g : lev.gens)
                    gens.push_back(g);
        if (gens.empty())
            return false;
        std::vector<int32_t> seen(chain.degree, 0);
        std::vector<int32_t> queue{(int32_t)p};
        seen[p] = 1;
        for (size_t qi = 0; qi < queue.size(); ++qi) {
            for (const Perm &g : gens) {
                int q = g[queue[qi]];
                if (q < p)
                    return true;
                if (!seen[q]) {
                    seen[q] = 1;
                    queue.push_back(q);
                }
            }
        }
        return false;
    }
};

} // namespace

StabilizerChain coloring_stabilizer(const StabilizerChain &chain, int from_level,
                                    std::span<const int> color) {
    StabSearch search(chain, from_level, color);
    search.dfs(from_level, Perm::identity(chain.degree));
    return std::move(search.result);
}

// ---------------------------------------------------------------------------
// Minimal vector under a chain (the coefficient-by-coefficient filter)

ChainMinResult lexmin_under(const StabilizerChain &chain, int from_level,
                            const std::vector<Rat> &v) {
    int degree = chain.degree;
    std::vector<Perm> cands{Perm::identity(degree)};
    int first_pos = from_level < (int)chain.levels.size()
                        ? chain.levels[from_level].base
                        : degree;
    int li = from_level;
    for (int pos = first_pos; pos < degree - 1; ++pos) {
        const ChainLevel *lev = nullptr;
        if (li < (int)chain.levels.size() && chain.levels[li].base == pos)
            lev = &chain.levels[li++];
        size_t n_u = lev ? lev->orbit.size() : 1;
        if (n_u == 1 && cands.size() == 1)
            continue;
        std::vector<Perm> next;
        std::vector<std::vector<int32_t>> keys;
        const Rat *best = nullptr;
        for (const Perm &tau : cands) {
            for (size_t t = 0; t < n_u; ++t) {
                int image = lev ? tau[lev->orbit[t]] : tau[pos];
                const Rat &val = v[image];
                int c = best ? cmp(val, *best) : -1;
                if (c > 0)
                    continue;
                Perm ext = lev ? mul(lev->transversal[t], tau) : tau;
                if (c < 0) {
                    best = &v[ext[pos]];
                    next.clear();
                    keys.clear();
                }
                std::vector<int32_t> key(ext.img.begin(), ext.img.begin() + pos + 1);
                if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
                    keys.push_back(std::move(key));
                    next.push_back(std::move(ext));
                }
            }
        }
        cands = std::move(next);
    }
    ChainMinResult out;
    out.witness = cands.front();
    out.vec.resize(degree);
    for (int i = 0; i < degree; ++i)
        out.vec[i] = v[out.witness[i]];
    return out;
}

// ---------------------------------------------------------------------------
// ScenarioGroup

ScenarioGroup::ScenarioGroup(Scenario s, const ChainOptions &opts)
    : scenario_(std::move(s)), opts_(opts) {
    gens_ = relabeling_group(scenario_);
    first_parties_.push_back(0);
    for (int i = 1; i < scenario_.party_count(); ++i) {
        if (scenario_.party(i) == scenario_.party(0))
            first_parties_.push_back(i);
        else
            break;
    }
    ctx_once_ = std::vector<std::once_flag>(scenario_.party_count());
    ctx_.resize(scenario_.party_count());
}

const StabilizerChain &ScenarioGroup::full_chain() const {
    std::call_once(chain_once_, [&] {
        chain_ = std::make_unique<StabilizerChain>(build_chain(
            gens_.gens, gens_.order, (int)scenario_.full_dimension(), opts_));
    });
    return *chain_;
}

const ScenarioGroup::MatrixContext &ScenarioGroup::matrix_context(int q) const {
    std::call_once(ctx_once_[q], [&] {
        auto ctx = std::make_unique<MatrixContext>();
        ctx->first_party = q;
        const Scenario &s = scenario_;
        int n = s.party_count();
        ctx->rows = s.party_dim(q);
        ctx->cols = s.full_dimension() / ctx->rows;
        ctx->row_scenario = Scenario({s.party(q)});
        ctx->row_group = relabeling_group(ctx->row_scenario);
        ctx->row_chain = build_chain(ctx->row_group.gens, ctx->row_group.order,
                                     (int)ctx->rows, opts_);
        long long d = s.full_dimension();
        ctx->row_of.resize(d);
        ctx->col_of.resize(d);
        ctx->global_of.resize(d);
        std::vector<long long> dims(n), strides(n);
        long long stride = 1;
        for (int i = 0; i < n; ++i) {
            dims[i] = s.party_dim(i);
            strides[i] = stride;
            stride *= dims[i];
        }
        for (long long idx = 0; idx < d; ++idx) {
            long long rem = idx, row = 0, col = 0, cstride = 1;
            for (int i = 0; i < n; ++i) {
                long long digit = rem % dims[i];
                rem /= dims[i];
                if (i == q) {
                    row = digit;
                } else {
                    col += digit * cstride;
                    cstride *= dims[i];
                }
            }
            ctx->row_of[idx] = (int32_t)row;
            ctx->col_of[idx] = (int32_t)col;
            ctx->global_of[row + ctx->rows * col] = idx;
        }
        if (n > 1) {
            ctx->col_scenario = s.without_party(q);
            ctx->col_group = relabeling_group(ctx->col_scenario);
            ctx->col_chain = build_chain(ctx->col_group.gens, ctx->col_group.order,
                                         (int)ctx->cols, opts_);
        }
        ctx_[q] = std::move(ctx);
    });
    return *ctx_[q];
}

// ---------------------------------------------------------------------------
// lex_min

namespace {

// Candidate matrix in the column search, stored as selector maps into the
// original expression: entry (r, c) = e[global_of[rowsel[r] + rows*colsel[c]]].
struct MatrixCandidate {
    std::vector<int32_t> rowsel;
    std::vector<int32_t> colsel;
};

int cmp_vec(const std::vector<Rat> &a, const std::vector<Rat> &b) {
    for (size_t i = 0; i < a.size(); ++i) {
        int c = cmp(a[i], b[i]);
        if (c)
            return c;
    }
    return 0;
}

struct MatrixRun {
    std::vector<Rat> result; // column-major minimal matrix
    MatrixCandidate winner;
};

// Column-by-column minimization over row and column relabelings with the
// first party pinned to ctx.first_party.
MatrixRun run_matrix_search(const BellExpression &e,
                            const ScenarioGroup::MatrixContext &ctx, bool parallel) {
    long long rows = ctx.rows, cols = ctx.cols;
    MatrixCandidate id;
    id.rowsel.resize(rows);
    std::iota(id.rowsel.begin(), id.rowsel.end(), 0);
    id.colsel.resize(cols);
    std::iota(id.colsel.begin(), id.colsel.end(), 0);
    std::vector<MatrixCandidate> cands{id};

    // row coloring refined by each fixed column; stabilizer shrinks with it
    std::vector<int> row_color(rows, 0);
    StabilizerChain row_stab = ctx.row_chain;
    std::vector<Rat> fixed; // minimal matrix so far, column-major
    fixed.reserve((size_t)(rows * cols));

    int col_li = 0;
    for (long long gamma = 0; gamma < cols; ++gamma) {
        const ChainLevel *lev = nullptr;
        if (col_li < (int)ctx.col_chain.levels.size() &&
            ctx.col_chain.levels[col_li].base == gamma)
            lev = &ctx.col_chain.levels[col_li++];
        size_t n_u = lev ? lev->orbit.size() : 1;

        struct Task {
            size_t cand;
            size_t t;
        };
        std::vector<Task> tasks;
        for (size_t ci = 0; ci < cands.size(); ++ci)
            for (size_t t = 0; t < n_u; ++t)
                tasks.push_back({ci, t});

        std::vector<std::vector<Rat>> mins(tasks.size());
        std::vector<Perm> rowfix(tasks.size());
        std::vector<int64_t> colpick(tasks.size());
        auto eval = [&](size_t ti) {
            const Task &task = tasks[ti];
            MatrixCandidate view = cands[task.cand];
            long long src = lev ? view.colsel[lev->orbit[task.t]] : view.colsel[gamma];
            colpick[ti] = src;
            std::vector<Rat> v((size_t)rows);
            for (long long r = 0; r < rows; ++r)
                v[r] = e.coeff[ctx.global_of[view.rowsel[r] + rows * src]];
            ChainMinResult rm = lexmin_under(row_stab, 0, v);
            mins[ti] = std::move(rm.vec);
            rowfix[ti] = std::move(rm.witness);
        };
#ifdef _OPENMP
        // forking pays off only when the candidate set has real width
        if (parallel && tasks.size() >= 256) {
#pragma omp parallel for schedule(dynamic)
            for (long long ti = 0; ti < (long long)tasks.size(); ++ti)
                eval((size_t)ti);
        } else
#endif
        {
            (void)parallel;
            for (size_t ti = 0; ti < tasks.size(); ++ti)
                eval(ti);
        }

        const std::vector<Rat> *best = nullptr;
        for (size_t ti = 0; ti < tasks.size(); ++ti)
            if (!best || cmp_vec(mins[ti], *best) < 0)
                best = &mins[ti];

        std::vector<MatrixCandidate> next;
        for (size_t ti = 0; ti < tasks.size(); ++ti) {
            if (cmp_vec(mins[ti], *best) != 0)
                continue;
            const Task &task = tasks[ti];
            const MatrixCandidate &old = cands[task.cand];
            MatrixCandidate ext;
            ext.rowsel.resize(rows);
            for (long long r = 0; r < rows; ++r)
                ext.rowsel[r] = old.rowsel[rowfix[ti][r]];
            if (lev) {
                const Perm &u = lev->transversal[task.t];
                ext.colsel.resize(cols);
                for (long long c = 0; c < cols; ++c)
                    ext.colsel[c] = old.colsel[u[c]];
            } else {
                ext.colsel = old.colsel;
            }
            // dedup by the content of the remaining columns
            bool dup = false;
            for (const MatrixCandidate &kept : next) {
                bool same = true;
                for (long long c = gamma + 1; c < cols && same; ++c)
                    for (long long r = 0; r < rows && same; ++r)
                        same = e.coeff[ctx.global_of[ext.rowsel[r] + rows * ext.colsel[c]]] ==
                               e.coeff[ctx.global_of[kept.rowsel[r] + rows * kept.colsel[c]]];
                if (same) {
                    dup = true;
                    break;
                }
            }
            if (!dup)
                next.push_back(std::move(ext));
        }
        cands = std::move(next);
        for (const Rat &x : *best)
            fixed.push_back(x);

        // refine row colors with the new fixed column
        std::map<std::pair<int, Rat>, int> remap;
        std::vector<int> refined(rows);
        for (long long r = 0; r < rows; ++r) {
            auto key = std::make_pair(row_color[r], (*best)[r]);
            auto it = remap.find(key);
            if (it == remap.end())
                it = remap.emplace(key, (int)remap.size()).first;
            refined[r] = it->second;
        }
        row_color = std::move(refined);
        GeneratorSet stab = party_coloring_stabilizer(ctx.row_scenario.party(0), row_color);
        row_stab = build_chain(stab.gens, stab.order, (int)rows, {});
    }

    MatrixRun out;
    out.result = std::move(fixed);
    out.winner = std::move(cands.front());
    return out;
}

LexMinResult lex_min_matrix(const BellExpression &e, const ScenarioGroup &g,
                            bool parallel) {
    const Scenario &s = g.scenario();
    long long d = s.full_dimension();
    const std::vector<int> &firsts = g.admissible_first_parties();

    // the searches with different first parties are independent
    std::vector<MatrixRun> runs(firsts.size());
    auto run_one = [&](size_t i) {
        int q = firsts[i];
        const auto &ctx = g.matrix_context(q);
        if (s.party_count() == 1) {
            ChainMinResult rm = lexmin_under(ctx.row_chain, 0, e.coeff);
            runs[i].result = std::move(rm.vec);
            runs[i].winner.rowsel.assign(rm.witness.img.begin(), rm.witness.img.end());
            runs[i].winner.colsel = {0};
            return;
        }
        runs[i] = run_matrix_search(e, ctx, parallel);
    };
#ifdef _OPENMP
    if (parallel && firsts.size() > 1) {
#pragma omp parallel for schedule(dynamic)
        for (long long i = 0; i < (long long)firsts.size(); ++i)
            run_one((size_t)i);
    } else
#endif
    {
        for (size_t i = 0; i < firsts.size(); ++i)
            run_one(i);
    }

    std::optional<MatrixRun> best;
    int best_party = 0;
    for (size_t i = 0; i < firsts.size(); ++i) {
        if (!best || std::lexicographical_compare(
                         runs[i].result.begin(), runs[i].result.end(),
                         best->result.begin(), best->result.end(),
                         [](const Rat &a, const Rat &b) { return cmp(a, b) < 0; }))
            best = std::move(runs[i]), best_party = firsts[i];
    }

    const auto &ctx = g.matrix_context(best_party);
    // g_img[i] = original index shown at position i; the witness permutation
    // maps e onto the minimum, i.e. minimal = act(g_img^-1, e).
    std::vector<int32_t> g_img(d);
    for (long long i = 0; i < d; ++i) {
        long long r = i % ctx.rows, c = i / ctx.rows;
        g_img[i] = (int32_t)ctx.global_of[best->winner.rowsel[r] +
                                          ctx.rows * best->winner.colsel[c]];
    }
    LexMinResult out;
    out.witness = Perm(std::move(g_img)).inverse();
    out.minimal = BellExpression(s, std::move(best->result));
    if (out.minimal == e)
        out.witness = Perm::identity((int)d);
    return out;
}

LexMinResult lex_min_pointfilter(const BellExpression &e, const ScenarioGroup &g) {
    ChainMinResult rm = lexmin_under(g.full_chain(), 0, e.coeff);
    LexMinResult out;
    out.minimal = BellExpression(g.scenario(), rm.vec);
    out.witness = rm.witness.inverse();
    if (out.minimal == e)
        out.witness = Perm::identity((int)e.coeff.size());
    return out;
}

} // namespace

LexMinResult lex_min(const BellExpression &e, const ScenarioGroup &g,
                     const LexMinOptions &opts) {
    if (e.scenario != g.scenario())
        throw UserError("expression scenario does not match the group");
    if (opts.algorithm == LexMinAlgorithm::PointFilter)
        return lex_min_pointfilter(e, g);
    return lex_min_matrix(e, g, opts.parallel);
}

// ---------------------------------------------------------------------------
// orbit_size, rank, unrank

namespace {

std::vector<int> color_ids(const std::vector<Rat> &v) {
    std::map<Rat, int> remap;
    std::vector<int> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) {
        auto it = remap.find(v[i]);
        if (it == remap.end())
            it = remap.emplace(v[i], (int)remap.size()).first;
        out[i] = it->second;
    }
    return out;
}

} // namespace

Int orbit_size(const BellExpression &e, const ScenarioGroup &g) {
    if (e.scenario != g.scenario())
        throw UserError("expression scenario does not match the group");
    const StabilizerChain &chain = g.full_chain();
    std::vector<int> color = color_ids(e.coeff);
    StabilizerChain stab = coloring_stabilizer(chain, 0, color);
    Int stab_order = stab.order();
    Int orbit;
    mpz_divexact(orbit.get_mpz_t(), g.order().get_mpz_t(), stab_order.get_mpz_t());
    return orbit;
}

namespace {

// Orbit size of vec under the subgroup at from_level, via the stabilizer.
Int block_size(const StabilizerChain &chain, int from_level,
               const std::vector<Rat> &vec) {
    std::vector<int> color = color_ids(vec);
    StabilizerChain stab = coloring_stabilizer(chain, from_level, color);
    Int sub = chain.suborder(from_level);
    Int stab_order = stab.order();
    Int out;
    mpz_divexact(out.get_mpz_t(), sub.get_mpz_t(), stab_order.get_mpz_t());
    return out;
}

struct BlockWalk {
    const StabilizerChain &chain;
    int degree;

    // Candidates with the current prefix, each lexicographically minimal
    // under the remaining subgroup and pairwise inequivalent under it.
    struct Level {
        std::vector<std::vector<Rat>> cands;
    };

    // Extends the candidates by one position. Returns the sorted distinct
    // values at `pos` with, per value, the new candidate set and block size.
    struct Extension {
        Rat value;
        std::vector<std::vector<Rat>> cands;
        Int size;
    };

    std::vector<Extension> extend(const std::vector<std::vector<Rat>> &cands,
                                  int pos) const {
        int li = chain.level_at(pos);
        const ChainLevel *lev = nullptr;
        if (li < (int)chain.levels.size() && chain.levels[li].base == pos)
            lev = &chain.levels[li];
        int next_level = li + (lev ? 1 : 0);
        std::map<Rat, std::vector<std::vector<Rat>>> groups;
        for (const auto &c : cands) {
            size_t n_u = lev ? lev->orbit.size() : 1;
            for (size_t t = 0; t < n_u; ++t) {
                std::vector<Rat> moved;
                if (lev) {
                    const Perm &u = lev->transversal[t];
                    moved.resize(degree);
                    for (int i = 0; i < degree; ++i)
                        moved[i] = c[u[i]];
                } else {
                    moved = c;
                }
                ChainMinResult mr = lexmin_under(chain, next_level, moved);
                auto &bucket = groups[moved[pos]];
                if (std::find(bucket.begin(), bucket.end(), mr.vec) == bucket.end())
                    bucket.push_back(std::move(mr.vec));
            }
        }
        std::vector<Extension> out;
        for (auto &[value, bucket] : groups) {
            Extension ext;
            ext.value = value;
            ext.size = 0;
            for (const auto &c : bucket)
                ext.size += block_size(chain, next_level, c);
            ext.cands = std::move(bucket);
            out.push_back(std::move(ext));
        }
        return out;
    }
};

} // namespace

Int rank_of(const BellExpression &e, const ScenarioGroup &g) {
    if (e.scenario != g.scenario())
        throw UserError("expression scenario does not match the group");
    const StabilizerChain &chain = g.full_chain();
    int degree = (int)e.coeff.size();
    LexMinResult min = lex_min(e, g);
    BlockWalk walk{chain, degree};
    std::vector<std::vector<Rat>> cands{min.minimal.coeff};
    Int rank = 1;
    for (int pos = 0; pos < degree - 1; ++pos) {
        auto exts = walk.extend(cands, pos);
        bool found = false;
        for (auto &ext : exts) {
            int c = cmp(ext.value, e.coeff[pos]);
            if (c < 0) {
                rank += ext.size;
            } else if (c == 0) {
                if (ext.size == 1) // block pinned: everything before it counted
                    return rank;
                cands = std::move(ext.cands);
                found = true;
                break;
            } else {
                break;
            }
        }
        if (!found)
            throw InternalError("expression left its own orbit during ranking");
    }
    return rank;
}

BellExpression unrank(const BellExpression &min_rep, const Int &rank,
                      const ScenarioGroup &g) {
    if (min_rep.scenario != g.scenario())
        throw UserError("expression scenario does not match the group");
    LexMinResult min = lex_min(min_rep, g);
    if (!(min.minimal == min_rep))
        throw UserError("unrank requires the minimal representative of the orbit");
    if (rank < 1)
        throw UserError("rank out of range");
    const StabilizerChain &chain = g.full_chain();
    int degree = (int)min_rep.coeff.size();
    BlockWalk walk{chain, degree};
    std::vector<std::vector<Rat>> cands{min_rep.coeff};
    Int remaining = rank;
    std::vector<Rat> prefix;
    for (int pos = 0; pos < degree - 1; ++pos) {
        auto exts = walk.extend(cands, pos);
        bool found = false;
        for (auto &ext : exts) {
            if (remaining > ext.size) {
                remaining -= ext.size;
                continue;
            }
            prefix.push_back(ext.value);
            if (ext.size == 1 && ext.cands.size() == 1) {
                // unique member: its tail is the minimal completion
                std::vector<Rat> full = ext.cands.front();
                return BellExpression(g.scenario(), full);
            }
            cands = std::move(ext.cands);
            found = true;
            break;
        }
        if (!found)
            throw UserError("rank out of range");
    }
    return BellExpression(g.scenario(), cands.front());
}

// ---------------------------------------------------------------------------
// Structured stabilizer of a row coloring inside one party's relabelings

GeneratorSet party_coloring_stabilizer(const Party &p, const std::vector<int> &color) {
    Scenario s({p});
    int m = (int)p.size();
    GeneratorSet out;
    out.order = 1;
    std::vector<Perm> gens;

    // outcome permutations inside each setting, among equal colors
    std::vector<std::vector<int>> setting_colors(m);
    for (int x = 0; x < m; ++x) {
        std::map<int, std::vector<int>> classes;
        for (int a = 0; a < p[x]; ++a) {
            int flat = party_flat_index(p, a + 1, x + 1);
            setting_colors[x].push_back(color[flat]);
            classes[color[flat]].push_back(a);
        }
        for (const auto &[c, members] : classes) {
            out.order *= factorial((int)members.size());
            for (size_t i = 1; i < members.size(); ++i) {
                Relabeling r = Relabeling::identity(s);
                std::swap(r.outcome_to[0][x][members[0]], r.outcome_to[0][x][members[i]]);
                gens.push_back(r.to_perm(s));
            }
        }
    }

    // setting permutations among settings with equal outcome count and equal
    // color multiset, composed with a color-matching outcome alignment
    std::map<std::pair<int, std::vector<int>>, std::vector<int>> setting_classes;
    for (int x = 0; x < m; ++x) {
        std::vector<int> multiset = setting_colors[x];
        std::sort(multiset.begin(), multiset.end());
        setting_classes[{p[x], multiset}].push_back(x);
    }
    for (const auto &[key, members] : setting_classes) {
        out.order *= factorial((int)members.size());
        for (size_t i = 1; i < members.size(); ++i) {
            int x = members[0], y = members[i];
            // canonical matching: sort outcomes of both settings by color
            std::vector<int> ox(p[x]), oy(p[y]);
            std::iota(ox.begin(), ox.end(), 0);
            std::iota(oy.begin(), oy.end(), 0);
            std::stable_sort(ox.begin(), ox.end(), [&](int a, int b) {
                return setting_colors[x][a] < setting_colors[x][b];
            });
            std::stable_sort(oy.begin(), oy.end(), [&](int a, int b) {
                return setting_colors[y][a] < setting_colors[y][b];
            });
            Relabeling r = Relabeling::identity(s);
            std::swap(r.setting_to[0][x], r.setting_to[0][y]);
            for (int j = 0; j < p[x]; ++j) {
                r.outcome_to[0][x][ox[j]] = oy[j];
                r.outcome_to[0][y][oy[j]] = ox[j];
            }
            gens.push_back(r.to_perm(s));
        }
    }
    out.gens = std::move(gens);
    return out;
}

} // namespace bellcanon
