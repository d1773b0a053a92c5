#include "bellcanon/canonical.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bellcanon {

// ---------------------------------------------------------------------------
// Bound sets

const std::vector<BoundSetInfo> &known_bound_sets() {
    static const std::vector<BoundSetInfo> sets = {
        {"local", true, true},
        {"no-signaling", true, false},
        {"quantum", true, false},
        {"svetlichny", false, false},
    };
    return sets;
}

bool bound_set_conditional(const std::string &name) {
    for (const auto &s : known_bound_sets())
        if (s.name == name)
            return s.conditional;
    return false;
}

// ---------------------------------------------------------------------------
// Structural edits on projected tensors

namespace {

// The expression that is identically one on normalized points.
BellExpression unit_expression(const Scenario &s) {
    SymmetricTensor t{s, std::vector<Rat>(s.full_dimension())};
    t.gamma[0] = 1;
    return from_symmetric(t);
}

BellExpression add_constant(BellExpression e, const Rat &c) {
    if (c == 0)
        return e;
    BellExpression unit = unit_expression(e.scenario);
    for (size_t i = 0; i < e.coeff.size(); ++i)
        e.coeff[i] += c * unit.coeff[i];
    return e;
}

struct BasisLayout {
    std::vector<int> lambda_off;
    std::vector<int> lambda_cnt;
    int nu_off = 0;
    int dim = 0;

    explicit BasisLayout(const Party &p) {
        int off = 1;
        for (int k : p) {
            lambda_off.push_back(off);
            lambda_cnt.push_back(k - 1);
            off += k - 1;
        }
        nu_off = off;
        dim = off + (int)p.size() - 1;
    }
};

// Rebuilds a tensor in `out_scenario` where output party i reads basis index
// maps[i][digit] of input party source[i]; -1 fills with zero. Input axes not
// named in `source` are contracted at their mu slot (index 0).
SymmetricTensor apply_axis_maps(const SymmetricTensor &in, const Scenario &out_scenario,
                                const std::vector<std::vector<int>> &maps,
                                const std::vector<int> &source) {
    long long d = out_scenario.full_dimension();
    std::vector<Rat> gamma(d);
    int n_in = in.scenario.party_count();
    std::vector<long long> in_strides(n_in);
    long long st = 1;
    for (int i = 0; i < n_in; ++i) {
        in_strides[i] = st;
        st *= in.scenario.party_dim(i);
    }
    int n_out = out_scenario.party_count();
    for (long long idx = 0; idx < d; ++idx) {
        long long rem = idx, src = 0;
        bool zero = false;
        for (int i = 0; i < n_out; ++i) {
            int digit = (int)(rem % out_scenario.party_dim(i));
            rem /= out_scenario.party_dim(i);
            int mapped = maps[i][digit];
            if (mapped < 0) {
                zero = true;
                break;
            }
            src += (long long)mapped * in_strides[source[i]];
        }
        if (!zero)
            gamma[idx] = in.gamma[src];
    }
    return SymmetricTensor{out_scenario, std::move(gamma)};
}

std::vector<int> identity_axis(const Scenario &s, int party) {
    std::vector<int> m(s.party_dim(party));
    std::iota(m.begin(), m.end(), 0);
    return m;
}

SymmetricTensor drop_party(const SymmetricTensor &t, int party) {
    Scenario out = t.scenario.without_party(party);
    std::vector<std::vector<int>> maps;
    std::vector<int> source;
    for (int i = 0; i < t.scenario.party_count(); ++i) {
        if (i == party)
            continue;
        maps.push_back(identity_axis(t.scenario, i));
        source.push_back(i);
    }
    return apply_axis_maps(t, out, maps, source);
}

SymmetricTensor insert_party(const SymmetricTensor &t, int party, const Party &sig) {
    std::vector<Party> parties = t.scenario.parties();
    parties.insert(parties.begin() + party, sig);
    Scenario out(parties);
    long long d = out.full_dimension();
    std::vector<Rat> gamma(d);
    int n_in = t.scenario.party_count();
    std::vector<long long> in_strides(n_in);
    long long st = 1;
    for (int i = 0; i < n_in; ++i) {
        in_strides[i] = st;
        st *= t.scenario.party_dim(i);
    }
    for (long long idx = 0; idx < d; ++idx) {
        long long rem = idx, src = 0;
        bool zero = false;
        for (int i = 0; i < out.party_count(); ++i) {
            int digit = (int)(rem % out.party_dim(i));
            rem /= out.party_dim(i);
            if (i == party) {
                if (digit != 0)
                    zero = true;
            } else {
                src += (long long)digit * in_strides[i < party ? i : i - 1];
            }
        }
        if (!zero)
            gamma[idx] = t.gamma[src];
    }
    return SymmetricTensor{out, std::move(gamma)};
}

SymmetricTensor drop_setting(const SymmetricTensor &t, int party, int setting) {
    std::vector<Party> parties = t.scenario.parties();
    parties[party].erase(parties[party].begin() + setting);
    Scenario out(parties);
    BasisLayout lin(t.scenario.party(party));
    BasisLayout lout(out.party(party));
    std::vector<int> pm(lout.dim, -1);
    pm[0] = 0;
    for (int x = 0; x < (int)out.party(party).size(); ++x) {
        int sx = x < setting ? x : x + 1;
        for (int z = 0; z < lout.lambda_cnt[x]; ++z)
            pm[lout.lambda_off[x] + z] = lin.lambda_off[sx] + z;
    }
    std::vector<std::vector<int>> maps;
    std::vector<int> source;
    for (int i = 0; i < t.scenario.party_count(); ++i) {
        maps.push_back(i == party ? pm : identity_axis(t.scenario, i));
        source.push_back(i);
    }
    return apply_axis_maps(t, out, maps, source);
}

SymmetricTensor insert_setting(const SymmetricTensor &t, int party, int setting,
                               int outcomes) {
    std::vector<Party> parties = t.scenario.parties();
    parties[party].insert(parties[party].begin() + setting, outcomes);
    Scenario out(parties);
    BasisLayout lin(t.scenario.party(party));
    BasisLayout lout(out.party(party));
    std::vector<int> pm(lout.dim, -1);
    pm[0] = 0;
    for (int x = 0; x < (int)out.party(party).size(); ++x) {
        if (x == setting)
            continue; // the re-inserted setting's lambda block is zero
        int sx = x < setting ? x : x - 1;
        for (int z = 0; z < lout.lambda_cnt[x]; ++z)
            pm[lout.lambda_off[x] + z] = lin.lambda_off[sx] + z;
    }
    std::vector<std::vector<int>> maps;
    std::vector<int> source;
    for (int i = 0; i < t.scenario.party_count(); ++i) {
        maps.push_back(i == party ? pm : identity_axis(t.scenario, i));
        source.push_back(i);
    }
    return apply_axis_maps(t, out, maps, source);
}

bool party_superfluous(const SymmetricTensor &t, int party) {
    long long d = t.scenario.full_dimension();
    long long dim = t.scenario.party_dim(party);
    long long stride = 1;
    for (int i = 0; i < party; ++i)
        stride *= t.scenario.party_dim(i);
    for (long long idx = 0; idx < d; ++idx)
        if ((idx / stride) % dim != 0 && t.gamma[idx] != 0)
            return false;
    return true;
}

bool setting_superfluous(const SymmetricTensor &t, int party, int setting) {
    BasisLayout layout(t.scenario.party(party));
    long long d = t.scenario.full_dimension();
    long long dim = t.scenario.party_dim(party);
    long long stride = 1;
    for (int i = 0; i < party; ++i)
        stride *= t.scenario.party_dim(i);
    int lo = layout.lambda_off[setting];
    int hi = lo + layout.lambda_cnt[setting];
    for (long long idx = 0; idx < d; ++idx) {
        int digit = (int)((idx / stride) % dim);
        if (digit >= lo && digit < hi && t.gamma[idx] != 0)
            return false;
    }
    return true;
}

// Deletes the probability slice of outcome `removed1`; exact on the merged
// model because the deleted slice carries the same coefficients as `kept`.
BellExpression delete_outcome_slice(const BellExpression &e, int party, int setting,
                                    int removed1) {
    std::vector<Party> parties = e.scenario.parties();
    parties[party][setting] -= 1;
    Scenario out(parties);
    long long d = out.full_dimension();
    std::vector<Rat> coeff(d);
    for (long long i = 1; i <= d; ++i) {
        IndexTuple t = tuple_of(i, out);
        IndexTuple src = t;
        if (src.parts[party].setting == setting + 1 &&
            src.parts[party].outcome >= removed1)
            src.parts[party].outcome += 1;
        coeff[i - 1] = e.coeff[index_of(src, e.scenario) - 1];
    }
    return BellExpression(out, std::move(coeff));
}

BellExpression duplicate_outcome_slice(const BellExpression &e, int party, int setting,
                                       int kept1, int removed1) {
    std::vector<Party> parties = e.scenario.parties();
    parties[party][setting] += 1;
    Scenario out(parties);
    long long d = out.full_dimension();
    std::vector<Rat> coeff(d);
    for (long long i = 1; i <= d; ++i) {
        IndexTuple t = tuple_of(i, out);
        IndexTuple src = t;
        if (src.parts[party].setting == setting + 1) {
            if (src.parts[party].outcome == removed1)
                src.parts[party].outcome = kept1;
            else if (src.parts[party].outcome > removed1)
                src.parts[party].outcome -= 1;
        }
        coeff[i - 1] = e.coeff[index_of(src, e.scenario) - 1];
    }
    return BellExpression(out, std::move(coeff));
}

// Projects and returns the constant that was shed.
std::pair<BellExpression, Rat> project_expression(const BellExpression &e) {
    SymmetricTensor t = to_symmetric(e);
    Rat constant = t.gamma[0];
    auto [tp, ignored] = project(t, 0);
    return {from_symmetric(tp), constant};
}

struct MergeCandidate {
    int party, setting, kept1, removed1;
};

std::optional<MergeCandidate> find_merge(const BellExpression &e) {
    const Scenario &s = e.scenario;
    long long d = s.full_dimension();
    for (int i = 0; i < s.party_count(); ++i) {
        long long stride = 1;
        for (int q = 0; q < i; ++q)
            stride *= s.party_dim(q);
        long long dim = s.party_dim(i);
        for (int x = 0; x < s.setting_count(i); ++x) {
            int k = s.outcome_count(i, x);
            for (int a1 = 1; a1 < k; ++a1)
                for (int a2 = a1 + 1; a2 <= k; ++a2) {
                    long long f1 = party_flat_index(s.party(i), a1, x + 1);
                    long long f2 = party_flat_index(s.party(i), a2, x + 1);
                    bool equal = true;
                    for (long long idx = 0; idx < d && equal; ++idx) {
                        if ((idx / stride) % dim != f1)
                            continue;
                        equal = e.coeff[idx] == e.coeff[idx + (f2 - f1) * stride];
                    }
                    if (equal)
                        return MergeCandidate{i, x, a1, a2};
                }
        }
    }
    return std::nullopt;
}

struct RemovalState {
    BellExpression expr; // always a projected representative
    StructureReport report;
};

void remove_superfluous_loop(RemovalState &st) {
    for (;;) {
        if (!st.expr.scenario.is_canonical()) {
            auto [canon, map] = canonical_scenario(st.expr.scenario);
            st.expr = reorder(st.expr, map);
            st.report.steps.push_back(ReorderStep{map});
            continue;
        }
        SymmetricTensor t = to_symmetric(st.expr);
        const Scenario &s = st.expr.scenario;
        bool changed = false;
        if (s.party_count() > 1) {
            for (int i = 0; i < s.party_count() && !changed; ++i)
                if (party_superfluous(t, i)) {
                    st.report.steps.push_back(RemovedParty{i, s.party(i)});
                    st.expr = from_symmetric(drop_party(t, i));
                    changed = true;
                }
        }
        if (changed)
            continue;
        for (int i = 0; i < s.party_count() && !changed; ++i) {
            if (s.setting_count(i) < 2)
                continue;
            for (int x = 0; x < s.setting_count(i) && !changed; ++x)
                if (setting_superfluous(t, i, x)) {
                    st.report.steps.push_back(RemovedSetting{i, x, s.outcome_count(i, x)});
                    st.expr = from_symmetric(drop_setting(t, i, x));
                    changed = true;
                }
        }
        if (changed)
            continue;
        if (auto merge = find_merge(st.expr)) {
            st.report.steps.push_back(MergedOutcomes{merge->party, merge->setting,
                                                     merge->kept1, merge->removed1});
            BellExpression deleted = delete_outcome_slice(st.expr, merge->party,
                                                          merge->setting, merge->removed1);
            auto [projected, constant] = project_expression(deleted);
            st.expr = std::move(projected);
            if (constant != 0)
                st.report.steps.push_back(ShiftStep{constant});
            continue;
        }
        break;
    }
}

} // namespace

std::pair<BellExpression, StructureReport> remove_superfluous(const BellExpression &e) {
    SymmetricTensor t = to_symmetric(e);
    if (!is_projected(t))
        throw UserError("remove_superfluous requires a projected expression");
    if (std::all_of(t.gamma.begin(), t.gamma.end(), [](const Rat &g) { return g == 0; })) {
        StructureReport report;
        report.constant = true;
        return {e, report};
    }
    RemovalState st{e, {}};
    remove_superfluous_loop(st);
    return {std::move(st.expr), std::move(st.report)};
}

BellExpression relift(const BellExpression &e, const StructureReport &report) {
    BellExpression cur = e;
    for (auto it = report.steps.rbegin(); it != report.steps.rend(); ++it) {
        if (std::get_if<ShiftStep>(&*it)) {
            continue; // value bookkeeping only; see the header
        } else if (const auto *mo = std::get_if<MergedOutcomes>(&*it)) {
            cur = duplicate_outcome_slice(cur, mo->party, mo->setting, mo->kept,
                                          mo->removed);
            cur = project_expression(cur).first;
        } else if (const auto *rs = std::get_if<RemovedSetting>(&*it)) {
            cur = from_symmetric(
                insert_setting(to_symmetric(cur), rs->party, rs->setting, rs->outcomes));
        } else if (const auto *rp = std::get_if<RemovedParty>(&*it)) {
            cur = from_symmetric(insert_party(to_symmetric(cur), rp->party, rp->signature));
        } else if (const auto *ro = std::get_if<ReorderStep>(&*it)) {
            cur = reorder(cur, ro->map.inverse());
        }
    }
    return cur;
}

// ---------------------------------------------------------------------------
// split_composite

namespace {

struct RawSplit {
    Rat kappa_added; // relative to the projected representative
    SymmetricTensor factor_a, factor_b;
    std::vector<int> parties_a, parties_b;
};

int matrix_rank(std::vector<std::vector<Rat>> m, int limit) {
    int rank = 0;
    size_t cols = m.empty() ? 0 : m[0].size();
    size_t row = 0;
    for (size_t col = 0; col < cols && row < m.size(); ++col) {
        size_t pivot = row;
        while (pivot < m.size() && m[pivot][col] == 0)
            ++pivot;
        if (pivot == m.size())
            continue;
        std::swap(m[pivot], m[row]);
        for (size_t r = row + 1; r < m.size(); ++r) {
            if (m[r][col] == 0)
                continue;
            Rat f = m[r][col] / m[row][col];
            for (size_t c = col; c < cols; ++c)
                m[r][c] -= f * m[row][c];
        }
        ++row;
        if (++rank > limit)
            return rank;
    }
    return rank;
}

std::optional<RawSplit> try_split(const SymmetricTensor &t,
                                  const std::vector<int> &parties_a,
                                  const std::vector<int> &parties_b) {
    const Scenario &s = t.scenario;
    long long pa = 1, pb = 1;
    for (int i : parties_a)
        pa *= s.party_dim(i);
    for (int i : parties_b)
        pb *= s.party_dim(i);
    std::vector<Rat> flat((size_t)(pa * pb));
    {
        int n = s.party_count();
        std::vector<int> side(n, 0);
        std::vector<long long> stride_of(n, 0);
        long long sa = 1, sb = 1;
        for (int i : parties_a) {
            side[i] = 0;
            stride_of[i] = sa;
            sa *= s.party_dim(i);
        }
        for (int i : parties_b) {
            side[i] = 1;
            stride_of[i] = sb;
            sb *= s.party_dim(i);
        }
        long long d = s.full_dimension();
        for (long long idx = 0; idx < d; ++idx) {
            long long rem = idx, alpha = 0, beta = 0;
            for (int i = 0; i < n; ++i) {
                long long digit = rem % s.party_dim(i);
                rem /= s.party_dim(i);
                (side[i] == 0 ? alpha : beta) += digit * stride_of[i];
            }
            flat[alpha + pa * beta] = t.gamma[idx];
        }
    }
    auto at = [&](long long a, long long b) -> const Rat & { return flat[a + pa * b]; };

    std::vector<std::vector<Rat>> block((size_t)(pa - 1));
    for (long long a = 1; a < pa; ++a) {
        block[a - 1].resize((size_t)(pb - 1));
        for (long long b = 1; b < pb; ++b)
            block[a - 1][b - 1] = at(a, b);
    }
    if (matrix_rank(std::move(block), 1) > 1)
        return std::nullopt;

    long long a0 = -1, b0 = -1;
    for (long long a = 1; a < pa && a0 < 0; ++a)
        for (long long b = 1; b < pb; ++b)
            if (at(a, b) != 0) {
                a0 = a;
                b0 = b;
                break;
            }
    if (a0 < 0) {
        // vanishing inner block: a factor would be a pure constant, which
        // only happens for superfluous party groups removed before splitting
        return std::nullopt;
    }
    std::vector<Rat> v((size_t)pa), w((size_t)pb);
    for (long long a = 1; a < pa; ++a)
        v[a] = at(a, b0);
    for (long long b = 1; b < pb; ++b)
        w[b] = at(a0, b) / at(a0, b0);
    long long bw = -1;
    for (long long b = 1; b < pb; ++b)
        if (w[b] != 0) {
            bw = b;
            break;
        }
    v[0] = at(0, bw) / w[bw];
    w[0] = at(a0, 0) / v[a0];
    for (long long a = 0; a < pa; ++a)
        for (long long b = 0; b < pb; ++b) {
            if (a == 0 && b == 0)
                continue;
            if (v[a] * w[b] != at(a, b))
                return std::nullopt;
        }

    RawSplit out;
    out.kappa_added = v[0] * w[0];
    std::vector<Party> pp_a, pp_b;
    for (int i : parties_a)
        pp_a.push_back(s.party(i));
    for (int i : parties_b)
        pp_b.push_back(s.party(i));
    out.factor_a = SymmetricTensor{Scenario(pp_a), std::move(v)};
    out.factor_b = SymmetricTensor{Scenario(pp_b), std::move(w)};
    out.parties_a = parties_a;
    out.parties_b = parties_b;
    return out;
}

// Bipartitions with party 0 anchored in the first block, smallest second
// block first, lexicographic within a size.
std::vector<std::pair<std::vector<int>, std::vector<int>>> bipartitions(int n) {
    std::vector<std::pair<std::vector<int>, std::vector<int>>> out;
    int rest = n - 1;
    for (int size = 1; size <= rest; ++size) {
        std::vector<int> pick(size);
        std::iota(pick.begin(), pick.end(), 0);
        for (;;) {
            std::vector<int> b;
            for (int i : pick)
                b.push_back(i + 1);
            std::vector<int> a;
            for (int i = 0; i < n; ++i)
                if (std::find(b.begin(), b.end(), i) == b.end())
                    a.push_back(i);
            out.push_back({std::move(a), std::move(b)});
            int i = size - 1;
            while (i >= 0 && pick[i] == rest - size + i)
                --i;
            if (i < 0)
                break;
            ++pick[i];
            for (int j = i + 1; j < size; ++j)
                pick[j] = pick[j - 1] + 1;
        }
    }
    return out;
}

std::optional<RawSplit> split_projected(const SymmetricTensor &t) {
    int n = t.scenario.party_count();
    if (n < 2)
        return std::nullopt;
    for (const auto &[a, b] : bipartitions(n))
        if (auto raw = try_split(t, a, b))
            return raw;
    return std::nullopt;
}

// Canonical coefficients of one orientation of a factor, used to fix the
// free sign of a composite pair deterministically.
std::vector<Rat> orientation_key(const BellExpression &f) {
    auto [projected, constant] = project_expression(f);
    RemovalState st{std::move(projected), {}};
    remove_superfluous_loop(st);
    IntegerNormalized norm = normalize_integer(st.expr, 0);
    ScenarioGroup group(norm.expr.scenario);
    return lex_min(norm.expr, group).minimal.coeff;
}

// +1 if the factor's canonical form is lexicographically no larger than its
// negation's, else -1. Ties (orientation-symmetric factors) give +1.
int orientation_sign(const BellExpression &f) {
    std::vector<Rat> plus = orientation_key(f);
    std::vector<Rat> minus = orientation_key(negate(f));
    for (size_t i = 0; i < plus.size(); ++i) {
        int c = cmp(plus[i], minus[i]);
        if (c)
            return c < 0 ? 1 : -1;
    }
    return 1;
}

} // namespace

std::optional<SplitResult> split_composite(const BellExpression &e) {
    SymmetricTensor t = to_symmetric(e);
    Rat gamma0 = t.gamma[0];
    auto [tp, shed] = project(t, 0);
    auto raw = split_projected(tp);
    if (!raw)
        return std::nullopt;
    BellExpression fa = from_symmetric(raw->factor_a);
    BellExpression fb = from_symmetric(raw->factor_b);
    if (orientation_sign(fa) < 0) {
        fa = negate(fa);
        fb = negate(fb);
    }
    SplitResult out;
    out.kappa = raw->kappa_added - gamma0;
    out.factor_a = normalize_integer(fa, 0).expr;
    out.factor_b = normalize_integer(fb, 0).expr;
    out.parties_a = raw->parties_a;
    out.parties_b = raw->parties_b;
    return out;
}

// ---------------------------------------------------------------------------
// decompose / recompose

std::vector<const Leaf *> DecompositionTree::leaves() const {
    std::vector<const Leaf *> out;
    if (is_leaf()) {
        out.push_back(&leaf());
        return out;
    }
    for (const auto &c : product().children)
        for (const Leaf *l : c.leaves())
            out.push_back(l);
    return out;
}

namespace {

std::string tree_key(const DecompositionTree &t) {
    if (t.is_leaf()) {
        std::string key = "L|" + t.leaf().canonical.expr.scenario.to_text() + "|";
        for (const Rat &c : t.leaf().canonical.expr.coeff)
            key += to_string(c) + ",";
        return key;
    }
    std::string key = "P|" + to_string(t.product().kappa) + "|";
    for (const auto &c : t.product().children)
        key += tree_key(c) + ";";
    return key;
}

DecompositionTree build_node(const BellExpression &input, int sign,
                             const DecomposeOptions &opts) {
    BellExpression f = sign > 0 ? input : negate(input);
    SymmetricTensor t = to_symmetric(f);
    Rat shift = t.gamma[0];
    auto [tp, shed] = project(t, 0);
    if (std::all_of(tp.gamma.begin(), tp.gamma.end(),
                    [](const Rat &g) { return g == 0; }))
        throw TrivialExpressionError(
            "expression is constant on the no-signaling subspace");

    RemovalState st{from_symmetric(tp), {}};
    remove_superfluous_loop(st);

    DecompositionTree node;
    SymmetricTensor reduced = to_symmetric(st.expr);
    if (auto raw = split_projected(reduced)) {
        BellExpression fa = from_symmetric(raw->factor_a);
        BellExpression fb = from_symmetric(raw->factor_b);
        int child_sign = orientation_sign(fa);
        Product prod;
        prod.kappa = raw->kappa_added;
        prod.children.push_back(build_node(fa, child_sign, opts));
        prod.children.push_back(build_node(fb, child_sign, opts));
        prod.child_parties = {raw->parties_a, raw->parties_b};
        if (tree_key(prod.children[1]) < tree_key(prod.children[0])) {
            std::swap(prod.children[0], prod.children[1]);
            std::swap(prod.child_parties[0], prod.child_parties[1]);
        }
        prod.shift = shift;
        prod.structure = std::move(st.report);
        prod.sign = sign;
        node.node = std::move(prod);
        return node;
    }

    IntegerNormalized norm = normalize_integer(st.expr, 0);
    ScenarioGroup group(norm.expr.scenario);
    LexMinResult min = lex_min(norm.expr, group, opts.lexmin);

    Leaf leaf;
    leaf.canonical.expr = min.minimal;
    leaf.sign = sign;
    leaf.scale = norm.scale;
    leaf.shift = shift;
    leaf.structure = std::move(st.report);
    leaf.witness = min.witness;
    leaf.orbit_rank = opts.compute_ranks ? rank_of(min.minimal, group) : Int(0);
    node.node = std::move(leaf);
    return node;
}

Rat structure_offset(const Rat &shift, const StructureReport &report) {
    Rat offset = shift;
    for (const auto &step : report.steps)
        if (const auto *sh = std::get_if<ShiftStep>(&step))
            offset += sh->value;
    return offset;
}

} // namespace

DecompositionTree decompose(const OrientedExpression &e, const DecomposeOptions &opts) {
    DecompositionTree tree = build_node(e.expr, 1, opts);
    if (tree.is_leaf()) {
        // an upper bound b of the input gives canonical <= scale * (b - offset)
        Leaf &leaf = std::get<Leaf>(tree.node);
        Rat offset = structure_offset(leaf.shift, leaf.structure);
        for (const auto &[name, bound] : e.bounds)
            leaf.canonical.bounds[name] = BoundValue{
                leaf.scale * (bound.value - offset), bound_set_conditional(name)};
    }
    return tree;
}

BellExpression ns_representative(const BellExpression &e) {
    SymmetricTensor t = to_symmetric(e);
    Rat constant = t.gamma[0];
    auto [tp, shed] = project(t, 0);
    tp.gamma[0] = constant;
    return from_symmetric(tp);
}

namespace {

// tensor(a, b) with the parties moved back to their original slots
BellExpression tensor_interleaved(const BellExpression &a, const BellExpression &b,
                                  const std::vector<int> &parties_a,
                                  const std::vector<int> &parties_b) {
    BellExpression prod = tensor(a, b);
    int n = (int)(parties_a.size() + parties_b.size());
    ReorderMap map;
    map.party_to.resize(n);
    map.setting_to.resize(n);
    for (size_t i = 0; i < parties_a.size(); ++i)
        map.party_to[i] = parties_a[i];
    for (size_t i = 0; i < parties_b.size(); ++i)
        map.party_to[parties_a.size() + i] = parties_b[i];
    for (int i = 0; i < n; ++i) {
        map.setting_to[i].resize(prod.scenario.party(i).size());
        std::iota(map.setting_to[i].begin(), map.setting_to[i].end(), 0);
    }
    return reorder(prod, map);
}

} // namespace

BellExpression recompose(const DecompositionTree &tree) {
    BellExpression cur;
    if (tree.is_leaf()) {
        const Leaf &leaf = tree.leaf();
        cur = act(leaf.witness.inverse(), leaf.canonical.expr);
        for (Rat &c : cur.coeff)
            c /= leaf.scale;
        cur = relift(cur, leaf.structure);
        cur = add_constant(std::move(cur), leaf.shift);
        if (leaf.sign < 0)
            cur = negate(cur);
        return cur;
    }
    const Product &p = tree.product();
    BellExpression a = recompose(p.children[0]);
    BellExpression b = recompose(p.children[1]);
    cur = tensor_interleaved(a, b, p.child_parties[0], p.child_parties[1]);
    cur = add_constant(std::move(cur), -p.kappa);
    cur = relift(cur, p.structure);
    cur = add_constant(std::move(cur), p.shift);
    if (p.sign < 0)
        cur = negate(cur);
    return cur;
}

// ---------------------------------------------------------------------------
// Bound composition

ComposedBound compose_bounds(const TwoSidedBound &a, const TwoSidedBound &b,
                             const Rat &kappa) {
    if (!a.conditional || !b.conditional)
        throw UserError("bounds of this set are not inheritable under composition");
    if (!a.lower || !a.upper || !b.lower || !b.upper)
        throw UserError("bound composition needs both bounds of both factors");
    Rat products[4] = {*a.lower * *b.lower, *a.lower * *b.upper,
                       *a.upper * *b.lower, *a.upper * *b.upper};
    ComposedBound out{products[0], products[0]};
    for (const Rat &p : products) {
        if (p < out.lower)
            out.lower = p;
        if (p > out.upper)
            out.upper = p;
    }
    out.lower += kappa;
    out.upper += kappa;
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic-strategy oracles

namespace {

long long strategy_count(const Scenario &s, long long cap) {
    long long count = 1;
    for (int i = 0; i < s.party_count(); ++i)
        for (int j = 0; j < s.setting_count(i); ++j) {
            count *= s.outcome_count(i, j);
            if (count > cap)
                throw UserError("deterministic strategy count exceeds the cap");
        }
    return count;
}

// Value on the deterministic strategy encoded by `id` in mixed radix over
// all (party, setting) slots.
Rat strategy_value(const BellExpression &e, long long id) {
    const Scenario &s = e.scenario;
    int n = s.party_count();
    std::vector<std::vector<int>> pick(n);
    long long rem = id;
    for (int i = 0; i < n; ++i) {
        pick[i].resize(s.setting_count(i));
        for (int j = 0; j < s.setting_count(i); ++j) {
            pick[i][j] = (int)(rem % s.outcome_count(i, j));
            rem /= s.outcome_count(i, j);
        }
    }
    std::vector<long long> strides(n);
    long long st = 1;
    for (int i = 0; i < n; ++i) {
        strides[i] = st;
        st *= s.party_dim(i);
    }
    Rat total = 0;
    std::vector<int> setting(n, 0);
    for (;;) {
        long long idx = 0;
        for (int i = 0; i < n; ++i)
            idx += strides[i] *
                   party_flat_index(s.party(i), pick[i][setting[i]] + 1, setting[i] + 1);
        total += e.coeff[idx];
        int i = 0;
        while (i < n && ++setting[i] == s.setting_count(i)) {
            setting[i] = 0;
            ++i;
        }
        if (i == n)
            break;
    }
    return total;
}

std::vector<std::vector<int>> strategy_outcomes(const Scenario &s, long long id) {
    int n = s.party_count();
    std::vector<std::vector<int>> pick(n);
    long long rem = id;
    for (int i = 0; i < n; ++i) {
        pick[i].resize(s.setting_count(i));
        for (int j = 0; j < s.setting_count(i); ++j) {
            pick[i][j] = (int)(rem % s.outcome_count(i, j));
            rem /= s.outcome_count(i, j);
        }
    }
    return pick;
}

} // namespace

Rat local_bound_serial(const BellExpression &e, long long strategy_cap) {
    long long count = strategy_count(e.scenario, strategy_cap);
    Rat best = strategy_value(e, 0);
    for (long long id = 1; id < count; ++id) {
        Rat v = strategy_value(e, id);
        if (v > best)
            best = v;
    }
    return best;
}

Rat local_bound(const BellExpression &e, long long strategy_cap) {
    long long count = strategy_count(e.scenario, strategy_cap);
#ifdef _OPENMP
    int threads = omp_get_max_threads();
    std::vector<Rat> best((size_t)threads);
    std::vector<char> seen((size_t)threads, 0);
#pragma omp parallel for schedule(static)
    for (long long id = 0; id < count; ++id) {
        int tid = omp_get_thread_num();
        Rat v = strategy_value(e, id);
        if (!seen[tid] || v > best[tid]) {
            best[tid] = std::move(v);
            seen[tid] = 1;
        }
    }
    Rat out;
    bool found = false;
    for (int tid = 0; tid < threads; ++tid)
        if (seen[tid] && (!found || best[tid] > out)) {
            out = best[tid];
            found = true;
        }
    return out;
#else
    (void)count;
    return local_bound_serial(e, strategy_cap);
#endif
}

bool facet_check(const BellExpression &e, const Rat &bound, long long strategy_cap) {
    long long count = strategy_count(e.scenario, strategy_cap);
    const Scenario &s = e.scenario;
    Rat best;
    bool first = true;
    std::vector<long long> saturating;
    for (long long id = 0; id < count; ++id) {
        Rat v = strategy_value(e, id);
        if (first || v > best) {
            best = v;
            first = false;
        }
        if (v == bound)
            saturating.push_back(id);
    }
    if (best != bound)
        throw UserError("facet question is ill-posed: the bound is not the local bound");

    // affine rank of the saturating deterministic points
    long long d = s.full_dimension();
    std::vector<Rat> origin = deterministic_point(s, strategy_outcomes(s, saturating[0])).p;
    std::vector<std::vector<Rat>> basis;
    std::vector<long long> pivot_cols;
    long long rank = 0;
    for (size_t si = 1; si < saturating.size(); ++si) {
        std::vector<Rat> row = deterministic_point(s, strategy_outcomes(s, saturating[si])).p;
        for (long long c = 0; c < d; ++c)
            row[c] -= origin[c];
        for (size_t r = 0; r < basis.size(); ++r) {
            if (row[pivot_cols[r]] == 0)
                continue;
            Rat f = row[pivot_cols[r]] / basis[r][pivot_cols[r]];
            for (long long c = 0; c < d; ++c)
                row[c] -= f * basis[r][c];
        }
        long long pc = -1;
        for (long long c = 0; c < d; ++c)
            if (row[c] != 0) {
                pc = c;
                break;
            }
        if (pc >= 0) {
            basis.push_back(std::move(row));
            pivot_cols.push_back(pc);
            ++rank;
        }
    }
    return rank == s.ns_dimension() - 1;
}

} // namespace bellcanon
