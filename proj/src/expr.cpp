#include "bellcanon/expr.hpp"

#include <numeric>

namespace bellcanon {

int party_flat_index(const Party &p, int outcome1, int setting1) {
    if (setting1 < 1 || setting1 > (int)p.size())
        throw UserError("setting out of range");
    if (outcome1 < 1 || outcome1 > p[setting1 - 1])
        throw UserError("outcome out of range");
    int off = 0;
    for (int j = 0; j < setting1 - 1; ++j)
        off += p[j];
    return off + outcome1 - 1;
}

long long index_of(const IndexTuple &t, const Scenario &s) {
    if ((int)t.parts.size() != s.party_count())
        throw UserError("index tuple party count mismatch");
    long long idx = 0, stride = 1;
    for (int i = 0; i < s.party_count(); ++i) {
        idx += stride * party_flat_index(s.party(i), t.parts[i].outcome, t.parts[i].setting);
        stride *= s.party_dim(i);
    }
    return idx + 1;
}

IndexTuple tuple_of(long long index, const Scenario &s) {
    if (index < 1 || index > s.full_dimension())
        throw UserError("coefficient index out of range");
    long long rem = index - 1;
    IndexTuple t;
    for (int i = 0; i < s.party_count(); ++i) {
        long long dim = s.party_dim(i);
        int flat = (int)(rem % dim);
        rem /= dim;
        const Party &p = s.party(i);
        int setting = 0;
        while (flat >= p[setting]) {
            flat -= p[setting];
            ++setting;
        }
        t.parts.push_back({flat + 1, setting + 1});
    }
    return t;
}

BellExpression::BellExpression(Scenario s, std::vector<Rat> c)
    : scenario(std::move(s)), coeff(std::move(c)) {
    if ((long long)coeff.size() != scenario.full_dimension())
        throw UserError("coefficient count does not match the scenario dimension");
}

BellExpression BellExpression::zero(const Scenario &s) {
    return BellExpression(s, std::vector<Rat>(s.full_dimension()));
}

const Rat &BellExpression::at(const IndexTuple &t) const {
    return coeff[index_of(t, scenario) - 1];
}

Rat &BellExpression::at(const IndexTuple &t) {
    return coeff[index_of(t, scenario) - 1];
}

bool lex_less(const BellExpression &a, const BellExpression &b) {
    if (a.scenario != b.scenario)
        throw UserError("lexicographic comparison across scenarios");
    for (size_t i = 0; i < a.coeff.size(); ++i) {
        int c = cmp(a.coeff[i], b.coeff[i]);
        if (c != 0)
            return c < 0;
    }
    return false;
}

CorrelationPoint::CorrelationPoint(Scenario s, std::vector<Rat> values)
    : scenario(std::move(s)), p(std::move(values)) {
    if ((long long)p.size() != scenario.full_dimension())
        throw UserError("probability count does not match the scenario dimension");
    for (const Rat &v : p)
        if (v < 0 || v > 1)
            throw UserError("probability outside [0,1]");
    // normalization per joint setting
    int n = scenario.party_count();
    std::vector<int> setting(n, 1);
    for (;;) {
        Rat sum = 0;
        std::vector<int> outcome(n, 1);
        for (;;) {
            IndexTuple t;
            for (int i = 0; i < n; ++i)
                t.parts.push_back({outcome[i], setting[i]});
            sum += p[index_of(t, scenario) - 1];
            int i = 0;
            while (i < n && ++outcome[i] > scenario.outcome_count(i, setting[i] - 1)) {
                outcome[i] = 1;
                ++i;
            }
            if (i == n)
                break;
        }
        if (sum != 1)
            throw UserError("probabilities of a joint setting do not sum to one");
        int i = 0;
        while (i < n && ++setting[i] > scenario.setting_count(i)) {
            setting[i] = 1;
            ++i;
        }
        if (i == n)
            break;
    }
}

Rat evaluate(const BellExpression &e, const CorrelationPoint &point) {
    if (e.scenario != point.scenario)
        throw UserError("expression and point live in different scenarios");
    Rat sum = 0;
    for (size_t i = 0; i < e.coeff.size(); ++i)
        if (e.coeff[i] != 0)
            sum += e.coeff[i] * point.p[i];
    return sum;
}

BellExpression negate(const BellExpression &e) {
    BellExpression out = e;
    for (Rat &c : out.coeff)
        c = -c;
    return out;
}

OrientedExpression negate(const OrientedExpression &e) {
    return OrientedExpression{negate(e.expr), {}};
}

BellExpression tensor(const BellExpression &a, const BellExpression &b) {
    std::vector<Party> parties = a.scenario.parties();
    for (const Party &p : b.scenario.parties())
        parties.push_back(p);
    Scenario s(std::move(parties));
    long long da = a.scenario.full_dimension();
    long long db = b.scenario.full_dimension();
    std::vector<Rat> c(da * db);
    for (long long j = 0; j < db; ++j)
        for (long long i = 0; i < da; ++i)
            c[i + da * j] = a.coeff[i] * b.coeff[j];
    return BellExpression(std::move(s), std::move(c));
}

CorrelationPoint tensor(const CorrelationPoint &a, const CorrelationPoint &b) {
    std::vector<Party> parties = a.scenario.parties();
    for (const Party &p : b.scenario.parties())
        parties.push_back(p);
    Scenario s(std::move(parties));
    long long da = a.scenario.full_dimension();
    long long db = b.scenario.full_dimension();
    std::vector<Rat> c(da * db);
    for (long long j = 0; j < db; ++j)
        for (long long i = 0; i < da; ++i)
            c[i + da * j] = a.p[i] * b.p[j];
    return CorrelationPoint(std::move(s), std::move(c));
}

BellExpression reorder(const BellExpression &e, const ReorderMap &map) {
    const Scenario &src = e.scenario;
    Scenario dst = map.apply(src);
    long long d = src.full_dimension();
    std::vector<Rat> out(d);
    for (long long i = 1; i <= d; ++i) {
        IndexTuple t = tuple_of(i, src);
        IndexTuple u;
        u.parts.resize(t.parts.size());
        for (int p = 0; p < (int)t.parts.size(); ++p) {
            u.parts[map.party_to[p]] = {t.parts[p].outcome,
                                        map.setting_to[p][t.parts[p].setting - 1] + 1};
        }
        out[index_of(u, dst) - 1] = e.coeff[i - 1];
    }
    return BellExpression(std::move(dst), std::move(out));
}

CorrelationPoint deterministic_point(const Scenario &s,
                                     const std::vector<std::vector<int>> &outcomes) {
    long long d = s.full_dimension();
    std::vector<Rat> p(d);
    int n = s.party_count();
    for (long long i = 1; i <= d; ++i) {
        IndexTuple t = tuple_of(i, s);
        bool hit = true;
        for (int q = 0; q < n && hit; ++q)
            hit = t.parts[q].outcome - 1 == outcomes[q][t.parts[q].setting - 1];
        if (hit)
            p[i - 1] = 1;
    }
    return CorrelationPoint(s, std::move(p));
}

} // namespace bellcanon
