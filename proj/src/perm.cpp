#include "bellcanon/perm.hpp"

#include <numeric>
#include <sstream>

namespace bellcanon {

Perm Perm::identity(int n) {
    std::vector<int32_t> img(n);
    std::iota(img.begin(), img.end(), 0);
    return Perm(std::move(img));
}

bool Perm::is_identity() const {
    for (int i = 0; i < size(); ++i)
        if (img[i] != i)
            return false;
    return true;
}

Perm Perm::inverse() const {
    std::vector<int32_t> inv(img.size());
    for (int i = 0; i < size(); ++i)
        inv[img[i]] = i;
    return Perm(std::move(inv));
}

Perm mul(const Perm &g, const Perm &h) {
    if (g.size() != h.size())
        throw InternalError("composing permutations of different degree");
    std::vector<int32_t> img(g.size());
    for (int i = 0; i < g.size(); ++i)
        img[i] = h.img[g.img[i]];
    return Perm(std::move(img));
}

std::string cycle_string(const Perm &g) {
    std::vector<bool> seen(g.size());
    std::ostringstream os;
    bool any = false;
    for (int i = 0; i < g.size(); ++i) {
        if (seen[i] || g[i] == i)
            continue;
        any = true;
        os << '(' << i + 1;
        seen[i] = true;
        for (int j = g[i]; j != i; j = g[j]) {
            seen[j] = true;
            os << ' ' << j + 1;
        }
        os << ')';
    }
    return any ? os.str() : "()";
}

BellExpression act(const Perm &g, const BellExpression &e) {
    if (g.size() != (int)e.coeff.size())
        throw UserError("permutation degree does not match the expression");
    BellExpression out = e;
    for (int i = 0; i < g.size(); ++i)
        out.coeff[g.img[i]] = e.coeff[i];
    return out;
}

Relabeling Relabeling::identity(const Scenario &s) {
    Relabeling r;
    int n = s.party_count();
    r.party_to.resize(n);
    std::iota(r.party_to.begin(), r.party_to.end(), 0);
    r.setting_to.resize(n);
    r.outcome_to.resize(n);
    for (int i = 0; i < n; ++i) {
        r.setting_to[i].resize(s.setting_count(i));
        std::iota(r.setting_to[i].begin(), r.setting_to[i].end(), 0);
        r.outcome_to[i].resize(s.setting_count(i));
        for (int j = 0; j < s.setting_count(i); ++j) {
            r.outcome_to[i][j].resize(s.outcome_count(i, j));
            std::iota(r.outcome_to[i][j].begin(), r.outcome_to[i][j].end(), 0);
        }
    }
    return r;
}

Perm Relabeling::to_perm(const Scenario &s) const {
    int n = s.party_count();
    if ((int)party_to.size() != n)
        throw UserError("relabeling party count mismatch");
    for (int i = 0; i < n; ++i) {
        int j = party_to[i];
        if (s.party(i) != s.party(j))
            throw UserError("relabeling maps a party onto a different signature");
        for (int x = 0; x < s.setting_count(i); ++x) {
            int y = setting_to[i][x];
            if (s.outcome_count(i, x) != s.outcome_count(i, y))
                throw UserError("relabeling maps a setting onto a different outcome count");
        }
    }
    long long d = s.full_dimension();
    std::vector<int32_t> img(d);
    for (long long idx = 1; idx <= d; ++idx) {
        IndexTuple t = tuple_of(idx, s);
        IndexTuple u;
        u.parts.resize(n);
        for (int i = 0; i < n; ++i) {
            int x = t.parts[i].setting - 1;
            int a = t.parts[i].outcome - 1;
            u.parts[party_to[i]] = {outcome_to[i][x][a] + 1, setting_to[i][x] + 1};
        }
        img[idx - 1] = (int32_t)(index_of(u, s) - 1);
    }
    Perm out(std::move(img));
    std::vector<bool> hit(d, false);
    for (long long i = 0; i < d; ++i) {
        if (hit[out[i]])
            throw UserError("relabeling maps are not bijections");
        hit[out[i]] = true;
    }
    return out;
}

} // namespace bellcanon
