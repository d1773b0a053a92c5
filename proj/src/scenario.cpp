#include "bellcanon/scenario.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace bellcanon {

namespace {

constexpr long long kMaxDimension = 1LL << 31;

void validate(const std::vector<Party> &parties) {
    if (parties.empty())
        throw UserError("a scenario needs at least one party");
    for (const Party &p : parties) {
        if (p.empty())
            throw UserError("every party needs at least one setting");
        for (int k : p)
            if (k < 2)
                throw UserError("every setting needs at least two outcomes");
    }
}

} // namespace

Scenario::Scenario(std::vector<Party> parties) : parties_(std::move(parties)) {
    validate(parties_);
    full_dimension(); // reject scenarios too large to hold in memory
}

Scenario Scenario::homogeneous(int n_parties, int n_settings, int n_outcomes) {
    return Scenario(std::vector<Party>(n_parties, Party(n_settings, n_outcomes)));
}

long long Scenario::party_dim(int party) const {
    const Party &p = parties_[party];
    return std::accumulate(p.begin(), p.end(), 0LL);
}

long long Scenario::full_dimension() const {
    long long d = 1;
    for (int i = 0; i < party_count(); ++i) {
        d *= party_dim(i);
        if (d > kMaxDimension)
            throw UserError("scenario dimension too large");
    }
    return d;
}

long long Scenario::ns_dimension() const {
    long long d = 1;
    for (const Party &p : parties_) {
        long long f = 1;
        for (int k : p)
            f += k - 1;
        d *= f;
        if (d > kMaxDimension)
            throw UserError("scenario dimension too large");
    }
    return d - 1;
}

Scenario Scenario::without_party(int party) const {
    if (party_count() < 2)
        throw UserError("cannot remove the only party of a scenario");
    std::vector<Party> rest;
    for (int i = 0; i < party_count(); ++i)
        if (i != party)
            rest.push_back(parties_[i]);
    return Scenario(std::move(rest));
}

namespace {

// Nonincreasing comparison with k_ij = 0 padding beyond m_i.
bool party_less(const Party &a, const Party &b) {
    size_t n = std::max(a.size(), b.size());
    for (size_t j = 0; j < n; ++j) {
        int ka = j < a.size() ? a[j] : 0;
        int kb = j < b.size() ? b[j] : 0;
        if (ka != kb)
            return ka > kb;
    }
    return false;
}

} // namespace

bool Scenario::is_canonical() const {
    for (const Party &p : parties_)
        if (!std::is_sorted(p.begin(), p.end(), std::greater<int>()))
            return false;
    return std::is_sorted(parties_.begin(), parties_.end(), party_less);
}

std::pair<Scenario, ReorderMap> canonical_scenario(const Scenario &s) {
    int n = s.party_count();
    ReorderMap map;
    map.setting_to.resize(n);
    std::vector<Party> sorted_parties(n);
    for (int i = 0; i < n; ++i) {
        const Party &p = s.party(i);
        std::vector<int> order(p.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return p[a] > p[b]; });
        map.setting_to[i].resize(p.size());
        Party sorted(p.size());
        for (size_t pos = 0; pos < order.size(); ++pos) {
            map.setting_to[i][order[pos]] = (int)pos;
            sorted[pos] = p[order[pos]];
        }
        sorted_parties[i] = std::move(sorted);
    }
    std::vector<int> porder(n);
    std::iota(porder.begin(), porder.end(), 0);
    std::stable_sort(porder.begin(), porder.end(), [&](int a, int b) {
        return party_less(sorted_parties[a], sorted_parties[b]);
    });
    map.party_to.resize(n);
    std::vector<Party> out(n);
    for (int pos = 0; pos < n; ++pos) {
        map.party_to[porder[pos]] = pos;
        out[pos] = sorted_parties[porder[pos]];
    }
    return {Scenario(std::move(out)), std::move(map)};
}

ReorderMap ReorderMap::identity(const Scenario &s) {
    ReorderMap m;
    m.party_to.resize(s.party_count());
    std::iota(m.party_to.begin(), m.party_to.end(), 0);
    m.setting_to.resize(s.party_count());
    for (int i = 0; i < s.party_count(); ++i) {
        m.setting_to[i].resize(s.setting_count(i));
        std::iota(m.setting_to[i].begin(), m.setting_to[i].end(), 0);
    }
    return m;
}

bool ReorderMap::is_identity() const {
    for (size_t i = 0; i < party_to.size(); ++i)
        if (party_to[i] != (int)i)
            return false;
    for (const auto &st : setting_to)
        for (size_t j = 0; j < st.size(); ++j)
            if (st[j] != (int)j)
                return false;
    return true;
}

Scenario ReorderMap::apply(const Scenario &source) const {
    int n = source.party_count();
    if ((int)party_to.size() != n || (int)setting_to.size() != n)
        throw UserError("reorder map does not match the scenario");
    std::vector<Party> out(n);
    for (int i = 0; i < n; ++i) {
        const Party &p = source.party(i);
        if (setting_to[i].size() != p.size())
            throw UserError("reorder map does not match the scenario");
        Party q(p.size());
        for (size_t j = 0; j < p.size(); ++j)
            q[setting_to[i][j]] = p[j];
        out[party_to[i]] = std::move(q);
    }
    return Scenario(std::move(out));
}

ReorderMap ReorderMap::inverse() const {
    ReorderMap inv;
    int n = (int)party_to.size();
    inv.party_to.resize(n);
    inv.setting_to.resize(n);
    for (int i = 0; i < n; ++i) {
        inv.party_to[party_to[i]] = i;
        inv.setting_to[party_to[i]].resize(setting_to[i].size());
        for (size_t j = 0; j < setting_to[i].size(); ++j)
            inv.setting_to[party_to[i]][setting_to[i][j]] = (int)j;
    }
    return inv;
}

ReorderMap ReorderMap::then(const ReorderMap &next) const {
    ReorderMap out;
    int n = (int)party_to.size();
    out.party_to.resize(n);
    out.setting_to.resize(n);
    for (int i = 0; i < n; ++i) {
        int mid = party_to[i];
        out.party_to[i] = next.party_to[mid];
        out.setting_to[i].resize(setting_to[i].size());
        for (size_t j = 0; j < setting_to[i].size(); ++j)
            out.setting_to[i][j] = next.setting_to[mid][setting_to[i][j]];
    }
    return out;
}

std::string Scenario::to_text() const {
    bool homogeneous = true;
    for (const Party &p : parties_)
        if (p != parties_[0] || !std::all_of(p.begin(), p.end(),
                                             [&](int k) { return k == p[0]; }))
            homogeneous = false;
    std::ostringstream os;
    if (homogeneous) {
        os << '(' << party_count() << ',' << parties_[0].size() << ','
           << parties_[0][0] << ')';
        return os.str();
    }
    os << '[';
    for (size_t i = 0; i < parties_.size(); ++i) {
        os << '(';
        for (size_t j = 0; j < parties_[i].size(); ++j) {
            if (j)
                os << ' ';
            os << parties_[i][j];
        }
        os << ')';
        if (i + 1 < parties_.size())
            os << ' ';
    }
    os << ']';
    return os.str();
}

Scenario Scenario::parse(const std::string &text) {
    const std::string &s = text;
    auto fail = [&]() -> void { throw UserError("bad scenario '" + text + "'"); };
    size_t pos = 0;
    auto skip_sep = [&]() {
        while (pos < s.size() && (isspace((unsigned char)s[pos]) || s[pos] == ','))
            ++pos;
    };
    auto read_int = [&]() {
        skip_sep();
        size_t start = pos;
        while (pos < s.size() && isdigit((unsigned char)s[pos]))
            ++pos;
        if (pos == start)
            fail();
        return std::stoi(s.substr(start, pos - start));
    };
    auto expect = [&](char c) {
        skip_sep();
        if (pos >= s.size() || s[pos] != c)
            fail();
        ++pos;
    };
    auto peek = [&]() -> char {
        skip_sep();
        return pos < s.size() ? s[pos] : '\0';
    };
    if (peek() == '(') {
        // homogeneous shorthand (n,m,k)
        expect('(');
        int n = read_int();
        int m = read_int();
        int k = read_int();
        expect(')');
        skip_sep();
        if (pos != s.size() || n < 1)
            fail();
        return homogeneous(n, m, k);
    }
    expect('[');
    std::vector<Party> parties;
    while (peek() == '(') {
        expect('(');
        Party p;
        while (peek() != ')')
            p.push_back(read_int());
        expect(')');
        parties.push_back(std::move(p));
    }
    expect(']');
    skip_sep();
    if (pos != s.size())
        fail();
    return Scenario(std::move(parties));
}

} // namespace bellcanon
