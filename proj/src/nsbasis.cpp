#include "bellcanon/nsbasis.hpp"

#include <numeric>

namespace bellcanon {

int PartyBasis::lambda_index(int setting1, int zeta1) const {
    int idx = lambda_begin();
    for (int j = 0; j < setting1 - 1; ++j)
        idx += party[j] - 1;
    return idx + zeta1 - 1;
}

namespace {

// Inverse of a square rational matrix by Gauss-Jordan elimination.
std::vector<std::vector<Rat>> invert(std::vector<std::vector<Rat>> m) {
    int n = (int)m.size();
    std::vector<std::vector<Rat>> inv(n, std::vector<Rat>(n));
    for (int i = 0; i < n; ++i)
        inv[i][i] = 1;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        while (pivot < n && m[pivot][col] == 0)
            ++pivot;
        if (pivot == n)
            throw InternalError("party basis is singular");
        std::swap(m[pivot], m[col]);
        std::swap(inv[pivot], inv[col]);
        Rat p = m[col][col];
        for (int j = 0; j < n; ++j) {
            m[col][j] /= p;
            inv[col][j] /= p;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || m[r][col] == 0)
                continue;
            Rat f = m[r][col];
            for (int j = 0; j < n; ++j) {
                m[r][j] -= f * m[col][j];
                inv[r][j] -= f * inv[col][j];
            }
        }
    }
    return inv;
}

} // namespace

PartyBasis party_basis(const Party &p) {
    PartyBasis b;
    b.party = p;
    int m = (int)p.size();
    int dim = std::accumulate(p.begin(), p.end(), 0);
    b.dim = dim;
    b.vectors.assign(dim, std::vector<Rat>(dim));

    auto flat = [&](int outcome1, int setting1) {
        return party_flat_index(p, outcome1, setting1);
    };

    Rat mu = make_rat(1, m);
    for (int x = 1; x <= m; ++x)
        for (int a = 1; a <= p[x - 1]; ++a)
            b.vectors[PartyBasis::mu_index][flat(a, x)] = mu;

    int row = b.lambda_begin();
    for (int x = 1; x <= m; ++x)
        for (int z = 1; z <= p[x - 1] - 1; ++z) {
            b.vectors[row][flat(z, x)] = 1;
            b.vectors[row][flat(z + 1, x)] = -1;
            ++row;
        }
    for (int x = 1; x <= m - 1; ++x) {
        for (int a = 1; a <= p[x - 1]; ++a)
            b.vectors[row][flat(a, x)] = 1;
        for (int a = 1; a <= p[x]; ++a)
            b.vectors[row][flat(a, x + 1)] = -1;
        ++row;
    }

    // duals[j] is column j of the inverse basis matrix, so that
    // <vectors[i], duals[j]> = delta_ij.
    auto inv = invert(b.vectors);
    b.duals.assign(dim, std::vector<Rat>(dim));
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j)
            b.duals[j][i] = inv[i][j];
    return b;
}

namespace {

// Replaces axis `party` of the dense tensor by M * slice for every slice.
std::vector<Rat> mode_product(const std::vector<Rat> &in, const Scenario &s,
                              int party, const std::vector<std::vector<Rat>> &m) {
    long long dim = s.party_dim(party);
    long long stride = 1;
    for (int i = 0; i < party; ++i)
        stride *= s.party_dim(i);
    long long total = (long long)in.size();
    long long block = stride * dim;
    std::vector<Rat> out(total);
    std::vector<Rat> slice(dim);
    for (long long base = 0; base < total; base += block) {
        for (long long low = 0; low < stride; ++low) {
            for (long long r = 0; r < dim; ++r)
                slice[r] = in[base + low + r * stride];
            for (long long r = 0; r < dim; ++r) {
                Rat acc = 0;
                const auto &row = m[r];
                for (long long c = 0; c < dim; ++c)
                    if (row[c] != 0 && slice[c] != 0)
                        acc += row[c] * slice[c];
                out[base + low + r * stride] = acc;
            }
        }
    }
    return out;
}

} // namespace

SymmetricTensor to_symmetric(const BellExpression &e) {
    std::vector<Rat> g = e.coeff;
    for (int i = 0; i < e.scenario.party_count(); ++i) {
        PartyBasis b = party_basis(e.scenario.party(i));
        g = mode_product(g, e.scenario, i, b.duals);
    }
    return SymmetricTensor{e.scenario, std::move(g)};
}

BellExpression from_symmetric(const SymmetricTensor &t) {
    std::vector<Rat> c = t.gamma;
    for (int i = 0; i < t.scenario.party_count(); ++i) {
        PartyBasis b = party_basis(t.scenario.party(i));
        // transpose of the basis matrix: point value = sum_j gamma_j u^j(point)
        int dim = b.dim;
        std::vector<std::vector<Rat>> ut(dim, std::vector<Rat>(dim));
        for (int r = 0; r < dim; ++r)
            for (int col = 0; col < dim; ++col)
                ut[r][col] = b.vectors[col][r];
        c = mode_product(c, t.scenario, i, ut);
    }
    return BellExpression(t.scenario, std::move(c));
}

std::pair<SymmetricTensor, Rat> project(const SymmetricTensor &t, const Rat &bound) {
    const Scenario &s = t.scenario;
    int n = s.party_count();
    std::vector<PartyBasis> bases;
    for (int i = 0; i < n; ++i)
        bases.push_back(party_basis(s.party(i)));
    SymmetricTensor out = t;
    long long d = s.full_dimension();
    for (long long idx = 0; idx < d; ++idx) {
        long long rem = idx;
        bool kill = false;
        for (int i = 0; i < n; ++i) {
            int bi = (int)(rem % s.party_dim(i));
            rem /= s.party_dim(i);
            if (bases[i].is_nu(bi)) {
                kill = true;
                break;
            }
        }
        if (kill)
            out.gamma[idx] = 0;
    }
    Rat constant = out.gamma[0];
    out.gamma[0] = 0;
    return {std::move(out), bound - constant};
}

bool is_projected(const SymmetricTensor &t) {
    auto [p, shift] = project(t, 0);
    return shift == 0 && p == t;
}

IntegerNormalized normalize_integer(const BellExpression &e, const Rat &bound) {
    Rat s = integer_scale(e.coeff);
    BellExpression out = e;
    for (Rat &c : out.coeff)
        c *= s;
    return IntegerNormalized{std::move(out), bound * s, s};
}

std::pair<SymmetricTensor, Rat> scale_tensor(const SymmetricTensor &t, const Rat &s) {
    SymmetricTensor out = t;
    for (Rat &g : out.gamma)
        g *= s;
    return {std::move(out), s};
}

} // namespace bellcanon
