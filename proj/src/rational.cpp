#include "bellcanon/rational.hpp"

namespace bellcanon {

Rat parse_rat(const std::string &text) {
    std::string s;
    for (char c : text)
        if (!isspace((unsigned char)c))
            s += c;
    if (s.empty())
        throw UserError("empty rational literal");
    auto check_int = [&](const std::string &part) {
        if (part.empty())
            throw UserError("bad rational literal '" + text + "'");
        size_t i = (part[0] == '-' || part[0] == '+') ? 1 : 0;
        if (i == part.size())
            throw UserError("bad rational literal '" + text + "'");
        for (; i < part.size(); ++i)
            if (!isdigit((unsigned char)part[i]))
                throw UserError("bad rational literal '" + text + "'");
    };
    auto slash = s.find('/');
    if (slash == std::string::npos) {
        check_int(s);
        return Rat(Int(s));
    }
    std::string num = s.substr(0, slash), den = s.substr(slash + 1);
    check_int(num);
    check_int(den);
    return make_rat(Int(num), Int(den));
}

std::string to_string(const Rat &r) { return r.get_str(); }
std::string to_string(const Int &n) { return n.get_str(); }

Rat integer_scale(std::span<const Rat> values) {
    Int den_lcm = 1;
    for (const Rat &v : values)
        if (v != 0)
            mpz_lcm(den_lcm.get_mpz_t(), den_lcm.get_mpz_t(), v.get_den_mpz_t());
    Int num_gcd = 0;
    for (const Rat &v : values) {
        if (v == 0)
            continue;
        Int scaled = v.get_num() * (den_lcm / v.get_den());
        mpz_gcd(num_gcd.get_mpz_t(), num_gcd.get_mpz_t(), scaled.get_mpz_t());
    }
    if (num_gcd == 0)
        throw TrivialExpressionError("no canonical scale for the zero expression");
    return make_rat(den_lcm, num_gcd);
}

Int factorial(int n) {
    Int f = 1;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

} // namespace bellcanon
