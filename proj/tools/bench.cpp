// Benchmark comparing the serial reference paths against the OpenMP ones:
// minimal-representative search and the deterministic-strategy bound.

#include <chrono>
#include <iostream>
#include <random>

#include "bellcanon/canonical.hpp"
#include "bellcanon/symmgroup.hpp"

using namespace bellcanon;

namespace {

double ms_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                     start)
        .count();
}

BellExpression random_integer_expression(const Scenario &s, std::mt19937_64 &rng) {
    std::uniform_int_distribution<int> dist(-9, 9);
    std::vector<Rat> c(s.full_dimension());
    for (auto &x : c)
        x = make_rat(dist(rng));
    return BellExpression(s, std::move(c));
}

} // namespace

int main(int argc, char **argv) {
    int n_exprs = argc > 1 ? std::atoi(argv[1]) : 10;
    std::string scenario_text = argc > 2 ? argv[2] : "(3,3,3)";
    Scenario s = Scenario::parse(scenario_text);
    std::mt19937_64 rng(0xbe11);

    std::cout << "scenario " << s.to_text() << ", |G| = "
              << to_string(relabeling_group(s).order) << "\n\n";

    {
        ScenarioGroup group(s);
        std::vector<BellExpression> exprs;
        for (int i = 0; i < n_exprs; ++i)
            exprs.push_back(random_integer_expression(s, rng));

        std::cout << "lex_min (matrix algorithm)\n";
        for (const char *mode : {"serial", "parallel"}) {
            bool parallel = mode[0] == 'p';
            auto start = std::chrono::steady_clock::now();
            for (const auto &e : exprs)
                lex_min(e, group, {.parallel = parallel});
            double total = ms_since(start);
            std::cout << "  " << mode << ": " << total / n_exprs
                      << " ms/expression (" << n_exprs << " expressions)\n";
        }
    }

    {
        BellExpression e = random_integer_expression(s, rng);
        std::cout << "\nlocal bound (" << s.to_text() << ")\n";
        auto start = std::chrono::steady_clock::now();
        Rat serial = local_bound_serial(e);
        double t_serial = ms_since(start);
        start = std::chrono::steady_clock::now();
        Rat parallel = local_bound(e);
        double t_parallel = ms_since(start);
        if (serial != parallel) {
            std::cerr << "serial and parallel bounds disagree\n";
            return 2;
        }
        std::cout << "  serial:   " << t_serial << " ms\n";
        std::cout << "  parallel: " << t_parallel << " ms\n";
    }
    return 0;
}
