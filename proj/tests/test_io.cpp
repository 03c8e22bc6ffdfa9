#include "doctest.h"

#include "pflow/io.hpp"
#include "pflow/verify.hpp"

using namespace pflow;

TEST_CASE("io: field round trip and header validation")
{
    const Lattice l(LatticeSpec{3, 9, 3, 1, 0});
    Rng rng(81);
    const Field f = random_field(l, rng);
    const Field g = field_from_json(field_to_json(f));
    CHECK(g.lat.same_geometry(l));
    for (std::int64_t i = 0; i < f.size(); ++i)
        CHECK(f.v[i] == g.v[i]);

    CHECK_THROWS_AS((void)field_from_json("{not json"), ConfigError);
    // header/value mismatch
    CHECK_THROWS_AS(
        (void)field_from_json(
            R"({"lattice":{"L":3,"Ltp":9,"Lsp":3,"j":0,"n":0},"values":[[0,0]]})"),
        ConfigError);
}

TEST_CASE("io: kernel round trip preserves evaluations")
{
    const Lattice l(LatticeSpec{3, 9, 3, 0, 0});
    Rng rng(82);
    QuarticKernel V(l);
    for (int e = 0; e < 4; ++e) {
        QuarticKernel::Offsets off;
        for (auto& o : off)
            for (int ax = 0; ax < 4; ++ax)
                o[ax] = static_cast<std::int64_t>(rng.next() % 3) - 1;
        V.add_symmetrized(off, rng.sym());
    }
    const QuarticKernel W = kernel_from_json(kernel_to_json(V));
    const Field ps = random_field(l, rng), p = random_field(l, rng);
    const cplx a = quartic::eval(V, ps, p);
    const cplx b = quartic::eval(W, ps, p);
    CHECK(std::abs(a - b) <= 1e-13 * std::max(1.0, std::abs(a)));
}

TEST_CASE("io: flat config parsing")
{
    const auto kv = parse_flat_config("# comment\n"
                                      "L = 3\n"
                                      "lambda=0.25  # trailing\n"
                                      "\n"
                                      "out = results/dir\n");
    CHECK(kv.at("L") == "3");
    CHECK(kv.at("lambda") == "0.25");
    CHECK(kv.at("out") == "results/dir");
    CHECK_THROWS_AS((void)parse_flat_config("key_without_value\n"), ConfigError);
    CHECK_THROWS_AS((void)parse_flat_config("= 3\n"), ConfigError);
}

TEST_CASE("reports: deterministic rendering")
{
    VerifyConfig cfg;
    cfg.seed = 5;
    const auto a = run_suite("appendixC", cfg);
    const auto b = run_suite("appendixC", cfg);
    CHECK(reports_to_json({a}, cfg) == reports_to_json({b}, cfg));
    CHECK(a.pass);
}
