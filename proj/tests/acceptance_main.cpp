// Acceptance gate: every exit criterion evaluated at its stated tolerance,
// one pass/fail line per criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cstdio>

#include "pflow/io.hpp"
#include "pflow/verify.hpp"

using namespace pflow;

namespace {

using Clock = std::chrono::steady_clock;

struct Gate {
    int failures = 0;

    void line(int id, bool pass, const std::string& what)
    {
        std::printf("criterion %d: %s - %s\n", id, pass ? "PASS" : "FAIL",
                    what.c_str());
        std::fflush(stdout);
        if (!pass)
            ++failures;
    }
};

int count_failures(const SuiteReport& rep, const std::string& prefix = "")
{
    int fails = 0;
    for (const auto& r : rep.rows)
        if (!r.pass && (prefix.empty() || r.name.rfind(prefix, 0) == 0))
            ++fails;
    return fails;
}

int count_rows(const SuiteReport& rep, const std::string& prefix)
{
    int rows = 0;
    for (const auto& r : rep.rows)
        if (r.name.rfind(prefix, 0) == 0)
            ++rows;
    return rows;
}

} // namespace

int main()
{
    Gate gate;
    VerifyConfig cfg;
    cfg.seed = 1;

    const auto t_all0 = Clock::now();

    // --- criterion 1: scaling identities ---
    const auto t0 = Clock::now();
    const SuiteReport scaling = run_suite("scaling", cfg);
    const double scaling_secs =
        std::chrono::duration<double>(Clock::now() - t0).count();
    gate.line(1,
              scaling.pass && scaling_secs <= 60.0 &&
                  static_cast<int>(scaling.rows.size()) >= 200,
              "scaling identities (" + std::to_string(scaling.rows.size()) +
                  " rows, " + std::to_string(count_failures(scaling)) +
                  " failures, " + fmt_double(scaling_secs) + "s <= 60s)");

    // --- criterion 2: background machinery ---
    const SuiteReport background = run_suite("background", cfg);
    gate.line(2, background.pass,
              "background machinery (" +
                  std::to_string(background.rows.size()) + " rows, " +
                  std::to_string(count_failures(background)) + " failures)");

    // --- criteria 3 and 4 share the action suite ---
    const SuiteReport action = run_suite("action", cfg);
    {
        const int split_rows = count_rows(action, "exponent split") +
                               count_rows(action, "step pair") +
                               count_rows(action, "gaussian");
        const int split_fails = count_failures(action, "exponent split") +
                                count_failures(action, "step pair") +
                                count_failures(action, "gaussian");
        gate.line(3, split_fails == 0 && split_rows >= 40,
                  "one-step exponent algebra (" + std::to_string(split_rows) +
                      " rows, " + std::to_string(split_fails) + " failures)");
        const int op_rows = count_rows(action, "operators");
        const int op_fails = count_failures(action, "operators");
        gate.line(4, op_fails == 0 && op_rows >= 6,
                  "operator stack: invertibility, square root, transposes (" +
                      std::to_string(op_rows) + " rows, " +
                      std::to_string(op_fails) + " failures)");
    }

    // --- criterion 5: critical chemical potential ---
    const SuiteReport mustar = run_suite("mustar", cfg);
    gate.line(5, mustar.pass,
              "critical chemical potential (" +
                  std::to_string(mustar.rows.size()) + " rows, " +
                  std::to_string(count_failures(mustar)) + " failures)");

    // --- criterion 6: parameter flow ---
    const SuiteReport appc = run_suite("appendixC", cfg);
    gate.line(6, appc.pass,
              "parameter battery with margins (" +
                  std::to_string(appc.rows.size()) + " rows, " +
                  std::to_string(count_failures(appc)) + " failures)");

    // --- criterion 7: symmetry ---
    const SuiteReport symmetry = run_suite("symmetry", cfg);
    gate.line(7, symmetry.pass,
              "symmetry group and invariance (" +
                  std::to_string(symmetry.rows.size()) + " rows, " +
                  std::to_string(count_failures(symmetry)) + " failures)");

    const double all_secs =
        std::chrono::duration<double>(Clock::now() - t_all0).count();

    // --- criterion 8: determinism and budget ---
    {
        const std::vector<SuiteReport> first{scaling, background, action,
                                             mustar, appc, symmetry};
        const std::string once = reports_to_json(first, cfg);
        const std::vector<std::string> names(std::begin(kSuiteNames),
                                             std::end(kSuiteNames));
        const auto rerun = run_suites(names, cfg);
        // reorder to match the first pass
        std::vector<SuiteReport> second;
        for (const auto& want :
             {"scaling", "background", "action", "mustar", "appendixC",
              "symmetry"})
            for (const auto& rep : rerun)
                if (rep.suite == want)
                    second.push_back(rep);
        const std::string twice = reports_to_json(second, cfg);
        const bool identical = once == twice;
        const double total =
            std::chrono::duration<double>(Clock::now() - t_all0).count();
        gate.line(8, identical && all_secs <= 600.0,
                  "byte-identical reruns and runtime budget (first pass " +
                      fmt_double(all_secs) + "s <= 600s, reruns match: " +
                      (identical ? "yes" : "no") + ", total " +
                      fmt_double(total) + "s)");
        write_file("acceptance_report.json", once);
    }

    if (gate.failures == 0) {
        std::printf("acceptance: all criteria PASS\n");
        return 0;
    }
    std::printf("acceptance: %d criteria FAILED\n", gate.failures);
    return 1;
}
