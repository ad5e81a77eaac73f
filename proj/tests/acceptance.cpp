// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any criterion fails.
// Optional arguments select criteria by number; `--json <path>` also writes the full results.

#include "ptw/acceptance.hpp"

#include <cstdlib>
#include <cstring>
#include <iostream>

int main(int argc, char** argv)
{
    std::vector<int> only;
    std::string json_path;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--json") == 0 && i + 1 < argc)
            json_path = argv[++i];
        else
            only.push_back(std::atoi(argv[i]));
    }
    auto results = ptw::run_acceptance({}, only, [](const ptw::CriterionResult& r) {
        std::cout << ptw::summary_line(r) << std::endl;
    });
    int failed = 0;
    ptw::json all = ptw::json::array();
    for (const auto& r : results) {
        failed += !r.pass;
        all.push_back(ptw::to_json(r));
    }
    if (!json_path.empty())
        ptw::write_json(json_path, all);
    std::cout << results.size() - failed << "/" << results.size() << " criteria passed" << std::endl;
    return failed ? 1 : 0;
}
