#include "adhesim/verify.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"adhesim acceptance suite"};
    bool no_poro = false, verbose = false;
    int threads = 1;
    app.add_flag("--no-poro", no_poro, "skip the diffusion criterion");
    app.add_flag("--verbose", verbose, "per-scenario progress");
    app.add_option("--threads", threads, "worker threads for tau studies")->check(CLI::PositiveNumber);
    CLI11_PARSE(app, argc, argv);

    adhesim::VerifyOptions opt;
    opt.poro = !no_poro;
    opt.threads = threads;
    if (verbose) opt.log = &std::clog;
    const auto results = adhesim::run_acceptance(opt);
    adhesim::print_results(std::cout, results);
    const bool ok = adhesim::all_passed(results);
    std::cout << (ok ? "all criteria passed" : "some criteria failed") << "\n";
    return ok ? 0 : 1;
}
