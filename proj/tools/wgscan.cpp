#include "wg/cli.hpp"

#include <algorithm>
#include <iostream>

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    wg::RunConfig cfg;
    try {
        cfg = wg::parse_config(args);
    } catch (const wg::UsageError& e) {
        const bool help = std::find(args.begin(), args.end(), "--help") != args.end();
        (help ? std::cout : std::cerr) << e.what() << "\n";
        return help ? 0 : 2;
    }
    try {
        const auto out = wg::run_scan(cfg);
        const int rc = wg::write_scan(cfg, out);
        std::cerr << cfg.command << ": wrote " << cfg.output << " (" << out.failed_points << " failed points)\n";
        return rc;
    } catch (const std::exception& e) {
        std::cerr << cfg.command << ": " << e.what() << "\n";
        return 1;
    }
}
