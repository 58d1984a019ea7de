#pragma once

#include "wg/config.hpp"

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

namespace wg {

class UsageError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command = "scan-ratio";
    TrapConfig trap;
    double epar = 1e-3;  // E_par / E_perp(0,0)
    double epar_min = 1e-4;
    double epar_max = 5e-2;
    int epar_points = 10;
    double ratio = 1.4603;
    double ratio_min = 0.8;
    double ratio_max = 2.2;
    double ratio_step = 0.05;
    int ratio_points = 0;  // > 0 overrides ratio_step
    double w2_over_w0 = 0.05;
    double split_min = 1.2;
    double split_max = 1.8;
    double split_step = 0.005;
    double e_min = 0.0;  // total energy window for transitions, 0 selects n=2..n=4
    double e_max = 0.0;
    int e_points = 21;
    int n = 0;
    int n_prime = 2;
    std::string preset;
    std::string output = "out.csv";
    int workers = 1;
};

const std::vector<std::string>& known_commands();

// Flags override the --config file, which overrides defaults.
RunConfig parse_config(const std::vector<std::string>& args);

void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);

struct ScanOutput {
    std::string csv;
    nlohmann::json metadata;
    int failed_points = 0;
};

ScanOutput run_scan(const RunConfig& cfg);

// Writes cfg.output and cfg.output + ".json"; returns the process exit status.
int write_scan(const RunConfig& cfg, const ScanOutput& out);

std::string format_number(double v);

}  // namespace wg
