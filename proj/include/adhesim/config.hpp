#pragma once

#include "adhesim/keyvalue.hpp"
#include "adhesim/stepper.hpp"

#include <string>

namespace adhesim {

// Optional ledger checks a run applies on top of the hard invariants.
struct VerifyToggles {
    bool energy_balance = false;
    double balance_tol = 1e-9;  // relative to the step energy scale
    bool total_energy = false;
    double slack_tol = 1e-9;
    bool entropy = false;
    double entropy_tol = 1e-12;
};

struct RunConfig {
    std::string path;
    UnitSystem units;
    Scenario scenario;
    std::string builtin;          // built-in scenario the config starts from
    bool builtin_unchanged = false;  // only T, tau, solver and output settings differ
    std::string mesh_file, material_file;
    std::string out_dir = "out";
    int snapshot_stride = 0;
    VerifyToggles verify;
};

// Sections: [units] (required), [mesh], [materials], [scenario], [loads],
// [initial], [regularisation], [solver], [output], [verify].  Relative file
// paths resolve against base_dir.
RunConfig parse_run_config(const KeyValueFile& file, const std::string& base_dir = ".");
RunConfig load_run_config(const std::string& path);

// "t:x,y t:x,y ..." with entries split by blanks or ';'.
VectorSeries parse_vector_series(const std::string& text, double time_scale, double value_scale);
ScalarSeries parse_scalar_series(const std::string& text, double time_scale, double value_scale);

}  // namespace adhesim
