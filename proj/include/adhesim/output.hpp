#pragma once

#include "adhesim/energetics.hpp"
#include "adhesim/stepper.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace adhesim {

// Ledger CSV: header row of ledger_columns(), then one row per time level,
// printed in shortest round-trip form so a re-read is exact.
void write_ledger_csv(std::ostream& os, const std::vector<LedgerRow>& rows);
std::vector<LedgerRow> read_ledger_csv(std::istream& is);

void write_study_csv(std::ostream& os, const std::vector<StudyRow>& rows);

// Node-id keyed field file: bulk nodes then interface nodes.  Displacements
// include the Dirichlet lift.
void write_snapshot(std::ostream& os, const SystemState& s, const StepContext& ctx);

// Legacy VTK unstructured grid (ASCII) with point fields.
void write_vtk(std::ostream& os, const SystemState& s, const StepContext& ctx);

struct RunReport {
    std::string scenario;
    std::string config;
    bool completed = false;
    int steps = 0, steps_done = 0;
    std::vector<std::string> violations;  // hard invariant failures
    std::vector<std::pair<std::string, bool>> checks;
    double worst_mech_rel_residual = 0.0;
    double min_theta = 0.0, min_total_slack = 0.0, min_entropy_term = 0.0;
    double min_alpha = 1.0, max_alpha = 1.0;
    double R_cum = 0.0, work_cum = 0.0;
    double runtime_seconds = 0.0;
    std::string error;
};

void write_run_report(std::ostream& os, const RunReport& r);

}  // namespace adhesim
