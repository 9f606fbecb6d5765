#pragma once

namespace qws {

/// Work-statistics definition tag.
enum class WorkDef { TPM = 0, FCS = 1, MH = 2, Classical = 3 };

inline const char* work_def_name(WorkDef d) {
    switch (d) {
    case WorkDef::TPM: return "TPM";
    case WorkDef::FCS: return "FCS";
    case WorkDef::MH: return "MH";
    default: return "CLASSICAL";
    }
}

/// Result of an exponential-average fluctuation-relation check.
struct JarzynskiReport {
    WorkDef definition = WorkDef::Classical;
    double lhs = 0.0;
    double rhs = 0.0;
    double delta_f = 0.0;
    double discrepancy = 0.0;
    double lhs_stderr = 0.0; ///< nonzero only for Monte Carlo sides
};

} // namespace qws
