#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qws/protocol.hpp"
#include "qws/semiclassical.hpp"
#include "qws/workdef.hpp"
#include "qws/workstats.hpp"

namespace qws {

/// Resolved run configuration: protocol, grids, numerical policies and
/// output options.  Defaults reproduce the headline parameter set
/// (all couplings 1, tau' = 1, tau = 2).
struct RunConfig {
    DriveProtocol protocol{};

    double eta_min = -4.0;
    double eta_max = 4.0;
    int eta_count = 161;

    int dim = 0; ///< 0 = choose automatically
    int steps = 4000;
    std::int64_t samples = 1000000;
    std::uint64_t seed = 12345;

    std::vector<double> hbar_ladder{0.8, 0.6, 0.45, 0.34, 0.25, 0.19};
    int fit_degree = 4;
    double dim_scale = 80.0;
    int dim_cap = 1200;
    int steps_base = 700;
    double steps_exponent = 0.5;

    int grid_n = 512;
    double grid_span = 8.0;
    int angles = 256;

    std::string out_dir = "out";
    std::string format = "csv"; ///< csv | json

    /// Parses a flat key = value file ('#' comments allowed) over the
    /// current values.  Unknown keys raise ConfigError with the line number.
    void load_file(const std::string& path);

    /// Applies one key = value override (same keys as the file format).
    void set_key(const std::string& key, const std::string& value);

    void validate() const;
    int resolved_dim() const;
    VectorXd eta_grid() const;
    ScanPolicy scan_policy() const;

    /// Fixed-order resolved key/value list, used for output headers.
    std::vector<std::pair<std::string, std::string>> items() const;
};

// Commands write their files under cfg.out_dir and throw qws errors on
// failure.  File contents are byte-stable for a fixed config + seed.
void cmd_cf(const RunConfig& cfg);
void cmd_dist(const RunConfig& cfg, WorkDef def);
void cmd_dist_all(const RunConfig& cfg);
void cmd_fig1(const RunConfig& cfg);
void cmd_scan_hbar(const RunConfig& cfg);
void cmd_jarzynski(const RunConfig& cfg);
void cmd_classical(const RunConfig& cfg);
void cmd_measure(const RunConfig& cfg);

/// Exit-code wrapper: 0 success, 2 configuration error, 3 numerical
/// consistency failure, 4 truncation/accuracy failure.
int run_command(const std::string& command, const std::string& dist_definition,
                const RunConfig& cfg);

} // namespace qws
