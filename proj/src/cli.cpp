#include "qws/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "qws/classical.hpp"
#include "qws/operators.hpp"
#include "qws/version.hpp"
#include "qws/wigner.hpp"

namespace qws {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value '" + v + "' for " + key);
    }
}

std::int64_t parse_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const std::int64_t i = std::stoll(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer value '" + v + "' for " + key);
    }
}

std::vector<double> parse_ladder(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ','))
        out.push_back(parse_double(key, tok));
    if (out.empty())
        throw ConfigError("config: empty list for " + key);
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    const auto b = s.find_last_not_of(" \t\r\n");
    return a == std::string::npos ? std::string{} : s.substr(a, b - a + 1);
}

WorkDef parse_def(const std::string& s) {
    if (s == "TPM" || s == "tpm") return WorkDef::TPM;
    if (s == "FCS" || s == "fcs") return WorkDef::FCS;
    if (s == "MH" || s == "mh") return WorkDef::MH;
    throw ConfigError("unknown work definition '" + s + "' (expected TPM, FCS or MH)");
}

/// Simple table with a fixed column schema; cells are preformatted so that
/// CSV and JSON emissions are byte-stable.
struct Table {
    std::vector<std::string> columns;
    std::vector<json> rows;
    std::vector<std::pair<std::string, std::string>> summary;

    void add_row(std::initializer_list<json> cells) { rows.emplace_back(cells); }
};

void write_header_comments(std::ofstream& os, const RunConfig& cfg) {
    os << "# qws " << kVersion << "\n";
    for (const auto& [k, v] : cfg.items())
        os << "# " << k << " = " << v << "\n";
}

std::string cell_text(const json& c) {
    if (c.is_string())
        return c.get<std::string>();
    if (c.is_number_float())
        return fmt17(c.get<double>());
    return c.dump();
}

void write_table(const RunConfig& cfg, const std::string& name, const Table& t) {
    fs::create_directories(cfg.out_dir);
    const fs::path base = fs::path(cfg.out_dir) / name;
    if (cfg.format == "csv") {
        std::ofstream os(base.string() + ".csv");
        if (!os)
            throw ConfigError("cannot open output file " + base.string() + ".csv");
        write_header_comments(os, cfg);
        for (size_t i = 0; i < t.columns.size(); ++i)
            os << t.columns[i] << (i + 1 < t.columns.size() ? "," : "\n");
        for (const auto& row : t.rows) {
            for (size_t i = 0; i < row.size(); ++i)
                os << cell_text(row[i]) << (i + 1 < row.size() ? "," : "\n");
        }
        for (const auto& [k, v] : t.summary)
            os << "# " << k << " = " << v << "\n";
    } else {
        json j;
        j["artifact"] = "qws";
        j["version"] = kVersion;
        json cfgj = json::object();
        for (const auto& [k, v] : cfg.items())
            cfgj[k] = v;
        j["config"] = cfgj;
        j["columns"] = t.columns;
        j["rows"] = t.rows;
        if (!t.summary.empty()) {
            json s = json::object();
            for (const auto& [k, v] : t.summary)
                s[k] = v;
            j["summary"] = s;
        }
        std::ofstream os(base.string() + ".json");
        if (!os)
            throw ConfigError("cannot open output file " + base.string() + ".json");
        os << j.dump(1) << "\n";
    }
}

void write_field(const RunConfig& cfg, const std::string& name, const WignerField& f) {
    fs::create_directories(cfg.out_dir);
    const fs::path base = fs::path(cfg.out_dir) / name;
    if (cfg.format == "csv") {
        std::ofstream os(base.string() + ".csv");
        if (!os)
            throw ConfigError("cannot open output file " + base.string() + ".csv");
        write_header_comments(os, cfg);
        os << fmt17(f.grid.x_min) << " " << fmt17(f.grid.x_max) << "\n";
        os << fmt17(f.grid.p_min) << " " << fmt17(f.grid.p_max) << "\n";
        os << f.grid.nx << " " << f.grid.np << "\n";
        for (int i = 0; i < f.grid.nx; ++i) {
            for (int j = 0; j < f.grid.np; ++j)
                os << fmt17(f.values(i, j)) << (j + 1 < f.grid.np ? "," : "\n");
        }
    } else {
        json j;
        j["artifact"] = "qws";
        j["version"] = kVersion;
        json cfgj = json::object();
        for (const auto& [k, v] : cfg.items())
            cfgj[k] = v;
        j["config"] = cfgj;
        j["x_range"] = {f.grid.x_min, f.grid.x_max};
        j["p_range"] = {f.grid.p_min, f.grid.p_max};
        j["counts"] = {f.grid.nx, f.grid.np};
        json vals = json::array();
        for (int i = 0; i < f.grid.nx; ++i) {
            json row = json::array();
            for (int jj = 0; jj < f.grid.np; ++jj)
                row.push_back(f.values(i, jj));
            vals.push_back(std::move(row));
        }
        j["values"] = vals;
        std::ofstream os(base.string() + ".json");
        if (!os)
            throw ConfigError("cannot open output file " + base.string() + ".json");
        os << j.dump(1) << "\n";
    }
}

/// Quantum inputs shared by several commands.
struct QuantumSetup {
    int dim;
    DensityMatrix rho0;
    FockOperator h0, ht, u;
    SpectralContext ctx;
};

QuantumSetup make_setup(const RunConfig& cfg) {
    const DriveProtocol& p = cfg.protocol;
    const int dim = cfg.resolved_dim();
    DensityMatrix rho0 = displaced_thermal(p, dim);
    FockOperator h0 = build_hamiltonian(p, 0.0, dim);
    FockOperator ht = build_hamiltonian(p, p.duration, dim);
    FockOperator u = propagator(p, 0.0, p.duration, cfg.steps, dim);
    SpectralContext ctx = SpectralContext::build(rho0, h0, ht, u);
    return {dim, std::move(rho0), std::move(h0), std::move(ht), std::move(u),
            std::move(ctx)};
}

} // namespace

void RunConfig::set_key(const std::string& key, const std::string& value) {
    static const std::map<std::string, std::function<void(RunConfig&, const std::string&)>>
        setters = {
            {"mass", [](RunConfig& c, const std::string& v) { c.protocol.mass = parse_double("mass", v); }},
            {"omega", [](RunConfig& c, const std::string& v) { c.protocol.omega = parse_double("omega", v); }},
            {"drag_speed", [](RunConfig& c, const std::string& v) { c.protocol.drag_speed = parse_double("drag_speed", v); }},
            {"tau_prime", [](RunConfig& c, const std::string& v) { c.protocol.pre_time = parse_double("tau_prime", v); }},
            {"tau", [](RunConfig& c, const std::string& v) { c.protocol.duration = parse_double("tau", v); }},
            {"beta", [](RunConfig& c, const std::string& v) { c.protocol.beta = parse_double("beta", v); }},
            {"hbar", [](RunConfig& c, const std::string& v) { c.protocol.hbar = parse_double("hbar", v); }},
            {"eta_min", [](RunConfig& c, const std::string& v) { c.eta_min = parse_double("eta_min", v); }},
            {"eta_max", [](RunConfig& c, const std::string& v) { c.eta_max = parse_double("eta_max", v); }},
            {"eta_count", [](RunConfig& c, const std::string& v) { c.eta_count = static_cast<int>(parse_int("eta_count", v)); }},
            {"dim", [](RunConfig& c, const std::string& v) { c.dim = static_cast<int>(parse_int("dim", v)); }},
            {"steps", [](RunConfig& c, const std::string& v) { c.steps = static_cast<int>(parse_int("steps", v)); }},
            {"samples", [](RunConfig& c, const std::string& v) { c.samples = parse_int("samples", v); }},
            {"seed", [](RunConfig& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int("seed", v)); }},
            {"hbar_ladder", [](RunConfig& c, const std::string& v) { c.hbar_ladder = parse_ladder("hbar_ladder", v); }},
            {"fit_degree", [](RunConfig& c, const std::string& v) { c.fit_degree = static_cast<int>(parse_int("fit_degree", v)); }},
            {"dim_scale", [](RunConfig& c, const std::string& v) { c.dim_scale = parse_double("dim_scale", v); }},
            {"dim_cap", [](RunConfig& c, const std::string& v) { c.dim_cap = static_cast<int>(parse_int("dim_cap", v)); }},
            {"steps_base", [](RunConfig& c, const std::string& v) { c.steps_base = static_cast<int>(parse_int("steps_base", v)); }},
            {"steps_exponent", [](RunConfig& c, const std::string& v) { c.steps_exponent = parse_double("steps_exponent", v); }},
            {"grid_n", [](RunConfig& c, const std::string& v) { c.grid_n = static_cast<int>(parse_int("grid_n", v)); }},
            {"grid_span", [](RunConfig& c, const std::string& v) { c.grid_span = parse_double("grid_span", v); }},
            {"angles", [](RunConfig& c, const std::string& v) { c.angles = static_cast<int>(parse_int("angles", v)); }},
            {"out_dir", [](RunConfig& c, const std::string& v) { c.out_dir = v; }},
            {"format", [](RunConfig& c, const std::string& v) { c.format = v; }},
        };
    const auto it = setters.find(key);
    if (it == setters.end())
        throw ConfigError("config: unknown key '" + key + "'");
    it->second(*this, value);
}

void RunConfig::load_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("config: cannot open file " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(lineno) +
                              " is not 'key = value'");
        try {
            set_key(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(std::string(e.what()) + " (line " + std::to_string(lineno) +
                              " of " + path + ")");
        }
    }
}

void RunConfig::validate() const {
    try {
        protocol.validate();
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (eta_count < 3)
        throw ConfigError("config: eta_count must be >= 3");
    if (!(eta_max > eta_min))
        throw ConfigError("config: eta range is empty");
    if (format != "csv" && format != "json")
        throw ConfigError("config: format must be csv or json");
    if (dim < 0 || (dim > 0 && dim < 2))
        throw ConfigError("config: dim must be 0 (auto) or >= 2");
    if (steps < 1)
        throw ConfigError("config: steps must be >= 1");
    if (samples < 1000)
        throw ConfigError("config: samples must be >= 1000");
    if (grid_n < 64)
        throw ConfigError("config: grid_n must be >= 64");
    if (angles < 256)
        throw ConfigError("config: angles must be >= 256");
}

int RunConfig::resolved_dim() const {
    return dim > 0 ? dim : choose_dimension(protocol);
}

VectorXd RunConfig::eta_grid() const { return make_eta_grid(eta_min, eta_max, eta_count); }

ScanPolicy RunConfig::scan_policy() const {
    ScanPolicy pol;
    pol.hbar_ladder = hbar_ladder;
    pol.fit_degree = fit_degree;
    pol.dim_scale = dim_scale;
    pol.dim_cap = dim_cap;
    pol.steps_base = steps_base;
    pol.steps_exponent = steps_exponent;
    try {
        pol.validate(protocol.hbar);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return pol;
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
    std::string ladder;
    for (size_t i = 0; i < hbar_ladder.size(); ++i)
        ladder += (i ? "," : "") + fmt17(hbar_ladder[i]);
    return {
        {"mass", fmt17(protocol.mass)},
        {"omega", fmt17(protocol.omega)},
        {"drag_speed", fmt17(protocol.drag_speed)},
        {"tau_prime", fmt17(protocol.pre_time)},
        {"tau", fmt17(protocol.duration)},
        {"beta", fmt17(protocol.beta)},
        {"hbar", fmt17(protocol.hbar)},
        {"eta_min", fmt17(eta_min)},
        {"eta_max", fmt17(eta_max)},
        {"eta_count", std::to_string(eta_count)},
        {"dim", std::to_string(dim)},
        {"resolved_dim", std::to_string(resolved_dim())},
        {"steps", std::to_string(steps)},
        {"samples", std::to_string(samples)},
        {"seed", std::to_string(seed)},
        {"hbar_ladder", ladder},
        {"fit_degree", std::to_string(fit_degree)},
        {"dim_scale", fmt17(dim_scale)},
        {"dim_cap", std::to_string(dim_cap)},
        {"steps_base", std::to_string(steps_base)},
        {"steps_exponent", fmt17(steps_exponent)},
        {"grid_n", std::to_string(grid_n)},
        {"grid_span", fmt17(grid_span)},
        {"angles", std::to_string(angles)},
        {"out_dir", out_dir},
        {"format", format},
    };
}

void cmd_cf(const RunConfig& cfg) {
    cfg.validate();
    const QuantumSetup s = make_setup(cfg);
    const VectorXd etas = cfg.eta_grid();

    Table t;
    t.columns = {"eta", "re", "im", "definition"};
    for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
        const CharacteristicSamples cs = characteristic_function(s.ctx, def, etas);
        for (Eigen::Index i = 0; i < etas.size(); ++i)
            t.add_row({etas[i], cs.values[i].real(), cs.values[i].imag(),
                       work_def_name(def)});
    }
    const VectorXcd cl = cf_classical_closed(etas, cfg.protocol);
    for (Eigen::Index i = 0; i < etas.size(); ++i)
        t.add_row({etas[i], cl[i].real(), cl[i].imag(), work_def_name(WorkDef::Classical)});
    write_table(cfg, "cf", t);
}

void cmd_dist(const RunConfig& cfg, WorkDef def) {
    cfg.validate();
    const QuantumSetup s = make_setup(cfg);
    const WorkQuasiDistribution dist =
        quasi_distribution(s.ctx, def, default_merge_tol(cfg.protocol));

    Table t;
    t.columns = {"work", "weight", "definition"};
    for (size_t i = 0; i < dist.support.size(); ++i)
        t.add_row({dist.support[i], dist.weights[i], work_def_name(def)});
    t.summary = {
        {"weight_sum", fmt17(dist.weight_sum())},
        {"min_weight", fmt17(dist.min_weight())},
        {"negativity_count", std::to_string(dist.negativity_count())},
        {"max_imag_residual", fmt17(dist.max_imag_residual)},
    };
    std::string name = "dist_";
    name += work_def_name(def);
    for (auto& ch : name)
        ch = static_cast<char>(std::tolower(ch));
    write_table(cfg, name, t);
}

void cmd_dist_all(const RunConfig& cfg) {
    cmd_dist(cfg, WorkDef::TPM);
    cmd_dist(cfg, WorkDef::FCS);
    cmd_dist(cfg, WorkDef::MH);
}

void cmd_fig1(const RunConfig& cfg) {
    cfg.validate();
    const Fig1Table tab = fig1_table(cfg.protocol, cfg.eta_grid(), cfg.scan_policy());

    const auto emit = [&](const std::string& name, bool real_part) {
        Table t;
        t.columns = {"eta", "classical", "phi0", "fcs_corrected", "mh_corrected"};
        for (Eigen::Index i = 0; i < tab.etas.size(); ++i) {
            const auto part = [&](const VectorXcd& v) {
                return real_part ? v[i].real() : v[i].imag();
            };
            t.add_row({tab.etas[i], part(tab.classical), part(tab.phi0),
                       part(tab.fcs_corrected), part(tab.mh_corrected)});
        }
        write_table(cfg, name, t);
    };
    emit("fig1_real", true);
    emit("fig1_imag", false);
}

void cmd_scan_hbar(const RunConfig& cfg) {
    cfg.validate();
    ScanEngine engine(cfg.protocol, cfg.scan_policy());
    const VectorXd etas = cfg.eta_grid();

    Table t;
    t.columns = {"eta", "definition", "phi0_re", "phi0_im", "err0",
                 "phi1_re", "phi1_im", "err1", "phi2_re", "phi2_im",
                 "err2", "residual"};
    for (WorkDef def : {WorkDef::FCS, WorkDef::MH}) {
        const auto rows = engine.scan_grid(etas, def);
        for (const auto& r : rows)
            t.add_row({r.eta, work_def_name(def), r.phi0().real(), r.phi0().imag(),
                       r.err(0), r.phi1().real(), r.phi1().imag(), r.err(1),
                       r.phi2().real(), r.phi2().imag(), r.err(2), r.fit.residual});
    }
    write_table(cfg, "scan_hbar", t);
}

void cmd_jarzynski(const RunConfig& cfg) {
    cfg.validate();
    const DriveProtocol& p = cfg.protocol;
    const int dim = cfg.resolved_dim();
    const DensityMatrix rho0 = displaced_thermal(p, dim);

    Table t;
    t.columns = {"definition", "lhs", "rhs", "delta_f", "discrepancy",
                 "lhs_stderr", "tolerance", "pass"};
    for (WorkDef def : {WorkDef::TPM, WorkDef::FCS, WorkDef::MH}) {
        const JarzynskiReport r = jarzynski_check(rho0, p, def, cfg.steps, dim);
        const double tol = 1e-8;
        t.add_row({work_def_name(def), r.lhs, r.rhs, r.delta_f, r.discrepancy,
                   r.lhs_stderr, tol, r.discrepancy <= tol ? 1 : 0});
    }
    const JarzynskiReport rc = gong_jarzynski_check(p, cfg.samples, cfg.seed);
    const double tolc = 3.0 * rc.lhs_stderr + 1e-12;
    if (rc.lhs > 0.0 && rc.lhs_stderr / rc.lhs > 0.1)
        std::cerr << "warning: classical Jarzynski Monte Carlo stderr above 10%; "
                     "increase samples\n";
    t.add_row({work_def_name(WorkDef::Classical), rc.lhs, rc.rhs, rc.delta_f,
               rc.discrepancy, rc.lhs_stderr, tolc, rc.discrepancy <= tolc ? 1 : 0});
    write_table(cfg, "jarzynski", t);
}

void cmd_classical(const RunConfig& cfg) {
    cfg.validate();
    const DriveProtocol& p = cfg.protocol;
    const VectorXd etas = cfg.eta_grid();
    const VectorXcd closed = cf_classical_closed(etas, p);
    const McCf mc = cf_classical_mc(etas, p, cfg.samples, cfg.seed);
    const WorkStats st = classical_work_stats(p, cfg.samples, cfg.seed);

    Table t;
    t.columns = {"eta", "closed_re", "closed_im", "mc_re", "mc_im",
                 "mc_stderr_re", "mc_stderr_im"};
    for (Eigen::Index i = 0; i < etas.size(); ++i)
        t.add_row({etas[i], closed[i].real(), closed[i].imag(), mc.values[i].real(),
                   mc.values[i].imag(), mc.stderr_re[i], mc.stderr_im[i]});
    const double w = p.omega;
    const double mu2 = p.mass * p.drag_speed * p.drag_speed;
    t.summary = {
        {"work_mean", fmt17(st.mean)},
        {"work_mean_stderr", fmt17(st.mean_stderr)},
        {"work_mean_target",
         fmt17(mu2 * (std::cos(w * p.pre_time) - std::cos(w * (p.pre_time + p.duration))))},
        {"work_var", fmt17(st.var)},
        {"work_var_stderr", fmt17(st.var_stderr)},
        {"work_var_target", fmt17(2.0 * mu2 * (1.0 - std::cos(w * p.duration)) / p.beta)},
    };
    write_table(cfg, "classical_cf", t);
}

void cmd_measure(const RunConfig& cfg) {
    cfg.validate();
    const DriveProtocol& p = cfg.protocol;
    const QuantumSetup s = make_setup(cfg);

    const PhaseGrid grid = make_grid(p, p.coherent_center_x(), p.coherent_center_p(),
                                     cfg.grid_n, cfg.grid_span);
    const WignerField before = wigner_transform(s.rho0, grid, p);
    const DensityMatrix deph = dephase(s.rho0, s.h0);
    const WignerField after = wigner_transform(deph, grid, p);
    const WignerField averaged = angular_average(before, p, cfg.angles);

    write_field(cfg, "wigner_before", before);
    write_field(cfg, "wigner_after", after);
    write_field(cfg, "wigner_angular", averaged);

    const double linf_identity = (after.values - averaged.values).cwiseAbs().maxCoeff();
    const double linf_change = (after.values - before.values).cwiseAbs().maxCoeff();

    // the three definitions must collapse on the dephased state
    const VectorXd etas = cfg.eta_grid();
    const SpectralContext dctx = SpectralContext::build(deph, s.h0, s.ht, s.u);
    const VectorXcd tpm = characteristic_function(dctx, WorkDef::TPM, etas).values;
    const VectorXcd fcs = characteristic_function(dctx, WorkDef::FCS, etas).values;
    const VectorXcd mh = characteristic_function(dctx, WorkDef::MH, etas).values;
    const double collapse = std::max((tpm - fcs).cwiseAbs().maxCoeff(),
                                     std::max((tpm - mh).cwiseAbs().maxCoeff(),
                                              (fcs - mh).cwiseAbs().maxCoeff()));

    Table t;
    t.columns = {"quantity", "value"};
    t.add_row({"dephasing_identity_linf", linf_identity});
    t.add_row({"before_after_linf", linf_change});
    t.add_row({"dephased_cf_collapse", collapse});
    t.add_row({"before_integral", before.integral()});
    t.add_row({"after_integral", after.integral()});
    t.add_row({"angular_integral", averaged.integral()});
    write_table(cfg, "measure_summary", t);
}

int run_command(const std::string& command, const std::string& dist_definition,
                const RunConfig& cfg) {
    try {
        if (command == "cf") {
            cmd_cf(cfg);
        } else if (command == "dist") {
            if (dist_definition.empty())
                cmd_dist_all(cfg);
            else
                cmd_dist(cfg, parse_def(dist_definition));
        } else if (command == "fig1") {
            cmd_fig1(cfg);
        } else if (command == "scan-hbar") {
            cmd_scan_hbar(cfg);
        } else if (command == "jarzynski") {
            cmd_jarzynski(cfg);
        } else if (command == "classical") {
            cmd_classical(cfg);
        } else if (command == "measure") {
            cmd_measure(cfg);
        } else {
            std::cerr << "error: unknown command '" << command << "'\n";
            return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const AmbiguityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const TruncationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const AccuracyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const CoverageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace qws
