#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <utility>

#include <CLI11.hpp>

#include "hrt/densities.hpp"
#include "hrt/error.hpp"
#include "hrt/limitsim.hpp"
#include "hrt/mcharness.hpp"
#include "hrt/series_io.hpp"
#include "hrt/stattests.hpp"

namespace hrt::cli {

namespace {

std::string fmt(double x, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, x);
    return buf;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    return s.substr(a, s.find_last_not_of(" \t\r") - a + 1);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_number(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || trim(s.substr(used)) != "" || !std::isfinite(v)) {
        throw ParameterError(what + ": cannot parse '" + s + "' as a number");
    }
    return v;
}

std::size_t to_count(const std::string& s, const std::string& what) {
    const double v = to_number(s, what);
    if (v < 0.0 || v != std::floor(v)) throw ParameterError(what + ": expected a non-negative integer, got '" + s + "'");
    return static_cast<std::size_t>(v);
}

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("--alpha must lie in (0, 1)");
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& why) {
    if (!seed) throw ParameterError("--seed is required: " + why);
    return *seed;
}

CvMode parse_cv_mode(const std::string& s) {
    if (s == "poly" || s == "polynomial") return CvMode::polynomial;
    if (s == "sim" || s == "simulate") return CvMode::simulate;
    throw ParameterError("--cv-mode must be poly or sim (got '" + s + "')");
}

/// Output sink: the --output file when given, stdout otherwise.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*file_) throw IoError("cannot write '" + path + "'");
        out_ = file_.get();
    }
    std::ostream& stream() { return *out_; }
    bool to_file() const { return file_ != nullptr; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* out_;
};

// ------------------------------------------------------------------ test

struct TestArgs {
    std::string input;
    std::string column;
    std::string test = "ahrt";
    std::string reference = "gaussian";
    int p = 0;
    double alpha = 0.05;
    std::string hbar = "auto";
    std::optional<std::uint64_t> seed;
    std::size_t reps = kDefaultCvReps;
    std::size_t grid_points = kDefaultGridPoints;
    std::string cv_mode = "poly";
    std::string cv_model;
    bool theory_mode = false;
    bool symmetric = false;
    unsigned workers = 0;
    std::string output;
};

std::optional<CriticalValueModel> load_model(const std::string& spec, const std::string& reference) {
    if (spec.empty()) return std::nullopt;
    if (spec == "paper_table1") return paper_table1_model(reference);
    std::ifstream in(spec);
    if (!in) throw IoError("cannot open critical-value model '" + spec + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model(ss.str());
}

std::vector<std::pair<std::string, std::string>> report_fields(const TestResult& r, std::size_t t_len) {
    std::vector<std::pair<std::string, std::string>> f;
    auto add = [&](const std::string& k, double v) {
        if (!std::isnan(v)) f.emplace_back(k, fmt(v));
    };
    f.emplace_back("test", r.test_name);
    if (!r.reference.empty()) f.emplace_back("reference", r.reference);
    f.emplace_back("T", std::to_string(t_len));
    add("statistic", r.statistic);
    add("critical_value", r.critical_value);
    f.emplace_back("rejects_when", r.reject_when_large ? "statistic >= critical_value" : "statistic <= critical_value");
    f.emplace_back("decision", r.reject ? "reject" : "accept");
    add("alpha", r.alpha);
    add("h_bar", r.h_bar);
    add("sigma_f_hat", r.nuisance.sigma_f_hat);
    add("sigma_eps_phi_g_hat", r.nuisance.sigma_eps_phi_g_hat);
    add("sigma_used", r.nuisance.sigma_used);
    add("j_g", r.nuisance.j_g);
    add("j_fg_hat", r.nuisance.j_fg_hat);
    add("lambda_hat", r.nuisance.lambda_hat);
    add("omega_sq_hat", r.nuisance.omega_sq_hat);
    add("rho_hat", r.nuisance.rho_hat);
    add("delta_hat", r.delta_hat);
    add("info_hat", r.info_hat);
    f.emplace_back("cv_source", r.cv_source);
    for (const auto& n : r.notices) f.emplace_back("notice", n);
    return f;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

int cmd_test(const TestArgs& a, std::ostream& out) {
    check_alpha(a.alpha);
    if (a.p < 0) throw ParameterError("--p must be non-negative");
    const bool auto_hbar = a.hbar == "auto";
    const double hbar_value = auto_hbar ? -7.0 : to_number(a.hbar, "--hbar");
    if (!(hbar_value < 0.0)) throw ParameterError("--hbar must be negative");
    const CvMode mode = parse_cv_mode(a.cv_mode);
    const TimeSeries y = read_series_csv(a.input, a.column);

    TestResult r;
    if (a.test == "ers" || a.test == "df-rho") {
        CompetitorOptions co;
        co.p = a.p;
        co.alpha = a.alpha;
        co.h_bar = hbar_value;
        co.cv_reps = a.reps;
        co.workers = a.workers;
        co.force_simulation = mode == CvMode::simulate;
        const bool tabulated = a.test == "ers" ? tabulated_ers_cv(y.size(), a.alpha, hbar_value).has_value()
                                               : tabulated_df_rho_cv(y.size(), a.alpha).has_value();
        if (co.force_simulation || !tabulated) {
            co.seed = require_seed(a.seed, "no tabulated critical value applies, so it is simulated");
        }
        r = a.test == "ers" ? ers_test(y, co) : df_rho(y, co);
    } else if (a.test == "ahrt" || a.test == "ahrt-signed" || a.test == "hrt") {
        RankTestOptions ro;
        ro.p = a.p;
        ro.alpha = a.alpha;
        ro.h_bar = auto_hbar ? HBarRule::times_sigma() : HBarRule::fixed(hbar_value);
        ro.cv_mode = mode;
        ro.theory_mode = a.theory_mode;
        ro.model = load_model(a.cv_model, a.reference);
        const ReferenceChoice g{a.reference};
        const bool polynomial = mode == CvMode::polynomial && a.test != "hrt" &&
                                (ro.model || (!g.estimated() && a.alpha == 0.05 && auto_hbar));
        if (!polynomial) {
            ro.sim = LimitSimOptions{a.reps, a.grid_points,
                                     require_seed(a.seed, "this configuration simulates its critical value"),
                                     a.workers};
        } else if (a.seed) {
            ro.sim.seed = *a.seed;
        }
        if (a.test == "ahrt") {
            r = ahrt(y, g, ro);
        } else if (a.test == "ahrt-signed") {
            r = ahrt_signed(y, g, ro);
        } else {
            r = hrt(y, g, ro, std::nullopt, a.symmetric);
        }
    } else {
        throw ParameterError("unknown test '" + a.test + "' (valid: ahrt ahrt-signed hrt ers df-rho)");
    }

    const auto fields = report_fields(r, y.size());
    for (const auto& [k, v] : fields) out << k << ": " << v << "\n";
    if (!a.output.empty()) {
        Sink sink(a.output, out);
        sink.stream() << "field,value\n";
        for (const auto& [k, v] : fields) sink.stream() << k << "," << csv_field(v) << "\n";
    }
    return r.reject ? kReject : kAccept;
}

// ------------------------------------------------------------------ cv

struct CvArgs {
    std::string reference = "gaussian";
    double alpha = 0.05;
    bool symmetric = false;
    double grid_step = 0.01;
    double hbar_multiplier = -7.0;
    std::optional<std::uint64_t> seed;
    std::size_t reps = kDefaultCvReps;
    std::size_t grid_points = kDefaultGridPoints;
    unsigned workers = 0;
    bool published = false;
    bool curve = false;
    std::string output;
};

int cmd_cv(const CvArgs& a, std::ostream& out) {
    check_alpha(a.alpha);
    if (a.reference == "estimated") throw ParameterError("cv: 'estimated' is not a fixed reference density");
    CriticalValueModel model;
    if (a.published) {
        if (a.symmetric) throw ParameterError("cv: no published signed-rank polynomial");
        model = paper_table1_model(a.reference);
    } else {
        if (!(a.grid_step > 0.0)) throw ParameterError("cv: --grid-step must be positive");
        const LimitSimOptions opts{a.reps, a.grid_points, require_seed(a.seed, "cv simulates critical values"),
                                   a.workers};
        if (a.curve) {
            const auto g = make_reference(a.reference);
            const CvCurve c =
                simulate_cv_curve(g->fisher_info(), a.alpha, a.symmetric, a.grid_step, a.hbar_multiplier, opts);
            Sink sink(a.output, out);
            sink.stream() << "sigma,critical_value\n";
            for (std::size_t i = 0; i < c.sigma.size(); ++i) {
                sink.stream() << fmt(c.sigma[i], "%.6f") << "," << fmt(c.value[i], "%.6f") << "\n";
            }
            return kAccept;
        }
        model = fit_cv_polynomial(a.reference, a.alpha, a.symmetric, a.grid_step, opts, a.hbar_multiplier);
    }
    const std::string record = format_model(model);
    out << "coefficients:";
    for (double c : model.coefficients) out << " " << fmt(c, "%.6f");
    out << "\n";
    Sink sink(a.output, out);
    if (sink.to_file()) {
        sink.stream() << record;
    } else {
        out << record;
    }
    return kAccept;
}

// ------------------------------------------------------------------ envelope

struct EnvelopeArgs {
    std::string density;
    std::optional<double> j_f;
    std::string reference = "gaussian";
    std::string h_grid = "0:-30:2.5";
    double alpha = 0.05;
    bool symmetric = false;
    bool overlay = false;
    std::optional<std::uint64_t> seed;
    std::size_t reps = kDefaultEnvelopeReps;
    std::size_t grid_points = kDefaultGridPoints;
    unsigned workers = 0;
    std::string output;
};

int cmd_envelope(const EnvelopeArgs& a, std::ostream& out) {
    check_alpha(a.alpha);
    if (a.density.empty() == !a.j_f) throw ParameterError("envelope: give exactly one of --density and --jf");
    const std::vector<double> grid = parse_grid(a.h_grid);
    for (double h : grid) {
        if (h > 0.0) throw ParameterError("envelope: h values must be <= 0");
    }
    const LimitSimOptions opts{a.reps, a.grid_points, require_seed(a.seed, "envelope simulates limit experiments"),
                               a.workers};
    double j_f = a.j_f.value_or(0.0);
    std::optional<TruthParams> truth;
    if (!a.density.empty()) {
        const auto f = make_reference(a.density);
        j_f = f->fisher_info();
        if (a.overlay) {
            const auto g = make_reference(a.reference);
            const CrossMoments cm = cross_moments(*f, *g);
            truth = TruthParams{j_f, cm.j_fg, cm.sigma_eps_phi_g};
        }
    } else if (a.overlay) {
        throw ParameterError("envelope: --overlay needs --density (J_fg and sigma_eps_phi_g come from f and g)");
    }

    std::vector<std::string> header{"h", "envelope"};
    std::vector<std::vector<double>> columns;
    columns.push_back(power_envelope(j_f, grid, a.alpha, a.symmetric, opts));
    if (truth) {
        const double j_g = make_reference(a.reference)->fisher_info();
        const LimitTestSpec spec{j_g, 1.0, -7.0 * truth->sigma_eps_phi_g, a.symmetric};
        header.push_back((a.symmetric ? "ahrt-signed-" : "ahrt-") + a.reference);
        columns.push_back(asymptotic_test_power(*truth, spec, grid, a.alpha, opts));
        header.push_back("ers");
        columns.push_back(ers_asymptotic_power(j_f, grid, a.alpha, opts));
    }

    Sink sink(a.output, out);
    auto& os = sink.stream();
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << "\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        os << fmt(grid[i], "%g");
        for (const auto& col : columns) os << "," << fmt(col[i], "%.6f");
        os << "\n";
    }
    return kAccept;
}

// ------------------------------------------------------------------ mc

struct McArgs {
    std::string preset;
    std::string config;
    std::optional<std::size_t> reps;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> h_grid;
    std::optional<std::size_t> length;
    std::optional<int> p;
    std::optional<double> alpha;
    std::optional<std::string> cv_mode;
    std::optional<std::size_t> cv_reps;
    std::optional<std::size_t> grid_points;
    bool theory_mode = false;
    unsigned workers = 0;
    std::string output;
};

/// "key = value" lines; '#' starts a comment.
StudyConfig read_study_config(const std::string& path, std::optional<std::uint64_t>& seed) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open study config '" + path + "'");
    std::map<std::string, std::string> kv;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw IoError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    StudyConfig cfg;
    if (auto it = kv.find("preset"); it != kv.end()) {
        cfg = study_preset(it->second);
        kv.erase(it);
    }
    std::vector<std::string> innovations;
    std::vector<std::string> error_models{"iid"};
    std::vector<std::size_t> lengths;
    for (const auto& d : cfg.dgps) {
        if (std::find(innovations.begin(), innovations.end(), d.innovation) == innovations.end()) {
            innovations.push_back(d.innovation);
        }
        if (std::find(lengths.begin(), lengths.end(), d.t_len) == lengths.end()) lengths.push_back(d.t_len);
    }
    bool dgps_changed = false;
    for (const auto& [key, value] : kv) {
        const std::string where = path + ": " + key;
        if (key == "tests") {
            cfg.tests.clear();
            for (const auto& t : split_list(value)) cfg.tests.push_back(parse_study_test(t));
        } else if (key == "innovations") {
            innovations = split_list(value);
            dgps_changed = true;
        } else if (key == "error_models") {
            error_models = split_list(value);
            dgps_changed = true;
        } else if (key == "T") {
            lengths.clear();
            for (const auto& t : split_list(value)) lengths.push_back(to_count(t, where));
            dgps_changed = true;
        } else if (key == "h") {
            cfg.h_grid = parse_grid(value);
        } else if (key == "reps") {
            cfg.n_rep = to_count(value, where);
        } else if (key == "seed") {
            seed = to_count(value, where);
        } else if (key == "p") {
            cfg.p = static_cast<int>(to_count(value, where));
        } else if (key == "alpha") {
            cfg.alpha = to_number(value, where);
        } else if (key == "mu") {
            cfg.mu = to_number(value, where);
        } else if (key == "cv_mode") {
            cfg.cv_mode = parse_cv_mode(value);
        } else if (key == "theory_mode") {
            cfg.theory_mode = value == "true" || value == "1" || value == "yes";
        } else if (key == "cv_reps") {
            cfg.cv_reps = to_count(value, where);
        } else if (key == "grid_points") {
            cfg.grid_points = to_count(value, where);
        } else {
            throw ParameterError(path + ": unknown key '" + key +
                                 "' (valid: preset tests innovations error_models T h reps seed p alpha mu "
                                 "cv_mode theory_mode cv_reps grid_points)");
        }
    }
    if (dgps_changed) {
        cfg.dgps.clear();
        for (const auto& e : error_models) {
            const ErrorModel em = make_error_model(e);
            for (const auto& f : innovations) {
                for (std::size_t t : lengths) cfg.dgps.push_back({f, em, t});
            }
        }
    }
    return cfg;
}

int cmd_mc(const McArgs& a, std::ostream& out, std::ostream& err) {
    if (a.preset.empty() == a.config.empty()) throw ParameterError("mc: give exactly one of --preset and --config");
    std::optional<std::uint64_t> seed = a.seed;
    std::optional<std::uint64_t> config_seed;
    StudyConfig cfg = a.config.empty() ? study_preset(a.preset) : read_study_config(a.config, config_seed);
    if (!seed) seed = config_seed;
    cfg.seed = require_seed(seed, "mc simulates data");
    if (a.reps) cfg.n_rep = *a.reps;
    if (a.h_grid) cfg.h_grid = parse_grid(*a.h_grid);
    if (a.length) {
        for (auto& d : cfg.dgps) d.t_len = *a.length;
    }
    if (a.p) cfg.p = *a.p;
    if (a.alpha) cfg.alpha = *a.alpha;
    if (a.cv_mode) cfg.cv_mode = parse_cv_mode(*a.cv_mode);
    if (a.cv_reps) cfg.cv_reps = *a.cv_reps;
    if (a.grid_points) cfg.grid_points = *a.grid_points;
    if (a.theory_mode) cfg.theory_mode = true;
    cfg.workers = a.workers;
    if (cfg.p < 0) throw ParameterError("mc: p must be non-negative");

    for (const auto& d : cfg.dgps) {
        if (!make_innovation(d.innovation)->in_family()) {
            err << "note: innovation '" << d.innovation << "' lies outside the model family\n";
        }
    }
    Sink sink(a.output, out);
    auto& os = sink.stream();
    os << study_csv_header() << "\n" << std::flush;
    const std::size_t cells = cfg.dgps.size() * cfg.h_grid.size() * cfg.tests.size();
    std::size_t done = 0;
    const StudyResult result = run_study(
        cfg,
        [&](const StudyRow& row) {
            os << study_csv_row(row) << "\n" << std::flush;
            ++done;
            err << "[" << done << "/" << cells << "] " << row.test << " " << row.innovation << " T=" << row.t_len
                << " h=" << row.h << " reject_rate=" << fmt(row.reject_rate, "%.4f") << "\n";
        },
        &interrupt_flag());
    err << "runtime: " << fmt(result.runtime_seconds, "%.1f") << " s\n";
    if (result.interrupted) {
        err << "interrupted: " << result.rows.size() << " of " << cells << " rows written\n";
        return kInterrupted;
    }
    return kAccept;
}

int exit_code_for(const std::exception& e, std::ostream& err) {
    err << "error: " << e.what() << "\n";
    if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const ParameterError*>(&e)) return kUsage;
    if (dynamic_cast<const Error*>(&e)) return kDegenerate;
    return kUsage;
}

}  // namespace

std::atomic<bool>& interrupt_flag() {
    static std::atomic<bool> flag{false};
    return flag;
}

std::vector<double> parse_grid(const std::string& text) {
    const std::string s = trim(text);
    if (s.find(':') == std::string::npos) {
        std::vector<double> out;
        for (const auto& item : split_list(s)) out.push_back(to_number(item, "grid"));
        if (out.empty()) throw ParameterError("grid: no values in '" + text + "'");
        return out;
    }
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ':')) parts.push_back(trim(part));
    if (parts.size() != 3) throw ParameterError("grid: expected start:stop:step, got '" + text + "'");
    const double start = to_number(parts[0], "grid start");
    const double stop = to_number(parts[1], "grid stop");
    const double step = std::abs(to_number(parts[2], "grid step"));
    if (!(step > 0.0)) throw ParameterError("grid: step must be non-zero");
    const double dir = stop >= start ? 1.0 : -1.0;
    const auto n = static_cast<std::size_t>(std::floor(std::abs(stop - start) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = start + dir * step * static_cast<double>(k);
    return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hybrid rank tests for a unit root: tests, critical values, power envelopes, Monte Carlo studies"};
    app.name("hrt");
    app.require_subcommand(1);

    TestArgs ta;
    auto* test = app.add_subcommand("test", "Run a unit-root test on one column of a CSV file");
    test->add_option("--input", ta.input, "CSV file")->required();
    test->add_option("--column", ta.column, "Column name or 1-based index (default: first column)");
    test->add_option("--test", ta.test, "ahrt | ahrt-signed | hrt | ers | df-rho");
    test->add_option("--reference", ta.reference, "gaussian | laplace | t3 | estimated");
    test->add_option("--p", ta.p, "AR lag order for the differences");
    test->add_option("--alpha", ta.alpha, "Nominal level");
    test->add_option("--hbar", ta.hbar, "auto (-7 sigma_eps_phi_g; -7 for ERS) or a fixed negative value");
    test->add_option("--seed", ta.seed, "Seed for simulated critical values");
    test->add_option("--reps", ta.reps, "Replications for simulated critical values");
    test->add_option("--grid-points", ta.grid_points, "Euler grid points for simulated critical values");
    test->add_option("--cv-mode", ta.cv_mode, "poly | sim");
    test->add_option("--cv-model", ta.cv_model, "paper_table1 or a model file written by 'hrt cv'");
    test->add_flag("--theory-mode", ta.theory_mode, "Snap the AR estimate to the 1/sqrt(T) grid");
    test->add_flag("--symmetric", ta.symmetric, "Signed-rank variant of hrt");
    test->add_option("--workers", ta.workers, "Worker threads (0: all cores)");
    test->add_option("--output", ta.output, "Also write the report as CSV");

    CvArgs ca;
    auto* cv = app.add_subcommand("cv", "Simulate critical values and fit the degree-4 polynomial");
    cv->add_option("--reference", ca.reference, "gaussian | laplace | t3");
    cv->add_option("--alpha", ca.alpha, "Nominal level");
    cv->add_flag("--symmetric", ca.symmetric, "Signed-rank statistic");
    cv->add_option("--grid-step", ca.grid_step, "Spacing of the sigma grid");
    cv->add_option("--hbar-multiplier", ca.hbar_multiplier, "h_bar = multiplier * sigma");
    cv->add_option("--seed", ca.seed, "Seed");
    cv->add_option("--reps", ca.reps, "Replications");
    cv->add_option("--grid-points", ca.grid_points, "Euler grid points");
    cv->add_option("--workers", ca.workers, "Worker threads (0: all cores)");
    cv->add_flag("--published", ca.published, "Print the published polynomial instead of simulating");
    cv->add_flag("--curve", ca.curve, "Write the simulated (sigma, critical value) points instead of the fit");
    cv->add_option("--output", ca.output, "Model file (default: stdout)");

    EnvelopeArgs ea;
    auto* env = app.add_subcommand("envelope", "Semiparametric power envelope, optionally with test power curves");
    env->add_option("--density", ea.density, "True innovation density f");
    env->add_option("--jf", ea.j_f, "Standardized Fisher information J_f (instead of --density)");
    env->add_option("--reference", ea.reference, "Reference density g for the overlay");
    env->add_option("--h-grid", ea.h_grid, "start:stop:step or comma list");
    env->add_option("--alpha", ea.alpha, "Nominal level");
    env->add_flag("--symmetric", ea.symmetric, "Symmetric-density envelope and signed-rank overlay");
    env->add_flag("--overlay", ea.overlay, "Add asymptotic AHRT-g and ERS power columns");
    env->add_option("--seed", ea.seed, "Seed");
    env->add_option("--reps", ea.reps, "Replications");
    env->add_option("--grid-points", ea.grid_points, "Euler grid points");
    env->add_option("--workers", ea.workers, "Worker threads (0: all cores)");
    env->add_option("--output", ea.output, "CSV file (default: stdout)");

    McArgs ma;
    auto* mc = app.add_subcommand("mc", "Monte Carlo rejection rates over tests, densities and alternatives");
    mc->add_option("--preset", ma.preset, "paper-desk | paper-fig1 | paper-fig3");
    mc->add_option("--config", ma.config, "Study file with 'key = value' lines");
    mc->add_option("--reps", ma.reps, "Replications per cell");
    mc->add_option("--seed", ma.seed, "Seed");
    mc->add_option("--h-grid", ma.h_grid, "start:stop:step or comma list");
    mc->add_option("--length", ma.length, "Sample size T for every design");
    mc->add_option("--p", ma.p, "AR lag order");
    mc->add_option("--alpha", ma.alpha, "Nominal level");
    mc->add_option("--cv-mode", ma.cv_mode, "poly | sim");
    mc->add_option("--cv-reps", ma.cv_reps, "Replications for simulated critical values");
    mc->add_option("--grid-points", ma.grid_points, "Euler grid points for simulated critical values");
    mc->add_flag("--theory-mode", ma.theory_mode, "Snap the AR estimate to the 1/sqrt(T) grid");
    mc->add_option("--workers", ma.workers, "Worker threads (0: all cores)");
    mc->add_option("--output", ma.output, "CSV file (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kAccept;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    try {
        if (*test) return cmd_test(ta, out);
        if (*cv) return cmd_cv(ca, out);
        if (*env) return cmd_envelope(ea, out);
        return cmd_mc(ma, out, err);
    } catch (const std::exception& e) {
        return exit_code_for(e, err);
    }
}

}  // namespace hrt::cli
