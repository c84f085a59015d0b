#include "hrt/mcharness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hrt/error.hpp"
#include "hrt/parallel.hpp"

namespace hrt {

namespace {

constexpr std::uint64_t kDataStream = name_hash("study-data");

enum : signed char { kAccept = 0, kReject = 1, kFailed = -1 };

bool is_rank_test(const std::string& name) { return name == "ahrt" || name == "ahrt-signed" || name == "hrt"; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string format_number(double x, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, x);
    return buf;
}

RankTestOptions rank_options(const StudyConfig& cfg) {
    RankTestOptions o;
    o.p = cfg.p;
    o.alpha = cfg.alpha;
    o.cv_mode = cfg.cv_mode;
    o.theory_mode = cfg.theory_mode;
    o.sim = LimitSimOptions{cfg.cv_reps, cfg.grid_points, cfg.seed, 1};
    return o;
}

CompetitorOptions competitor_options(const StudyConfig& cfg) {
    CompetitorOptions o;
    o.p = cfg.p;
    o.alpha = cfg.alpha;
    o.cv_reps = cfg.cv_reps;
    o.seed = cfg.seed;
    o.workers = 1;
    return o;
}

bool run_one(const StudyTest& test, const TimeSeries& y, const RankTestOptions& ro, const CompetitorOptions& co) {
    if (test.name == "ahrt") return ahrt(y, ReferenceChoice{test.reference}, ro).reject;
    if (test.name == "ahrt-signed") return ahrt_signed(y, ReferenceChoice{test.reference}, ro).reject;
    if (test.name == "hrt") return hrt(y, ReferenceChoice{test.reference}, ro).reject;
    if (test.name == "ers") return ers_test(y, co).reject;
    if (test.name == "df-rho") return df_rho(y, co).reject;
    throw ParameterError("unknown test '" + test.name + "'");
}

// Fill shared caches up front so that worker threads do not race to build them.
void warm_caches(const StudyConfig& cfg) {
    bool need_bank = cfg.cv_mode == CvMode::simulate;
    for (const auto& t : cfg.tests) need_bank = need_bank || t.name == "hrt" || t.reference == "estimated";
    if (need_bank) NullBank::get(LimitSimOptions{cfg.cv_reps, cfg.grid_points, cfg.seed, cfg.workers});
    for (const auto& t : cfg.tests) {
        for (const auto& d : cfg.dgps) {
            if (t.name == "df-rho" && !tabulated_df_rho_cv(d.t_len, cfg.alpha)) {
                simulate_competitor_cv("df-rho", d.t_len, cfg.p, cfg.alpha, 0.0, cfg.cv_reps, cfg.seed, cfg.workers);
            }
            if (t.name == "ers" && !tabulated_ers_cv(d.t_len, cfg.alpha, -7.0)) {
                simulate_competitor_cv("ers", d.t_len, cfg.p, cfg.alpha, -7.0, cfg.cv_reps, cfg.seed, cfg.workers);
            }
        }
    }
}

void validate(const StudyConfig& cfg) {
    if (cfg.n_rep == 0) throw ParameterError("study: n_rep must be positive");
    if (cfg.tests.empty()) throw ParameterError("study: no tests selected");
    if (cfg.dgps.empty()) throw ParameterError("study: no data-generating processes selected");
    if (cfg.h_grid.empty()) throw ParameterError("study: empty h grid");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ParameterError("study: alpha must lie in (0, 1)");
    for (double h : cfg.h_grid) {
        if (h > 0.0) throw ParameterError("study: h values must be <= 0");
    }
    for (const auto& t : cfg.tests) {
        if (is_rank_test(t.name)) {
            if (t.reference != "estimated") make_reference(t.reference);
        } else if (t.name != "ers" && t.name != "df-rho") {
            throw ParameterError("study: unknown test '" + t.name + "' (valid: ahrt ahrt-signed hrt ers df-rho)");
        }
    }
    for (const auto& d : cfg.dgps) make_innovation(d.innovation);
}

}  // namespace

StudyTest parse_study_test(std::string_view label) {
    const std::string s(label);
    if (s == "ers" || s == "df-rho") return {s, ""};
    for (const char* prefix : {"ahrt-signed-", "ahrt-", "hrt-"}) {
        const std::string p(prefix);
        if (s.rfind(p, 0) == 0 && s.size() > p.size()) {
            StudyTest t{p.substr(0, p.size() - 1), s.substr(p.size())};
            if (t.reference != "estimated") make_reference(t.reference);
            return t;
        }
    }
    throw ParameterError("unknown test '" + s +
                         "' (valid: ahrt-<ref>, ahrt-signed-<ref>, hrt-<ref>, ers, df-rho; "
                         "ref in gaussian laplace t3 estimated)");
}

std::string study_csv_header() { return "test,innovation,error_model,T,h,n_rep,reject_rate,mc_se"; }

std::string study_csv_row(const StudyRow& row) {
    std::ostringstream os;
    os << csv_field(row.test) << ',' << csv_field(row.innovation) << ',' << csv_field(row.error_model) << ','
       << row.t_len << ',' << format_number(row.h, "%g") << ',' << row.n_rep << ','
       << format_number(row.reject_rate, "%.6f") << ',' << format_number(row.mc_se, "%.6f");
    return os.str();
}

StudyResult run_study(const StudyConfig& cfg, const std::function<void(const StudyRow&)>& on_row,
                      const std::atomic<bool>* stop) {
    validate(cfg);
    const auto start = std::chrono::steady_clock::now();
    warm_caches(cfg);
    const RankTestOptions ro = rank_options(cfg);
    const CompetitorOptions co = competitor_options(cfg);
    const std::size_t n_tests = cfg.tests.size();

    StudyResult result;
    result.n_rep = cfg.n_rep;
    std::vector<signed char> outcome(cfg.n_rep * n_tests);
    for (const auto& dgp : cfg.dgps) {
        const auto law = make_innovation(dgp.innovation);
        const std::uint64_t stream =
            stream_key(kDataStream, name_hash(dgp.innovation.c_str()), name_hash(dgp.error_model.name.c_str()),
                       dgp.t_len);
        for (double h : cfg.h_grid) {
            if (stop != nullptr && stop->load()) {
                result.interrupted = true;
                break;
            }
            DgpConfig dc{dgp.t_len, h, cfg.mu, dgp.error_model, dgp.innovation};
            parallel_for(cfg.n_rep, cfg.workers, [&](std::size_t r) {
                if (stop != nullptr && stop->load()) return;
                Engine rng = substream(cfg.seed, stream, r);
                const TimeSeries y = build_series(dc, draw_innovations(*law, dgp.t_len, rng));
                for (std::size_t k = 0; k < n_tests; ++k) {
                    signed char o = kFailed;
                    try {
                        o = run_one(cfg.tests[k], y, ro, co) ? kReject : kAccept;
                    } catch (const std::exception&) {
                        o = kFailed;
                    }
                    outcome[r * n_tests + k] = o;
                }
            });
            if (stop != nullptr && stop->load()) {
                result.interrupted = true;
                break;
            }
            for (std::size_t k = 0; k < n_tests; ++k) {
                std::size_t rejects = 0;
                std::size_t failures = 0;
                for (std::size_t r = 0; r < cfg.n_rep; ++r) {
                    const signed char o = outcome[r * n_tests + k];
                    rejects += o == kReject ? 1 : 0;
                    failures += o == kFailed ? 1 : 0;
                }
                if (static_cast<double>(failures) > 0.001 * static_cast<double>(cfg.n_rep)) {
                    std::ostringstream os;
                    os << "study: " << cfg.tests[k].label() << " failed in " << failures << " of " << cfg.n_rep
                       << " replications (" << dgp.innovation << ", T = " << dgp.t_len << ", h = " << h
                       << "), above the 0.1% cap";
                    throw Error(os.str());
                }
                StudyRow row;
                row.test = cfg.tests[k].label();
                row.innovation = dgp.innovation;
                row.error_model = dgp.error_model.name;
                row.t_len = dgp.t_len;
                row.h = h;
                row.n_rep = cfg.n_rep;
                row.failures = failures;
                row.in_family = law->in_family();
                const std::size_t used = cfg.n_rep - failures;
                row.reject_rate = used == 0 ? 0.0 : static_cast<double>(rejects) / static_cast<double>(used);
                row.mc_se = used == 0 ? 0.0
                                      : std::sqrt(row.reject_rate * (1.0 - row.reject_rate) /
                                                  static_cast<double>(used));
                if (on_row) on_row(row);
                result.rows.push_back(std::move(row));
            }
        }
        if (result.interrupted) break;
    }
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

std::vector<std::string> preset_names() { return {"paper-desk", "paper-fig1", "paper-fig3"}; }

StudyConfig study_preset(std::string_view name) {
    StudyConfig cfg;
    std::vector<double> power_grid;
    for (int k = 0; k <= 12; ++k) power_grid.push_back(-2.5 * k);
    if (name == "paper-desk") {
        cfg.tests = {{"ahrt", "gaussian"}, {"ahrt", "laplace"}, {"ahrt", "t3"}};
        for (const char* f : {"gaussian", "laplace", "t3"}) cfg.dgps.push_back({f, ErrorModel::iid(), 100});
        cfg.h_grid = {-7.0};
        cfg.n_rep = 2000;
        return cfg;
    }
    if (name == "paper-fig1") {
        cfg.tests = {{"ahrt", "gaussian"}, {"ahrt", "laplace"}, {"ahrt", "t3"}, {"ahrt", "estimated"},
                     {"ers", ""},          {"df-rho", ""}};
        for (const char* f : {"gaussian", "laplace", "t3"}) cfg.dgps.push_back({f, ErrorModel::iid(), 2500});
        cfg.h_grid = power_grid;
        cfg.n_rep = 20000;
        return cfg;
    }
    if (name == "paper-fig3") {
        cfg.tests = {{"ahrt", "gaussian"}, {"ers", ""}, {"df-rho", ""}};
        for (const char* f : {"t2", "t1", "skewnormal", "t4", "skew-t4"}) {
            cfg.dgps.push_back({f, ErrorModel::iid(), 2500});
        }
        cfg.h_grid = power_grid;
        cfg.n_rep = 20000;
        return cfg;
    }
    std::ostringstream os;
    os << "unknown preset '" << name << "' (valid:";
    for (const auto& n : preset_names()) os << " " << n;
    os << ")";
    throw ParameterError(os.str());
}

}  // namespace hrt
