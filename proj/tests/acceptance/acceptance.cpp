// Acceptance suite: one PASS/FAIL line per criterion, details indented below it.
//   acceptance [--criterion N]

#include <chrono>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "hrt/densities.hpp"
#include "hrt/error.hpp"
#include "hrt/limitsim.hpp"
#include "hrt/mcharness.hpp"
#include "hrt/rankpaths.hpp"
#include "hrt/stattests.hpp"

using namespace hrt;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Report {
    bool ok = true;
    std::vector<std::string> lines;

    void check(bool pass, const std::string& what) {
        ok = ok && pass;
        lines.push_back(std::string(pass ? "ok   " : "FAIL ") + what);
    }
};

std::string fmt(const char* spec, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, spec, a, b, c, d);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

StudyRow find_row(const StudyResult& r, const std::string& test, const std::string& innovation, double h) {
    for (const auto& row : r.rows) {
        if (row.test == test && row.innovation == innovation && row.h == h) return row;
    }
    throw Error("missing study row " + test + " / " + innovation);
}

// ---------------------------------------------------------------- 1

Report table_critical_values() {
    Report rep;
    const LimitSimOptions opts{20000, 2500, kSeed, 0};
    struct Point {
        const char* g;
        double sigma;
    };
    const Point points[] = {{"gaussian", 0.2}, {"gaussian", 0.5}, {"gaussian", 0.8}, {"gaussian", 1.0},
                            {"laplace", 0.5},  {"laplace", 1.0},  {"t3", 0.5},       {"t3", 1.0}};
    for (const auto& p : points) {
        const double j = make_reference(p.g)->fisher_info();
        const double sim = critical_value({-7.0 * p.sigma, p.sigma, j, 1.0, false}, 0.05, opts);
        const double published = paper_table1_model(p.g).evaluate(p.sigma);
        rep.check(std::abs(sim - published) <= 0.15,
                  std::string(p.g) + fmt(" sigma=%.1f simulated=%.3f published=%.3f |diff|=%.3f (tol 0.15)", p.sigma,
                                         sim, published, std::abs(sim - published)));
    }
    return rep;
}

// ---------------------------------------------------------------- 2

Report competitor_critical_values() {
    Report rep;
    struct Case {
        const char* test;
        std::size_t T;
        double published;
        double tol;
    };
    const Case cases[] = {{"df-rho", 100, -13.52, 0.4},
                          {"df-rho", 2500, -14.05, 0.4},
                          {"ers", 100, 3.11, 0.10},
                          {"ers", 2500, 3.26, 0.10}};
    for (const auto& c : cases) {
        const double sim = simulate_competitor_cv(c.test, c.T, 0, 0.05, -7.0, 20000, kSeed);
        rep.check(std::abs(sim - c.published) <= c.tol,
                  std::string(c.test) + fmt(" T=%.0f simulated=%.3f published=%.2f (tol %.2f)",
                                            static_cast<double>(c.T), sim, c.published, c.tol));
    }
    return rep;
}

// ---------------------------------------------------------------- 3

Report size_validity() {
    Report rep;
    StudyConfig cfg;
    for (const char* g : {"gaussian", "laplace", "t3"}) cfg.tests.push_back({"ahrt", g});
    for (const char* f : {"gaussian", "laplace", "t3"}) cfg.dgps.push_back({f, ErrorModel::iid(), 1000});
    cfg.h_grid = {0.0};
    cfg.n_rep = 5000;
    cfg.seed = kSeed;
    const StudyResult r = run_study(cfg);
    for (const auto& row : r.rows) {
        rep.check(row.reject_rate >= 0.04 && row.reject_rate <= 0.06 && row.failures == 0,
                  row.test + " f=" + row.innovation +
                      fmt(" size=%.4f (range [0.04, 0.06]) failures=%.0f", row.reject_rate,
                          static_cast<double>(row.failures)));
    }
    return rep;
}

// ---------------------------------------------------------------- 4

Report tangency() {
    Report rep;
    const std::vector<double> h{-7.0};
    const double envelope = power_envelope(2.0, h, 0.05, false, {kDefaultEnvelopeReps, kDefaultGridPoints, kSeed, 0})[0];
    StudyConfig cfg;
    cfg.tests = {{"ahrt", "laplace"}};
    cfg.dgps = {{"laplace", ErrorModel::iid(), 2500}};
    cfg.h_grid = h;
    cfg.n_rep = 4000;
    cfg.seed = kSeed;
    const StudyRow row = run_study(cfg).rows.at(0);
    rep.check(std::abs(row.reject_rate - envelope) <= 0.03,
              fmt("AHRT-laplace power=%.4f (s.e. %.4f) envelope=%.4f |diff|=%.4f (tol 0.03)", row.reject_rate,
                  row.mc_se, envelope, std::abs(row.reject_rate - envelope)));
    return rep;
}

// ---------------------------------------------------------------- 5

Report chernoff_savage() {
    Report rep;
    StudyConfig cfg;
    cfg.tests = {{"ahrt", "gaussian"}, {"ers", ""}};
    for (const char* f : {"gaussian", "laplace", "t3"}) cfg.dgps.push_back({f, ErrorModel::iid(), 2500});
    cfg.h_grid = {-7.0};
    cfg.n_rep = 4000;
    cfg.seed = kSeed;
    const StudyResult r = run_study(cfg);
    for (const char* f : {"gaussian", "laplace", "t3"}) {
        const double a = find_row(r, "ahrt-gaussian", f, -7.0).reject_rate;
        const double e = find_row(r, "ers", f, -7.0).reject_rate;
        const bool gaussian = std::string(f) == "gaussian";
        const double margin = gaussian ? -0.01 : 0.03;
        rep.check(a >= e + margin, std::string("f=") + f +
                                       fmt(" AHRT-gaussian=%.4f ERS=%.4f difference=%+.4f (need >= %+.2f)", a, e,
                                           a - e, margin));
    }
    return rep;
}

// ---------------------------------------------------------------- 6

Report outside_family() {
    Report rep;
    StudyConfig cfg;
    cfg.tests = {{"ahrt", "gaussian"}};
    cfg.dgps = {{"t1", ErrorModel::iid(), 2500}};
    cfg.h_grid = {0.0};
    cfg.n_rep = 4000;
    cfg.seed = kSeed;
    const StudyRow row = run_study(cfg).rows.at(0);
    rep.check(row.reject_rate <= 0.055, fmt("AHRT-gaussian size under t1 = %.4f (limit 0.055)", row.reject_rate));
    rep.check(row.failures == 0, fmt("failed replications = %.0f", static_cast<double>(row.failures)));
    return rep;
}

// ---------------------------------------------------------------- 7

TimeSeries walk(std::size_t T, std::uint64_t seed, const char* law) {
    Engine rng = substream(kSeed, seed, 0);
    DgpConfig cfg;
    cfg.t_len = T;
    cfg.innovation = law;
    return generate(cfg, rng);
}

Report property_suite() {
    Report rep;
    {
        const TimeSeries y = walk(500, 1, "laplace");
        const auto e = fit_ar(y, 0, false).residuals;
        std::vector<double> monotone(e);
        for (double& v : monotone) v = std::atan(v) + 3.0 * v * v * v;
        bool same = true;
        for (const char* g : {"gaussian", "laplace", "t3"}) {
            const auto G = make_reference(g);
            same = same && build_paths(e, *G, 500, 0).b_phi_g.jumps == build_paths(monotone, *G, 500, 0).b_phi_g.jumps;
        }
        rep.check(same, "rank process B_phi_g unchanged under a strictly increasing transform (exact)");
    }
    {
        const TimeSeries y = walk(400, 2, "t3");
        std::vector<double> scaled(y.values().begin(), y.values().end());
        for (double& v : scaled) v *= 37.5;
        double worst = 0.0;
        for (const char* g : {"gaussian", "laplace", "t3"}) {
            const double a = ahrt(y, {g}, {}).statistic;
            const double b = ahrt(TimeSeries(scaled), {g}, {}).statistic;
            worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
        }
        rep.check(worst <= 1e-10, fmt("AHRT statistic scale invariance, p = 0: max relative change %.2e (tol 1e-10)",
                                      worst));
    }
    {
        std::mt19937_64 rng(kSeed);
        std::uniform_int_distribution<int> k(-64, 64);
        StepPath x;
        double sum = 0.0;
        double sum_sq = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double a = k(rng) / 8.0;
            x.jumps.push_back(a);
            sum += a;
            sum_sq += a * a;
        }
        rep.check(stochastic_integral(x, x) == (sum * sum - sum_sq) / 2.0,
                  "left-point self-integral equals ((sum a)^2 - sum a^2) / 2 (exact)");
    }
    {
        const TimeSeries y = walk(600, 3, "laplace");
        RankTestOptions o;
        o.sim = {2000, 200, kSeed, 0};
        double worst = 0.0;
        for (const char* g : {"laplace", "t3"}) {
            const TestResult a = ahrt(y, {g}, o);
            const double s = a.nuisance.sigma_used;
            const TestResult h = hrt::hrt(y, {g}, o, 2.0 / s);
            worst = std::max(worst, std::abs(h.statistic - a.statistic) / std::max(1.0, std::abs(a.statistic)));
        }
        rep.check(worst <= 1e-12, fmt("HRT with lambda = 1 equals AHRT: max relative difference %.2e (tol 1e-12)",
                                      worst));
    }
    {
        const WeightSummary w = likelihood_ratio_weight_mean(2.0, -7.0, {kDefaultEnvelopeReps, kDefaultGridPoints,
                                                                         kSeed, 0});
        rep.check(std::abs(w.mean - 1.0) <= 3.0 * w.std_error,
                  fmt("likelihood-ratio weight mean (J_f = 2, h = -7) = %.4f, s.e. %.4f (tol 3 s.e.)", w.mean,
                      w.std_error));
    }
    {
        double worst = 0.0;
        for (const char* g : {"gaussian", "laplace", "t3"}) {
            const auto G = make_reference(g);
            const auto cm = cross_moments(*G, *G);
            worst = std::max({worst, std::abs(cm.sigma_eps_phi_g - 1.0), std::abs(cm.j_fg - G->fisher_info())});
        }
        rep.check(worst <= 1e-6, fmt("cross_moments(g, g) = (1, J_g): max error %.2e (tol 1e-6)", worst));
    }
    {
        auto mc = [](const std::string& workers) {
            std::ostringstream out;
            std::ostringstream err;
            cli::run({"mc", "--preset", "paper-desk", "--reps", "300", "--h-grid", "0,-7", "--seed", "11",
                      "--workers", workers},
                     out, err);
            return out.str();
        };
        const std::string one = mc("1");
        const std::string four = mc("4");
        std::ostringstream err;
        std::ostringstream other;
        cli::run({"mc", "--preset", "paper-desk", "--reps", "300", "--h-grid", "0,-7", "--seed", "12"}, other, err);
        rep.check(one == four && one.size() > 100 && other.str() != one,
                  "mc CSV byte-identical for 1 and 4 workers with the same seed, different for another seed");
    }
    return rep;
}

// ---------------------------------------------------------------- 8

Report presets() {
    Report rep;
    const StudyConfig fig1 = study_preset("paper-fig1");
    const StudyConfig fig3 = study_preset("paper-fig3");
    const StudyConfig desk = study_preset("paper-desk");
    rep.check(fig1.n_rep == 20000 && fig1.dgps.front().t_len == 2500 && fig1.h_grid.back() == -30.0 &&
                  fig1.tests.size() == 6,
              "paper-fig1: 20000 reps, T = 2500, h from 0 to -30, AHRT-{gaussian,laplace,t3,estimated}, ERS, DF-rho");
    rep.check(fig3.n_rep == 20000 && fig3.dgps.size() == 5, "paper-fig3: 20000 reps, five heavy-tailed/skewed laws");
    rep.check(desk.n_rep == 2000 && desk.dgps.size() * desk.tests.size() == 9, "paper-desk: 2000 reps, 3 x 3 design");
    for (const char* name : {"paper-fig1", "paper-fig3"}) {
        std::ostringstream out;
        std::ostringstream err;
        const int code = cli::run(
            {"mc", "--preset", name, "--reps", "20", "--length", "150", "--h-grid", "0,-10", "--seed", "1"}, out, err);
        const StudyConfig cfg = study_preset(name);
        const std::string text = out.str();
        const auto rows = static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')) - 1;
        rep.check(code == 0 && rows == cfg.tests.size() * cfg.dgps.size() * 2,
                  std::string(name) + " reruns through 'hrt mc' (shrunk to 20 reps, T = 150 for this check)");
    }
    return rep;
}

struct Criterion {
    int number;
    const char* title;
    double budget_seconds;
    std::function<Report()> run;
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: acceptance [--criterion N]\n");
            return 2;
        }
    }
    const std::vector<Criterion> all{
        {1, "critical values of the limit statistic vs published polynomials", 300, table_critical_values},
        {2, "DF-rho and ERS critical values", 600, competitor_critical_values},
        {3, "AHRT size, 3 x 3 densities, T = 1000", 900, size_validity},
        {4, "AHRT-f power touches the envelope at h = -7 (Laplace)", 1200, tangency},
        {5, "AHRT-gaussian vs ERS power at h = -7", 1200, chernoff_savage},
        {6, "AHRT-gaussian size under Cauchy innovations", 300, outside_family},
        {7, "property suite", 300, property_suite},
        {8, "full-scale figure presets", 300, presets},
    };
    bool all_ok = true;
    bool ran = false;
    for (const auto& c : all) {
        if (only != 0 && c.number != only) continue;
        ran = true;
        const auto t0 = std::chrono::steady_clock::now();
        Report rep;
        try {
            rep = c.run();
        } catch (const std::exception& e) {
            rep.check(false, std::string("exception: ") + e.what());
        }
        const double secs = seconds_since(t0);
        const bool in_time = secs <= c.budget_seconds;
        const bool ok = rep.ok && in_time;
        all_ok = all_ok && ok;
        std::printf("%s criterion %d: %s (%.1f s, budget %.0f s)\n", ok ? "PASS" : "FAIL", c.number, c.title, secs,
                    c.budget_seconds);
        for (const auto& line : rep.lines) std::printf("    %s\n", line.c_str());
        if (!in_time) std::printf("    FAIL runtime over budget\n");
        std::fflush(stdout);
    }
    if (!ran) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    return all_ok ? 0 : 1;
}
