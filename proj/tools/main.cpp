// dpmean — private continual mean estimation workbench.
//
// Subcommands: table2 | curve | simulate | stream | sens-check.
// Exit codes: 0 ok, 1 usage, 2 golden/oracle mismatch, 3 I/O, 4 precondition.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "dpmean/csv.hpp"
#include "dpmean/error.hpp"
#include "dpmean/error_table.hpp"
#include "dpmean/rng.hpp"
#include "dpmean/sensitivity.hpp"
#include "dpmean/simulate.hpp"
#include "dpmean/stream.hpp"
#include "dpmean/util.hpp"
#include "dpmean/withhold.hpp"

#ifndef DPMEAN_VERSION
#define DPMEAN_VERSION "0.1.0"
#endif

namespace {

using nlohmann::json;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Output sink: --out file or stdout. Metadata goes first as a one-line
// JSON comment so outputs carry their own reproduction recipe.
struct Output {
    std::unique_ptr<std::ofstream> file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file = std::make_unique<std::ofstream>(path);
            if (!*file) throw dpmean::io_error("cannot open output file " + path);
            os = file.get();
        }
    }
    void metadata(json j) {
        j["version"] = DPMEAN_VERSION;
        *os << "# " << j.dump() << "\n";
    }
    std::ostream& stream() { return *os; }
};

struct CommonOpts {
    std::size_t n = 8196;
    std::size_t k = 0;
    std::size_t b = 0;
    std::size_t p = 0;  // 0 = kind-dependent default
    std::string kind = "mean-aware";
    std::string banding = "banded-inverse";
    double nu = -1.0;  // < 0 = optimize
    double eps = 1.0;
    double delta = 1e-6;
    double xi = 1.0;
    std::size_t dim = 1;
    std::size_t trials = 100;
    std::uint64_t seed = 1;
    std::string in_path;
    std::string out_path;
    std::string clip_mode = "reject";
    std::string estimator = "alg1";
};

dpmean::ParticipationPattern make_pattern(const CommonOpts& o) {
    if ((o.k == 0) == (o.b == 0)) {
        throw dpmean::precondition_error("exactly one of --k / --b must be given");
    }
    if (o.b != 0) return dpmean::ParticipationPattern(o.n, o.b);
    return dpmean::ParticipationPattern::from_target_k(o.n, o.k);
}

struct PlanChoice {
    dpmean::FactorizationPlan plan;
    std::size_t p = 0;
    double nu = 0.0;
};

PlanChoice make_plan(const std::string& kind_s, const std::string& banding_s, std::size_t n,
                     const dpmean::ParticipationPattern& pattern, std::size_t p_flag, double nu_flag) {
    using namespace dpmean;
    const FactorKind kind = parse_kind(kind_s);
    const BandingMode banding = parse_banding(banding_s);
    PlanChoice out;
    std::optional<std::size_t> p;
    if (banding != BandingMode::NotBanded) {
        out.p = p_flag != 0 ? p_flag : default_bandwidth(kind, banding, pattern.b);
        p = out.p;
    }
    std::optional<double> nu;
    if (kind == FactorKind::NuDpFtrl) {
        out.nu = nu_flag >= 0.0 ? nu_flag : optimize_nu(banding, pattern, p).nu;
        nu = out.nu;
    }
    out.plan = build_plan(kind, banding, n, p, nu);
    return out;
}

int cmd_table2(const CommonOpts& o, bool as_json) {
    Output out(o.out_path);
    out.metadata({{"cmd", "table2"}, {"n", o.n}, {"seed", o.seed}});

    const auto cells = dpmean::compute_error_table(o.n);
    const bool golden_applies = o.n == dpmean::kTableN;
    std::size_t bad = 0;

    if (as_json) {
        json arr = json::array();
        for (const auto& c : cells) {
            arr.push_back({{"banding", to_string(c.banding)},
                           {"kind", to_string(c.kind)},
                           {"k", c.k},
                           {"b", c.b},
                           {"p", c.p},
                           {"nu", c.nu},
                           {"value", c.value},
                           {"golden", c.golden},
                           {"within_tolerance", c.within_tolerance()}});
        }
        out.stream() << arr.dump(2) << "\n";
    } else {
        out.stream() << "banding,kind,k,b,p,nu,value,golden,abs_diff,within_tolerance\n";
        for (const auto& c : cells) {
            out.stream() << to_string(c.banding) << ',' << to_string(c.kind) << ',' << c.k << ','
                         << c.b << ',' << c.p << ',' << fmt(c.nu) << ',' << fmt(c.value) << ','
                         << fmt(c.golden) << ',' << fmt(std::abs(c.value - c.golden)) << ','
                         << (c.within_tolerance() ? 1 : 0) << "\n";
        }
    }
    for (const auto& c : cells) {
        if (!c.within_tolerance()) ++bad;
    }
    if (golden_applies) {
        std::cerr << "table2: " << (cells.size() - bad) << "/" << cells.size()
                  << " cells within tolerance\n";
        return bad == 0 ? 0 : 2;
    }
    std::cerr << "table2: n != " << dpmean::kTableN << ", golden comparison not enforced\n";
    return 0;
}

int cmd_curve(const CommonOpts& o, const std::string& base_kind, const std::string& base_banding,
              double base_nu, std::size_t base_p, std::size_t points) {
    using namespace dpmean;
    Output out(o.out_path);
    const auto pattern = make_pattern(o);
    PlanChoice main_c = make_plan(o.kind, o.banding, o.n, pattern, o.p, o.nu);
    PlanChoice base_c = make_plan(base_kind, base_banding, o.n, pattern, base_p, base_nu);

    out.metadata({{"cmd", "curve"}, {"n", o.n}, {"k", pattern.k}, {"b", pattern.b},
                  {"kind", o.kind}, {"banding", o.banding}, {"p", main_c.p}, {"nu", main_c.nu},
                  {"baseline_kind", base_kind}, {"baseline_banding", base_banding},
                  {"baseline_p", base_c.p}, {"baseline_nu", base_c.nu},
                  {"points", points}, {"seed", o.seed}});

    // Geometric grid of steps, always ending at n.
    std::vector<std::size_t> grid;
    const double ratio = std::pow(static_cast<double>(o.n), 1.0 / std::max<std::size_t>(1, points - 1));
    double v = 1.0;
    for (std::size_t i = 0; i < points; ++i, v *= ratio) {
        auto t = static_cast<std::size_t>(std::llround(v));
        t = std::min(t, o.n);
        if (grid.empty() || t > grid.back()) grid.push_back(t);
    }
    if (grid.back() != o.n) grid.push_back(o.n);

    const auto main_curve = error_curve(main_c.plan, pattern, grid);
    const auto base_curve = error_curve(base_c.plan, pattern, grid);
    out.stream() << "t,error,baseline_error,ratio\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.stream() << grid[i] << ',' << fmt(main_curve[i].error) << ','
                     << fmt(base_curve[i].error) << ','
                     << fmt(main_curve[i].error / base_curve[i].error) << "\n";
    }
    return 0;
}

int cmd_simulate(const CommonOpts& o, double mu_flag, bool noiseless, long long kc_override,
                 double gamma, double zeta, bool unbounded_data) {
    using namespace dpmean;
    Output out(o.out_path);
    const auto pattern = make_pattern(o);
    const std::vector<double> mu(o.dim, mu_flag);

    out.metadata({{"cmd", "simulate"}, {"estimator", o.estimator}, {"n", pattern.n},
                  {"k", pattern.k}, {"b", pattern.b}, {"kind", o.kind}, {"p", o.p},
                  {"nu", o.nu}, {"eps", o.eps}, {"delta", o.delta}, {"xi", o.xi},
                  {"d", o.dim}, {"mu", mu_flag}, {"trials", o.trials},
                  {"noiseless", noiseless}, {"seed", o.seed}});

    if (!dpmean::PrivacyBudget(o.eps, o.delta, o.xi).formal_regime()) {
        std::cerr << "warning: epsilon >= 1 is outside the formal calibration regime\n";
    }
    std::vector<double> mse;
    std::vector<double> analytic(pattern.n, 0.0);  // per-step RMSE prediction
    const double stat_var = mu_flag * (1.0 - mu_flag) * static_cast<double>(o.dim);

    if (o.estimator == "alg1") {
        EstimatorConfig cfg(PrivacyBudget(o.eps, o.delta, o.xi), pattern,
                            o.p != 0 ? o.p : pattern.b, o.dim);
        cfg.kind = parse_kind(o.kind);
        if (cfg.kind == FactorKind::NuDpFtrl) cfg.nu = o.nu >= 0 ? o.nu : 0.5;
        cfg.noiseless = noiseless;
        cfg.clip_mode = ClipMode::Clip;
        StreamingMeanEstimator probe(cfg);
        double run_a2 = 0.0;
        for (std::size_t t = 1; t <= pattern.n; ++t) {
            const double a = probe.plan().a[t - 1];
            run_a2 += a * a;
            const double bt = std::sqrt(run_a2) / static_cast<double>(t);
            const double priv = probe.sigma() * bt;  // per-coordinate noise std
            analytic[t - 1] = std::sqrt(stat_var / static_cast<double>(t) +
                                        static_cast<double>(o.dim) * priv * priv);
        }
        mse = mse_curve_alg1(cfg, mu, o.trials, o.seed);
    } else if (o.estimator == "withhold-release") {
        WithholdConfig cfg;
        cfg.users = pattern.b;
        cfg.max_participations = pattern.k;
        cfg.dim = o.dim;
        cfg.epsilon = o.eps;
        cfg.delta = o.delta;
        cfg.zeta = zeta > 0.0 ? zeta : 1.0;  // Bernoulli coordinate bound
        cfg.gamma = gamma;
        cfg.seed = o.seed;
        cfg.bounded_data = !unbounded_data;
        cfg.noiseless = noiseless;
        cfg.crude_count_override = kc_override;
        (void)WithholdReleaseEstimator(cfg);  // fail fast before the trial loop
        mse = mse_curve_withhold(cfg, mu, o.trials, o.seed);
        for (std::size_t t = 1; t <= mse.size(); ++t) {
            analytic[t - 1] = std::sqrt(stat_var / static_cast<double>(t));
        }
    } else {
        throw precondition_error("unknown estimator: " + o.estimator);
    }

    const auto avg = cumulative_average(mse);
    out.stream() << "t,rmse,root_avg_mse,analytic\n";
    for (std::size_t t = 0; t < mse.size(); ++t) {
        out.stream() << (t + 1) << ',' << fmt(std::sqrt(mse[t])) << ',' << fmt(std::sqrt(avg[t]))
                     << ',' << fmt(analytic[t]) << "\n";
    }
    return 0;
}

int cmd_stream(const CommonOpts& o, bool synthetic, int users, bool strict,
               const std::string& save_input, long long kc_override, double gamma, double zeta,
               bool noiseless) {
    using namespace dpmean;
    StreamFile file;
    if (synthetic) {
        file = synthetic_stream(o.n, users, o.dim, o.seed);
        if (!save_input.empty()) {
            std::ofstream f(save_input);
            if (!f) throw io_error("cannot open " + save_input);
            write_stream_csv(f, file);
        }
    } else {
        if (o.in_path.empty()) throw precondition_error("stream: need --in <file> or --synthetic");
        file = read_stream_csv(o.in_path);
    }
    const std::size_t n = file.records.size();
    if (n == 0) throw precondition_error("stream: no records");
    const std::size_t d = file.dim;
    const std::size_t b = o.b != 0 ? o.b : static_cast<std::size_t>(users);

    // Participation audit against the declared separation.
    std::map<int, long> last_seen;
    std::size_t violations = 0;
    long t = 0;
    for (const auto& rec : file.records) {
        ++t;
        auto it = last_seen.find(rec.user_id);
        if (it != last_seen.end() && t - it->second < static_cast<long>(b)) ++violations;
        last_seen[rec.user_id] = t;
    }
    if (violations > 0) {
        if (strict) {
            throw precondition_error("stream: " + std::to_string(violations) +
                                     " participation(s) closer than the declared b");
        }
        std::cerr << "warning: " << violations << " participation(s) closer than b=" << b << "\n";
    }

    if (!PrivacyBudget(o.eps, o.delta, o.xi).formal_regime()) {
        std::cerr << "warning: epsilon >= 1 is outside the formal calibration regime\n";
    }
    Output out(o.out_path);
    out.metadata({{"cmd", "stream"}, {"estimator", o.estimator}, {"n", n}, {"b", b}, {"d", d},
                  {"eps", o.eps}, {"delta", o.delta}, {"xi", o.xi},
                  {"synthetic", synthetic}, {"strict", strict}, {"seed", o.seed}});

    // a separation longer than the stream is equivalent to single participation
    const auto pattern = ParticipationPattern(n, std::min(b, n));
    const ClipMode clip = o.clip_mode == "clip" ? ClipMode::Clip : ClipMode::Reject;

    std::unique_ptr<StreamingMeanEstimator> alg1;
    std::unique_ptr<WithholdReleaseEstimator> wr;
    if (o.estimator == "alg1") {
        EstimatorConfig cfg(PrivacyBudget(o.eps, o.delta, o.xi), pattern,
                            o.p != 0 ? o.p : pattern.b, d);
        cfg.kind = parse_kind(o.kind);
        if (cfg.kind == FactorKind::NuDpFtrl) cfg.nu = o.nu >= 0 ? o.nu : 0.5;
        cfg.seed = o.seed;
        cfg.clip_mode = clip;
        cfg.noiseless = noiseless;
        alg1 = std::make_unique<StreamingMeanEstimator>(cfg);
    } else if (o.estimator == "withhold-release") {
        WithholdConfig cfg;
        cfg.users = b;
        cfg.max_participations = pattern.k;
        cfg.dim = d;
        cfg.epsilon = o.eps;
        cfg.delta = o.delta;
        cfg.zeta = zeta > 0 ? zeta : o.xi;
        cfg.gamma = gamma;
        cfg.seed = o.seed;
        cfg.bounded_data = true;
        cfg.noiseless = noiseless;
        cfg.crude_count_override = kc_override;
        wr = std::make_unique<WithholdReleaseEstimator>(cfg);
    } else {
        throw precondition_error("unknown estimator: " + o.estimator);
    }

    out.stream() << "t,user_id";
    for (std::size_t j = 1; j <= d; ++j) out.stream() << ",private_v" << j;
    for (std::size_t j = 1; j <= d; ++j) out.stream() << ",true_v" << j;
    out.stream() << "\n";

    std::vector<double> clipped(d), truth(d, 0.0), est;
    t = 0;
    for (const auto& rec : file.records) {
        ++t;
        const double norm = l2_norm(rec.values);
        double scale = norm > o.xi ? o.xi / norm : 1.0;
        for (std::size_t j = 0; j < d; ++j) clipped[j] = rec.values[j] * scale;
        est = alg1 ? alg1->observe(clipped) : wr->observe(rec.user_id, clipped);
        out.stream() << t << ',' << rec.user_id;
        for (std::size_t j = 0; j < d; ++j) out.stream() << ',' << fmt(est[j]);
        for (std::size_t j = 0; j < d; ++j) {
            truth[j] += rec.values[j];
            out.stream() << ',' << fmt(truth[j] / static_cast<double>(t));
        }
        out.stream() << "\n";
    }
    return 0;
}

int cmd_sens_check(std::size_t nmax, std::size_t bmax, std::size_t seeds, double tol,
                   std::uint64_t seed) {
    using namespace dpmean;
    if (nmax > 24) throw precondition_error("sens-check: enumeration capped at n = 24");
    double worst = 0.0;
    std::size_t cases = 0;
    for (std::size_t n = 2; n <= nmax; ++n) {
        for (std::size_t b = 1; b <= std::min(bmax, n); ++b) {
            for (std::size_t s = 0; s < seeds; ++s) {
                // random non-negative decreasing series
                std::vector<double> c(n);
                const std::uint64_t cs = derive_seed(seed, (n * 131 + b) * 1000003 + s);
                c[0] = 0.5 + uniform01(cs, kDomainTrial, 0, 0);
                for (std::size_t j = 1; j < n; ++j) {
                    c[j] = c[j - 1] * std::pow(uniform01(cs, kDomainTrial, j, 0), 0.5);
                }
                const ToeplitzSeries series{std::vector<double>(c)};
                const ParticipationPattern pattern(n, b);
                const double exact = sens_min_sep(series, pattern);
                const double oracle = sens_enumerate(ltt_dense(series), pattern);
                worst = std::max(worst, std::abs(exact - oracle));
                ++cases;
            }
        }
    }
    std::cout << "sens-check: " << cases << " cases, max |closed-form - enumeration| = "
              << fmt(worst) << " (tol " << fmt(tol) << ")\n";
    return worst <= tol ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dpmean: user-level differentially private continual mean estimation"};
    app.require_subcommand(1);

    CommonOpts o;
    bool as_json = false;
    // curve extras
    std::string base_kind = "mean-aware", base_banding = "banded";
    double base_nu = -1.0;
    std::size_t base_p = 0, points = 64;
    // simulate/stream extras
    double mu_flag = 0.5;
    bool noiseless = false, synthetic = false, strict = false, unbounded_data = false;
    long long kc_override = 0;
    double gamma = 0.0, zeta = 0.0;
    int users = 500;
    std::string save_input;
    // sens-check extras
    std::size_t sc_nmax = 12, sc_bmax = 4, sc_seeds = 50;
    double sc_tol = 1e-12;

    auto add_common = [&](CLI::App* c, bool with_pattern) {
        c->add_option("--seed", o.seed, "deterministic seed");
        c->add_option("--out", o.out_path, "output CSV path (default stdout)");
        if (with_pattern) {
            c->add_option("--n", o.n, "stream length");
            c->add_option("--k", o.k, "participation count (b derived as ceil(n/k))");
            c->add_option("--b", o.b, "min separation (k derived as ceil(n/b))");
        }
    };

    auto* t2 = app.add_subcommand("table2", "step-n error for all factorizations vs reference values");
    t2->add_option("--n", o.n, "table size (golden diff enforced at 8196)");
    t2->add_flag("--json", as_json, "emit JSON instead of CSV");
    add_common(t2, false);

    auto* cv = app.add_subcommand("curve", "error curve of a plan and its ratio to a baseline");
    add_common(cv, true);
    cv->add_option("--kind", o.kind, "identity|sqrt-prefix|nu-dp-ftrl|mean-aware");
    cv->add_option("--banding", o.banding, "none|banded|banded-inverse");
    cv->add_option("--p", o.p, "bandwidth (0 = kind default)");
    cv->add_option("--nu", o.nu, "decay for nu-dp-ftrl (negative = optimize)");
    cv->add_option("--baseline-kind", base_kind, "baseline kind");
    cv->add_option("--baseline-banding", base_banding, "baseline banding");
    cv->add_option("--baseline-p", base_p, "baseline bandwidth (0 = default)");
    cv->add_option("--baseline-nu", base_nu, "baseline nu");
    cv->add_option("--points", points, "geometric grid size");

    auto* sim = app.add_subcommand(
        "simulate", "Monte-Carlo runs on Bernoulli(mu) streams; columns t,rmse,root_avg_mse,analytic "
                    "(analytic = statistical floor plus, for alg1, closed-form privacy noise)");
    add_common(sim, true);
    sim->add_option("--estimator", o.estimator, "alg1|withhold-release");
    sim->add_option("--kind", o.kind, "correlation kind for alg1");
    sim->add_option("--p", o.p, "bandwidth for alg1 (0 = b)");
    sim->add_option("--nu", o.nu, "decay when --kind nu-dp-ftrl");
    sim->add_option("--eps", o.eps, "privacy epsilon");
    sim->add_option("--delta", o.delta, "privacy delta");
    sim->add_option("--xi", o.xi, "clip norm");
    sim->add_option("--d", o.dim, "data dimension");
    sim->add_option("--mu", mu_flag, "Bernoulli parameter per coordinate");
    sim->add_option("--trials", o.trials, "Monte-Carlo trials");
    sim->add_flag("--noiseless", noiseless, "disable privacy noise (test hook)");
    sim->add_option("--kc", kc_override, "withhold-release crude-count override (0 = theoretical)");
    sim->add_option("--gamma", gamma, "withhold-release failure knob (0 = 0.05/d)");
    sim->add_option("--zeta", zeta, "withhold-release sub-Gaussian proxy");
    sim->add_flag("--unbounded-data", unbounded_data, "skip pre-activating levels 0 and 1");

    auto* st = app.add_subcommand("stream", "replay a CSV stream (or a synthetic one) through an estimator");
    add_common(st, true);
    st->add_option("--in", o.in_path, "input CSV: header user_id,v1..vd[,t]");
    st->add_flag("--synthetic", synthetic, "generate a round-robin heavy-tailed stream instead of reading --in");
    st->add_option("--users", users, "synthetic generator: number of users");
    st->add_option("--d", o.dim, "synthetic generator: value dimension");
    st->add_option("--save-input", save_input, "write the synthetic stream to this path");
    st->add_option("--estimator", o.estimator, "alg1|withhold-release");
    st->add_option("--kind", o.kind, "correlation kind for alg1");
    st->add_option("--p", o.p, "bandwidth for alg1 (0 = b)");
    st->add_option("--nu", o.nu, "decay when --kind nu-dp-ftrl");
    st->add_option("--eps", o.eps, "privacy epsilon");
    st->add_option("--delta", o.delta, "privacy delta");
    st->add_option("--xi", o.xi, "clip norm");
    st->add_option("--clip-mode", o.clip_mode, "clip|reject (estimator-side handling)");
    st->add_flag("--strict", strict, "fail on participations closer than b");
    st->add_option("--kc", kc_override, "withhold-release crude-count override");
    st->add_option("--gamma", gamma, "withhold-release failure knob (0 = 0.05/d)");
    st->add_option("--zeta", zeta, "withhold-release coordinate bound (0 = xi)");
    st->add_flag("--noiseless", noiseless, "disable privacy noise (test hook)");

    auto* sc = app.add_subcommand("sens-check", "closed-form sensitivity vs combinatorial enumeration");
    sc->add_option("--nmax", sc_nmax, "largest stream length (<= 24)");
    sc->add_option("--bmax", sc_bmax, "largest separation");
    sc->add_option("--seeds", sc_seeds, "random series per (n, b)");
    sc->add_option("--tol", sc_tol, "maximum allowed mismatch");
    sc->add_option("--seed", o.seed, "deterministic seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (t2->parsed()) return cmd_table2(o, as_json);
        if (cv->parsed()) return cmd_curve(o, base_kind, base_banding, base_nu, base_p, points);
        if (sim->parsed()) return cmd_simulate(o, mu_flag, noiseless, kc_override, gamma, zeta, unbounded_data);
        if (st->parsed()) {
            return cmd_stream(o, synthetic, users, strict, save_input, kc_override, gamma, zeta,
                              noiseless);
        }
        if (sc->parsed()) return cmd_sens_check(sc_nmax, sc_bmax, sc_seeds, sc_tol, o.seed);
    } catch (const dpmean::io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const dpmean::precondition_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
