#include "clockforge/cli.hpp"

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include "clockforge/bounds.hpp"
#include "clockforge/clock.hpp"
#include "clockforge/kernels.hpp"
#include "clockforge/optimizer.hpp"
#include "clockforge/rng.hpp"

namespace clockforge::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr double kDefaultOmega0Z = 1e6;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

uint64_t derive_cli_seed(uint64_t seed, double salt_a, int salt_b, int salt_c) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g/%d/%d", salt_a, salt_b, salt_c);
    return seed ^ fnv1a(buf);
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open output file: " + path.string());
    out << content;
}

// Schema validation: every key must be known; missing required keys fail with
// a path-precise message.
void check_keys(const json& obj, const std::string& path,
                const std::vector<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(path + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(path + ": unknown key '" + key + "'");
    }
}

const json& need(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) throw ConfigError(path + ": missing required key '" + key + "'");
    return obj.at(key);
}

NoiseSpec noise_from_config(const json& cfg, const std::string& path, double td_over_z = 0.0) {
    if (cfg.contains("noise")) {
        const json& n = cfg["noise"];
        check_keys(n, path + ".noise", {"alpha", "omega0_z", "h_white", "h_flicker", "h_rw", "omega0"});
        if (n.contains("alpha")) {
            const double oz = n.value("omega0_z", kDefaultOmega0Z);
            return NoiseSpec::single_alpha(n["alpha"].get<int>(), oz, 1.0, td_over_z);
        }
        NoiseSpec s;
        s.h_white = n.value("h_white", 0.0);
        s.h_flicker = n.value("h_flicker", 0.0);
        s.h_rw = n.value("h_rw", 0.0);
        s.omega0 = need(n, path + ".noise", "omega0").get<double>();
        return s;
    }
    const int alpha = need(cfg, path, "alpha").get<int>();
    const double oz = cfg.value("omega0_z", kDefaultOmega0Z);
    return NoiseSpec::single_alpha(alpha, oz, 1.0, td_over_z);
}

json manifest(const std::string& command, const json& cfg, uint64_t seed, int threads) {
    json m;
    m["command"] = command;
    m["config"] = cfg;
    m["config_hash"] = fnv1a(cfg.dump());
    m["seed"] = seed;
    m["threads"] = threads;
    m["version"] = kVersion;
    m["rng"] = Rng::algorithm_id();
    m["kernel_backend"] = kernels::backend_name(kernels::active_backend());
    return m;
}

// ---------------------------------------------------------------- bounds ---
int cmd_bounds(const json& cfg, const fs::path& out, uint64_t seed, int threads) {
    check_keys(cfg, "bounds", {"n_list", "delta_phi_list", "tol", "max_iter", "seed"});
    const auto n_list = need(cfg, "bounds", "n_list").get<std::vector<int>>();
    const auto dphi_list = need(cfg, "bounds", "delta_phi_list").get<std::vector<double>>();
    const double tol = cfg.value("tol", 1e-9);
    const int max_iter = cfg.value("max_iter", 500);
    (void)threads;

    std::string csv = "n,delta_phi,oqi,bqcrb_ghz,bcrb_css,bmse_css_opt,pihl,ctl,oqi_asym\n";
    for (int n : n_list)
        for (double dphi : dphi_list) {
            const PriorModel prior = gaussian_prior_auto(dphi, n);
            const double oqi_val = (n <= 64) ? oqi(n, prior, tol, max_iter).bound
                                             : oqi_asymptotic(n, dphi);
            const double bq_ghz = bqcrb(prepare_state(ProtocolSpec::ghz(n)), prior);
            const ConditionalModel css =
                statistical_model(ProtocolSpec::css(n, EstimatorKind::OptimalBayes), prior);
            const double bcrb_css = bcrb(css);
            const double bmse_css = optimal_bayes_estimate(css).second.bmse;
            csv += std::to_string(n) + "," + fmt(dphi) + "," + fmt(oqi_val) + "," +
                   fmt(bq_ghz) + "," + fmt(bcrb_css) + "," + fmt(bmse_css) + "," +
                   fmt(kPi * kPi / (double(n) * n)) + "," + fmt(ctl_oqi(dphi)) + "," +
                   fmt(oqi_asymptotic(n, dphi)) + "\n";
        }
    write_text(out / "bounds.csv", csv);
    write_text(out / "manifest.json", manifest("bounds", cfg, seed, threads).dump(2) + "\n");
    return 0;
}

// -------------------------------------------------------------- protocol ---
int cmd_protocol(const json& cfg, const fs::path& out, uint64_t seed, int threads) {
    check_keys(cfg, "protocol", {"protocols", "delta_phi_list", "seed"});
    const json& plist = need(cfg, "protocol", "protocols");
    const auto dphi_list = need(cfg, "protocol", "delta_phi_list").get<std::vector<double>>();
    (void)threads;

    std::string csv = "protocol_index,kind,estimator,n_atoms,delta_phi,bmse,prior_var,efm,bcrb\n";
    int idx = 0;
    for (const auto& pj : plist) {
        const ProtocolSpec spec = protocol_from_json(pj.dump());
        for (double dphi : dphi_list) {
            const PriorModel prior = gaussian_prior_auto(dphi, spec.n_atoms);
            const ConditionalModel model = statistical_model(spec, prior);
            const auto [table, rep] = estimate(model, spec.estimator);
            csv += std::to_string(idx) + "," + pj.at("kind").get<std::string>() + "," +
                   (spec.estimator == EstimatorKind::Linear ? "linear" : "optimal_bayes") +
                   "," + std::to_string(spec.n_atoms) + "," + fmt(dphi) + "," +
                   fmt(rep.bmse) + "," + fmt(rep.prior_var) + "," + fmt(rep.efm) + "," +
                   fmt(bcrb(model)) + "\n";
        }
        ++idx;
    }
    write_text(out / "protocol.csv", csv);
    write_text(out / "manifest.json", manifest("protocol", cfg, seed, threads).dump(2) + "\n");
    return 0;
}

// -------------------------------------------------------------- optimize ---
std::vector<double> embed_params(int n0, int m0, const std::vector<double>& p, int n1, int m1) {
    // Embed class [n0, m0] parameters into [n1, m1] (n1 >= n0, m1 >= m0) by
    // zero twists on the added layers.
    const int l0 = n0 + m0, l1 = n1 + m1;
    std::vector<double> mu(l1, 0.0);
    std::vector<std::pair<double, double>> ax(l1, {0.0, 0.0});
    std::pair<double, double> nr{0, 0}, mr{kPi / 2, kPi / 2};
    if (l0 > 0) {
        for (int j = 0; j < n0; ++j) mu[j] = p[j];
        for (int j = 0; j < m0; ++j) mu[n1 + j] = p[n0 + j];
        std::size_t k = l0;
        for (int j = 1; j < l0; ++j) {
            const int src = j;
            const int dst = (src < n0) ? src : n1 + (src - n0);
            ax[dst] = {p[k], p[k + 1]};
            k += 2;
        }
        nr = {p[k], p[k + 1]};
        mr = {p[k + 2], p[k + 3]};
    } else if (p.size() == 4) {
        nr = {p[0], p[1]};
        mr = {p[2], p[3]};
    }
    std::vector<double> outp;
    for (int j = 0; j < l1; ++j) outp.push_back(mu[j]);
    for (int j = 1; j < l1; ++j) {
        outp.push_back(ax[j].first);
        outp.push_back(ax[j].second);
    }
    outp.push_back(nr.first);
    outp.push_back(nr.second);
    outp.push_back(mr.first);
    outp.push_back(mr.second);
    return outp;
}

int cmd_optimize(const json& cfg, const fs::path& out, uint64_t seed, int threads) {
    check_keys(cfg, "optimize",
               {"n_atoms", "classes", "t_over_z_list", "alpha", "estimator", "budget",
                "mu_box", "seed"});
    const int n_atoms = need(cfg, "optimize", "n_atoms").get<int>();
    const auto classes = need(cfg, "optimize", "classes").get<std::vector<std::vector<int>>>();
    const auto t_list = need(cfg, "optimize", "t_over_z_list").get<std::vector<double>>();
    const NoiseExponent alpha = NoiseExponent::of(cfg.value("alpha", 0));
    const EstimatorKind est = cfg.value("estimator", std::string("optimal_bayes")) == "linear"
                                  ? EstimatorKind::Linear
                                  : EstimatorKind::OptimalBayes;
    (void)threads;

    std::string csv = "t_over_z,class_n,class_m,bmse,efm,region\n";
    json all = json::array();
    for (double t : t_list) {
        const double dphi = width_from_interrogation(t, 1.0, alpha);
        const PriorModel prior = gaussian_prior_auto(dphi, n_atoms);
        std::vector<double> prev_best;
        int prev_n = 0, prev_m = 0;
        for (const auto& cls : classes) {
            if (cls.size() != 2) throw ConfigError("optimize.classes entries must be [n, m]");
            OptimizationTask task;
            task.n_atoms = n_atoms;
            task.n_layers = cls[0];
            task.m_layers = cls[1];
            task.prior = prior;
            task.objective = est;
            task.seed = derive_cli_seed(seed, t, cls[0], cls[1]);
            if (cfg.contains("budget")) task.budget = cfg["budget"].get<uint64_t>();
            if (cfg.contains("mu_box")) {
                const auto box = cfg["mu_box"].get<std::vector<double>>();
                if (box.size() != 2) throw ConfigError("optimize.mu_box must be [lo, hi]");
                task.mu_lo = box[0];
                task.mu_hi = box[1];
            }
            if (!prev_best.empty())
                task.warm_starts.push_back(
                    embed_params(prev_n, prev_m, prev_best, cls[0], cls[1]));
            const CandidateSet set = optimize_protocol(task);
            const Candidate& bestc = set.items.front();
            const double prior_var = prior.variance_on_grid();
            csv += fmt(t) + "," + std::to_string(cls[0]) + "," + std::to_string(cls[1]) +
                   "," + fmt(bestc.objective) + "," +
                   fmt(efm_transform(std::min(bestc.objective, prior_var), prior_var)) + "," +
                   bestc.region + "\n";
            json jt;
            jt["t_over_z"] = t;
            jt["class"] = cls;
            jt["candidates"] = json::array();
            for (const Candidate& c : set.items) {
                json jc;
                jc["protocol"] = json::parse(protocol_to_json(c.spec));
                jc["objective"] = c.objective;
                jc["region"] = c.region;
                jt["candidates"].push_back(jc);
            }
            jt["evaluations"] = set.evaluations;
            jt["population"] = set.population;
            jt["de"] = {{"f", set.de_weight}, {"cr", set.de_crossover}, {"seed", set.seed}};
            all.push_back(jt);
            prev_best = set.items.front().spec.var_params;
            prev_n = cls[0];
            prev_m = cls[1];
        }
    }
    write_text(out / "optimize.csv", csv);
    write_text(out / "candidates.json", all.dump(2) + "\n");
    write_text(out / "manifest.json", manifest("optimize", cfg, seed, threads).dump(2) + "\n");
    return 0;
}

// ----------------------------------------------------------------- clock ---
int cmd_clock(const json& cfg, const fs::path& out, uint64_t seed, int threads) {
    check_keys(cfg, "clock",
               {"protocol", "alpha", "noise", "omega0_z", "t_over_z", "td_over_z", "n_cycles",
                "n_runs", "servo", "prior", "fit_range", "seed"});
    ClockConfig cc;
    cc.protocol = protocol_from_json(need(cfg, "clock", "protocol").dump());
    cc.T = need(cfg, "clock", "t_over_z").get<double>();
    cc.T_D = cfg.value("td_over_z", 0.0);
    cc.noise = noise_from_config(cfg, "clock", cc.T_D);
    cc.n_cycles = need(cfg, "clock", "n_cycles").get<uint64_t>();
    cc.seed = seed;
    const int n_runs = cfg.value("n_runs", 10);
    if (cfg.contains("servo")) {
        const json& s = cfg["servo"];
        check_keys(s, "clock.servo", {"kind", "gain", "history_len", "ridge", "refit_every"});
        const std::string kind = s.value("kind", std::string("linear_predictor"));
        if (kind == "integrator")
            cc.servo.kind = ServoConfig::Kind::Integrator;
        else if (kind == "linear_predictor")
            cc.servo.kind = ServoConfig::Kind::LinearPredictor;
        else
            throw ConfigError("clock.servo.kind must be integrator or linear_predictor");
        cc.servo.gain = s.value("gain", cc.servo.gain);
        cc.servo.history_len = s.value("history_len", cc.servo.history_len);
        cc.servo.ridge = s.value("ridge", cc.servo.ridge);
        cc.servo.refit_every = s.value("refit_every", cc.servo.refit_every);
    }
    if (cfg.contains("fit_range")) {
        const auto fr = cfg["fit_range"].get<std::vector<double>>();
        if (fr.size() != 2) throw ConfigError("clock.fit_range must be [lo, hi] multiples");
        cc.fit_lo_mult = fr[0];
        cc.fit_hi_mult = fr[1];
    }

    const json& pr = need(cfg, "clock", "prior");
    check_keys(pr, "clock.prior",
               {"mode", "delta_phi", "stages", "cycles_per_run", "t_grid"});
    const std::string mode = need(pr, "clock.prior", "mode").get<std::string>();
    const double z = cc.noise.coherence_time(0.0);
    const NoiseExponent alpha = NoiseExponent::of(cfg.value("alpha", 0));
    if (mode == "explicit") {
        cc.prior_width = need(pr, "clock.prior", "delta_phi").get<double>();
    } else if (mode == "power_law") {
        cc.prior_width = combine_widths(width_from_interrogation(cc.T, z, alpha),
                                        deadtime_width(cc.T_D, z, alpha));
    } else if (mode == "iterated") {
        std::vector<double> grid;
        if (pr.contains("t_grid")) {
            grid = pr["t_grid"].get<std::vector<double>>();
        } else {
            for (int i = 0; i < 12; ++i)
                grid.push_back(z * 0.01 * std::pow(100.0, i / 11.0));
        }
        const PriorCurve curve =
            iterate_prior(cc.protocol.n_atoms, cc.noise, grid, pr.value("stages", 3),
                          derive_cli_seed(seed, 0.0, 0, 0), pr.value("cycles_per_run", 100000),
                          threads);
        cc.prior_width = combine_widths(curve.width(cc.T), deadtime_width(cc.T_D, z, alpha));
    } else {
        throw ConfigError("clock.prior.mode must be explicit, power_law or iterated");
    }

    const std::vector<ClockRunResult> runs = run_clock_ensemble(cc, n_runs, threads);

    std::string csv =
        "run,extrapolated_sigma_dimensionless,fringe_hop,first_hop_cycle,phase_std,"
        "skew,excess_kurtosis,flagged\n";
    json flags;
    flags["runs"] = json::array();
    int hopped = 0;
    for (int i = 0; i < n_runs; ++i) {
        const ClockRunResult& r = runs[i];
        const double dimless = r.extrapolated_sigma * cc.noise.omega0 * std::sqrt(z);
        csv += std::to_string(i) + "," + fmt(r.fringe_hop ? 0.0 : dimless) + "," +
               (r.fringe_hop ? "1" : "0") + "," + std::to_string(r.first_hop_cycle) + "," +
               fmt(r.measured_phase_std) + "," + fmt(r.residual_skew) + "," +
               fmt(r.residual_excess_kurtosis) + "," + (r.extrapolation_flagged ? "1" : "0") +
               "\n";
        json jr;
        jr["fringe_hop"] = r.fringe_hop;
        jr["first_hop_cycle"] = r.first_hop_cycle;
        flags["runs"].push_back(jr);
        if (r.fringe_hop) ++hopped;

        std::string adev_csv = "tau_s,sigma,stderr\n";
        for (std::size_t t = 0; t < r.adev.taus.size(); ++t)
            adev_csv += fmt(r.adev.taus[t]) + "," + fmt(r.adev.sigmas[t]) + "," +
                        fmt(r.adev.stderrs[t]) + "\n";
        write_text(out / ("adev_run" + std::to_string(i) + ".csv"), adev_csv);
    }
    flags["prior_width"] = cc.prior_width;
    flags["all_runs_hopped"] = hopped == n_runs;

    std::string hist = "bin_lo,bin_hi,count\n";
    {
        const ClockRunResult& r = runs[0];
        const double w = (r.residual_phase.hi - r.residual_phase.lo) /
                         static_cast<double>(r.residual_phase.counts.size());
        for (std::size_t b = 0; b < r.residual_phase.counts.size(); ++b)
            hist += fmt(r.residual_phase.lo + b * w) + "," +
                    fmt(r.residual_phase.lo + (b + 1) * w) + "," +
                    std::to_string(r.residual_phase.counts[b]) + "\n";
    }
    write_text(out / "residual_histogram.csv", hist);
    write_text(out / "clock.csv", csv);
    write_text(out / "flags.json", flags.dump(2) + "\n");
    write_text(out / "manifest.json", manifest("clock", cfg, seed, threads).dump(2) + "\n");
    return hopped == n_runs ? 4 : 0;
}

// ----------------------------------------------------------------- prior ---
int cmd_prior(const json& cfg, const fs::path& out, uint64_t seed, int threads) {
    check_keys(cfg, "prior",
               {"n_atoms", "alpha", "omega0_z", "t_over_z_grid", "stages", "cycles_per_run",
                "seed"});
    const int n_atoms = need(cfg, "prior", "n_atoms").get<int>();
    const NoiseSpec noise = noise_from_config(cfg, "prior");
    const auto grid = need(cfg, "prior", "t_over_z_grid").get<std::vector<double>>();
    const int stages = cfg.value("stages", 3);
    const uint64_t cycles = cfg.value("cycles_per_run", 100000);
    const double z = noise.coherence_time(0.0);
    std::vector<double> t_abs;
    for (double t : grid) t_abs.push_back(t * z);

    const PriorCurve curve = iterate_prior(n_atoms, noise, t_abs, stages, seed, cycles, threads);

    std::string csv = "t_over_z";
    for (int s = 0; s <= curve.stages(); ++s) csv += ",width_stage" + std::to_string(s);
    for (int s = 0; s < static_cast<int>(curve.stage_widths.size()); ++s)
        csv += ",measured_stage" + std::to_string(s) + ",hop_stage" + std::to_string(s);
    csv += "\n";
    for (std::size_t i = 0; i < curve.t_over_z_grid.size(); ++i) {
        const double t = curve.t_over_z_grid[i];
        csv += fmt(t);
        for (int s = 0; s <= curve.stages(); ++s) csv += "," + fmt(curve.width_at_stage(t * z, s));
        for (std::size_t s = 0; s < curve.stage_widths.size(); ++s)
            csv += "," + fmt(curve.stage_widths[s][i]) + "," +
                   std::to_string(curve.stage_hop_limited[s][i]);
        csv += "\n";
    }
    write_text(out / "prior.csv", csv);
    write_text(out / "manifest.json", manifest("prior", cfg, seed, threads).dump(2) + "\n");
    return 0;
}

// -------------------------------------------------------------- deadtime ---
ScanFamily family_from_name(const std::string& name) {
    if (name == "css_linear") return ScanFamily::CssLinear;
    if (name == "sss_linear") return ScanFamily::SssLinear;
    if (name == "css_bayes") return ScanFamily::CssBayes;
    if (name == "sss_bayes") return ScanFamily::SssBayes;
    if (name == "oqi") return ScanFamily::Oqi;
    throw ConfigError("unknown scan family: " + name);
}

int cmd_deadtime(const json& cfg, const fs::path& out, uint64_t seed, int threads) {
    check_keys(cfg, "deadtime",
               {"families", "n_list", "t_over_z_grid", "td_over_z", "alpha", "seed"});
    const auto families = need(cfg, "deadtime", "families").get<std::vector<std::string>>();
    const auto n_list = need(cfg, "deadtime", "n_list").get<std::vector<int>>();
    const auto grid = need(cfg, "deadtime", "t_over_z_grid").get<std::vector<double>>();
    const double td = need(cfg, "deadtime", "td_over_z").get<double>();
    const NoiseExponent alpha = NoiseExponent::of(cfg.value("alpha", 0));
    (void)threads;

    std::string summary = "family,n,sigma_min,t_min,sigma_lim,t_lim,n_crit\n";
    std::string curves = "family,n,t_over_z,sigma_qpn_ctl,sigma_dick,sigma_tot\n";
    for (const std::string& fam : families) {
        const StabilityScanResult res =
            stability_scan(family_from_name(fam), n_list, grid, td, alpha);
        for (const ScanPerN& per : res.per_n) {
            summary += fam + "," + std::to_string(per.n_atoms) + "," + fmt(per.sigma_min) +
                       "," + fmt(per.t_min) + "," +
                       (res.sigma_lim_defined ? fmt(res.sigma_lim) : "") + "," +
                       (res.sigma_lim_defined ? fmt(res.t_lim) : "") + "," +
                       (res.n_crit >= 0 ? std::to_string(res.n_crit) : "") + "\n";
            for (const ScanCurvePoint& p : per.curve)
                curves += fam + "," + std::to_string(per.n_atoms) + "," + fmt(p.t_over_z) +
                          "," + fmt(p.sigma_qpn_ctl) + "," + fmt(p.sigma_dick) + "," +
                          fmt(p.sigma_tot) + "\n";
        }
    }
    write_text(out / "deadtime.csv", summary);
    write_text(out / "curves.csv", curves);
    write_text(out / "manifest.json", manifest("deadtime", cfg, seed, threads).dump(2) + "\n");
    return 0;
}

// ----------------------------------------------------------------- allan ---
int cmd_allan(const json& cfg, const fs::path& out, uint64_t seed, int threads) {
    check_keys(cfg, "allan",
               {"noise", "alpha", "omega0_z", "t_cycle", "n_cycles", "tau_multiples", "seed"});
    const NoiseSpec noise = noise_from_config(cfg, "allan");
    const double t_cycle = need(cfg, "allan", "t_cycle").get<double>();
    const uint64_t n_cycles = need(cfg, "allan", "n_cycles").get<uint64_t>();
    (void)threads;

    const std::vector<double> trace = generate_trace(noise, t_cycle, n_cycles, seed);
    {
        std::ofstream bin(out / "trace.bin", std::ios::binary);
        if (!bin) throw ConfigError("cannot open trace.bin for writing");
        bin.write(reinterpret_cast<const char*>(trace.data()),
                  static_cast<std::streamsize>(trace.size() * sizeof(double)));
    }
    json sidecar;
    sidecar["t_cycle"] = t_cycle;
    sidecar["n_cycles"] = n_cycles;
    sidecar["seed"] = seed;
    sidecar["noise"] = {{"h_white", noise.h_white},
                        {"h_flicker", noise.h_flicker},
                        {"h_rw", noise.h_rw},
                        {"omega0", noise.omega0}};
    sidecar["format"] = "float64 little-endian column";
    write_text(out / "trace.json", sidecar.dump(2) + "\n");

    std::vector<double> taus;
    if (cfg.contains("tau_multiples")) {
        for (double m : cfg["tau_multiples"].get<std::vector<double>>())
            taus.push_back(m * t_cycle);
    } else {
        for (uint64_t m : log_spaced_multiples(n_cycles / 3, 5))
            taus.push_back(static_cast<double>(m) * t_cycle);
    }
    const AdevCurve curve = allan_deviation(trace, t_cycle, taus);
    std::string csv = "tau_s,sigma,stderr\n";
    for (std::size_t i = 0; i < curve.taus.size(); ++i)
        csv += fmt(curve.taus[i]) + "," + fmt(curve.sigmas[i]) + "," + fmt(curve.stderrs[i]) +
               "\n";
    write_text(out / "adev.csv", csv);
    write_text(out / "manifest.json", manifest("allan", cfg, seed, threads).dump(2) + "\n");
    return 0;
}

}  // namespace

int run_command(const std::string& command, const std::string& config_text,
                const std::string& out_dir, int threads,
                std::optional<uint64_t> seed_override) {
    try {
        json cfg;
        try {
            cfg = json::parse(config_text);
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config parse error: ") + e.what());
        }
        uint64_t seed = 1;
        if (cfg.contains("seed")) seed = cfg["seed"].get<uint64_t>();
        if (seed_override) seed = *seed_override;

        fs::create_directories(out_dir);
        const fs::path out(out_dir);

        if (command == "bounds") return cmd_bounds(cfg, out, seed, threads);
        if (command == "protocol") return cmd_protocol(cfg, out, seed, threads);
        if (command == "optimize") return cmd_optimize(cfg, out, seed, threads);
        if (command == "clock") return cmd_clock(cfg, out, seed, threads);
        if (command == "prior") return cmd_prior(cfg, out, seed, threads);
        if (command == "deadtime") return cmd_deadtime(cfg, out, seed, threads);
        if (command == "allan") return cmd_allan(cfg, out, seed, threads);
        throw ConfigError("unknown subcommand: " + command);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

int run(int argc, const char* const* argv) {
    CLI::App app{"clockforge: Bayesian frequency metrology for collective-spin Ramsey "
                 "protocols"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
    std::optional<uint64_t> seed;

    const std::vector<std::string> names = {"bounds", "protocol", "optimize", "clock",
                                            "prior",  "deadtime", "allan"};
    const std::vector<std::string> descriptions = {
        "OQI/BQCRB/BCRB/piHL tables over N x delta_phi",
        "efm/BMSE for given protocol specs",
        "variational-protocol optimization over a T/Z grid",
        "Monte Carlo runs of the full feedback loop",
        "iterative prior-width calibration",
        "dead-time stability scan (sigma_lim, N_crit)",
        "noise trace generation and Allan deviation utilities"};
    std::vector<CLI::App*> subs;
    for (std::size_t i = 0; i < names.size(); ++i) {
        CLI::App* sub = app.add_subcommand(names[i], descriptions[i]);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--threads", threads, "worker threads");
        uint64_t s = 0;
        sub->add_option("--seed", s, "override the config seed")
            ->each([&seed](const std::string& v) { seed = std::stoull(v); });
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    std::string command;
    for (std::size_t i = 0; i < names.size(); ++i)
        if (subs[i]->parsed()) command = names[i];

    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "config error: cannot read " << config_path << "\n";
        return 2;
    }
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return run_command(command, text, out_dir, threads, seed);
}

}  // namespace clockforge::cli
