#include "clockforge/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <array>
#include <atomic>
#include <map>
#include <thread>

#include "clockforge/rng.hpp"

namespace clockforge {

namespace {

struct Bounds {
    std::vector<double> lo, hi;
};

// Parameter box: twist strengths in the task box, axis polar angles in
// [0, pi], azimuths in [-pi, pi], rotation pairs likewise.
Bounds parameter_bounds(int n, int m, double mu_lo, double mu_hi) {
    const int total = n + m;
    Bounds b;
    for (int j = 0; j < total; ++j) {
        b.lo.push_back(mu_lo);
        b.hi.push_back(mu_hi);
    }
    for (int j = 1; j < total; ++j) {
        b.lo.push_back(0.0);
        b.hi.push_back(kPi);  // axis polar
        b.lo.push_back(-kPi);
        b.hi.push_back(kPi);  // axis azimuth
    }
    for (int r = 0; r < 2; ++r) {
        b.lo.push_back(0.0);
        b.hi.push_back(kPi);  // rotation polar
        b.lo.push_back(-kPi);
        b.hi.push_back(kPi);  // rotation azimuth
    }
    return b;
}

void clip(std::vector<double>& x, const Bounds& b) {
    for (std::size_t j = 0; j < x.size(); ++j) x[j] = std::clamp(x[j], b.lo[j], b.hi[j]);
}

double compass_polish(std::vector<double>& x, const Bounds& b,
                      const std::function<double(const std::vector<double>&)>& f,
                      double initial_step, double tol, uint64_t* evals,
                      uint64_t max_evals = 0) {
    double best = f(x);
    ++*evals;
    uint64_t used = 1;
    const std::size_t d = x.size();
    std::vector<double> scale(d);
    for (std::size_t j = 0; j < d; ++j) scale[j] = std::max(b.hi[j] - b.lo[j], 1e-6);
    double step = initial_step;
    while (step > tol && (max_evals == 0 || used < max_evals)) {
        bool improved = false;
        for (std::size_t j = 0; j < d; ++j) {
            for (const double dir : {+1.0, -1.0}) {
                std::vector<double> trial = x;
                trial[j] = std::clamp(trial[j] + dir * step * scale[j], b.lo[j], b.hi[j]);
                if (trial[j] == x[j]) continue;
                const double v = f(trial);
                ++*evals;
                ++used;
                if (v < best) {
                    best = v;
                    x = std::move(trial);
                    improved = true;
                    break;
                }
            }
            if (max_evals != 0 && used >= max_evals) break;
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

}  // namespace

double evaluate_objective(int n_atoms, int n_layers, int m_layers,
                          const std::vector<double>& params, const PriorModel& prior,
                          EstimatorKind objective) {
    const ProtocolSpec spec =
        ProtocolSpec::variational(n_atoms, n_layers, m_layers, params, objective);
    return bmse_objective(spec, prior, objective);
}

double polish_candidate(int n_atoms, int n_layers, int m_layers, std::vector<double>& params,
                        const PriorModel& prior, EstimatorKind objective, bool freeze_twists,
                        double tol) {
    Bounds b = parameter_bounds(n_layers, m_layers, -2 * kPi, 2 * kPi);
    if (freeze_twists)
        for (int j = 0; j < std::min<int>(2, n_layers + m_layers); ++j)
            b.lo[j] = b.hi[j] = params[j];
    const auto f = [&](const std::vector<double>& x) {
        return evaluate_objective(n_atoms, n_layers, m_layers, x, prior, objective);
    };
    uint64_t evals = 0;
    return compass_polish(params, b, f, 0.02, tol, &evals);
}

std::string region_label(double mu1, double mu2) {
    if (std::abs(mu1) <= kPi && std::abs(mu2) <= kPi) {
        if (mu1 >= 0 && mu2 >= 0) return "I";
        if (mu1 < 0 && mu2 >= 0) return "II";
        if (mu1 < 0 && mu2 < 0) return "III";
        return "IV";
    }
    if (std::abs(mu1) > kPi) return "V";
    return mu2 > kPi ? "VI" : "VII";
}

std::vector<double> mirrored_params(const ProtocolSpec& spec) {
    require(spec.kind == ProtocolSpec::Kind::Variational, "mirroring needs a variational spec");
    const int total = spec.var_n + spec.var_m;
    std::vector<double> p = spec.var_params;
    for (int j = 0; j < total; ++j) p[j] = -p[j];  // twist strengths
    // Azimuths flip sign: axis pairs (theta, phi) for j >= 2, then both
    // rotation pairs.
    std::size_t k = total;
    for (int j = 1; j < total; ++j) {
        p[k + 1] = -p[k + 1];
        k += 2;
    }
    p[k + 1] = -p[k + 1];
    p[k + 3] = -p[k + 3];
    return p;
}

CandidateSet optimize_protocol(const OptimizationTask& task) {
    require(task.n_layers >= 0 && task.m_layers >= 0, "layer counts must be non-negative");
    require(task.mu_lo < task.mu_hi, "twist box is empty");
    const int d = ProtocolSpec::variational_param_count(task.n_layers, task.m_layers);
    const Bounds bounds = parameter_bounds(task.n_layers, task.m_layers, task.mu_lo, task.mu_hi);
    const int pop = 15 * d;
    const uint64_t budget = task.budget ? task.budget : static_cast<uint64_t>(pop) * 200;
    require(budget >= static_cast<uint64_t>(pop) * 2, "budget below two populations");
    const double de_f = 0.7, de_cr = 0.9;

    Rng rng = Rng::stream(task.seed, 0x0de);
    const auto f = [&](const std::vector<double>& x) {
        return evaluate_objective(task.n_atoms, task.n_layers, task.m_layers, x, task.prior,
                                  task.objective);
    };

    std::vector<std::vector<double>> xs(pop, std::vector<double>(d));
    std::vector<double> fx(pop);
    for (int i = 0; i < pop; ++i) {
        for (int j = 0; j < d; ++j)
            xs[i][j] = bounds.lo[j] + (bounds.hi[j] - bounds.lo[j]) * rng.uniform01();
        if (i < static_cast<int>(task.warm_starts.size())) {
            require(static_cast<int>(task.warm_starts[i].size()) == d,
                    "warm start has wrong dimension");
            xs[i] = task.warm_starts[i];
            clip(xs[i], bounds);
        }
        fx[i] = f(xs[i]);
    }
    uint64_t evals = pop;

    uint64_t last_improvement_gen = 0, gen = 0;
    double best_seen = *std::min_element(fx.begin(), fx.end());
    std::vector<double> best_per_gen = {best_seen};
    std::vector<double> trial(d);
    while (evals + pop <= budget) {
        ++gen;
        for (int i = 0; i < pop; ++i) {
            int r1, r2, r3;
            do r1 = static_cast<int>(rng.next_u64() % pop); while (r1 == i);
            do r2 = static_cast<int>(rng.next_u64() % pop); while (r2 == i || r2 == r1);
            do r3 = static_cast<int>(rng.next_u64() % pop); while (r3 == i || r3 == r1 || r3 == r2);
            const int jrand = static_cast<int>(rng.next_u64() % d);
            for (int j = 0; j < d; ++j) {
                const bool cross = rng.uniform01() < de_cr || j == jrand;
                trial[j] = cross ? xs[r1][j] + de_f * (xs[r2][j] - xs[r3][j]) : xs[i][j];
                trial[j] = std::clamp(trial[j], bounds.lo[j], bounds.hi[j]);
            }
            const double v = f(trial);
            ++evals;
            if (v <= fx[i]) {
                xs[i] = trial;
                fx[i] = v;
                if (v < best_seen) {
                    best_seen = v;
                    last_improvement_gen = gen;
                }
            }
        }
        best_per_gen.push_back(best_seen);
    }

    // Polish the best distinct members.
    std::vector<int> order(pop);
    for (int i = 0; i < pop; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<std::pair<double, std::vector<double>>> polished;
    for (int rank = 0; rank < pop && polished.size() < 4; ++rank) {
        const int i = order[rank];
        bool near = false;
        for (const auto& [pv, px] : polished) {
            double dist = 0;
            for (int j = 0; j < d; ++j) dist += std::abs(px[j] - xs[i][j]);
            if (dist < 0.3 || std::abs(pv - fx[i]) < 1e-12) near = true;
        }
        if (near) continue;
        std::vector<double> x = xs[i];
        const double v = compass_polish(x, bounds, f, 0.02, 1e-10, &evals);
        polished.emplace_back(v, std::move(x));
    }
    std::sort(polished.begin(), polished.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    CandidateSet out;
    out.evaluations = evals;
    out.population = pop;
    out.seed = task.seed;
    out.best_per_generation = std::move(best_per_gen);
    out.budget_exhausted = gen < 20 || (gen - last_improvement_gen) < 3;
    for (auto& [v, x] : polished) {
        Candidate c;
        c.spec = ProtocolSpec::variational(task.n_atoms, task.n_layers, task.m_layers, x,
                                           task.objective);
        c.objective = v;
        if (task.n_layers + task.m_layers >= 2) c.region = region_label(x[0], x[1]);
        out.items.push_back(std::move(c));
    }
    return out;
}

CandidateSet landscape_scan(int n_atoms, const PriorModel& prior, int grid_resolution,
                            EstimatorKind objective, uint64_t seed, int threads) {
    require(grid_resolution >= 64, "landscape grid must be at least 64 x 64");
    const int n_layers = 1, m_layers = 1;
    const int d = ProtocolSpec::variational_param_count(n_layers, m_layers);
    const Bounds full = parameter_bounds(n_layers, m_layers, -2 * kPi, 2 * kPi);

    const auto f_full = [&](const std::vector<double>& x) {
        return evaluate_objective(n_atoms, n_layers, m_layers, x, prior, objective);
    };

    struct RegionBest {
        double value = 0;
        std::vector<double> params;
        bool set = false;
    };

    // Fixed partition into row strips keeps the result independent of the
    // worker count; each strip runs its own warm-start chain.
    constexpr int kStrips = 4;
    std::array<std::map<std::string, RegionBest>, kStrips> strip_best;
    std::array<uint64_t, kStrips> strip_evals{};

    const auto run_strip = [&](int strip) {
        Rng rng = Rng::stream(seed, 0x1a11d + strip);
        const int row_lo = grid_resolution * strip / kStrips;
        const int row_hi = grid_resolution * (strip + 1) / kStrips;
        std::vector<double> prev_row_start, prev_cell;
        uint64_t evals = 0;
        for (int i = row_lo; i < row_hi; ++i) {
            const double mu1 = -2 * kPi + 4 * kPi * (i + 0.5) / grid_resolution;
            for (int j = 0; j < grid_resolution; ++j) {
                const double mu2 = -2 * kPi + 4 * kPi * (j + 0.5) / grid_resolution;
                std::vector<double> x(d);
                if (j > 0 && !prev_cell.empty())
                    x = prev_cell;  // neighbour warm start
                else if (!prev_row_start.empty())
                    x = prev_row_start;
                else
                    for (int q = 2; q < d; ++q)
                        x[q] = full.lo[q] + (full.hi[q] - full.lo[q]) * rng.uniform01();
                x[0] = mu1;
                x[1] = mu2;

                Bounds cell = full;
                cell.lo[0] = cell.hi[0] = mu1;
                cell.lo[1] = cell.hi[1] = mu2;
                const bool cold = prev_cell.empty();
                const double v = compass_polish(x, cell, f_full, cold ? 0.08 : 0.02, 1e-5,
                                                &evals, cold ? 2000 : 260);
                prev_cell = x;
                if (j == 0) prev_row_start = x;

                auto& rb = strip_best[strip][region_label(mu1, mu2)];
                if (!rb.set || v < rb.value) {
                    rb.set = true;
                    rb.value = v;
                    rb.params = x;
                }
            }
        }
        strip_evals[strip] = evals;
    };

    threads = std::clamp(threads, 1, kStrips);
    if (threads == 1) {
        for (int s = 0; s < kStrips; ++s) run_strip(s);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (int s = next.fetch_add(1); s < kStrips; s = next.fetch_add(1))
                    run_strip(s);
            });
        for (auto& th : pool) th.join();
    }

    std::map<std::string, RegionBest> best;
    for (const auto& sb : strip_best)
        for (const auto& [region, rb] : sb) {
            auto& agg = best[region];
            if (!agg.set || rb.value < agg.value) agg = rb;
        }

    CandidateSet out;
    for (uint64_t e : strip_evals) out.evaluations += e;
    out.population = grid_resolution * grid_resolution;
    out.seed = seed;
    for (auto& [region, rb] : best) {
        if (!rb.set) continue;
        Candidate c;
        c.spec = ProtocolSpec::variational(n_atoms, n_layers, m_layers, rb.params, objective);
        c.objective = rb.value;
        c.region = region;
        out.items.push_back(std::move(c));
    }
    std::sort(out.items.begin(), out.items.end(),
              [](const Candidate& a, const Candidate& b) { return a.objective < b.objective; });
    return out;
}

}  // namespace clockforge
