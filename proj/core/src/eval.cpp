#include "hbary/eval.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "csv.hpp"
#include "hbary/error.hpp"
#include "hbary/parallel.hpp"
#include "hbary/random.hpp"
#include "hbary/transport.hpp"

namespace hbary {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::pair<double, double> mean_sd(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return {mean, v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
}

}  // namespace

double gaussian_kl(double mu_hat, double sigma_hat, double mu, double sigma) {
    if (!(sigma_hat > 0.0) || !(sigma > 0.0)) throw ValidationError("gaussian_kl: standard deviations must be positive");
    const double d = mu - mu_hat;
    return std::log(sigma / sigma_hat) + (sigma_hat * sigma_hat + d * d) / (2.0 * sigma * sigma) - 0.5;
}

double average_kl(const BarycenterSolution& solution, const SyntheticTruth& truth, std::size_t grid_resolution) {
    if (grid_resolution < 1) throw ConfigError("average_kl: grid resolution must be >= 1");
    if (truth.z_support.size() != 2) throw ConfigError("average_kl: truth must be defined on (z1, z2)");
    if (solution.y.dim() != 1) throw ConfigError("average_kl: scalar responses only");
    const TransportMap map(solution);
    const double res = static_cast<double>(grid_resolution);
    const auto [lo1, hi1] = truth.z_support[0];
    const auto [lo2, hi2] = truth.z_support[1];
    double total = 0.0;
    for (std::size_t a = 0; a < grid_resolution; ++a) {
        for (std::size_t b = 0; b < grid_resolution; ++b) {
            const double z1 = lo1 + (hi1 - lo1) * (static_cast<double>(a) + 0.5) / res;
            const double z2 = lo2 + (hi2 - lo2) * (static_cast<double>(b) + 0.5) / res;
            const auto samples = map.simulate(map.prepare({{"z1", z1}, {"z2", z2}}));
            const auto [mu, sd] = mean_sd(samples.flat());
            if (!(sd > 0.0)) {
                throw NumericalError("average_kl: degenerate samples at z=(" + format_double(z1) + "," +
                                     format_double(z2) + ")");
            }
            total += gaussian_kl(mu, sd, truth.f(z1, z2), truth.g(z1, z2));
        }
    }
    return total / (res * res);
}

double avg_loglik(const BarycenterSolution& solution, const HeterogeneousDataset& validation) {
    return validation_log_likelihood(TransportMap(solution), validation);
}

HeterogeneousDataset impute_nearest_neighbor(const HeterogeneousDataset& dataset) {
    const auto& covs = dataset.schema().covariates();
    const std::size_t n = dataset.size();
    std::vector<Row> rows = dataset.rows();
    const auto w = dataset.schema().index_of(kMissingnessCovariate);
    for (std::size_t c = 0; c < covs.size(); ++c) {
        if (w && c == *w) continue;
        std::vector<std::size_t> donors;
        for (std::size_t i = 0; i < n; ++i) {
            if (dataset.row(i).z[c]) donors.push_back(i);
        }
        const bool missing = donors.size() < n;
        if (!missing) continue;
        if (donors.empty()) throw ValidationError("impute: covariate '" + covs[c].name + "' is observed nowhere");
        for (std::size_t i = 0; i < n; ++i) {
            if (dataset.row(i).z[c]) continue;
            const auto& xi = dataset.row(i).x;
            std::size_t best = donors.front();
            double best_d = std::numeric_limits<double>::infinity();
            for (auto j : donors) {
                const auto& xj = dataset.row(j).x;
                double d = 0.0;
                for (std::size_t k = 0; k < xi.size(); ++k) d += (xi[k] - xj[k]) * (xi[k] - xj[k]);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            rows[i].z[c] = dataset.row(best).z[c];
        }
    }
    if (w) {
        const HeterogeneousDataset tmp(dataset.schema(), rows);
        for (std::size_t i = 0; i < n; ++i) rows[i].z[*w] = pattern_label(tmp.pattern(i));
    }
    return HeterogeneousDataset(dataset.schema(), std::move(rows));
}

std::vector<double> zscore(std::span<const double> values) {
    const auto [mean, sd] = mean_sd(values);
    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = sd > 0.0 ? (values[i] - mean) / sd : 0.0;
    return out;
}

ModeSummary detect_modes(std::span<const double> values, std::size_t grid_points) {
    if (values.size() < 2) throw ValidationError("detect_modes: need at least two values");
    if (grid_points < 3) throw ConfigError("detect_modes: grid too coarse");
    ModeSummary s;
    s.bandwidth = silverman_bandwidth(values, 1, values.size());
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it - 3.0 * s.bandwidth, hi = *hi_it + 3.0 * s.bandwidth;
    std::vector<double> grid(grid_points), dens(grid_points, 0.0);
    for (std::size_t g = 0; g < grid_points; ++g) {
        grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(grid_points - 1);
        for (double v : values) {
            const double t = (grid[g] - v) / s.bandwidth;
            dens[g] += std::exp(-0.5 * t * t);
        }
    }
    std::vector<std::size_t> peaks;
    for (std::size_t g = 1; g + 1 < grid_points; ++g) {
        if (dens[g] > dens[g - 1] && dens[g] > dens[g + 1]) peaks.push_back(g);
    }
    s.modes = peaks.size();
    s.mass_ratio = kNaN;
    s.antimode = kNaN;
    if (peaks.size() == 2) {
        const auto it = std::min_element(dens.begin() + static_cast<std::ptrdiff_t>(peaks[0]),
                                         dens.begin() + static_cast<std::ptrdiff_t>(peaks[1]) + 1);
        s.antimode = grid[static_cast<std::size_t>(it - dens.begin())];
        const auto below = std::count_if(values.begin(), values.end(), [&](double v) { return v < s.antimode; });
        const auto above = static_cast<std::ptrdiff_t>(values.size()) - below;
        if (below > 0 && above > 0) {
            s.mass_ratio = static_cast<double>(std::max(below, above)) / static_cast<double>(std::min(below, above));
        }
    }
    return s;
}

TunedFit fit_tuned(const HeterogeneousDataset& train, const HeterogeneousDataset& validation,
                   const FitOptions& options) {
    const auto extended = extend_covariates(train);
    const auto subsets = enumerate_subsets(extended, options.max_size, options.min_support);
    const Standardization st = Standardization::fit(extended.responses());
    const Bandwidth h0 = silverman_bandwidth(st.apply(extended.responses()));
    const auto weighted = with_weights(subsets, lambda_weights(extended, subsets, h0));
    TunedFit out;
    out.report = cross_validate(extended, validation, weighted, options.grid, options.solver, options.jobs);
    const auto& best = out.report.best_entry();
    SolverConfig c = options.solver;
    c.lambda_scale = best.lambda;
    c.h_y = h0.scaled(best.h_y_multiplier);
    out.solution = solve(extended, weighted, c);
    return out;
}

// ---------------------------------------------------------------------------

std::string to_string(Method m) {
    switch (m) {
        case Method::HB: return "HB";
        case Method::B1: return "B1";
        case Method::B2: return "B2";
        case Method::B3: return "B3";
    }
    return "?";
}

std::optional<Method> method_from_string(std::string_view s) {
    for (auto m : {Method::HB, Method::B1, Method::B2, Method::B3}) {
        if (s == to_string(m)) return m;
    }
    return std::nullopt;
}

std::string to_string(Experiment e) {
    switch (e) {
        case Experiment::missing1: return "missing1";
        case Experiment::missing2: return "missing2";
        case Experiment::missing3: return "missing3";
        case Experiment::bone: return "bone";
        case Experiment::structured: return "structured";
        case Experiment::extrapolation: return "extrapolation";
        case Experiment::hidden: return "hidden";
    }
    return "?";
}

std::optional<Experiment> experiment_from_string(std::string_view s) {
    for (auto e : {Experiment::missing1, Experiment::missing2, Experiment::missing3, Experiment::bone,
                   Experiment::structured, Experiment::extrapolation, Experiment::hidden}) {
        if (s == to_string(e)) return e;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// bone data

HeterogeneousDataset load_bone_csv(std::istream& in, const std::map<std::string, std::string>& columns) {
    auto column = [&](const std::string& key) {
        const auto it = columns.find(key);
        return it == columns.end() ? key : it->second;
    };
    std::string line;
    if (!detail::read_line(in, line)) throw ParseError("bone data: missing header");
    const auto header = detail::split_csv(line);
    auto find = [&](const std::string& key) {
        const auto name = column(key);
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("bone data: no column '" + name + "' for " + key);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t ia = find("age"), ig = find("gender"), iy = find("spnbmd");
    std::vector<Row> rows;
    std::size_t row_no = 1;
    while (detail::read_line(in, line)) {
        ++row_no;
        if (line.empty()) continue;
        const auto f = detail::split_csv(line);
        if (f.size() != header.size()) throw ParseError("wrong field count", row_no);
        const auto y = detail::parse_double(f[iy]);
        const auto age = detail::parse_double(f[ia]);
        if (!y || !age) throw ValidationError("bone data: row " + std::to_string(row_no) + ": non-numeric value");
        if (f[ig].empty()) throw ValidationError("bone data: row " + std::to_string(row_no) + ": empty gender");
        Row r;
        r.x = {*y};
        r.z = {CovariateCell(f[ig]), CovariateCell(*age)};
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError("no data rows");
    return HeterogeneousDataset(
        CovariateSchema({{"gender", CovariateKind::categorical}, {"age", CovariateKind::continuous}}, 1),
        std::move(rows));
}

BoneSplit bone_split(const HeterogeneousDataset& data, std::uint64_t seed) {
    constexpr std::size_t n1 = 218, n2 = 218, n3 = 24, nv = 25;
    if (data.size() < n1 + n2 + n3 + nv) throw ValidationError("bone data: need at least 485 rows");
    const auto gi = data.schema().index_of("gender"), ai = data.schema().index_of("age");
    if (!gi || !ai) throw ValidationError("bone data: schema must contain gender and age");
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    std::vector<Row> train, complete, val;
    for (std::size_t p = 0; p < n1 + n2 + n3 + nv; ++p) {
        Row r = data.row(order[p]);
        if (p >= n1 + n2 + n3) {
            val.push_back(std::move(r));
            continue;
        }
        complete.push_back(r);
        if (p < n1) {
            r.z[*ai] = std::nullopt;
        } else if (p < n1 + n2) {
            r.z[*gi] = std::nullopt;
        }
        train.push_back(std::move(r));
    }
    return {HeterogeneousDataset(data.schema(), std::move(train)), HeterogeneousDataset(data.schema(), std::move(complete)),
            HeterogeneousDataset(data.schema(), std::move(val))};
}

// ---------------------------------------------------------------------------
// benchmarks

namespace {

HeterogeneousDataset complete_rows(const HeterogeneousDataset& d) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (d.fully_observed(i)) idx.push_back(i);
    }
    if (idx.empty()) throw ConfigError("B1 needs at least one fully observed row");
    return d.subset(idx);
}

struct SeedValues {
    std::vector<double> values;
    std::vector<double> barycenter;
    Termination termination = Termination::converged;
};

std::vector<std::string> metric_names(Experiment e) {
    switch (e) {
        case Experiment::bone: return {"avg_loglik"};
        case Experiment::extrapolation: return {"abs_mean_error_za", "abs_mean_error_zb"};
        case Experiment::hidden: return {"mode_count", "mode_mass_ratio"};
        default: return {"avg_kl"};
    }
}

SeedValues run_seed(const BenchmarkSpec& spec, Method method, std::uint64_t seed) {
    const auto e = spec.experiment;
    HeterogeneousDataset train, complete, validation;
    GeneratedData gen;
    const bool two_group = e == Experiment::structured || e == Experiment::extrapolation || e == Experiment::hidden;
    if (e == Experiment::missing1 || e == Experiment::missing2 || e == Experiment::missing3) {
        gen = gen_missing_test(static_cast<int>(e) - static_cast<int>(Experiment::missing1) + 1, 80, 80, 20, 20, seed);
    } else if (e == Experiment::structured) {
        gen = gen_structured(spec.alpha, 40, 100, 20, seed);
    } else if (e == Experiment::extrapolation) {
        gen = gen_extrapolation(40, 100, 20, seed);
    } else if (e == Experiment::hidden) {
        gen = gen_hidden_factor(40, 50, 20, seed);
    }
    if (e == Experiment::bone) {
        if (!spec.bone_data) throw ConfigError("bone experiment needs the bone dataset");
        auto s = bone_split(*spec.bone_data, seed);
        train = std::move(s.train);
        complete = std::move(s.complete);
        validation = std::move(s.validation);
    } else {
        train = gen.train;
        complete = gen.complete;
        validation = gen.validation;
    }
    if (two_group && (method == Method::B2 || method == Method::B3)) {
        throw ConfigError(to_string(method) + " is not defined for the " + to_string(e) + " experiment");
    }

    HeterogeneousDataset data;
    switch (method) {
        case Method::HB: data = train; break;
        case Method::B1: data = complete_rows(train); break;
        case Method::B2: data = impute_nearest_neighbor(train); break;
        case Method::B3: data = complete; break;
    }
    const auto fit = fit_tuned(data, validation, spec.fit);
    const auto& sol = fit.solution;
    SeedValues out;
    out.termination = sol.diagnostics.termination;
    if (!sol.diagnostics.converged()) {
        out.values.assign(metric_names(e).size(), kNaN);
        return out;
    }
    switch (e) {
        case Experiment::bone: out.values = {avg_loglik(sol, validation)}; break;
        case Experiment::extrapolation: {
            const TransportMap map(sol);
            for (const auto& t : gen.targets) {
                const auto samples = map.simulate(map.prepare(t));
                const double truth = gen.truth.f(std::get<double>(t.at("z1")), std::get<double>(t.at("z2")));
                out.values.push_back(std::abs(mean_sd(samples.flat()).first - truth));
            }
            break;
        }
        case Experiment::hidden: {
            const auto m = detect_modes(zscore(sol.y.flat()));
            out.values = {static_cast<double>(m.modes), m.mass_ratio};
            out.barycenter.assign(sol.y.flat().begin(), sol.y.flat().end());
            break;
        }
        default: out.values = {average_kl(sol, gen.truth, spec.kl_resolution)};
    }
    return out;
}

}  // namespace

std::vector<BenchmarkResult> run_benchmark(const BenchmarkSpec& spec, Method method,
                                           std::span<const std::uint64_t> seeds, std::size_t jobs) {
    if (seeds.empty()) throw ConfigError("run_benchmark: no seeds");
    std::vector<SeedValues> per(seeds.size());
    parallel_for(seeds.size(), jobs, [&](std::size_t k) { per[k] = run_seed(spec, method, seeds[k]); });
    const auto names = metric_names(spec.experiment);
    std::vector<BenchmarkResult> results;
    for (std::size_t m = 0; m < names.size(); ++m) {
        BenchmarkResult r;
        r.method = method;
        r.metric = names[m];
        r.seeds.assign(seeds.begin(), seeds.end());
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& p : per) {
            r.per_seed.push_back(p.values[m]);
            r.terminations.push_back(p.termination);
            if (spec.experiment == Experiment::hidden) r.barycenters.push_back(p.barycenter);
            if (std::isfinite(p.values[m])) {
                sum += p.values[m];
                ++count;
            }
        }
        r.value = count ? sum / static_cast<double>(count) : kNaN;
        results.push_back(std::move(r));
    }
    return results;
}

void write_benchmark_csv(std::ostream& out, std::span<const BenchmarkResult> results) {
    out << "method,metric,seed,value\n";
    for (const auto& r : results) {
        for (std::size_t k = 0; k < r.seeds.size(); ++k) {
            out << to_string(r.method) << ',' << r.metric << ',' << r.seeds[k] << ',' << format_double(r.per_seed[k])
                << '\n';
        }
    }
}

nlohmann::json benchmark_summary(std::span<const BenchmarkResult> results) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) {
        std::vector<double> finite;
        for (double v : r.per_seed) {
            if (std::isfinite(v)) finite.push_back(v);
        }
        const auto [mean, sd] = finite.empty() ? std::pair{kNaN, kNaN} : mean_sd(finite);
        std::size_t converged = 0;
        for (auto t : r.terminations) converged += t == Termination::converged;
        auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
        rows.push_back({{"method", to_string(r.method)},
                        {"metric", r.metric},
                        {"mean", num(mean)},
                        {"std", num(sd)},
                        {"seeds", r.seeds.size()},
                        {"finite", finite.size()},
                        {"converged", converged}});
    }
    return rows;
}

}  // namespace hbary
