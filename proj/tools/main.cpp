// hbary command-line tool.
#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "hbary/dataset.hpp"
#include "hbary/error.hpp"
#include "hbary/eval.hpp"
#include "hbary/parallel.hpp"
#include "hbary/solver.hpp"
#include "hbary/synthgen.hpp"
#include "hbary/transport.hpp"
#include "hbary/tuning.hpp"
#include "run_io.hpp"

using namespace hbary;
using namespace hbary::cli;

namespace {

enum Exit { ok = 0, failure = 1, usage = 2, nonconvergence = 3, unsupported = 4, missing_data = 5, corrupt = 6 };

std::uint64_t default_seed() {
    if (const char* s = std::getenv("HBARY_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw UsageError(std::string("HBARY_SEED is not an integer: ") + s);
        }
    }
    return 0;
}

std::string dataset_csv(const HeterogeneousDataset& d) {
    std::ostringstream ss;
    write_dataset(ss, d);
    return ss.str();
}

HeterogeneousDataset parse_dataset(const std::string& bytes, const CovariateSchema& schema) {
    std::istringstream in(bytes);
    return load_dataset(in, schema);
}

CovariateSchema parse_schema(const std::string& bytes) {
    try {
        return CovariateSchema::from_json(nlohmann::json::parse(bytes));
    } catch (const nlohmann::json::exception& e) {
        throw CorruptInputError(std::string("invalid schema: ") + e.what());
    }
}

BarycenterSolution parse_solution(const std::string& bytes) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(bytes);
    } catch (const nlohmann::json::exception&) {
        throw CorruptInputError("invalid solution");
    }
    return solution_from_json(doc);
}

std::string points_csv(const PointSet& p) {
    std::string out;
    for (std::size_t d = 0; d < p.dim(); ++d) out += (d ? ",x" : "x") + std::to_string(d + 1);
    out += '\n';
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t d = 0; d < p.dim(); ++d) out += (d ? "," : "") + format_double(p(i, d));
        out += '\n';
    }
    return out;
}

// 30 equal bins over the sample range, per response dimension.
std::string histogram_csv(const PointSet& p, std::size_t bins = 30) {
    std::string out = "dim,bin,lo,hi,count\n";
    for (std::size_t d = 0; d < p.dim(); ++d) {
        double lo = p(0, d), hi = p(0, d);
        for (std::size_t i = 1; i < p.size(); ++i) {
            lo = std::min(lo, p(i, d));
            hi = std::max(hi, p(i, d));
        }
        if (hi <= lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double width = (hi - lo) / static_cast<double>(bins);
        std::vector<std::size_t> counts(bins, 0);
        for (std::size_t i = 0; i < p.size(); ++i) {
            auto b = static_cast<std::size_t>((p(i, d) - lo) / width);
            counts[std::min(b, bins - 1)]++;
        }
        for (std::size_t b = 0; b < bins; ++b) {
            out += std::to_string(d + 1) + ',' + std::to_string(b) + ',' +
                   format_double(lo + width * static_cast<double>(b)) + ',' +
                   format_double(lo + width * static_cast<double>(b + 1)) + ',' + std::to_string(counts[b]) + '\n';
        }
    }
    return out;
}

std::string convergence_csv(const BarycenterSolution& sol) {
    std::string out = "iteration,objective,eta,grad_norm,accepted\n";
    for (const auto& r : sol.history) {
        out += std::to_string(r.iteration) + ',' + format_double(r.objective) + ',' + format_double(r.eta) + ',' +
               format_double(r.grad_norm) + ',' + (r.accepted ? "1" : "0") + '\n';
    }
    return out;
}

std::vector<CovariateSubset> weighted_subsets(const HeterogeneousDataset& extended, std::size_t lmax,
                                              std::size_t nmin, Bandwidth& h0) {
    const auto subsets = enumerate_subsets(extended, lmax, nmin);
    const auto st = Standardization::fit(extended.responses());
    h0 = silverman_bandwidth(st.apply(extended.responses()));
    return with_weights(subsets, lambda_weights(extended, subsets, h0));
}

void check_grid(const TuningGrid& g) {
    try {
        g.validate();
    } catch (const ConfigError& e) {
        throw UsageError(e.what());
    }
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
    std::string test;
    std::uint64_t seed = 0;
    std::string out;
    double alpha = 0.0;
};

int cmd_generate(const GenerateArgs& a, Manifest& m) {
    m.seed(a.seed);
    const fs::path dir(a.out);
    ensure_dir(dir);
    GeneratedData g;
    if (a.test.rfind("missing", 0) == 0) {
        g = gen_missing_test(a.test.back() - '0', 80, 80, 20, 20, a.seed);
    } else if (a.test == "structured") {
        g = gen_structured(a.alpha, 40, 100, 20, a.seed);
    } else if (a.test == "extrapolation") {
        g = gen_extrapolation(40, 100, 20, a.seed);
    } else {
        g = gen_hidden_factor(40, 50, 20, a.seed);
    }
    auto put = [&](const std::string& name, const std::string& content) {
        write_file(dir / name, content);
        m.output(dir / name);
    };
    put("data.csv", dataset_csv(g.train));
    put("validation.csv", dataset_csv(g.validation));
    if (g.complete.size()) put("complete.csv", dataset_csv(g.complete));
    put("schema.json", g.train.schema().to_json().dump(2) + "\n");
    put("truth.json", g.truth.descriptor.dump(2) + "\n");
    if (!g.hidden_labels.empty()) {
        std::string s = "row,label\n";
        for (std::size_t i = 0; i < g.hidden_labels.size(); ++i) {
            s += std::to_string(i) + ',' + std::to_string(g.hidden_labels[i]) + '\n';
        }
        put("hidden_labels.csv", s);
    }
    if (!g.targets.empty()) {
        nlohmann::json t = nlohmann::json::array();
        for (const auto& r : g.targets) {
            nlohmann::json o;
            for (const auto& [k, v] : r) o[k] = std::get<double>(v);
            o["true_mean"] = g.truth.f(std::get<double>(r.at("z1")), std::get<double>(r.at("z2")));
            t.push_back(o);
        }
        put("targets.json", t.dump(2) + "\n");
    }
    m.write(dir / "manifest.json");
    std::cout << "wrote " << g.train.size() << " training and " << g.validation.size() << " validation rows to "
              << dir.string() << "\n";
    return ok;
}

struct FitArgs {
    std::string data, schema, val, out;
    std::optional<double> lambda;
    bool tune = false;
    double hy_mult = 1.0;
    std::vector<double> lambdas, hy_mults;
    std::size_t lmax = 2, nmin = 5, max_iters = 5000, jobs = 1;
    std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a, Manifest& m) {
    if (a.tune && a.lambda) throw UsageError("--lambda conflicts with --tune");
    if (!a.tune && !a.lambda) throw UsageError("give --lambda or --tune");
    if (a.tune && a.val.empty()) throw UsageError("--tune needs --val");
    if (a.lambda && !(*a.lambda >= 0.0)) throw UsageError("--lambda must be >= 0");
    if (!(a.hy_mult > 0.0)) throw UsageError("--hy-mult must be > 0");
    m.seed(a.seed);
    const auto schema_bytes = read_file(a.schema), data_bytes = read_file(a.data);
    m.input(a.schema, schema_bytes);
    m.input(a.data, data_bytes);
    const auto schema = parse_schema(schema_bytes);
    const auto extended = extend_covariates(parse_dataset(data_bytes, schema));
    Bandwidth h0;
    const auto subsets = weighted_subsets(extended, a.lmax, a.nmin, h0);

    SolverConfig c;
    c.seed = a.seed;
    c.max_iters = a.max_iters;
    c.lambda_scale = a.lambda.value_or(0.0);
    c.h_y = h0.scaled(a.hy_mult);
    const fs::path dir(a.out);
    ensure_dir(dir);
    if (a.tune) {
        const auto val_bytes = read_file(a.val);
        m.input(a.val, val_bytes);
        const auto validation = parse_dataset(val_bytes, schema);
        TuningGrid grid = TuningGrid::defaults();
        if (!a.lambdas.empty()) grid.lambda_values = a.lambdas;
        if (!a.hy_mults.empty()) grid.h_y_multipliers = a.hy_mults;
        check_grid(grid);
        const auto report = cross_validate(extended, validation, subsets, grid, c, a.jobs);
        std::ostringstream ss;
        write_report_csv(ss, report);
        write_file(dir / "tuning.csv", ss.str());
        m.output(dir / "tuning.csv");
        c.lambda_scale = report.best_entry().lambda;
        c.h_y = h0.scaled(report.best_entry().h_y_multiplier);
    }
    const auto sol = solve(extended, subsets, c);
    write_file(dir / "solution.json", to_json(sol).dump() + "\n");
    write_file(dir / "convergence.csv", convergence_csv(sol));
    m.output(dir / "solution.json");
    m.output(dir / "convergence.csv");
    m.write(dir / "manifest.json");
    const auto& d = sol.diagnostics;
    std::cout << "termination=" << to_string(d.termination) << " iterations=" << d.iterations
              << " accepted=" << d.accepted << " objective=" << format_double(d.objective)
              << " grad_norm=" << format_double(d.grad_norm) << "\n";
    if (!d.converged()) {
        std::cerr << "error: solver did not converge (" << to_string(d.termination) << ", gradient max-norm "
                  << format_double(d.grad_norm) << ")\n";
        return nonconvergence;
    }
    return ok;
}

struct TuneArgs {
    std::string data, schema, val, out;
    std::vector<double> lambdas, hy_mults;
    std::size_t lmax = 2, nmin = 5, jobs = 1;
    std::uint64_t seed = 0;
};

int cmd_tune(const TuneArgs& a, Manifest& m) {
    m.seed(a.seed);
    const auto schema_bytes = read_file(a.schema), data_bytes = read_file(a.data), val_bytes = read_file(a.val);
    m.input(a.schema, schema_bytes);
    m.input(a.data, data_bytes);
    m.input(a.val, val_bytes);
    const auto schema = parse_schema(schema_bytes);
    const auto extended = extend_covariates(parse_dataset(data_bytes, schema));
    const auto validation = parse_dataset(val_bytes, schema);
    Bandwidth h0;
    const auto subsets = weighted_subsets(extended, a.lmax, a.nmin, h0);
    TuningGrid grid = TuningGrid::defaults();
    if (!a.lambdas.empty()) grid.lambda_values = a.lambdas;
    if (!a.hy_mults.empty()) grid.h_y_multipliers = a.hy_mults;
    check_grid(grid);
    SolverConfig c;
    c.seed = a.seed;
    const auto report = cross_validate(extended, validation, subsets, grid, c, a.jobs);
    const fs::path dir(a.out);
    ensure_dir(dir);
    std::ostringstream ss;
    write_report_csv(ss, report);
    write_file(dir / "report.csv", ss.str());
    write_file(dir / "best.json", best_to_json(report).dump(2) + "\n");
    m.output(dir / "report.csv");
    m.output(dir / "best.json");
    m.write(dir / "manifest.json");
    const auto& b = report.best_entry();
    std::cout << "best lambda=" << format_double(b.lambda) << " h_y_multiplier=" << format_double(b.h_y_multiplier)
              << " score=" << format_double(b.score) << "\n";
    return ok;
}

struct SimulateArgs {
    std::string solution, out;
    std::vector<std::string> z;
};

int cmd_simulate(const SimulateArgs& a, Manifest& m) {
    const auto bytes = read_file(a.solution);
    m.input(a.solution, bytes);
    const auto sol = parse_solution(bytes);
    const auto& schema = sol.data.schema();
    CovariateRecord target;
    for (const auto& kv : a.z) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw UsageError("--z expects name=value, got '" + kv + "'");
        const std::string name = kv.substr(0, eq), value = kv.substr(eq + 1);
        const auto idx = schema.index_of(name);
        if (!idx || name == kMissingnessCovariate) {
            std::string valid;
            for (const auto& c : schema.covariates()) {
                if (c.name != kMissingnessCovariate) valid += (valid.empty() ? "" : ", ") + c.name;
            }
            throw UsageError("unknown covariate '" + name + "'; valid names: " + valid);
        }
        if (schema.covariates()[*idx].kind == CovariateKind::continuous) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(value, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != value.size() || !std::isfinite(v)) {
                throw UsageError("covariate '" + name + "' needs a number, got '" + value + "'");
            }
            target[name] = v;
        } else {
            target[name] = value;
        }
    }
    const auto set = simulate_conditional(sol, target);
    const fs::path dir(a.out);
    ensure_dir(dir);
    write_file(dir / "samples.csv", points_csv(set.samples));
    write_file(dir / "histogram.csv", histogram_csv(set.samples));
    auto side = to_json(set);
    side["solution"] = {{"path", a.solution}, {"digest", digest(bytes)}};
    write_file(dir / "samples.json", side.dump(2) + "\n");
    m.output(dir / "samples.csv");
    m.output(dir / "histogram.csv");
    m.output(dir / "samples.json");
    m.write(dir / "manifest.json");
    std::cout << "wrote " << set.samples.size() << " samples conditioned through " << set.subsets.size()
              << " subset(s)\n";
    return ok;
}

struct BenchArgs {
    std::string experiment, methods, out, data, map;
    int seeds = 10;
    std::uint64_t first_seed = 1;
    double alpha = 0.0;
    std::size_t jobs = 1, kl_res = 10;
    std::vector<double> lambdas, hy_mults;
};

int cmd_bench(const BenchArgs& a, Manifest& m) {
    if (a.seeds < 1) throw UsageError("--seeds must be >= 1");
    const auto exp = experiment_from_string(a.experiment);
    if (!exp) throw UsageError("unknown experiment '" + a.experiment + "'");
    BenchmarkSpec spec;
    spec.experiment = *exp;
    spec.alpha = a.alpha;
    spec.kl_resolution = a.kl_res;
    if (!a.lambdas.empty()) spec.fit.grid.lambda_values = a.lambdas;
    if (!a.hy_mults.empty()) spec.fit.grid.h_y_multipliers = a.hy_mults;
    check_grid(spec.fit.grid);
    m.seed(a.first_seed);

    std::string methods = a.methods;
    const bool two_group = *exp == Experiment::structured || *exp == Experiment::extrapolation ||
                           *exp == Experiment::hidden;
    if (methods.empty()) methods = two_group ? "HB,B1" : "HB,B1,B2,B3";
    std::vector<Method> list;
    std::stringstream ms(methods);
    for (std::string tok; std::getline(ms, tok, ',');) {
        const auto mm = method_from_string(tok);
        if (!mm) throw UsageError("unknown method '" + tok + "' (HB, B1, B2, B3)");
        if (two_group && (*mm == Method::B2 || *mm == Method::B3)) {
            throw UsageError(tok + " is not defined for the " + a.experiment + " experiment");
        }
        list.push_back(*mm);
    }

    if (*exp == Experiment::bone) {
        if (a.data.empty() || !fs::exists(a.data)) {
            std::cerr << "error: the bone experiment needs the bone-density CSV.\n"
                         "  Supply it with --data <file.csv>; map its columns with\n"
                         "  --map age=<col>,gender=<col>,spnbmd=<col> if the headers differ.\n";
            return missing_data;
        }
        std::map<std::string, std::string> cols;
        std::stringstream ss(a.map);
        for (std::string tok; std::getline(ss, tok, ',');) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos) throw UsageError("--map expects key=column pairs");
            const auto key = tok.substr(0, eq);
            if (key != "age" && key != "gender" && key != "spnbmd") throw UsageError("--map key must be age, gender or spnbmd");
            cols[key] = tok.substr(eq + 1);
        }
        const auto bytes = read_file(a.data);
        m.input(a.data, bytes);
        std::istringstream in(bytes);
        spec.bone_data = load_bone_csv(in, cols);
    }

    std::vector<std::uint64_t> seeds;
    for (int s = 0; s < a.seeds; ++s) seeds.push_back(a.first_seed + static_cast<std::uint64_t>(s));
    std::vector<BenchmarkResult> results;
    for (auto method : list) {
        auto r = run_benchmark(spec, method, seeds, a.jobs);
        results.insert(results.end(), r.begin(), r.end());
    }

    const fs::path dir(a.out);
    ensure_dir(dir);
    std::ostringstream csv;
    write_benchmark_csv(csv, results);
    write_file(dir / "bench.csv", csv.str());
    nlohmann::json summary{{"experiment", a.experiment}, {"seeds", seeds}, {"results", benchmark_summary(results)}};
    if (*exp == Experiment::structured) summary["alpha"] = a.alpha;
    write_file(dir / "summary.json", summary.dump(2) + "\n");
    m.output(dir / "bench.csv");
    m.output(dir / "summary.json");
    if (*exp == Experiment::hidden) {
        std::string bary = "method,seed,index,y\n";
        for (const auto& r : results) {
            if (r.metric != "mode_count") continue;
            for (std::size_t k = 0; k < r.barycenters.size(); ++k) {
                for (std::size_t i = 0; i < r.barycenters[k].size(); ++i) {
                    bary += to_string(r.method) + ',' + std::to_string(r.seeds[k]) + ',' + std::to_string(i) + ',' +
                            format_double(r.barycenters[k][i]) + '\n';
                }
            }
        }
        write_file(dir / "barycenters.csv", bary);
        m.output(dir / "barycenters.csv");
    }
    m.write(dir / "manifest.json");
    for (const auto& r : results) {
        std::cout << to_string(r.method) << ' ' << r.metric << " mean=" << format_double(r.value) << "\n";
    }
    return ok;
}

struct ExportArgs {
    std::string solution, out;
};

int cmd_export(const ExportArgs& a, Manifest& m) {
    const auto bytes = read_file(a.solution);
    m.input(a.solution, bytes);
    const auto sol = parse_solution(bytes);
    const fs::path out(a.out);
    if (out.has_parent_path()) ensure_dir(out.parent_path());
    write_file(out, points_csv(sol.y));
    nlohmann::json side{{"standardized", true},
                        {"mean", sol.standardization.mean},
                        {"scale", sol.standardization.scale},
                        {"solution", {{"path", a.solution}, {"digest", digest(bytes)}}}};
    write_file(out.string() + ".json", side.dump(2) + "\n");
    m.output(out);
    m.output(out.string() + ".json");
    m.write(out.string() + ".manifest.json");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hierarchical barycenter fitting and conditional simulation"};
    app.require_subcommand(1);
    std::vector<std::string> raw(argv + 1, argv + argc);

    std::uint64_t seed = 0;
    try {
        seed = default_seed();
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage;
    }
    const std::size_t jobs = default_jobs();

    GenerateArgs gen;
    gen.seed = seed;
    auto* g = app.add_subcommand("generate", "Generate a synthetic experiment dataset");
    g->add_option("--test", gen.test, "missing1|missing2|missing3|structured|extrapolation|hidden")
        ->required()
        ->check(CLI::IsMember({"missing1", "missing2", "missing3", "structured", "extrapolation", "hidden"}));
    g->add_option("--seed", gen.seed);
    g->add_option("--alpha", gen.alpha, "Structured experiment coupling")->check(CLI::NonNegativeNumber);
    g->add_option("--out", gen.out)->required();

    FitArgs fit;
    fit.seed = seed;
    fit.jobs = jobs;
    auto* f = app.add_subcommand("fit", "Fit a barycenter");
    f->add_option("--data", fit.data)->required();
    f->add_option("--schema", fit.schema)->required();
    f->add_option("--lambda", fit.lambda, "Penalty scale");
    f->add_flag("--tune", fit.tune, "Choose lambda and h_y by cross-validation");
    f->add_option("--val", fit.val, "Validation CSV for --tune");
    f->add_option("--hy-mult", fit.hy_mult, "Multiple of the Silverman width");
    f->add_option("--lambdas", fit.lambdas)->delimiter(',');
    f->add_option("--hy-mults", fit.hy_mults)->delimiter(',');
    f->add_option("--lmax", fit.lmax)->check(CLI::PositiveNumber);
    f->add_option("--nmin", fit.nmin)->check(CLI::PositiveNumber);
    f->add_option("--max-iters", fit.max_iters)->check(CLI::PositiveNumber);
    f->add_option("--jobs", fit.jobs)->check(CLI::PositiveNumber);
    f->add_option("--seed", fit.seed);
    f->add_option("--out", fit.out)->required();

    TuneArgs tune;
    tune.seed = seed;
    tune.jobs = jobs;
    auto* t = app.add_subcommand("tune", "Cross-validate lambda and h_y");
    t->add_option("--data", tune.data)->required();
    t->add_option("--schema", tune.schema)->required();
    t->add_option("--val", tune.val)->required();
    t->add_option("--lambdas", tune.lambdas)->delimiter(',');
    t->add_option("--hy-mults", tune.hy_mults)->delimiter(',');
    t->add_option("--lmax", tune.lmax)->check(CLI::PositiveNumber);
    t->add_option("--nmin", tune.nmin)->check(CLI::PositiveNumber);
    t->add_option("--jobs", tune.jobs)->check(CLI::PositiveNumber);
    t->add_option("--seed", tune.seed);
    t->add_option("--out", tune.out)->required();

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate the conditional density at a target");
    s->add_option("--solution", sim.solution)->required();
    s->add_option("--z", sim.z, "name=value, repeatable")->required();
    s->add_option("--out", sim.out)->required();

    BenchArgs bench;
    bench.first_seed = seed ? seed : 1;
    bench.jobs = jobs;
    auto* b = app.add_subcommand("bench", "Run a benchmark protocol");
    b->add_option("--experiment", bench.experiment)->required();
    b->add_option("--methods", bench.methods, "Comma-separated HB,B1,B2,B3");
    b->add_option("--seeds", bench.seeds, "Number of seeds");
    b->add_option("--first-seed", bench.first_seed);
    b->add_option("--alpha", bench.alpha)->check(CLI::NonNegativeNumber);
    b->add_option("--data", bench.data, "Bone-density CSV");
    b->add_option("--map", bench.map, "age=<col>,gender=<col>,spnbmd=<col>");
    b->add_option("--kl-res", bench.kl_res)->check(CLI::PositiveNumber);
    b->add_option("--lambdas", bench.lambdas)->delimiter(',');
    b->add_option("--hy-mults", bench.hy_mults)->delimiter(',');
    b->add_option("--jobs", bench.jobs)->check(CLI::PositiveNumber);
    b->add_option("--out", bench.out)->required();

    ExportArgs ex;
    auto* e = app.add_subcommand("export-barycenter", "Write the barycenter samples");
    e->add_option("--solution", ex.solution)->required();
    e->add_option("--out", ex.out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::CallForAllHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return usage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    Manifest manifest(name, raw);
    try {
        if (*g) return cmd_generate(gen, manifest);
        if (*f) return cmd_fit(fit, manifest);
        if (*t) return cmd_tune(tune, manifest);
        if (*s) return cmd_simulate(sim, manifest);
        if (*b) return cmd_bench(bench, manifest);
        if (*e) return cmd_export(ex, manifest);
    } catch (const UsageError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return usage;
    } catch (const ConfigError& err) {
        std::cerr << "usage error: " << err.what() << "\n";
        return usage;
    } catch (const UnsupportedTargetError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return unsupported;
    } catch (const NonConvergenceError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return nonconvergence;
    } catch (const NumericalError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return nonconvergence;
    } catch (const CorruptInputError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return corrupt;
    } catch (const hbary::ParseError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return corrupt;
    } catch (const ValidationError& err) {
        std::cerr << "error: " << err.what() << "\n";
        return corrupt;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return failure;
    }
    return failure;
}
