#include "hbary/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "hbary/error.hpp"

namespace hbary {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// exp of the Gaussian exponent between every row of `a` and every row of `b`.
std::vector<double> exponent_matrix(const PointSet& a, const PointSet& b, const Bandwidth& h) {
    const std::size_t n = a.size(), m = b.size(), dim = a.dim();
    std::vector<double> e(n * m);
    std::vector<double> inv(dim);
    for (std::size_t d = 0; d < dim; ++d) inv[d] = 1.0 / h[d];
    const bool symmetric = &a == &b;
    for (std::size_t i = 0; i < n; ++i) {
        const auto ai = a.row(i);
        for (std::size_t j = symmetric ? i : 0; j < m; ++j) {
            const auto bj = b.row(j);
            double q = 0.0;
            for (std::size_t d = 0; d < dim; ++d) {
                const double t = (ai[d] - bj[d]) * inv[d];
                q += t * t;
            }
            const double v = std::exp(-0.5 * q);
            e[i * m + j] = v;
            if (symmetric) e[j * m + i] = v;
        }
    }
    return e;
}

}  // namespace

// ---------------------------------------------------------------------------
// standardization

Standardization Standardization::fit(const PointSet& x) {
    Standardization s;
    const std::size_t n = x.size();
    for (std::size_t d = 0; d < x.dim(); ++d) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, d);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (x(i, d) - mean) * (x(i, d) - mean);
        const double sd = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
        s.mean.push_back(mean);
        s.scale.push_back(sd > 0.0 ? sd : 1.0);
    }
    return s;
}

std::vector<double> Standardization::apply(std::span<const double> x) const {
    std::vector<double> out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) out[d] = (x[d] - mean[d]) / scale[d];
    return out;
}

PointSet Standardization::apply(const PointSet& x) const {
    PointSet out(x.size(), x.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t d = 0; d < x.dim(); ++d) out(i, d) = (x(i, d) - mean[d]) / scale[d];
    }
    return out;
}

std::vector<double> Standardization::invert(std::span<const double> s) const {
    std::vector<double> out(s.size());
    for (std::size_t d = 0; d < s.size(); ++d) out[d] = mean[d] + scale[d] * s[d];
    return out;
}

PointSet Standardization::invert(const PointSet& s) const {
    PointSet out(s.size(), s.dim());
    for (std::size_t i = 0; i < s.size(); ++i) {
        for (std::size_t d = 0; d < s.dim(); ++d) out(i, d) = mean[d] + scale[d] * s(i, d);
    }
    return out;
}

// ---------------------------------------------------------------------------

void SolverConfig::validate() const {
    if (!(lambda_scale >= 0.0) || !std::isfinite(lambda_scale)) throw ConfigError("solver: lambda_scale must be >= 0");
    if (!(eta0 > 0.0) || !(eta_max > 0.0)) throw ConfigError("solver: step sizes must be positive");
    if (!(grow > 1.0)) throw ConfigError("solver: grow must exceed 1");
    if (!(shrink > 0.0 && shrink < 1.0)) throw ConfigError("solver: shrink must lie in (0, 1)");
    if (max_iters < 1) throw ConfigError("solver: max_iters must be positive");
    if (!(grad_tol > 0.0)) throw ConfigError("solver: grad_tol must be positive");
    if (!(jump_tol > 0.0)) throw ConfigError("solver: jump_tol must be positive");
}

double GradientReport::max_norm() const noexcept {
    double m = 0.0;
    for (double g : gradient.flat()) m = std::max(m, std::abs(g));
    return m;
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iters: return "max_iters";
        case Termination::step_underflow: return "step_underflow";
    }
    return "unknown";
}

// ---------------------------------------------------------------------------
// problem

BarycenterProblem::BarycenterProblem(const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets,
                                     Bandwidth h_y)
    : h_y_(std::move(h_y)) {
    if (data.size() == 0) throw ValidationError("problem: empty dataset");
    const PointSet raw = data.responses();
    if (h_y_.dim() != raw.dim()) throw ValidationError("problem: h_y dimension mismatch");
    standardization_ = Standardization::fit(raw);
    x_ = standardization_.apply(raw);
    for (const auto& s : subsets) {
        if (!s.penalty_weight) throw ConfigError("problem: penalty weight unset for a subset");
        if (!(*s.penalty_weight >= 0.0)) throw ConfigError("problem: negative penalty weight");
        for (auto i : s.support) {
            if (i >= data.size()) throw ValidationError("problem: subset support out of range");
        }
        Term t;
        for (const auto& id : s.covariate_ids) t.name += (t.name.empty() ? "" : ",") + id;
        t.weight = *s.penalty_weight;
        t.rows = s.support;
        if (t.weight == 0.0) {
            terms_.push_back(std::move(t));
            continue;
        }
        const CovariateKernel kernel(data, s);
        const std::size_t nk = kernel.size();
        if (nk < 2) throw ConfigError("problem: subset {" + t.name + "} has fewer than two rows");
        t.kz.resize(nk * nk);
        for (std::size_t a = 0; a < nk; ++a) {
            double sz = 0.0;
            for (std::size_t b = 0; b < nk; ++b) {
                t.kz[a * nk + b] = kernel.shape(a, b);
                sz += t.kz[a * nk + b];
            }
            t.z_log_sum += std::log(sz);
        }
        terms_.push_back(std::move(t));
    }
}

void BarycenterProblem::check_shape(const PointSet& y) const {
    if (y.size() != x_.size() || y.dim() != x_.dim()) throw ValidationError("problem: Y has the wrong shape");
}

double BarycenterProblem::penalty(const std::vector<double>& e) const {
    const std::size_t n = x_.size();
    double total = 0.0;
    for (const auto& t : terms_) {
        if (t.weight == 0.0) continue;
        const std::size_t nk = t.rows.size();
        double acc = 0.0;
        for (std::size_t a = 0; a < nk; ++a) {
            const double* erow = e.data() + t.rows[a] * n;
            const double* kz = t.kz.data() + a * nk;
            double sy = 0.0, syz = 0.0;
            for (std::size_t b = 0; b < nk; ++b) {
                const double v = erow[t.rows[b]];
                sy += v;
                syz += v * kz[b];
            }
            acc += std::log(syz) - std::log(sy);
        }
        const double nkd = static_cast<double>(nk);
        const double mi = (acc - t.z_log_sum) / nkd + std::log(nkd);
        if (!std::isfinite(mi)) throw NumericalError("objective: non-finite MI term for subset {" + t.name + "}");
        total += t.weight * mi;
    }
    return total;
}

double BarycenterProblem::objective(const PointSet& y) const {
    std::vector<double> kernel;
    return objective(y, kernel);
}

double BarycenterProblem::objective(const PointSet& y, std::vector<double>& kernel) const {
    check_shape(y);
    double cost = 0.0;
    for (std::size_t k = 0; k < y.flat().size(); ++k) {
        const double r = y.flat()[k] - x_.flat()[k];
        cost += 0.5 * r * r;
    }
    cost /= static_cast<double>(x_.size());
    if (!std::isfinite(cost)) throw NumericalError("objective: non-finite transport cost");
    kernel = exponent_matrix(y, y, h_y_);
    return cost + penalty(kernel);
}

double BarycenterProblem::frozen_objective(const PointSet& y, const PointSet& centers) const {
    check_shape(y);
    check_shape(centers);
    double cost = 0.0;
    for (std::size_t k = 0; k < y.flat().size(); ++k) {
        const double r = y.flat()[k] - x_.flat()[k];
        cost += 0.5 * r * r;
    }
    cost /= static_cast<double>(x_.size());
    if (!std::isfinite(cost)) throw NumericalError("objective: non-finite transport cost");
    return cost + penalty(exponent_matrix(y, centers, h_y_));
}

GradientReport BarycenterProblem::gradient_and_hessian(const PointSet& y) const {
    check_shape(y);
    return gradient_and_hessian(y, exponent_matrix(y, y, h_y_));
}

GradientReport BarycenterProblem::gradient_and_hessian(const PointSet& y, const std::vector<double>& e) const {
    check_shape(y);
    const std::size_t n = x_.size(), dim = x_.dim();
    const double inv_n = 1.0 / static_cast<double>(n);
    GradientReport r{PointSet(n, dim), PointSet(n, dim, inv_n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) r.gradient(i, d) = (y(i, d) - x_(i, d)) * inv_n;
    }
    if (std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.weight == 0.0; })) return r;
    if (e.size() != n * n) throw ValidationError("gradient: kernel matrix has the wrong size");

    std::vector<double> h2(dim), h4(dim);
    for (std::size_t d = 0; d < dim; ++d) {
        h2[d] = h_y_[d] * h_y_[d];
        h4[d] = h2[d] * h2[d];
    }
    // Weighted first/second moments of (y_b - y_a) under K^y and K^y K^z.
    std::vector<double> m1y(dim), m2y(dim), m1z(dim), m2z(dim);
    for (const auto& t : terms_) {
        if (t.weight == 0.0) continue;
        const std::size_t nk = t.rows.size();
        const double c = t.weight / static_cast<double>(nk);
        for (std::size_t a = 0; a < nk; ++a) {
            const std::size_t ia = t.rows[a];
            const double* erow = e.data() + ia * n;
            const double* kz = t.kz.data() + a * nk;
            const auto ya = y.row(ia);
            double sy = 0.0, syz = 0.0;
            std::fill(m1y.begin(), m1y.end(), 0.0);
            std::fill(m2y.begin(), m2y.end(), 0.0);
            std::fill(m1z.begin(), m1z.end(), 0.0);
            std::fill(m2z.begin(), m2z.end(), 0.0);
            for (std::size_t b = 0; b < nk; ++b) {
                const std::size_t ib = t.rows[b];
                const double v = erow[ib];
                const double vz = v * kz[b];
                sy += v;
                syz += vz;
                const auto yb = y.row(ib);
                for (std::size_t d = 0; d < dim; ++d) {
                    const double diff = yb[d] - ya[d];
                    m1y[d] += v * diff;
                    m2y[d] += v * diff * diff;
                    m1z[d] += vz * diff;
                    m2z[d] += vz * diff * diff;
                }
            }
            for (std::size_t d = 0; d < dim; ++d) {
                const double mean_y = m1y[d] / sy, mean_z = m1z[d] / syz;
                const double var_y = m2y[d] / sy - mean_y * mean_y;
                const double var_z = m2z[d] / syz - mean_z * mean_z;
                r.gradient(ia, d) += c * (mean_z - mean_y) / h2[d];
                r.hessian_diag(ia, d) += c * (var_z - var_y) / h4[d];
            }
        }
    }
    for (std::size_t k = 0; k < r.gradient.flat().size(); ++k) {
        if (!std::isfinite(r.gradient.flat()[k]) || !std::isfinite(r.hessian_diag.flat()[k])) {
            throw NumericalError("gradient: non-finite entry at row " + std::to_string(k / dim));
        }
    }
    return r;
}

double objective(const PointSet& y, const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets,
                 const Bandwidth& h_y) {
    return BarycenterProblem(data, subsets, h_y).objective(y);
}

GradientReport gradient_and_hessian(const PointSet& y, const HeterogeneousDataset& data,
                                    std::span<const CovariateSubset> subsets, const Bandwidth& h_y) {
    return BarycenterProblem(data, subsets, h_y).gradient_and_hessian(y);
}

std::optional<PointSet> descent_step(const PointSet& y, const GradientReport& report, double eta) {
    if (!(eta > 0.0)) throw ConfigError("descent_step: eta must be positive");
    PointSet out = y;
    auto flat = out.flat();
    const auto g = report.gradient.flat();
    const auto h = report.hessian_diag.flat();
    for (std::size_t k = 0; k < flat.size(); ++k) {
        const double denom = 1.0 + eta * h[k];
        if (!(denom > 0.0)) return std::nullopt;
        flat[k] -= eta * g[k] / denom;
    }
    return out;
}

// ---------------------------------------------------------------------------
// solve

BarycenterSolution solve(const HeterogeneousDataset& data, std::span<const CovariateSubset> subsets,
                         const SolverConfig& config) {
    config.validate();
    BarycenterSolution sol;
    sol.data = data;
    sol.subsets.assign(subsets.begin(), subsets.end());
    for (auto& s : sol.subsets) {
        if (!s.penalty_weight) throw ConfigError("solve: penalty weight unset for a subset");
        s.penalty_weight = *s.penalty_weight * config.lambda_scale;
    }
    const Standardization standardization = Standardization::fit(data.responses());
    sol.h_y = config.h_y ? *config.h_y : silverman_bandwidth(standardization.apply(data.responses()));

    const BarycenterProblem problem(data, sol.subsets, sol.h_y);
    sol.standardization = problem.standardization();
    PointSet y = problem.x();

    std::vector<double> kernel, trial_kernel;
    double current = problem.objective(y, kernel);
    if (!std::isfinite(current)) throw NumericalError("solve: non-finite objective at initialization");

    auto& diag = sol.diagnostics;
    double eta = config.eta0;
    double cap = config.eta_max;
    diag.termination = Termination::max_iters;
    for (std::size_t iter = 0; iter < config.max_iters; ++iter) {
        const auto report = problem.gradient_and_hessian(y, kernel);
        diag.grad_norm = report.max_norm();
        diag.iterations = iter;
        if (diag.grad_norm < config.grad_tol) {
            diag.termination = Termination::converged;
            sol.history.push_back({iter, current, kNaN, eta, diag.grad_norm, false});
            break;
        }
        bool accepted = false;
        double merit = kNaN;
        while (!accepted) {
            if (eta < 1e-12) break;
            const auto trial = descent_step(y, report, eta);
            if (trial) {
                // The frozen-center objective is the function whose exact gradient drives the step.
                double m = std::numeric_limits<double>::infinity();
                try {
                    m = problem.frozen_objective(*trial, y);
                } catch (const NumericalError&) {
                }
                if (m < current) {
                    double next = std::numeric_limits<double>::infinity();
                    try {
                        next = problem.objective(*trial, trial_kernel);
                    } catch (const NumericalError&) {
                    }
                    if (std::isfinite(next) && next <= current + config.jump_tol * std::max(1.0, std::abs(current))) {
                        y = std::move(*trial);
                        kernel.swap(trial_kernel);
                        current = next;
                        merit = m;
                        accepted = true;
                        eta = std::min(config.grow * eta, cap);
                        ++diag.accepted;
                        break;
                    }
                    cap = std::max(config.eta0, eta * config.shrink);
                }
            }
            eta *= config.shrink;
            ++diag.rejected;
        }
        sol.history.push_back({iter, current, merit, eta, diag.grad_norm, accepted});
        if (!accepted) {
            diag.termination = Termination::step_underflow;
            break;
        }
        diag.iterations = iter + 1;
    }
    if (diag.termination == Termination::max_iters) diag.grad_norm = problem.gradient_and_hessian(y, kernel).max_norm();
    diag.objective = current;
    sol.y = std::move(y);
    return sol;
}

// ---------------------------------------------------------------------------
// serialization

namespace {

nlohmann::json row_z_to_json(const Row& r) {
    nlohmann::json z = nlohmann::json::array();
    for (const auto& c : r.z) {
        if (!c) {
            z.push_back(nullptr);
        } else if (const double* d = std::get_if<double>(&*c)) {
            z.push_back(*d);
        } else {
            z.push_back(std::get<std::string>(*c));
        }
    }
    return z;
}

}  // namespace

nlohmann::json to_json(const BarycenterSolution& s) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        const auto& r = s.data.row(i);
        const auto yi = s.y.row(i);
        rows.push_back({{"x", r.x}, {"z", row_z_to_json(r)}, {"y", std::vector<double>(yi.begin(), yi.end())}});
    }
    nlohmann::json subsets = nlohmann::json::array();
    for (const auto& sub : s.subsets) subsets.push_back(to_json(sub));
    const auto& d = s.diagnostics;
    return {{"format", "hbary-solution"},
            {"version", 1},
            {"schema", s.data.schema().to_json()},
            {"standardization", {{"mean", s.standardization.mean}, {"scale", s.standardization.scale}}},
            {"h_y", s.h_y.widths()},
            {"subsets", subsets},
            {"rows", rows},
            {"diagnostics",
             {{"objective", d.objective},
              {"grad_norm", d.grad_norm},
              {"iterations", d.iterations},
              {"accepted", d.accepted},
              {"rejected", d.rejected},
              {"termination", to_string(d.termination)}}}};
}

BarycenterSolution solution_from_json(const nlohmann::json& doc) {
    try {
        if (doc.at("format").get<std::string>() != "hbary-solution") throw CorruptInputError("not a solution document");
        BarycenterSolution s;
        const auto schema = CovariateSchema::from_json(doc.at("schema"));
        const auto& covs = schema.covariates();
        const std::size_t dim = schema.response_dim();
        std::vector<Row> rows;
        std::vector<double> ys;
        for (const auto& jr : doc.at("rows")) {
            Row r;
            r.x = jr.at("x").get<std::vector<double>>();
            const auto& jz = jr.at("z");
            if (jz.size() != covs.size()) throw CorruptInputError("row covariate count mismatch");
            for (std::size_t c = 0; c < covs.size(); ++c) {
                if (jz[c].is_null()) {
                    r.z.emplace_back(std::nullopt);
                } else if (covs[c].kind == CovariateKind::continuous) {
                    r.z.emplace_back(jz[c].get<double>());
                } else {
                    r.z.emplace_back(jz[c].get<std::string>());
                }
            }
            const auto y = jr.at("y").get<std::vector<double>>();
            if (y.size() != dim) throw CorruptInputError("barycenter sample has wrong dimension");
            ys.insert(ys.end(), y.begin(), y.end());
            rows.push_back(std::move(r));
        }
        s.data = HeterogeneousDataset(schema, std::move(rows));
        s.y = PointSet(s.data.size(), dim, std::move(ys));
        s.standardization.mean = doc.at("standardization").at("mean").get<std::vector<double>>();
        s.standardization.scale = doc.at("standardization").at("scale").get<std::vector<double>>();
        if (s.standardization.mean.size() != dim || s.standardization.scale.size() != dim) {
            throw CorruptInputError("standardization has wrong dimension");
        }
        for (double sc : s.standardization.scale) {
            if (!(sc > 0.0)) throw CorruptInputError("standardization scale must be positive");
        }
        s.h_y = Bandwidth(doc.at("h_y").get<std::vector<double>>());
        if (s.h_y.dim() != dim) throw CorruptInputError("h_y has wrong dimension");
        for (const auto& js : doc.at("subsets")) {
            auto sub = subset_from_json(js);
            if (!sub.penalty_weight || !(*sub.penalty_weight >= 0.0)) throw CorruptInputError("subset weight missing");
            for (const auto& id : sub.covariate_ids) {
                if (!schema.index_of(id)) throw CorruptInputError("subset names unknown covariate '" + id + "'");
            }
            for (auto i : sub.support) {
                if (i >= s.data.size()) throw CorruptInputError("subset support out of range");
            }
            s.subsets.push_back(std::move(sub));
        }
        const auto& jd = doc.at("diagnostics");
        s.diagnostics.objective = jd.at("objective").get<double>();
        s.diagnostics.grad_norm = jd.at("grad_norm").get<double>();
        s.diagnostics.iterations = jd.at("iterations").get<std::size_t>();
        s.diagnostics.accepted = jd.at("accepted").get<std::size_t>();
        s.diagnostics.rejected = jd.at("rejected").get<std::size_t>();
        const auto term = jd.at("termination").get<std::string>();
        if (term == "converged") {
            s.diagnostics.termination = Termination::converged;
        } else if (term == "max_iters") {
            s.diagnostics.termination = Termination::max_iters;
        } else if (term == "step_underflow") {
            s.diagnostics.termination = Termination::step_underflow;
        } else {
            throw CorruptInputError("unknown termination '" + term + "'");
        }
        return s;
    } catch (const CorruptInputError&) {
        throw;
    } catch (const nlohmann::json::exception& e) {
        throw CorruptInputError(std::string("invalid solution: ") + e.what());
    } catch (const Error& e) {
        throw CorruptInputError(std::string("invalid solution: ") + e.what());
    }
}

}  // namespace hbary
