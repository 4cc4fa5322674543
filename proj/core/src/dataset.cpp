#include "hbary/dataset.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include <nlohmann/json.hpp>

#include "hbary/error.hpp"
#include "hbary/kernels.hpp"
#include "hbary/random.hpp"
#include "csv.hpp"

namespace hbary {

// ---------------------------------------------------------------------------
// schema

CovariateSchema::CovariateSchema(std::vector<CovariateSpec> covariates, std::size_t response_dim)
    : covariates_(std::move(covariates)), response_dim_(response_dim) {
    if (response_dim_ < 1) throw ValidationError("schema: response_dim must be >= 1");
    std::set<std::string, std::less<>> seen;
    for (const auto& c : covariates_) {
        if (c.name.empty()) throw ValidationError("schema: empty covariate name");
        if (!seen.insert(c.name).second) throw ValidationError("schema: duplicate covariate '" + c.name + "'");
    }
}

CovariateSchema CovariateSchema::from_json(const nlohmann::json& doc) {
    try {
        std::vector<CovariateSpec> covs;
        for (const auto& c : doc.at("covariates")) {
            const auto kind = c.at("kind").get<std::string>();
            CovariateSpec spec{c.at("name").get<std::string>(), CovariateKind::continuous};
            if (kind == "categorical") {
                spec.kind = CovariateKind::categorical;
            } else if (kind != "continuous") {
                throw ParseError("schema: unknown covariate kind '" + kind + "'");
            }
            covs.push_back(std::move(spec));
        }
        const auto d = doc.at("response_dim").get<long long>();
        if (d < 1) throw ValidationError("schema: response_dim must be >= 1");
        return CovariateSchema(std::move(covs), static_cast<std::size_t>(d));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("schema: ") + e.what());
    }
}

nlohmann::json CovariateSchema::to_json() const {
    nlohmann::json covs = nlohmann::json::array();
    for (const auto& c : covariates_) {
        covs.push_back({{"name", c.name},
                        {"kind", c.kind == CovariateKind::continuous ? "continuous" : "categorical"}});
    }
    return {{"response_dim", response_dim_}, {"covariates", covs}};
}

std::optional<std::size_t> CovariateSchema::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < covariates_.size(); ++i) {
        if (covariates_[i].name == name) return i;
    }
    return std::nullopt;
}

const CovariateSpec& CovariateSchema::at(std::string_view name) const {
    const auto idx = index_of(name);
    if (!idx) throw ValidationError("unknown covariate '" + std::string(name) + "'");
    return covariates_[*idx];
}

// ---------------------------------------------------------------------------
// dataset

HeterogeneousDataset::HeterogeneousDataset(CovariateSchema schema, std::vector<Row> rows)
    : schema_(std::move(schema)), rows_(std::move(rows)) {
    const auto& covs = schema_.covariates();
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        const auto& r = rows_[i];
        if (r.x.size() != schema_.response_dim()) {
            throw ValidationError("row " + std::to_string(i + 1) + ": response has wrong dimension");
        }
        for (double v : r.x) {
            if (!std::isfinite(v)) throw ValidationError("row " + std::to_string(i + 1) + ": non-finite response");
        }
        if (r.z.size() != covs.size()) {
            throw ValidationError("row " + std::to_string(i + 1) + ": covariate count mismatch");
        }
        for (std::size_t c = 0; c < covs.size(); ++c) {
            if (!r.z[c]) continue;
            if (covs[c].kind == CovariateKind::continuous) {
                const double* v = std::get_if<double>(&*r.z[c]);
                if (!v || !std::isfinite(*v)) {
                    throw ValidationError("row " + std::to_string(i + 1) + ": covariate '" + covs[c].name +
                                          "' must be a finite number");
                }
            } else {
                const auto* s = std::get_if<std::string>(&*r.z[c]);
                if (!s || s->empty()) {
                    throw ValidationError("row " + std::to_string(i + 1) + ": covariate '" + covs[c].name +
                                          "' must be a non-empty category");
                }
            }
        }
    }
}

bool HeterogeneousDataset::has_missingness_factor() const {
    return schema_.index_of(kMissingnessCovariate).has_value();
}

bool HeterogeneousDataset::fully_observed(std::size_t i) const {
    const auto& r = rows_.at(i);
    return std::all_of(r.z.begin(), r.z.end(), [](const auto& c) { return c.has_value(); });
}

std::vector<std::string> HeterogeneousDataset::pattern(std::size_t i) const {
    std::vector<std::string> out;
    const auto& r = rows_.at(i);
    for (std::size_t c = 0; c < r.z.size(); ++c) {
        const auto& name = schema_.covariates()[c].name;
        if (r.z[c] && name != kMissingnessCovariate) out.push_back(name);
    }
    return out;
}

CovariateRecord HeterogeneousDataset::record(std::size_t i) const {
    CovariateRecord out;
    const auto& r = rows_.at(i);
    for (std::size_t c = 0; c < r.z.size(); ++c) {
        if (r.z[c]) out.emplace(schema_.covariates()[c].name, *r.z[c]);
    }
    return out;
}

PointSet HeterogeneousDataset::responses() const {
    PointSet out(rows_.size(), schema_.response_dim());
    for (std::size_t i = 0; i < rows_.size(); ++i) std::copy(rows_[i].x.begin(), rows_[i].x.end(), out.row(i).begin());
    return out;
}

HeterogeneousDataset HeterogeneousDataset::subset(std::span<const std::size_t> indices) const {
    std::vector<Row> out;
    out.reserve(indices.size());
    for (auto i : indices) out.push_back(rows_.at(i));
    return HeterogeneousDataset(schema_, std::move(out));
}

// ---------------------------------------------------------------------------
// subsets

nlohmann::json to_json(const CovariateSubset& s) {
    nlohmann::json bw = nlohmann::json::array();
    for (const auto& b : s.z_bandwidths) bw.push_back(b ? nlohmann::json(*b) : nlohmann::json(nullptr));
    return {{"covariates", s.covariate_ids},
            {"support", s.support},
            {"z_bandwidths", bw},
            {"penalty_weight", s.penalty_weight ? nlohmann::json(*s.penalty_weight) : nlohmann::json(nullptr)}};
}

CovariateSubset subset_from_json(const nlohmann::json& doc) {
    CovariateSubset s;
    s.covariate_ids = doc.at("covariates").get<std::vector<std::string>>();
    s.support = doc.at("support").get<std::vector<std::size_t>>();
    for (const auto& b : doc.at("z_bandwidths")) {
        s.z_bandwidths.push_back(b.is_null() ? std::nullopt : std::optional<double>(b.get<double>()));
    }
    const auto& w = doc.at("penalty_weight");
    if (!w.is_null()) s.penalty_weight = w.get<double>();
    if (s.covariate_ids.empty() || s.z_bandwidths.size() != s.covariate_ids.size()) {
        throw CorruptInputError("subset: inconsistent covariate/bandwidth lists");
    }
    return s;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_double(double value) {
    std::array<char, 32> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

std::string format_value(const CovariateValue& value) {
    if (const double* d = std::get_if<double>(&value)) return format_double(*d);
    return std::get<std::string>(value);
}

HeterogeneousDataset load_dataset(std::istream& in, const CovariateSchema& schema) {
    const std::size_t d = schema.response_dim();
    const auto& covs = schema.covariates();

    std::string line;
    if (!detail::read_line(in, line)) throw ParseError("missing header");
    const auto header = detail::split_csv(line);
    std::vector<std::string> expected;
    for (std::size_t k = 0; k < d; ++k) expected.push_back("x" + std::to_string(k + 1));
    for (const auto& c : covs) expected.push_back(c.name);
    if (header != expected) {
        std::string want;
        for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
        throw ParseError("header does not match schema; expected '" + want + "'");
    }

    std::vector<Row> rows;
    std::size_t row_no = 0;
    while (detail::read_line(in, line)) {
        if (line.empty()) continue;
        ++row_no;
        const auto cells = detail::split_csv(line);
        if (cells.size() != expected.size()) {
            throw ParseError("expected " + std::to_string(expected.size()) + " fields, found " +
                                 std::to_string(cells.size()),
                             row_no);
        }
        Row r;
        r.x.resize(d);
        for (std::size_t k = 0; k < d; ++k) {
            const auto v = detail::parse_double(cells[k]);
            if (!v || !std::isfinite(*v)) {
                throw ValidationError("row " + std::to_string(row_no) + ": invalid response value '" + cells[k] +
                                      "' in column x" + std::to_string(k + 1));
            }
            r.x[k] = *v;
        }
        r.z.resize(covs.size());
        for (std::size_t c = 0; c < covs.size(); ++c) {
            const auto& cell = cells[d + c];
            if (cell.empty()) continue;
            if (covs[c].kind == CovariateKind::continuous) {
                const auto v = detail::parse_double(cell);
                if (!v || !std::isfinite(*v)) {
                    throw ValidationError("row " + std::to_string(row_no) + ": invalid value '" + cell +
                                          "' for covariate '" + covs[c].name + "'");
                }
                r.z[c] = *v;
            } else {
                r.z[c] = cell;
            }
        }
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ParseError("no data rows");
    return HeterogeneousDataset(schema, std::move(rows));
}

void write_dataset(std::ostream& out, const HeterogeneousDataset& dataset) {
    const auto& schema = dataset.schema();
    std::vector<std::string> header;
    for (std::size_t k = 0; k < schema.response_dim(); ++k) header.push_back("x" + std::to_string(k + 1));
    for (const auto& c : schema.covariates()) header.push_back(c.name);
    detail::write_csv_row(out, header);
    std::vector<std::string> cells;
    for (const auto& r : dataset.rows()) {
        cells.clear();
        for (double v : r.x) cells.push_back(format_double(v));
        for (const auto& z : r.z) cells.push_back(z ? format_value(*z) : std::string());
        detail::write_csv_row(out, cells);
    }
}

// ---------------------------------------------------------------------------
// covariate extension

std::string pattern_label(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    // FNV-1a over the canonical, separator-joined name set.
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& n : names) {
        for (unsigned char c : n) mix(c);
        mix(0x1f);
    }
    char buf[24];
    std::snprintf(buf, sizeof buf, "p%016llx", static_cast<unsigned long long>(h));
    return buf;
}

HeterogeneousDataset extend_covariates(const HeterogeneousDataset& dataset) {
    if (dataset.has_missingness_factor()) return dataset;
    auto covs = dataset.schema().covariates();
    covs.push_back({std::string(kMissingnessCovariate), CovariateKind::categorical});
    CovariateSchema schema(std::move(covs), dataset.schema().response_dim());
    std::vector<Row> rows = dataset.rows();
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i].z.emplace_back(pattern_label(dataset.pattern(i)));
    return HeterogeneousDataset(std::move(schema), std::move(rows));
}

// ---------------------------------------------------------------------------
// subset enumeration

namespace {

using IndexSet = std::vector<std::size_t>;  // sorted covariate indices

IndexSet intersect(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

std::vector<CovariateSubset> enumerate_subsets(const HeterogeneousDataset& dataset, std::size_t max_size,
                                               std::size_t min_support) {
    if (!dataset.has_missingness_factor()) {
        throw ConfigError("enumerate_subsets: apply covariate extension first");
    }
    if (max_size < 1 || min_support < 1) throw ConfigError("enumerate_subsets: L_max and N_min must be >= 1");
    const auto& schema = dataset.schema();
    const auto& covs = schema.covariates();
    const std::size_t w_index = *schema.index_of(kMissingnessCovariate);
    const std::size_t n = dataset.size();

    std::set<IndexSet> patterns;
    for (std::size_t i = 0; i < n; ++i) {
        IndexSet p;
        for (std::size_t c = 0; c < covs.size(); ++c) {
            if (c != w_index && dataset.rows()[i].z[c]) p.push_back(c);
        }
        if (!p.empty()) patterns.insert(std::move(p));
    }

    std::set<IndexSet> candidates;
    for (auto a = patterns.begin(); a != patterns.end(); ++a) {
        candidates.insert(*a);
        for (auto b = std::next(a); b != patterns.end(); ++b) {
            auto common = intersect(*a, *b);
            if (!common.empty()) candidates.insert(std::move(common));
        }
    }
    for (std::size_t c = 0; c < covs.size(); ++c) candidates.insert(IndexSet{c});

    // Kernel MI needs at least two points.
    const std::size_t support_floor = std::max<std::size_t>(min_support, 2);

    std::vector<IndexSet> ordered(candidates.begin(), candidates.end());
    std::stable_sort(ordered.begin(), ordered.end(), [w_index](const IndexSet& a, const IndexSet& b) {
        const bool aw = a == IndexSet{w_index};
        const bool bw = b == IndexSet{w_index};
        if (aw != bw) return bw;
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });

    std::vector<CovariateSubset> out;
    for (const auto& cand : ordered) {
        if (cand.size() > max_size) continue;
        CovariateSubset s;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& z = dataset.rows()[i].z;
            if (std::all_of(cand.begin(), cand.end(), [&z](std::size_t c) { return z[c].has_value(); })) {
                s.support.push_back(i);
            }
        }
        if (s.support.size() < support_floor) continue;
        std::size_t n_continuous = 0;
        for (auto c : cand) n_continuous += covs[c].kind == CovariateKind::continuous;
        std::vector<double> values;
        for (auto c : cand) {
            s.covariate_ids.push_back(covs[c].name);
            if (covs[c].kind == CovariateKind::categorical) {
                s.z_bandwidths.emplace_back(std::nullopt);
                continue;
            }
            values.clear();
            for (auto i : s.support) values.push_back(std::get<double>(*dataset.rows()[i].z[c]));
            s.z_bandwidths.emplace_back(silverman_bandwidth(values, n_continuous, s.support.size()));
        }
        out.push_back(std::move(s));
    }
    if (out.empty()) {
        throw ConfigError("no covariate subset satisfies L_max=" + std::to_string(max_size) +
                          ", N_min=" + std::to_string(min_support));
    }
    return out;
}

// ---------------------------------------------------------------------------
// train / validation split

Split split(const HeterogeneousDataset& dataset, std::size_t validation_count, std::uint64_t seed) {
    const std::size_t n = dataset.size();
    if (validation_count == 0 || validation_count >= n) {
        throw ConfigError("split: validation count must lie in (0, N)");
    }
    std::vector<std::size_t> complete;
    for (std::size_t i = 0; i < n; ++i) {
        if (dataset.fully_observed(i)) complete.push_back(i);
    }
    if (complete.size() < validation_count) {
        throw ConfigError("split: only " + std::to_string(complete.size()) + " fully observed rows, need " +
                          std::to_string(validation_count));
    }
    Rng rng(seed);
    // Partial Fisher-Yates: the first validation_count entries are the draw.
    for (std::size_t i = 0; i < validation_count; ++i) {
        const auto j = i + static_cast<std::size_t>(rng.below(complete.size() - i));
        std::swap(complete[i], complete[j]);
    }
    std::vector<std::size_t> val(complete.begin(), complete.begin() + static_cast<std::ptrdiff_t>(validation_count));
    std::sort(val.begin(), val.end());
    std::vector<std::size_t> train;
    for (std::size_t i = 0, v = 0; i < n; ++i) {
        if (v < val.size() && val[v] == i) {
            ++v;
            continue;
        }
        train.push_back(i);
    }
    return {dataset.subset(train), dataset.subset(val)};
}

}  // namespace hbary
