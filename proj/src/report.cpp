#include "atebench/report.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "atebench/errors.hpp"
#include "atebench/text.hpp"

namespace atebench {

namespace {

// Welford's running mean and variance.
class Running {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / n_;
        m2_ += delta * (x - mean_);
    }
    int count() const { return n_; }
    double mean() const { return mean_; }
    double sample_sd() const { return n_ > 1 ? std::sqrt(m2_ / (n_ - 1)) : 0.0; }

private:
    int n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

using Getter = std::optional<double> (*)(const PairReport&, std::size_t);

Summary summarize(const std::vector<SeedReports>& seeds, Getter get, std::size_t slot) {
    Summary s;
    if (seeds.size() == 1) {
        Running r;
        for (const auto& p : seeds.front().pairs) {
            if (auto v = get(p, slot)) r.add(*v);
            else ++s.excluded;
        }
        s.included = r.count();
        s.mean = r.mean();
        s.spread = r.sample_sd();
        return s;
    }
    Running across;
    for (const auto& seed : seeds) {
        Running within;
        for (const auto& p : seed.pairs) {
            if (auto v = get(p, slot)) within.add(*v);
            else ++s.excluded;
        }
        s.included += within.count();
        if (within.count() > 0) across.add(within.mean());
    }
    s.mean = across.mean();
    s.spread = across.count() > 0 ? across.sample_sd() / std::sqrt(static_cast<double>(across.count())) : 0.0;
    return s;
}

std::optional<double> get_wd(const PairReport& p, std::size_t) { return p.wd; }
std::optional<double> get_precision(const PairReport& p, std::size_t) { return p.unfiltered.precision; }
std::optional<double> get_recall(const PairReport& p, std::size_t) { return p.unfiltered.recall; }
std::optional<double> get_filtered_precision(const PairReport& p, std::size_t i) {
    return p.filtered[i].metrics.precision;
}
std::optional<double> get_filtered_recall(const PairReport& p, std::size_t i) { return p.filtered[i].metrics.recall; }

std::vector<std::pair<int, int>> pair_keys(const SeedReports& s) {
    std::vector<std::pair<int, int>> keys;
    for (const auto& p : s.pairs) keys.emplace_back(p.query.treatment, p.query.outcome);
    return keys;
}

std::vector<double> grid_of(const SeedReports& s) {
    std::vector<double> grid;
    if (!s.pairs.empty())
        for (const auto& f : s.pairs.front().filtered) grid.push_back(f.tolerance);
    return grid;
}

std::string optional_text(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

std::string summary_cells(const Summary& s) {
    if (!s.defined()) return "NA,NA";
    return format_double(s.mean) + "," + format_double(s.spread);
}

}  // namespace

MethodSummary aggregate(const std::string& method, const std::vector<SeedReports>& seeds) {
    if (seeds.empty()) throw AggregationError("no seeds to aggregate for " + method);
    const auto keys = pair_keys(seeds.front());
    const auto grid = grid_of(seeds.front());
    if (keys.empty()) throw AggregationError("seed " + std::to_string(seeds.front().seed_index) + " has no pairs");
    for (const auto& s : seeds) {
        if (pair_keys(s) != keys)
            throw AggregationError("seed " + std::to_string(s.seed_index) + " covers a different pair set for " + method);
        for (const auto& p : s.pairs) {
            if (p.filtered.size() != grid.size()) throw AggregationError("inconsistent filter grids for " + method);
            for (std::size_t i = 0; i < grid.size(); ++i)
                if (p.filtered[i].tolerance != grid[i]) throw AggregationError("inconsistent filter grids for " + method);
        }
    }

    MethodSummary out;
    out.method = method;
    out.seeds = static_cast<int>(seeds.size());
    out.spread = seeds.size() == 1 ? Spread::standard_deviation : Spread::standard_error;
    out.wd = summarize(seeds, get_wd, 0);
    out.precision = summarize(seeds, get_precision, 0);
    out.recall = summarize(seeds, get_recall, 0);
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.relaxation.push_back(
            {grid[i], summarize(seeds, get_filtered_precision, i), summarize(seeds, get_filtered_recall, i)});
    return out;
}

namespace {

std::string report_preamble(const RunReport& r) {
    std::string out = "# digest=" + r.config_digest + "\n";
    for (const auto& m : r.methods) {
        out += "# " + m.method + ": seeds=" + std::to_string(m.seeds) + " spread=" +
               (m.spread == Spread::standard_error ? "standard_error" : "standard_deviation") +
               " precision_undefined=" + std::to_string(m.precision.excluded) +
               " recall_undefined=" + std::to_string(m.recall.excluded) + "\n";
    }
    for (const auto& f : r.failures)
        out += "# failed seed=" + std::to_string(f.seed_index) + (f.method.empty() ? "" : " method=" + f.method) +
               ": " + f.message + "\n";
    return out;
}

}  // namespace

std::string format_report_csv(const RunReport& r) {
    std::string out = report_preamble(r);
    out += "# estimator: OLS backdoor adjustment on the parents of the treatment\n";
    out += "# true-MEC members weighted uniformly; low-mass filtering applies to true and learned modes alike\n";
    out += "method,wd_mean,wd_se,precision_mean,precision_se,recall_mean,recall_se\n";
    for (const auto& m : r.methods)
        out += m.method + "," + summary_cells(m.wd) + "," + summary_cells(m.precision) + "," + summary_cells(m.recall) +
               "\n";
    return out;
}

std::string format_relaxation_csv(const RunReport& r) {
    std::string out = report_preamble(r);
    out += "method,tolerance,precision_mean,precision_se,recall_mean,recall_se\n";
    for (const auto& m : r.methods)
        for (const auto& x : m.relaxation)
            out += m.method + "," + format_double(x.tolerance) + "," + summary_cells(x.precision) + "," +
                   summary_cells(x.recall) + "\n";
    return out;
}

namespace {

std::string metric_row(const std::string& prefix, const std::string& tolerance, double wd, const ModeMetrics& m) {
    const auto& c = m.counts;
    return prefix + tolerance + "," + format_double(wd) + "," + optional_text(m.precision) + "," +
           optional_text(m.recall) + "," + std::to_string(c.true_modes) + "," + std::to_string(c.learned_modes) +
           "," + std::to_string(c.tp) + "," + std::to_string(c.fp) + "," + std::to_string(c.fn) + "\n";
}

constexpr const char* kPairHeader = "treatment,outcome,tolerance,wd,precision,recall,true_modes,learned_modes,tp,fp,fn";

}  // namespace

std::string format_pair_reports(const std::vector<PairReport>& pairs, const NodeLabels& labels,
                                const std::string& method, int seed_index, const std::string& digest) {
    std::string out = "# pair-reports method=" + method + " seed=" + std::to_string(seed_index) + " digest=" + digest +
                      "\n# nodes: ";
    for (int i = 0; i < labels.size(); ++i) out += (i ? "," : "") + labels[i];
    out += "\n";
    out += kPairHeader;
    out += "\n";
    for (const auto& p : pairs) {
        const std::string prefix = labels[p.query.treatment] + "," + labels[p.query.outcome] + ",";
        out += metric_row(prefix, "raw", p.wd, p.unfiltered);
        for (const auto& f : p.filtered) out += metric_row(prefix, format_double(f.tolerance), p.wd, f.metrics);
    }
    return out;
}

PairReportsFile read_pair_reports(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    const std::string src = path.string();
    std::string line;
    PairReportsFile out;
    auto expect = [&](const std::string& prefix) {
        if (!std::getline(in, line) || !starts_with(line, prefix)) throw SchemaError(src + ": expected '" + prefix + "'");
        return line.substr(prefix.size());
    };
    for (const auto& kv : split(expect("# pair-reports "), ' ')) {
        if (starts_with(kv, "method=")) out.method = kv.substr(7);
        if (starts_with(kv, "seed=")) out.seed_index = static_cast<int>(parse_int(kv.substr(5)).value_or(0));
        if (starts_with(kv, "digest=")) out.digest = kv.substr(7);
    }
    std::vector<std::string> names;
    for (auto& n : split(expect("# nodes: "), ',')) names.push_back(trim(n));
    out.labels = NodeLabels(names);
    expect(kPairHeader);

    auto parse_opt = [&](const std::string& cell, const std::string& where) -> std::optional<double> {
        if (trim(cell) == "NA") return std::nullopt;
        auto v = parse_double(cell);
        if (!v) throw SchemaError(where + ": bad number '" + cell + "'");
        return v;
    };
    int line_no = 3;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = src + ":" + std::to_string(line_no);
        auto cells = split(line, ',');
        if (cells.size() != 11) throw SchemaError(where + ": expected 11 fields");
        const int t = out.labels.index_of(trim(cells[0]));
        const int y = out.labels.index_of(trim(cells[1]));
        if (t < 0 || y < 0) throw SchemaError(where + ": unknown node");
        ModeMetrics m;
        m.precision = parse_opt(cells[4], where);
        m.recall = parse_opt(cells[5], where);
        int* counts[] = {&m.counts.true_modes, &m.counts.learned_modes, &m.counts.tp, &m.counts.fp, &m.counts.fn};
        for (int i = 0; i < 5; ++i) {
            auto v = parse_int(cells[6 + i]);
            if (!v) throw SchemaError(where + ": bad count");
            *counts[i] = static_cast<int>(*v);
        }
        const auto wd = parse_double(cells[3]);
        if (!wd) throw SchemaError(where + ": bad wd");
        if (trim(cells[2]) == "raw") {
            PairReport p;
            p.query.treatment = t;
            p.query.outcome = y;
            p.wd = *wd;
            p.unfiltered = m;
            out.pairs.push_back(std::move(p));
        } else {
            const auto tol = parse_double(cells[2]);
            if (!tol || out.pairs.empty() || out.pairs.back().query.treatment != t || out.pairs.back().query.outcome != y)
                throw SchemaError(where + ": filtered row without its raw row");
            out.pairs.back().filtered.push_back({*tol, m});
        }
    }
    return out;
}

std::string format_histogram(const AteSweep& s, const RegroupConfig& cfg, const std::string& digest) {
    std::string out = "# histogram source=" + s.source_tag + " digest=" + digest + "\n";
    out += "treatment,outcome,source_tag,mode_value,mass\n";
    for (const auto& set : s.sets) {
        const std::string prefix = s.labels[set.query.treatment] + "," + s.labels[set.query.outcome] + "," +
                                   s.source_tag + ",";
        for (const auto& m : regroup(set, cfg).modes)
            out += prefix + format_double(m.value) + "," + format_double(m.mass) + "\n";
    }
    return out;
}

}  // namespace atebench
