#include "atebench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atebench/errors.hpp"

namespace atebench {

void validate(const RegroupConfig& cfg) {
    if (!(cfg.rtol >= 0) || !(cfg.atol >= 0)) throw ParameterError("regroup tolerances must be non-negative");
    if (cfg.rtol == 0 && cfg.atol == 0) throw ParameterError("regroup tolerances cannot both be zero");
}

namespace {

struct Weighted {
    double value;
    double weight;
    friend bool operator<(const Weighted& a, const Weighted& b) {
        return a.value < b.value || (a.value == b.value && a.weight < b.weight);
    }
};

// Sorted on (value, weight) so every input permutation sums in the same order.
std::vector<Weighted> sorted_samples(std::span<const double> values, std::span<const double> weights) {
    if (values.size() != weights.size()) throw ParameterError("values and weights differ in length");
    std::vector<Weighted> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = {values[i], weights[i]};
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

ModeSet regroup(std::span<const double> values, std::span<const double> weights, const RegroupConfig& cfg) {
    validate(cfg);
    const auto samples = sorted_samples(values, weights);
    ModeSet out;
    for (const auto& s : samples) {
        if (!out.modes.empty() && is_close(s.value, out.modes.back().value, cfg))
            out.modes.back().mass += s.weight;
        else
            out.modes.push_back({s.value, s.weight});
    }
    return out;
}

ModeSet regroup(const AteSampleSet& s, const RegroupConfig& cfg) { return regroup(s.values, s.weights, cfg); }

double wasserstein_1d(std::span<const double> x_values, std::span<const double> x_weights,
                      std::span<const double> y_values, std::span<const double> y_weights) {
    if (x_values.empty() || y_values.empty()) throw ParameterError("Wasserstein distance needs non-empty samples");
    const auto x = sorted_samples(x_values, x_weights);
    const auto y = sorted_samples(y_values, y_weights);
    double x_total = 0.0, y_total = 0.0;
    for (const auto& s : x) x_total += s.weight;
    for (const auto& s : y) y_total += s.weight;
    if (!(x_total > 0) || !(y_total > 0)) throw ParameterError("Wasserstein distance needs positive total weight");

    double x_cum = 0.0, y_cum = 0.0, distance = 0.0;
    double prev = 0.0;
    bool started = false;
    std::size_t i = 0, j = 0;
    while (i < x.size() || j < y.size()) {
        double t = std::numeric_limits<double>::infinity();
        if (i < x.size()) t = x[i].value;
        if (j < y.size()) t = std::min(t, y[j].value);
        if (started) distance += std::abs(x_cum / x_total - y_cum / y_total) * (t - prev);
        while (i < x.size() && x[i].value == t) x_cum += x[i++].weight;
        while (j < y.size() && y[j].value == t) y_cum += y[j++].weight;
        prev = t;
        started = true;
    }
    return distance;
}

double wasserstein_1d(const AteSampleSet& x, const AteSampleSet& y) {
    return wasserstein_1d(x.values, x.weights, y.values, y.weights);
}

namespace {

// Does any member of `sorted` (representatives, increasing) satisfy pred?
// Only the neighbours straddling `v` can be closest, and with rtol < 1 the
// tolerance cannot grow fast enough for a farther representative to qualify.
template <typename Pred>
bool any_near(const std::vector<Mode>& sorted, double v, const RegroupConfig& cfg, Pred&& pred) {
    if (cfg.rtol >= 1.0) {
        return std::any_of(sorted.begin(), sorted.end(), [&](const Mode& m) { return pred(m.value); });
    }
    auto it = std::lower_bound(sorted.begin(), sorted.end(), v, [](const Mode& m, double x) { return m.value < x; });
    if (it != sorted.end() && pred(it->value)) return true;
    if (it != sorted.begin() && pred(std::prev(it)->value)) return true;
    return false;
}

}  // namespace

ModeMetrics mode_precision_recall(const ModeSet& truth, const ModeSet& learned, const RegroupConfig& cfg) {
    validate(cfg);
    ModeMetrics out;
    auto& c = out.counts;
    c.true_modes = static_cast<int>(truth.size());
    c.learned_modes = static_cast<int>(learned.size());
    for (const auto& t : truth.modes) {
        const bool found = any_near(learned.modes, t.value, cfg, [&](double l) { return is_close(l, t.value, cfg); });
        found ? ++c.tp : ++c.fn;
    }
    for (const auto& l : learned.modes) {
        const bool matches = any_near(truth.modes, l.value, cfg, [&](double t) { return is_close(l.value, t, cfg); });
        if (!matches) ++c.fp;
    }
    if (c.tp + c.fp > 0) out.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    if (c.tp + c.fn > 0) out.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
    return out;
}

ModeSet filter_low_mass(const ModeSet& modes, double tolerance) {
    if (!(tolerance >= 0.0 && tolerance < 1.0)) throw ParameterError("filter tolerance must lie in [0, 1)");
    ModeSet out;
    double kept = 0.0;
    for (const auto& m : modes.modes)
        if (m.mass >= tolerance) {
            out.modes.push_back(m);
            kept += m.mass;
        }
    if (out.size() == modes.size() || out.empty()) return out;
    for (auto& m : out.modes) m.mass /= kept;
    return out;
}

const ModeMetrics* PairReport::filtered_at(double tolerance) const {
    for (const auto& f : filtered)
        if (f.tolerance == tolerance) return &f.metrics;
    return nullptr;
}

PairReport evaluate_pair(const AteSampleSet& truth, const AteSampleSet& learned, const EvaluationConfig& cfg) {
    PairReport r;
    r.query = truth.query;
    r.wd = wasserstein_1d(truth, learned);
    const ModeSet true_modes = regroup(truth, cfg.regroup);
    const ModeSet learned_modes = regroup(learned, cfg.regroup);
    r.unfiltered = mode_precision_recall(true_modes, learned_modes, cfg.regroup);
    for (double tol : cfg.filter_grid)
        r.filtered.push_back(
            {tol, mode_precision_recall(filter_low_mass(true_modes, tol), filter_low_mass(learned_modes, tol),
                                        cfg.regroup)});
    return r;
}

std::vector<PairReport> evaluate_sweeps(const AteSweep& truth, const AteSweep& learned, const EvaluationConfig& cfg) {
    if (!(truth.labels == learned.labels)) throw SchemaError("ATE sweeps have different labels");
    if (truth.sets.size() != learned.sets.size()) throw SchemaError("ATE sweeps cover different pairs");
    std::vector<PairReport> out;
    out.reserve(truth.sets.size());
    for (std::size_t i = 0; i < truth.sets.size(); ++i) out.push_back(evaluate_pair(truth.sets[i], learned.sets[i], cfg));
    return out;
}

}  // namespace atebench
