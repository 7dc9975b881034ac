#pragma once

#include <optional>
#include <span>
#include <vector>

#include "atebench/ate.hpp"

namespace atebench {

// numpy.isclose defaults.
struct RegroupConfig {
    double rtol = 1e-5;
    double atol = 1e-8;
};

void validate(const RegroupConfig& cfg);

// |a - b| <= atol + rtol * |b|
inline bool is_close(double a, double b, const RegroupConfig& cfg) {
    const double diff = a > b ? a - b : b - a;
    return diff <= cfg.atol + cfg.rtol * (b < 0 ? -b : b);
}

struct Mode {
    double value;
    double mass;
};

// Representatives strictly increasing; masses positive and summing to 1.
// An empty set marks "everything filtered out".
struct ModeSet {
    std::vector<Mode> modes;

    bool empty() const { return modes.empty(); }
    std::size_t size() const { return modes.size(); }
};

// Sorts the samples and sweeps them upward. A group is anchored at its smallest
// value and absorbs following values that are close to that anchor; the anchor
// is the group's representative and the group's weights are summed.
ModeSet regroup(std::span<const double> values, std::span<const double> weights, const RegroupConfig& cfg = {});
ModeSet regroup(const AteSampleSet& s, const RegroupConfig& cfg = {});

// First-order Wasserstein distance between two weighted empirical
// distributions: the integral of |F_x - F_y| over the merged sorted support.
double wasserstein_1d(std::span<const double> x_values, std::span<const double> x_weights,
                      std::span<const double> y_values, std::span<const double> y_weights);
double wasserstein_1d(const AteSampleSet& x, const AteSampleSet& y);

struct ModeCounts {
    int true_modes = 0;
    int learned_modes = 0;
    int tp = 0;  // true modes matched by some learned mode
    int fp = 0;  // learned modes matching no true mode
    int fn = 0;  // true modes with no match
};

// Precision/recall are empty when their denominator is zero.
struct ModeMetrics {
    std::optional<double> precision;
    std::optional<double> recall;
    ModeCounts counts;
};

// A true mode t is found when some learned mode l has is_close(l, t).
ModeMetrics mode_precision_recall(const ModeSet& truth, const ModeSet& learned, const RegroupConfig& cfg = {});

// Drops modes with mass < tolerance and renormalizes the survivors.
ModeSet filter_low_mass(const ModeSet& modes, double tolerance);

inline const std::vector<double> kDefaultFilterGrid = {0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
inline constexpr double kReportedFilterTolerance = 0.05;

struct EvaluationConfig {
    RegroupConfig regroup;
    std::vector<double> filter_grid = kDefaultFilterGrid;
};

struct FilteredMetrics {
    double tolerance;
    ModeMetrics metrics;
};

struct PairReport {
    AteQuery query;
    double wd = 0.0;
    ModeMetrics unfiltered;
    std::vector<FilteredMetrics> filtered;  // one entry per grid tolerance

    // Metrics at `tolerance` if it is on the grid.
    const ModeMetrics* filtered_at(double tolerance) const;
};

// WD on the raw samples; precision/recall on regrouped modes, both sides filtered
// at each grid tolerance.
PairReport evaluate_pair(const AteSampleSet& truth, const AteSampleSet& learned, const EvaluationConfig& cfg = {});

// Pairwise over two sweeps with identical labels, in sweep order.
std::vector<PairReport> evaluate_sweeps(const AteSweep& truth, const AteSweep& learned,
                                        const EvaluationConfig& cfg = {});

}  // namespace atebench
