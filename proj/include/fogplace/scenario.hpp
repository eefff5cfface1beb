#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "fogplace/common.hpp"

namespace fogplace {

/// Scenario inputs: how many patients one server may serve, the response
/// deadline, per-patient processing cost and the record sizes.
///
/// `unit_pa_time_s` is the combined processing-and-analysis time per patient.
/// Its default is the stated 105.9 ms figure; when building a scenario from
/// a custom processing time or analysis factor use with_processing(), which
/// recomputes the product.
struct ScenarioParams {
    double pat_max = 50.0;
    double t_total_s = 240.0;
    double unit_proc_time_s = 0.0963;
    double analysis_factor = 0.10;
    double unit_pa_time_s = 0.1059;
    double ecg_bits = 1'920'000.0;
    double processed_bits = 126'720.0;
    double n_patients = 200.0;

    ScenarioParams with_pat_max(double pm) const {
        ScenarioParams p = *this;
        p.pat_max = pm;
        return p;
    }
    ScenarioParams with_processing(double proc_s, double factor) const {
        ScenarioParams p = *this;
        p.unit_proc_time_s = proc_s;
        p.analysis_factor = factor;
        p.unit_pa_time_s = proc_s * (1.0 + factor);
        return p;
    }
};

/// Derived time budgets. t_pa + t_t = t_total exactly; t_cloud is filled in
/// by derive_rates once the per-patient upload rate is known.
struct TimingPlan {
    double t_pa_s = 0.0;
    double t_t_s = 0.0;
    double t_cloud_s = 0.0;
};

/// Per-patient data rates: raw ECG to the processing server and analysed
/// ECG to cloud storage.
struct RatePlan {
    double r_ps_bps = 0.0;
    double r_cloud_bps = 0.0;
};

inline void validate(const ScenarioParams& p) {
    if (!(p.pat_max >= 1.0))
        throw ConfigError("pat_max must be >= 1");
    if (!(p.t_total_s > 0.0) || !(p.unit_pa_time_s > 0.0) || !(p.ecg_bits > 0.0) ||
        !(p.processed_bits >= 0.0) || !(p.n_patients >= 0.0))
        throw ConfigError("scenario parameters must be positive");
}

/// Splits the deadline into a processing window and a transmission window:
/// t_pa = pat_max * unit_pa_time, t_t = t_total - t_pa.
inline TimingPlan derive_timing(const ScenarioParams& params) {
    validate(params);
    TimingPlan t;
    t.t_pa_s = params.pat_max * params.unit_pa_time_s;
    t.t_t_s = params.t_total_s - t.t_pa_s;
    if (!(t.t_t_s > 0.0))
        throw InfeasibleError(
            "infeasible deadline: processing window consumes the whole budget (pat_max too large)");
    return t;
}

/// Per-patient rates from the timing plan and the healthcare share of the
/// edge uplink. The uplink share is divided among the pat_max patients a
/// server carries; the analysed-upload time follows from the record size.
/// Completes timing.t_cloud_s.
inline RatePlan derive_rates(const ScenarioParams& params, TimingPlan& timing,
                             double hc_uplink_share_bps) {
    if (!(hc_uplink_share_bps > 0.0))
        throw ConfigError("healthcare uplink share must be positive");
    RatePlan r;
    r.r_ps_bps = params.ecg_bits / timing.t_t_s;
    r.r_cloud_bps = hc_uplink_share_bps / params.pat_max;
    timing.t_cloud_s = params.processed_bits / r.r_cloud_bps;
    return r;
}

/// Parameters, times and rates of one scenario, bundled.
struct Scenario {
    ScenarioParams params;
    TimingPlan timing;
    RatePlan rates;
    double hc_uplink_share_bps = 0.0;
};

inline Scenario make_scenario(const ScenarioParams& params, double hc_uplink_share_bps) {
    Scenario s;
    s.params = params;
    s.timing = derive_timing(params);
    s.rates = derive_rates(params, s.timing, hc_uplink_share_bps);
    s.hc_uplink_share_bps = hc_uplink_share_bps;
    return s;
}

/// One row of the scenario table: full-precision values plus the display
/// strings rounded the way the reference table prints them (times to one or
/// two decimals, rates in kbps to three decimals).
struct ScenarioRow {
    std::string label;
    double pat_max = 0.0;
    double t_pa_s = 0.0;
    double t_t_s = 0.0;
    double r_ps_bps = 0.0;
    double r_cloud_bps = 0.0;
    double t_cloud_s = 0.0;

    std::string display_t_pa;    // 1 decimal, seconds
    std::string display_t_t;     // 1 decimal, seconds
    std::string display_r_ps;    // 3 decimals, kbps
    std::string display_r_cloud; // 3 decimals, kbps
    std::string display_t_cloud; // 2 decimals, seconds
};

namespace detail {
inline std::string fixed_decimals(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}
} // namespace detail

/// Builds one row per pat_max value using unrounded intermediates; display
/// rounding is applied only to the display strings.
inline std::vector<ScenarioRow> scenario_table(const ScenarioParams& base,
                                               const std::vector<double>& pat_max_list,
                                               double hc_uplink_share_bps) {
    std::vector<ScenarioRow> rows;
    int index = 1;
    for (double pm : pat_max_list) {
        Scenario s = make_scenario(base.with_pat_max(pm), hc_uplink_share_bps);
        ScenarioRow row;
        row.label = "S" + std::to_string(index++);
        row.pat_max = pm;
        row.t_pa_s = s.timing.t_pa_s;
        row.t_t_s = s.timing.t_t_s;
        row.r_ps_bps = s.rates.r_ps_bps;
        row.r_cloud_bps = s.rates.r_cloud_bps;
        row.t_cloud_s = s.timing.t_cloud_s;
        row.display_t_pa = detail::fixed_decimals(row.t_pa_s, 1);
        row.display_t_t = detail::fixed_decimals(row.t_t_s, 1);
        row.display_r_ps = detail::fixed_decimals(row.r_ps_bps / 1000.0, 3);
        row.display_r_cloud = detail::fixed_decimals(row.r_cloud_bps / 1000.0, 3);
        row.display_t_cloud = detail::fixed_decimals(row.t_cloud_s, 2);
        rows.push_back(row);
    }
    return rows;
}

} // namespace fogplace
