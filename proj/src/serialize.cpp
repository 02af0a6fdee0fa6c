#include "spde/serialize.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

namespace spde::io {

json to_json(const conditions::ConditionVerdict& v) {
    json j;
    j["satisfied"] = v.satisfied;
    j["estimate"] = v.integral_estimate ? json(*v.integral_estimate) : json(nullptr);
    j["method"] = conditions::to_string(v.method);
    j["parameters"] = v.parameters;
    return j;
}

json to_json(const conditions::GronwallCertificate& c) {
    return {{"g_total", c.g_total},
            {"a", c.a},
            {"a_stderr", c.a_stderr},
            {"bounds", c.bounds},
            {"partial_sums_p1", c.partial_sums_p1},
            {"partial_sums_p2", c.partial_sums_p2},
            {"replicas", c.replicas}};
}

json to_json(const solvers::PicardTrace& t) {
    return {{"sup_l2_diff", t.sup_l2_diff}, {"replicas", t.replicas}};
}

json to_json(const solvers::ChaosSeries& s) {
    json j{{"term_variances", s.term_variances},
           {"partial_sums", s.partial_sums},
           {"truncation", s.truncation}};
    j["closed_form"] = s.closed_form ? json(*s.closed_form) : json(nullptr);
    return j;
}

json to_json(const moments::MomentRow& r) {
    return {{"model", r.model}, {"t", r.t},           {"p", r.p},
            {"estimate", r.estimate}, {"stderr", r.stderr_}, {"replicas", r.replicas}};
}

json to_json(const moments::MomentReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) rows.push_back(to_json(row));
    json j{{"rows", rows}, {"kappa", r.kappa}};
    j["fitted_lambda"] = r.fitted_lambda ? json(*r.fitted_lambda) : json(nullptr);
    j["closed_form_lambda"] = r.closed_form_lambda ? json(*r.closed_form_lambda) : json(nullptr);
    return j;
}

json to_json(const moments::FkEstimate& e) {
    return {{"estimate", e.estimate},
            {"stderr", e.stderr_},
            {"estimate_half_floor", e.estimate_half_floor},
            {"stderr_half_floor", e.stderr_half_floor},
            {"delta_floor", e.delta_floor},
            {"replicas", e.replicas},
            {"verdict", to_json(e.verdict)}};
}

json to_json(const moments::HolderFit& f) {
    return {{"exponent", f.exponent}, {"lags", f.lags}, {"norms", f.norms}};
}

void write_moment_csv(std::ostream& os, const std::vector<moments::MomentRow>& rows) {
    os << "model,t,p,estimate,stderr,replicas\n";
    for (const auto& r : rows) {
        fmt::print(os, "{},{:.17g},{:.17g},{:.17g},{:.17g},{}\n", r.model, r.t, r.p, r.estimate,
                   r.stderr_, r.replicas);
    }
}

} // namespace spde::io
