#pragma once

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "spde/conditions.hpp"
#include "spde/moments.hpp"
#include "spde/solvers.hpp"

namespace spde::io {

using nlohmann::json;

json to_json(const conditions::ConditionVerdict& v);
json to_json(const conditions::GronwallCertificate& c);
json to_json(const solvers::PicardTrace& t);
json to_json(const solvers::ChaosSeries& s);
json to_json(const moments::MomentRow& r);
json to_json(const moments::MomentReport& r);
json to_json(const moments::FkEstimate& e);
json to_json(const moments::HolderFit& f);

// Columns model,t,p,estimate,stderr,replicas; 17 significant digits.
void write_moment_csv(std::ostream& os, const std::vector<moments::MomentRow>& rows);

} // namespace spde::io
