#pragma once

#include <ostream>
#include <string>

#include <json.hpp>

#include "resest/graph.hpp"
#include "resest/sim.hpp"

namespace resest {

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

/// k,node,mode,estimate,truth,abs_error with 1-based node and mode.
void write_trace_csv(std::ostream& os, const Trace& trace);
nlohmann::json trace_summary(const Trace& trace, const SimConfig& cfg);

/// k,node,mean_sq_error,ci_half_width
void write_mss_csv(std::ostream& os, const MssReport& rep);
nlohmann::json mss_summary(const MssReport& rep, const SimConfig& cfg);

/// p followed by one rho^2 pbar column per m.
void write_margin_csv(std::ostream& os, const MarginTable& table);

nlohmann::json medag_to_json(const Medag& m);

std::string hex_digest(std::uint64_t v);

}  // namespace resest
