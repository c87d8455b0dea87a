#pragma once

#include <string>
#include <vector>

#include "dclm/game.hpp"
#include "dclm/logic.hpp"
#include "dclm/perception.hpp"

namespace dclm {

std::string base64_encode(const unsigned char* data, std::size_t len);
std::vector<unsigned char> base64_decode(const std::string& text);  // rejects malformed input

// Tensor payloads travel as base64 of the flat row-major doubles in
// little-endian byte order.
std::string encode_doubles(const double* values, Eigen::Index count);
std::vector<double> decode_doubles(const std::string& b64);

// Model document: {format_version, architecture, seed, tensors}.
void save_model(const PerceptionParams& params, const std::string& path);
PerceptionParams load_model(const std::string& path);

// Logic-network document: predicates with templates and groundings, clauses
// with their edges, groups, lambda, variant and thresholds.
void save_logic(const LogicNetwork& net, const std::string& path);
LogicNetwork load_logic(const std::string& path);

void save_trace_csv(const GameTrace& trace, const std::string& path);

// Table-3-style CSV: disjunction-node rows (one per decision class), feature-
// predicate columns.
void save_membership_csv(const LogicNetwork& net, const std::string& path);

}  // namespace dclm
