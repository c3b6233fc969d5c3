#pragma once

// JSON form of a CovarianceModel:
//   {"family": "<name>", "params": {...}, "mixing": "<attribute>"}
//
// family / params:
//   identity               {}
//   single_spike           {"alpha", "c1", "base"}
//   multi_spike_groups     {"groups": [{"alpha", "c": [...]}, ...], "base"}
//   polynomial_decay       {"beta"}
//   exponential_decay      {"c"}
//   growing_spikes         {"alpha", "beta", "c1", "c2"}
//   equicorrelation        {"rho": {"r", "gamma"}}
//   block_equicorrelation  {"rho1": {"r", "gamma"}, "rho2": {"r", "gamma"}}
//   explicit_diagonal      {"values": [...]}
// where a rho rule {"r", "gamma"} means rho_d = r * d^(-gamma).
//
// mixing: independent_components | rho_mixing_under_permutation |
// not_rho_mixing (default independent_components). Unknown keys are errors.

#include <json.hpp>

#include "hdlss/spectra.hpp"

namespace hdlss {

nlohmann::json model_to_json(const CovarianceModel& model);

/// Throws Error(InvalidModel) with a field path such as "params.alpha".
CovarianceModel model_from_json(const nlohmann::json& doc);

}  // namespace hdlss
