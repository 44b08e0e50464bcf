#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "csp/arrival.hpp"
#include "csp/feasibility.hpp"
#include "csp/lmdp.hpp"
#include "csp/reach.hpp"

namespace csp {

// Binary payloads for the artifact cache. All integers and doubles are
// little-endian 64-bit; transition slices are stored as CSR arrays.

std::vector<std::byte> serialize(const EnvironmentPolicies& policies);
EnvironmentPolicies deserialize_policies(std::span<const std::byte> bytes);

std::vector<std::byte> serialize(const EnvironmentArrivals& arrivals);
EnvironmentArrivals deserialize_arrivals(std::span<const std::byte> bytes);

std::vector<std::byte> serialize(const EnvironmentReach& reach);
EnvironmentReach deserialize_reach(std::span<const std::byte> bytes);

std::vector<std::byte> serialize(const FeasibilitySolution& solution);
FeasibilitySolution deserialize_feasibility(std::span<const std::byte> bytes);

}  // namespace csp
