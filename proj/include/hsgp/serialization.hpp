#pragma once

#include <string>

#include "json.hpp"  // vendored nlohmann/json single header

#include "hsgp/inference.hpp"
#include "hsgp/kernels.hpp"
#include "hsgp/laplace_basis.hpp"
#include "hsgp/periodic.hpp"

namespace hsgp {

using json = nlohmann::json;

// KernelSpec <-> {"family","alpha","lengthscales","omega0"?}; field names are
// part of the external contract.
[[nodiscard]] json to_json(const KernelSpec& spec);
[[nodiscard]] KernelSpec kernel_from_json(const json& j);

// DomainConfig <-> {"half_ranges","boundary_factors","centers"}.
[[nodiscard]] json to_json(const DomainConfig& domain);
[[nodiscard]] DomainConfig domain_from_json(const json& j);

// BasisConfig serializes counts only; tuples are reconstructed.
[[nodiscard]] json to_json(const BasisConfig& basis);
[[nodiscard]] BasisConfig basis_from_json(const json& j);

// PriorConfig <-> {"noise_prior":{"shape","rate"},...}.
[[nodiscard]] json to_json(const PriorConfig& priors);
[[nodiscard]] PriorConfig priors_from_json(const json& j);

// PeriodicBasis <-> {"J","omega0","coeffs","scheme"}.
[[nodiscard]] json to_json(const PeriodicBasis& basis);
[[nodiscard]] PeriodicBasis periodic_from_json(const json& j);

[[nodiscard]] json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const json& j);

}  // namespace hsgp
