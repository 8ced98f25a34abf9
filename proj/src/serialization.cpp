#include "hsgp/serialization.hpp"

#include <fstream>
#include <stdexcept>

#include "hsgp/diagnostics.hpp"

namespace hsgp {

namespace {

std::vector<double> double_vector(const json& j, const std::string& key) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw std::invalid_argument("missing or non-array field: " + key);
  }
  return j.at(key).get<std::vector<double>>();
}

GammaPrior gamma_from_json(const json& j, const std::string& key) {
  const json& g = j.at(key);
  GammaPrior prior;
  prior.shape = g.at("shape").get<double>();
  prior.rate = g.at("rate").get<double>();
  return prior;
}

json gamma_to_json(const GammaPrior& prior) {
  return json{{"shape", prior.shape}, {"rate", prior.rate}};
}

}  // namespace

json to_json(const KernelSpec& spec) {
  json j{{"family", family_name(spec.family)},
         {"alpha", spec.alpha},
         {"lengthscales", spec.lengthscales}};
  if (spec.omega0) j["omega0"] = *spec.omega0;
  return j;
}

KernelSpec kernel_from_json(const json& j) {
  KernelSpec spec;
  try {
    spec.family = family_from_name(j.at("family").get<std::string>());
    spec.alpha = j.at("alpha").get<double>();
    spec.lengthscales = double_vector(j, "lengthscales");
    if (j.contains("omega0")) spec.omega0 = j.at("omega0").get<double>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("KernelSpec JSON: ") + e.what());
  }
  spec.validate();
  return spec;
}

json to_json(const DomainConfig& domain) {
  return json{{"half_ranges", domain.half_ranges},
              {"boundary_factors", domain.boundary_factors},
              {"centers", domain.centers}};
}

DomainConfig domain_from_json(const json& j) {
  DomainConfig domain;
  try {
    domain.half_ranges = double_vector(j, "half_ranges");
    domain.boundary_factors = double_vector(j, "boundary_factors");
    if (j.contains("centers")) {
      domain.centers = double_vector(j, "centers");
    } else {
      domain.centers.assign(domain.half_ranges.size(), 0.0);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("DomainConfig JSON: ") + e.what());
  }
  domain.validate();
  return domain;
}

json to_json(const BasisConfig& basis) { return json{{"counts", basis.counts}}; }

BasisConfig basis_from_json(const json& j) {
  try {
    return build_tuples(j.at("counts").get<std::vector<int>>());
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("BasisConfig JSON: ") + e.what());
  }
}

json to_json(const PriorConfig& priors) {
  return json{{"noise_prior", gamma_to_json(priors.noise_prior)},
              {"alpha_prior", gamma_to_json(priors.alpha_prior)},
              {"lengthscale_prior", gamma_to_json(priors.lengthscale_prior)}};
}

PriorConfig priors_from_json(const json& j) {
  PriorConfig priors;
  try {
    if (j.contains("noise_prior")) priors.noise_prior = gamma_from_json(j, "noise_prior");
    if (j.contains("alpha_prior")) priors.alpha_prior = gamma_from_json(j, "alpha_prior");
    if (j.contains("lengthscale_prior")) {
      priors.lengthscale_prior = gamma_from_json(j, "lengthscale_prior");
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("PriorConfig JSON: ") + e.what());
  }
  priors.validate();
  return priors;
}

json to_json(const PeriodicBasis& basis) {
  std::vector<double> coeffs(basis.coeffs.data(), basis.coeffs.data() + basis.coeffs.size());
  return json{{"J", basis.J}, {"omega0", basis.omega0}, {"coeffs", coeffs},
              {"scheme", basis.scheme}};
}

PeriodicBasis periodic_from_json(const json& j) {
  PeriodicBasis basis;
  try {
    basis.J = j.at("J").get<int>();
    basis.omega0 = j.at("omega0").get<double>();
    const auto coeffs = j.at("coeffs").get<std::vector<double>>();
    basis.coeffs = Eigen::Map<const Eigen::VectorXd>(coeffs.data(),
                                                     static_cast<Eigen::Index>(coeffs.size()));
    basis.scheme = j.at("scheme").get<std::string>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("PeriodicBasis JSON: ") + e.what());
  }
  if (basis.coeffs.size() != basis.J + 1) {
    throw std::invalid_argument("PeriodicBasis JSON: coeffs length != J + 1");
  }
  return basis;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open JSON file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::invalid_argument("JSON parse failure in " + path + ": " + e.what());
  }
  return j;
}

void save_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace hsgp
