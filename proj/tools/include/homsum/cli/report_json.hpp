#pragma once

#include <json.hpp>
#include <optional>

#include "homsum/bounds.hpp"
#include "homsum/diagnose.hpp"
#include "homsum/kernel.hpp"
#include "homsum/simulate.hpp"

namespace homsum::cli {

using Json = nlohmann::ordered_json;

Json to_json(const MomentEstimate& m);
Json to_json(const BoundReport& r);
Json to_json(const VerdictReport& r);

/// Scalar simulation summary; `nu` selects the centered chi-square target.
Json simulation_json(const SymmetricKernel& f, const DistributionSpec& law, const SampleSummary& s,
                     std::optional<int> nu);
Json vector_simulation_json(const std::vector<SymmetricKernel>& kernels, const DistributionSpec& law,
                            const VectorSampleSummary& s);

/// d, N, entry count, norms and influence extremes.
Json kernel_summary(const SymmetricKernel& f);

/// Recomputes a serialized bound report's total from its serialized
/// components with the same combine functions the bounds module uses.
std::optional<double> recompute_total(const Json& bound_report);

}  // namespace homsum::cli
