#pragma once

#include <json.hpp>

#include "cutlab/cutdist.hpp"
#include "cutlab/cutnorm.hpp"
#include "cutlab/kernel.hpp"
#include "cutlab/step_kernel.hpp"
#include "cutlab/vkernel.hpp"

namespace cutlab {

using Json = nlohmann::json;

/// {"family": "pow_corner", "alpha": 0.2, "c": 1} and friends; step kernels
/// carry "m" and a row-major "values" array (or a nested m x m array),
/// truncated kernels a "source" object and a "threshold".
KernelSpec kernel_from_json(const Json& j);
Json to_json(const KernelSpec& U);

/// {"n": n, "values": [[...], ...], "zero_diagonal": false}; a bare nested
/// array is accepted too.
StepKernel step_kernel_from_json(const Json& j);
Json to_json(const StepKernel& W);

/// values as an n x n x d array.
VectorStepKernel vector_step_kernel_from_json(const Json& j);
Json to_json(const VectorStepKernel& W);

Json to_json(const CutNormResult& r);
Json to_json(const CutDistanceEstimate& e);
Json to_json(const SamplePoints& X);

}  // namespace cutlab
