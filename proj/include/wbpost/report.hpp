#pragma once

// JSON encodings of the verdicts and numerical results. Field order is fixed
// so that reports are byte-identical across runs. Non-finite numbers encode as
// null.

#include <json.hpp>

#include "wbpost/data.hpp"
#include "wbpost/prior.hpp"
#include "wbpost/propriety.hpp"
#include "wbpost/quadrature.hpp"
#include "wbpost/sampler.hpp"

namespace wbpost {

using Json = nlohmann::ordered_json;

Json to_json(const PriorSpec& prior);
Json to_json(const DatasetSummary& summary);
/// {status, theorem_item, condition, gap_note?}
Json to_json(const ProprietyVerdict& verdict);
Json to_json(const MomentVerdict& moment);
/// Moments of eta, theta and beta at orders 1 and 2.
Json moment_table(const PriorSpec& prior, const DatasetSummary& summary);
Json to_json(const ConvergenceReport& report);
Json to_json(const LogNormalizingConstant& c);
Json to_json(const PosteriorReport& report);

}  // namespace wbpost
