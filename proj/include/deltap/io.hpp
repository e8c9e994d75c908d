#pragma once

// JSON chain specs in, CSV / JSON reports out.
//
// A chain spec:
//   {
//     "dimension": 4,
//     "generators": {"kind": "explicit", "matrices": [M1, M2, ...],
//                    "mode": "repeat" | "cycle", "horizon": 60}
//               or {"kind": "family", "name": "...", "params": {...}},
//     "projections": P-spec (optional with a family),
//     "analysis": {"m": 0, "horizon": 30, "tol": 1e-8, "seed": 0, ...}
//   }
// Matrices are lists of rows; entry [i][j] is the weight from j to i, so
// columns sum to one. A P-spec is one of
//   {"kind": "one_dim", "z": [...]}
//   {"kind": "block", "blocks": [[0, 1], [2]], "reps": [[...], [...]]}
//   {"kind": "explicit", "matrix": M}
//   {"kind": "sequence", "items": [P-spec, ...]}   (last item repeats)
//   {"kind": "family"}                              (the family's own)

#include "deltap/category.hpp"
#include "deltap/dobrushin.hpp"
#include "deltap/doeblin.hpp"
#include "deltap/families.hpp"
#include "deltap/perturbation.hpp"
#include "deltap/theorems.hpp"

#include <string>

namespace deltap {

struct ChainSpec {
  FamilyInstance instance;
  Json analysis = Json::object();
  Index dim() const { return instance.dim(); }
};

// ParseError (with a JSON path such as $.generators.matrices[1][0]) for
// malformed input; validation errors keep their code and gain the path.
ChainSpec parse_chain_spec(const Json& j);
ChainSpec load_chain_spec(const std::string& path);
Json read_json_file(const std::string& path);

Matrix parse_matrix(const Json& j, const std::string& path);
Vector parse_vector(const Json& j, const std::string& path);
MarkovProjection parse_projection(const Json& j, const std::string& path);

std::string format_double(double v);  // 17 significant digits
std::string decay_csv(const DecayReport& r);
std::string trace_csv(const std::vector<std::pair<Index, double>>& rows);

Json to_json(const Vector& v);
Json to_json(const Matrix& m);
Json to_json(const CoefficientValue& v);
Json to_json(const DecayReport& r);
Json to_json(const TheoremReport& r);
Json to_json(const CriterionReport& r);
Json to_json(const DoeblinWitness& w);
Json to_json(const PerturbationReport& r);
Json to_json(const SummabilityProxy& s);
Json to_json(const TransferReport& r);
Json to_json(const ChainMetricValue& v);
Json to_json(const LipschitzReport& r);
Json to_json(const LawReport& r);
Json error_json(const Error& e);

}  // namespace deltap
