#pragma once

#include <string>

#include <json.hpp>

#include "cqq/source.hpp"

namespace cqq {

// Complex matrices travel as paired row-major real arrays "re"/"im"; a
// source file is {"alphabet": k, "dimB": dB, "dimE": dE, "states":
// [{"p": [...], "V": [{"re": [[...]], "im": [[...]]}, ...]}]}.

nlohmann::json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j);

nlohmann::json source_to_json(const CompoundSource& source);

// Throws ValidationError naming the first violated invariant (with the
// offending state index / field in the message).
CompoundSource source_from_json(const nlohmann::json& j);

CompoundSource load_source_file(const std::string& path);
void save_source_file(const CompoundSource& source, const std::string& path);

}  // namespace cqq
