#include "cqq/source_io.hpp"

#include <fstream>

#include "cqq/errors.hpp"

namespace cqq {

using nlohmann::json;

json matrix_to_json(const CMatrix& m) {
  json re = json::array(), im = json::array();
  for (std::size_t i = 0; i < m.rows; ++i) {
    json rrow = json::array(), irow = json::array();
    for (std::size_t j = 0; j < m.cols; ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(std::move(rrow));
    im.push_back(std::move(irow));
  }
  return json{{"re", std::move(re)}, {"im", std::move(im)}};
}

CMatrix matrix_from_json(const json& j) {
  if (!j.contains("re") || !j.contains("im"))
    throw ValidationError("matrix entry lacks re/im arrays");
  const auto& re = j.at("re");
  const auto& im = j.at("im");
  if (!re.is_array() || !im.is_array() || re.size() != im.size() || re.empty())
    throw ValidationError("matrix re/im arrays malformed");
  const std::size_t rows = re.size();
  const std::size_t cols = re.at(0).size();
  CMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (re.at(i).size() != cols || im.at(i).size() != cols)
      throw ValidationError("matrix rows have inconsistent lengths");
    for (std::size_t jx = 0; jx < cols; ++jx)
      m(i, jx) = cplx(re.at(i).at(jx).get<double>(),
                      im.at(i).at(jx).get<double>());
  }
  return m;
}

json source_to_json(const CompoundSource& source) {
  json states = json::array();
  for (const auto& s : source.states) {
    json v = json::array();
    for (const auto& out : s.channel.outputs) v.push_back(matrix_to_json(out.m));
    states.push_back(json{{"p", s.p.probs}, {"V", std::move(v)}});
  }
  return json{{"alphabet", source.alphabet()},
              {"dimB", source.dim_b()},
              {"dimE", source.dim_e()},
              {"states", std::move(states)}};
}

CompoundSource source_from_json(const json& j) {
  for (const char* key : {"alphabet", "dimB", "dimE", "states"})
    if (!j.contains(key))
      throw ValidationError(std::string("source file missing field '") + key +
                            "'");
  const int alphabet = j.at("alphabet").get<int>();
  const int db = j.at("dimB").get<int>();
  const int de = j.at("dimE").get<int>();
  if (alphabet < 1 || db < 1 || de < 1)
    throw ValidationError("alphabet/dimB/dimE must be positive");
  if (!j.at("states").is_array() || j.at("states").empty())
    throw ValidationError("states must be a nonempty array");

  std::vector<CqqState> states;
  int index = 0;
  for (const auto& js : j.at("states")) {
    const std::string where = "states[" + std::to_string(index) + "]";
    if (!js.contains("p") || !js.contains("V"))
      throw ValidationError(where + " missing p or V");
    std::vector<double> p = js.at("p").get<std::vector<double>>();
    if (static_cast<int>(p.size()) != alphabet)
      throw ValidationError(where + ".p length differs from alphabet");
    if (auto err = distribution_violation(p))
      throw ValidationError(where + ".p: " + *err);
    if (static_cast<int>(js.at("V").size()) != alphabet)
      throw ValidationError(where + ".V length differs from alphabet");
    std::vector<DensityMatrix> outs;
    int letter = 0;
    for (const auto& jm : js.at("V")) {
      CMatrix m = matrix_from_json(jm);
      if (auto err = density_violation(m, {db, de}))
        throw ValidationError(where + ".V[" + std::to_string(letter) +
                              "]: " + *err);
      outs.push_back(DensityMatrix{std::move(m), {db, de}});
      ++letter;
    }
    states.push_back(CqqState::make(ClassicalDistribution{std::move(p)},
                                    CqChannel::make(std::move(outs))));
    ++index;
  }
  return CompoundSource::make(std::move(states));
}

CompoundSource load_source_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open source file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ValidationError("source file is not valid JSON: " +
                          std::string(e.what()));
  }
  return source_from_json(j);
}

void save_source_file(const CompoundSource& source, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write source file: " + path);
  out << source_to_json(source).dump(2) << '\n';
}

}  // namespace cqq
