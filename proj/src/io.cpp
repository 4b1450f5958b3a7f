#include "lipcert/io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lipcert/error.hpp"

namespace lipcert {
namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& source,
                             const std::string& what) {
  throw Error(ErrorCode::kParse, source + ": " + what);
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // nlohmann reports byte offsets; convert to line/column
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    parse_fail(source, "malformed JSON at line " + std::to_string(line) +
                           ", column " + std::to_string(col));
  } catch (const json::out_of_range& e) {
    parse_fail(source, std::string("number out of range: ") + e.what());
  }
}

double number(const json& v, const std::string& source,
              const std::string& where) {
  if (!v.is_number()) parse_fail(source, where + ": expected a number");
  double x = v.get<double>();
  if (!std::isfinite(x)) parse_fail(source, where + ": non-finite value");
  return x;
}

int dimension(const json& doc, const std::string& source, const char* key) {
  if (!doc.contains(key)) {
    parse_fail(source, std::string("missing field '") + key + "'");
  }
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    parse_fail(source, std::string("field '") + key +
                           "': expected a positive integer");
  }
  return static_cast<int>(v.get<long long>());
}

Vector vector_field(const json& doc, const std::string& source,
                    const char* key, int size) {
  std::string name = std::string("field '") + key + "'";
  if (!doc.contains(key)) parse_fail(source, "missing " + name);
  const json& v = doc.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != size) {
    parse_fail(source, name + ": expected an array of " +
                           std::to_string(size) + " numbers");
  }
  Vector out(size);
  for (int i = 0; i < size; ++i) {
    out(i) = number(v[i], source, name + "[" + std::to_string(i) + "]");
  }
  return out;
}

Matrix matrix_field(const json& doc, const std::string& source,
                    const char* key, int rows, int cols) {
  std::string name = std::string("field '") + key + "'";
  if (!doc.contains(key)) parse_fail(source, "missing " + name);
  const json& v = doc.at(key);
  if (!v.is_array() || static_cast<int>(v.size()) != rows) {
    parse_fail(source, name + ": expected " + std::to_string(rows) + " rows");
  }
  Matrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    const json& row = v[i];
    std::string rname = name + " row " + std::to_string(i);
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      parse_fail(source, rname + ": expected " + std::to_string(cols) +
                             " numbers");
    }
    for (int j = 0; j < cols; ++j) {
      out(i, j) = number(row[j], source, rname + "[" + std::to_string(j) + "]");
    }
  }
  return out;
}

json to_json_vector(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json to_json_matrix(const Matrix& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out.push_back(to_json_vector(a.row(i).transpose()));
  }
  return out;
}

json one_based(const std::vector<int>& idx) {
  json out = json::array();
  for (int i : idx) out.push_back(i + 1);
  return out;
}

template <class T>
json optional_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
}

FnnModel parse_model(const std::string& text, const std::string& source,
                     std::vector<std::string>* warnings) {
  json doc = parse_json(text, source);
  if (!doc.is_object()) parse_fail(source, "expected a JSON object");
  const int n = dimension(doc, source, "n");
  const int m = dimension(doc, source, "m");
  const int l = dimension(doc, source, "l");
  Matrix w_in = matrix_field(doc, source, "w_in", n, m);
  Vector b_in = vector_field(doc, source, "b_in", n);
  Matrix w_out = matrix_field(doc, source, "w_out", l, n);
  Vector b_out = Vector::Zero(l);
  if (doc.contains("b_out")) b_out = vector_field(doc, source, "b_out", l);
  if (b_out.cwiseAbs().maxCoeff() > 0.0) {
    if (warnings) {
      warnings->push_back(source +
                          ": nonzero b_out ignored (output bias does not "
                          "affect the local Lipschitz constant)");
    }
    b_out.setZero();
  }
  return FnnModel(std::move(w_in), std::move(b_in), std::move(w_out),
                  std::move(b_out));
}

FnnModel load_model(const std::string& path,
                    std::vector<std::string>* warnings) {
  return parse_model(read_file(path), path, warnings);
}

Vector parse_input(const std::string& text, const std::string& source) {
  json doc = parse_json(text, source);
  if (!doc.is_object() || !doc.contains("w0") || !doc.at("w0").is_array()) {
    parse_fail(source, "expected {\"w0\": [numbers]}");
  }
  const int m = static_cast<int>(doc.at("w0").size());
  if (m == 0) parse_fail(source, "field 'w0': empty array");
  return vector_field(doc, source, "w0", m);
}

Vector load_input(const std::string& path) {
  return parse_input(read_file(path), path);
}

std::string model_to_json(const FnnModel& model) {
  json doc;
  doc["n"] = model.n();
  doc["m"] = model.m();
  doc["l"] = model.l();
  doc["w_in"] = to_json_matrix(model.w_in());
  doc["b_in"] = to_json_vector(model.b_in());
  doc["w_out"] = to_json_matrix(model.w_out());
  doc["b_out"] = to_json_vector(model.b_out());
  return doc.dump(2) + "\n";
}

std::string reduced_model_to_json(const ReducedModel& rm) {
  json doc;
  doc["n"] = rm.n_r();
  doc["m"] = rm.m;
  doc["l"] = rm.l;
  doc["w_in"] = to_json_matrix(rm.w_in_h);
  doc["b_in"] = to_json_vector(rm.b_in_h);
  doc["w_out"] = to_json_matrix(rm.w_out_h);
  doc["b_out"] = to_json_vector(rm.c0);
  doc["affine_gain"] = to_json_matrix(rm.affine_gain());
  doc["partition"] = {{"n_plus", one_based(rm.partition.n_plus)},
                      {"n_zero", one_based(rm.partition.n_zero)},
                      {"n_res", one_based(rm.partition.n_res)}};
  return doc.dump(2) + "\n";
}

std::string certificate_to_json(const Certificate& cert) {
  json doc;
  doc["gamma_upper"] = cert.gamma_upper;
  doc["gamma_dual"] = optional_json(cert.gamma_dual);
  doc["duality_gap"] = optional_json(cert.duality_gap);
  doc["exact"] = cert.exact;
  doc["w_star"] = cert.w_star ? to_json_vector(*cert.w_star) : json(nullptr);
  doc["lower_bound"] = optional_json(cert.lower_bound);
  doc["n_r"] = cert.n_r;
  doc["multiplier_class"] = std::string(to_string(cert.multiplier_class));
  doc["margin_value"] = optional_json(cert.margin_value);
  doc["robust_verdict"] = std::string(to_string(cert.robust_verdict));
  doc["timings"] = {{"reduce_s", cert.timings.reduce_s},
                    {"primal_s", cert.timings.primal_s},
                    {"dual_s", cert.timings.dual_s},
                    {"lower_bound_s", cert.timings.lower_bound_s},
                    {"total_s", cert.timings.total_s}};
  doc["rank_ratio"] = optional_json(cert.rank_ratio);
  doc["primal_status"] = std::string(to_string(cert.primal_status));
  doc["dual_status"] = cert.dual_status
                           ? json(std::string(to_string(*cert.dual_status)))
                           : json(nullptr);
  return doc.dump(2) + "\n";
}

}  // namespace lipcert
