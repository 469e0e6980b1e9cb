#include "jdslc/model_io.hpp"

#include <fstream>

#include "jdslc/error.hpp"

namespace jdslc {

namespace {

using nlohmann::json;

std::vector<std::string> read_alphabet(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc.at(key).is_array()) {
    throw InvalidInput(std::string("missing array field '") + key + "'");
  }
  std::vector<std::string> out;
  for (const auto& v : doc.at(key)) {
    out.push_back(v.is_string() ? v.get<std::string>() : v.dump());
  }
  if (out.empty()) throw InvalidInput(std::string("'") + key + "' must be nonempty");
  return out;
}

Table read_table(const json& node, std::size_t rows, std::size_t cols, const char* name) {
  if (!node.is_array()) throw InvalidInput(std::string("'") + name + "' must be an array");
  std::vector<double> flat;
  flat.reserve(rows * cols);
  const bool nested = !node.empty() && node.front().is_array();
  if (nested) {
    if (node.size() != rows) {
      throw InvalidInput(std::string("'") + name + "' must have " + std::to_string(rows) + " rows");
    }
    for (const auto& row : node) {
      if (!row.is_array() || row.size() != cols) {
        throw InvalidInput(std::string("'") + name + "' rows must have " + std::to_string(cols) +
                           " entries");
      }
      for (const auto& v : row) {
        if (!v.is_number()) throw InvalidInput(std::string("'") + name + "' entries must be numbers");
        flat.push_back(v.get<double>());
      }
    }
  } else {
    if (node.size() != rows * cols) {
      throw InvalidInput(std::string("'") + name + "' must have " + std::to_string(rows * cols) +
                         " entries");
    }
    for (const auto& v : node) {
      if (!v.is_number()) throw InvalidInput(std::string("'") + name + "' entries must be numbers");
      flat.push_back(v.get<double>());
    }
  }
  return Table(rows, cols, std::move(flat));
}

json table_json(const Table& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < t.cols(); ++c) row.push_back(t(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SourceFile parse_source_json(const json& doc) {
  if (!doc.is_object()) throw InvalidInput("source document must be a JSON object");
  auto semantic = read_alphabet(doc, "semantic_alphabet");
  auto data = read_alphabet(doc, "data_alphabet");
  if (!doc.contains("reconstruction_alphabets")) {
    throw InvalidInput("missing field 'reconstruction_alphabets'");
  }
  const json& recon = doc.at("reconstruction_alphabets");
  std::vector<std::string> semantic_recon;
  std::vector<std::string> data_recon;
  if (recon.is_object()) {
    semantic_recon = read_alphabet(recon, "semantic");
    data_recon = read_alphabet(recon, "data");
  } else if (recon.is_array() && recon.size() == 2) {
    json wrapped = {{"semantic", recon[0]}, {"data", recon[1]}};
    semantic_recon = read_alphabet(wrapped, "semantic");
    data_recon = read_alphabet(wrapped, "data");
  } else {
    throw InvalidInput("'reconstruction_alphabets' must be {semantic, data} or a pair of arrays");
  }
  for (const char* key : {"joint_pmf", "ds_table", "dx_table"}) {
    if (!doc.contains(key)) throw InvalidInput(std::string("missing field '") + key + "'");
  }
  Table joint = read_table(doc.at("joint_pmf"), semantic.size(), data.size(), "joint_pmf");
  Table ds = read_table(doc.at("ds_table"), semantic.size(), semantic_recon.size(), "ds_table");
  Table dx = read_table(doc.at("dx_table"), data.size(), data_recon.size(), "dx_table");

  SourceFile out;
  out.source = JointSource(std::move(joint), std::move(semantic), std::move(data));
  require_valid(out.source);
  out.spec = make_distortion_spec(out.source, std::move(ds), std::move(dx), std::move(semantic_recon),
                                  std::move(data_recon));
  return out;
}

SourceFile load_source_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open source file '" + path + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InvalidInput("malformed JSON in '" + path + "': " + e.what());
  }
  return parse_source_json(doc);
}

json to_json(const SourceFile& file) {
  return {
      {"semantic_alphabet", file.source.semantic_alphabet()},
      {"data_alphabet", file.source.data_alphabet()},
      {"reconstruction_alphabets",
       {{"semantic", file.spec.semantic_recon_alphabet}, {"data", file.spec.data_recon_alphabet}}},
      {"joint_pmf", table_json(file.source.joint_pmf())},
      {"ds_table", table_json(file.spec.ds_table)},
      {"dx_table", table_json(file.spec.dx_table)},
  };
}

}  // namespace jdslc
