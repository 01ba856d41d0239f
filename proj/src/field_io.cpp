#include "ortholip/field_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ortholip {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '+')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw std::invalid_argument("cannot parse number '" + std::string(text) + "'");
  return v;
}

nlohmann::json grid_to_json(const Grid& grid) {
  nlohmann::json j;
  j["dim"] = grid.dim();
  auto nodes = nlohmann::json::array();
  auto spacing = nlohmann::json::array();
  auto origin = nlohmann::json::array();
  for (int a = 0; a < grid.dim(); ++a) {
    nodes.push_back(grid.nodes(a));
    spacing.push_back(grid.spacing(a));
    origin.push_back(grid.origin(a));
  }
  j["nodes_per_axis"] = nodes;
  j["spacing"] = spacing;
  j["origin"] = origin;
  return j;
}

Grid grid_from_json(const nlohmann::json& j) {
  auto nodes = j.at("nodes_per_axis").get<std::vector<std::size_t>>();
  auto spacing = j.at("spacing").get<std::vector<double>>();
  auto origin = j.contains("origin") ? j.at("origin").get<std::vector<double>>()
                                     : std::vector<double>(nodes.size(), 0.0);
  if (j.contains("dim") && j.at("dim").get<std::size_t>() != nodes.size())
    throw std::invalid_argument("grid header: dim does not match nodes_per_axis");
  return Grid(std::move(nodes), std::move(spacing), std::move(origin));
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_field(const ScalarField& field, const std::filesystem::path& base) {
  const Grid& g = field.grid;
  nlohmann::json header = grid_to_json(g);
  header["format"] = "ortholip-field";
  header["version"] = 1;
  std::filesystem::path json_path = base;
  json_path += ".json";
  std::filesystem::path csv_path = base;
  csv_path += ".csv";

  std::string csv;
  csv.reserve(g.node_count() * 32);
  csv += g.dim() == 2 ? "i0,i1,value\n" : "i0,i1,i2,value\n";
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const Index idx = g.multi_index(n);
    for (int a = 0; a < g.dim(); ++a) {
      csv += std::to_string(idx[a]);
      csv += ',';
    }
    csv += format_double(field.values[n]);
    csv += '\n';
  }
  write_text_atomic(csv_path, csv);
  write_text_atomic(json_path, header.dump(2) + "\n");
}

ScalarField read_field(const std::filesystem::path& base) {
  std::filesystem::path json_path = base;
  json_path += ".json";
  std::filesystem::path csv_path = base;
  csv_path += ".csv";
  std::ifstream hj(json_path);
  if (!hj) throw std::runtime_error("cannot open " + json_path.string());
  const Grid g = grid_from_json(nlohmann::json::parse(hj));

  std::ifstream in(csv_path);
  if (!in) throw std::runtime_error("cannot open " + csv_path.string());
  ScalarField out(g);
  std::vector<char> seen(g.node_count(), 0);
  std::string line;
  std::getline(in, line);  // header
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::string_view rest(line);
    Index idx{0, 0, 0};
    for (int a = 0; a < g.dim(); ++a) {
      const auto comma = rest.find(',');
      if (comma == std::string_view::npos) throw std::invalid_argument("field csv: short row");
      std::size_t v = 0;
      auto res = std::from_chars(rest.data(), rest.data() + comma, v);
      if (res.ec != std::errc() || v >= g.nodes(a))
        throw std::invalid_argument("field csv: bad index in row '" + line + "'");
      idx[a] = v;
      rest.remove_prefix(comma + 1);
    }
    const std::size_t n = g.index(idx);
    if (seen[n]) throw std::invalid_argument("field csv: duplicate node");
    seen[n] = 1;
    out.values[n] = parse_double(rest);
    ++rows;
  }
  if (rows != g.node_count()) throw std::invalid_argument("field csv: row count does not match grid");
  return out;
}

}  // namespace ortholip
