#include "eshare/scenario_io.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "eshare/error.hpp"

namespace eshare {

namespace {

using nlohmann::json;

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(Errc::InvalidScenario, where + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw Error(Errc::InvalidScenario, where + ": '" + key + "' must be a number");
  return v.get<double>();
}

int index(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number_integer()) {
    throw Error(Errc::InvalidScenario, where + ": '" + key + "' must be an integer");
  }
  return obj.at(key).get<int>();
}

const json& member(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(Errc::InvalidScenario, where + ": missing '" + key + "'");
  }
  return obj.at(key);
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw Error(Errc::InvalidScenario, "scenario must be a JSON object");
  const json& version = member(doc, "version", "scenario");
  if (!version.is_string() || version.get<std::string>() != kScenarioVersion) {
    throw Error(Errc::InvalidScenario, std::string("unsupported version; expected ") + kScenarioVersion);
  }

  const json& net = member(doc, "network", "scenario");
  const int buses = index(net, "bus_count", "network");
  if (buses < 1) throw Error(Errc::InvalidScenario, "network: bus_count must be positive");
  int slack = buses;
  if (net.contains("slack") && !net.at("slack").is_null()) slack = index(net, "slack", "network");

  const json& lines_doc = member(net, "lines", "network");
  if (!lines_doc.is_array()) throw Error(Errc::InvalidScenario, "network: 'lines' must be an array");
  std::vector<LineSpec> lines;
  for (std::size_t l = 0; l < lines_doc.size(); ++l) {
    const json& ld = lines_doc[l];
    const std::string where = "line " + std::to_string(l + 1);
    LineSpec spec;
    spec.from = index(ld, "from", where) - 1;
    spec.to = index(ld, "to", where) - 1;
    if (ld.contains("weight")) spec.weight = number(ld, "weight", where);
    if (ld.contains("limit") && !ld.at("limit").is_null()) spec.limit = number(ld, "limit", where);
    lines.push_back(spec);
  }
  NetworkModel network = build_network(buses, std::move(lines), slack - 1);

  const json& pros_doc = member(doc, "prosumers", "scenario");
  if (!pros_doc.is_array()) throw Error(Errc::InvalidScenario, "'prosumers' must be an array");
  std::vector<Prosumer> prosumers;
  for (std::size_t i = 0; i < pros_doc.size(); ++i) {
    const json& pd = pros_doc[i];
    const std::string where = "prosumer " + std::to_string(i + 1);
    Prosumer pr;
    pr.c = number(pd, "c", where);
    pr.d = number(pd, "d", where);
    pr.D = number(pd, "D", where);
    const int present = pd.contains("p0") + pd.contains("E0") + pd.contains("D0");
    if (present == 3) {
      pr.baseline = Baseline{number(pd, "p0", where), number(pd, "E0", where), number(pd, "D0", where)};
    } else if (present != 0) {
      throw Error(Errc::InvalidScenario, where + ": baseline needs all of p0, E0, D0");
    }
    prosumers.push_back(pr);
  }

  const double a = number(doc, "a", "scenario");
  std::string label = doc.value("label", std::string{});
  std::string units = doc.value("units", std::string{});
  return make_scenario(std::move(network), std::move(prosumers), a, std::move(label), std::move(units));
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["version"] = kScenarioVersion;
  if (!s.label.empty()) doc["label"] = s.label;
  if (!s.units.empty()) doc["units"] = s.units;
  doc["a"] = s.a;
  json lines = json::array();
  for (const auto& line : s.network.lines()) {
    json ld{{"from", line.from + 1}, {"to", line.to + 1}, {"weight", line.weight}};
    ld["limit"] = std::isfinite(line.limit) ? json(line.limit) : json(nullptr);
    lines.push_back(std::move(ld));
  }
  doc["network"] = {{"bus_count", s.network.bus_count()}, {"slack", s.network.slack() + 1}, {"lines", lines}};
  json pros = json::array();
  for (const auto& pr : s.prosumers) {
    json pd{{"c", pr.c}, {"d", pr.d}, {"D", pr.D}};
    if (pr.baseline) {
      pd["p0"] = pr.baseline->p0;
      pd["E0"] = pr.baseline->E0;
      pd["D0"] = pr.baseline->D0;
    }
    pros.push_back(std::move(pd));
  }
  doc["prosumers"] = std::move(pros);
  return doc;
}

LoadedScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::FileError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  json doc;
  try {
    doc = json::parse(bytes);
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidScenario, path.string() + ": " + e.what());
  }
  return {parse_scenario(doc), path.string(), sha256_hex(bytes)};
}

std::string sha256_hex(const std::string& bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned int k = 0; k < len; ++k) hex << std::hex << std::setw(2) << std::setfill('0') << int(md[k]);
  return hex.str();
}

}  // namespace eshare
