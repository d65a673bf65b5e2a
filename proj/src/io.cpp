#include "boreuq/io.hpp"

#include "boreuq/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace boreuq::io {

std::string fmt_double(double v) { return fmt::format("{}", v); }

json interpolant_to_json(const sg::SparseInterpolant& itp, const json& metadata) {
  json j;
  j["format"] = "boreuq-interpolant";
  j["version"] = 1;
  j["dimension"] = itp.dimension();
  j["parameter_names"] = itp.parameter_names;
  json dom = json::array();
  for (const auto& ax : itp.domain().axes()) dom.push_back({ax.lo, ax.hi});
  j["domain"] = dom;
  json idx = json::array();
  for (std::size_t k = 0; k < itp.index_set().size(); ++k) {
    const auto [first, last] = itp.point_range(k);
    json codes = json::array(), surp = json::array();
    for (std::size_t p = first; p < last; ++p) {
      json c = json::array();
      for (std::size_t d = 0; d < itp.dimension(); ++d) c.push_back(itp.point_code(p, d));
      codes.push_back(std::move(c));
      surp.push_back(itp.surpluses()[p]);
    }
    idx.push_back({{"levels", itp.index_set()[k].levels}, {"codes", codes}, {"surpluses", surp}});
  }
  j["indices"] = idx;
  j["metadata"] = metadata;
  return j;
}

sg::SparseInterpolant interpolant_from_json(const json& j) {
  try {
    if (j.at("format").get<std::string>() != "boreuq-interpolant") throw InvalidArgument("not an interpolant file");
    if (j.at("version").get<int>() != 1) throw InvalidArgument("unsupported interpolant version");
    const auto dim = j.at("dimension").get<std::size_t>();
    std::vector<sg::Interval> axes;
    for (const auto& a : j.at("domain")) axes.push_back({a.at(0).get<double>(), a.at(1).get<double>()});
    if (axes.size() != dim) throw InvalidArgument("domain size does not match dimension");
    sg::SparseInterpolant itp{sg::BoxDomain(std::move(axes))};
    if (j.contains("parameter_names")) itp.parameter_names = j["parameter_names"].get<std::vector<std::string>>();
    for (const auto& e : j.at("indices")) {
      sg::MultiIndex idx(e.at("levels").get<std::vector<int>>());
      if (idx.size() != dim) throw InvalidArgument("index size does not match dimension");
      const auto& codes = e.at("codes");
      const auto& surp = e.at("surpluses");
      if (codes.size() != surp.size() || codes.size() != sg::tensor_new_count(idx)) {
        throw InvalidArgument("index " + idx.str() + " has the wrong number of points");
      }
      if (!itp.admissible(idx)) throw InvalidArgument("index " + idx.str() + " is not admissible");
      for (std::size_t p = 0; p < codes.size(); ++p) {
        const auto c = codes[p].get<std::vector<std::int32_t>>();
        itp.append_point(idx, c, surp[p].get<double>());
      }
    }
    return itp;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed interpolant: ") + e.what());
  }
}

void save_interpolant(const std::filesystem::path& path, const sg::SparseInterpolant& itp, const json& metadata) {
  write_file(path, interpolant_to_json(itp, metadata).dump(1) + "\n");
}

sg::SparseInterpolant load_interpolant(const std::filesystem::path& path, json* metadata) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path.string() + ": " + e.what());
  }
  auto itp = interpolant_from_json(j);
  if (metadata) *metadata = j.value("metadata", json::object());
  return itp;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidArgument("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace boreuq::io
