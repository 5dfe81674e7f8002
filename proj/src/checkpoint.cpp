#include "alice/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace alice::checkpoint {

using nlohmann::json;

void save(const std::string& path, const std::vector<const ad::Parameter*>& params,
          const std::map<std::string, double>& meta) {
  json tensors = json::object();
  for (const ad::Parameter* p : params) {
    tensors[p->name] = {{"shape", p->shape}, {"values", p->value}};
  }
  json doc = {{"format", kFormat}, {"meta", meta}, {"tensors", tensors}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << doc.dump();
}

std::map<std::string, double> load(const std::string& path,
                                   const std::vector<ad::Parameter*>& params) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot read " + path);
  json doc = json::parse(in);
  if (doc.value("format", "") != kFormat)
    throw std::runtime_error("checkpoint: " + path + " is not a " + std::string(kFormat) +
                             " file");
  const json& tensors = doc.at("tensors");
  for (ad::Parameter* p : params) {
    if (!tensors.contains(p->name))
      throw std::runtime_error("checkpoint: " + path + " has no tensor named " + p->name);
    const json& t = tensors.at(p->name);
    const auto shape = t.at("shape").get<ad::Shape>();
    if (shape != p->shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + p->name + ": file has " +
                               ad::shape_str(shape) + ", parameter is " +
                               ad::shape_str(p->shape));
    t.at("values").get_to(p->value);
    p->zero_grad();
  }
  std::map<std::string, double> meta;
  if (doc.contains("meta")) doc.at("meta").get_to(meta);
  return meta;
}

}  // namespace alice::checkpoint
