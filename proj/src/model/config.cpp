#include "model/config.hpp"

#include <map>
#include <sstream>

#include "common/error.hpp"
#include "text/unicode.hpp"

namespace mg::model {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string float_repr(float v) {
  std::ostringstream o;
  o.precision(9);
  o << v;
  return o.str();
}

}  // namespace

void ModelConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::kConfig, "model config: " + what);
  };
  need(layers >= 1, "layers must be >= 1");
  need(heads >= 1, "heads must be >= 1");
  need(model_dim >= 2, "model_dim must be >= 2");
  need(model_dim % heads == 0, "model_dim " + std::to_string(model_dim) + " not divisible by heads " +
                                   std::to_string(heads));
  need(ff_dim >= 1, "ff_dim must be >= 1");
  need(max_positions >= 1, "max_positions must be >= 1");
  need(token_vocab >= 5, "token_vocab must be >= 5");
  need(factor_dim >= 1, "factor_dim must be >= 1");
  need(dropout >= 0.0f && dropout < 1.0f, "dropout must be in [0, 1)");
  need(label_smoothing >= 0.0f && label_smoothing < 1.0f, "label_smoothing must be in [0, 1)");
  need(!langs.empty(), "no languages");
  need(!domains.empty(), "no domains");
}

std::string ModelConfig::serialize() const {
  std::ostringstream o;
  o << "layers=" << layers << "\n"
    << "heads=" << heads << "\n"
    << "model_dim=" << model_dim << "\n"
    << "ff_dim=" << ff_dim << "\n"
    << "max_positions=" << max_positions << "\n"
    << "token_vocab=" << token_vocab << "\n"
    << "factor_dim=" << factor_dim << "\n"
    << "dropout=" << float_repr(dropout) << "\n"
    << "label_smoothing=" << float_repr(label_smoothing) << "\n"
    << "langs=" << text::join(langs, ",") << "\n"
    << "domains=" << text::join(domains, ",") << "\n";
  return o.str();
}

ModelConfig ModelConfig::parse(const std::string& content) {
  ModelConfig c;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kParse, "model config: bad line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    try {
      if (key == "layers") c.layers = std::stoi(value);
      else if (key == "heads") c.heads = std::stoi(value);
      else if (key == "model_dim") c.model_dim = std::stoi(value);
      else if (key == "ff_dim") c.ff_dim = std::stoi(value);
      else if (key == "max_positions") c.max_positions = std::stoi(value);
      else if (key == "token_vocab") c.token_vocab = std::stoi(value);
      else if (key == "factor_dim") c.factor_dim = std::stoi(value);
      else if (key == "dropout") c.dropout = std::stof(value);
      else if (key == "label_smoothing") c.label_smoothing = std::stof(value);
      else if (key == "langs") c.langs = split_list(value);
      else if (key == "domains") c.domains = split_list(value);
      else fail(ErrorKind::kParse, "model config: unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::kParse, "model config: bad value for '" + key + "'");
    }
  }
  c.validate();
  return c;
}

}  // namespace mg::model
