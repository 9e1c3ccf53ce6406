#include "monoglot/monoglot.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>

#include "common/error.hpp"
#include "common/io.hpp"
#include "config/run_config.hpp"
#include "corpus/prepare.hpp"
#include "decode/rewriter.hpp"
#include "json.hpp"
#include "metrics/m2.hpp"
#include "metrics/scores.hpp"
#include "model/transformer.hpp"
#include "styleclf/classifier.hpp"
#include "text/subwords.hpp"
#include "text/tokenizer.hpp"
#include "text/truecaser.hpp"
#include "text/unicode.hpp"
#include "toylang/harness.hpp"
#include "train/trainer.hpp"

using json = nlohmann::json;

struct mg_config {
  mg::config::RunConfig cfg;
};

struct mg_bundle {
  std::unique_ptr<mg::decode::Bundle> bundle;
};

struct mg_classifier {
  std::unique_ptr<mg::styleclf::StyleClassifier> clf;
};

namespace {

thread_local std::string g_last_error;

std::mutex g_log_mutex;
mg_log_fn g_log_fn = nullptr;
void* g_log_user = nullptr;

void log_line(const std::string& line) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  if (g_log_fn) g_log_fn(line.c_str(), g_log_user);
}

mg_status status_of(mg::ErrorKind kind) {
  switch (kind) {
    case mg::ErrorKind::kInvalidArgument: return MG_ERR_INVALID_ARGUMENT;
    case mg::ErrorKind::kDimension: return MG_ERR_DIMENSION;
    case mg::ErrorKind::kContract: return MG_ERR_CONTRACT;
    case mg::ErrorKind::kNumeric: return MG_ERR_NUMERIC;
    case mg::ErrorKind::kConfig: return MG_ERR_CONFIG;
    case mg::ErrorKind::kParse: return MG_ERR_PARSE;
    case mg::ErrorKind::kIo: return MG_ERR_IO;
    case mg::ErrorKind::kUnknownTag: return MG_ERR_UNKNOWN_TAG;
  }
  return MG_ERR_INTERNAL;
}

// Runs `body`, turning exceptions into a status and the thread's last error.
template <typename F>
mg_status guarded(F&& body) {
  g_last_error.clear();
  try {
    body();
    return MG_OK;
  } catch (const mg::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return MG_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return MG_ERR_INTERNAL;
  }
}

void need(bool ok, const std::string& what) {
  if (!ok) mg::fail(mg::ErrorKind::kInvalidArgument, what);
}

std::string arg(const char* s, const char* name) {
  need(s != nullptr, std::string(name) + " is null");
  return s;
}

void give(const std::string& s, char** out) {
  need(out != nullptr, "output pointer is null");
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  *out = p;
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? " " : "") + v[i];
  return out;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::vector<std::string> out;
  std::istringstream in(mg::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(line);
  }
  return out;
}

std::vector<mg::metrics::Tokens> read_token_lines(const std::string& path, const std::string& lang) {
  std::vector<mg::metrics::Tokens> out;
  for (const auto& line : read_lines(path)) {
    out.push_back(lang.empty() ? mg::text::split_whitespace(line) : mg::text::tokenize(line, lang));
  }
  return out;
}

const mg::config::RunConfig& config_of(const mg_config* cfg) {
  static const mg::config::RunConfig kDefaults;
  return cfg ? cfg->cfg : kDefaults;
}

void echo_config(const mg::config::RunConfig& cfg) {
  log_line("effective configuration:");
  std::istringstream in(cfg.echo());
  std::string line;
  while (std::getline(in, line)) log_line("  " + line);
}

}  // namespace

extern "C" {

const char* mg_version(void) { return "0.1.0"; }

const char* mg_status_name(mg_status status) {
  switch (status) {
    case MG_OK: return "ok";
    case MG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MG_ERR_DIMENSION: return "dimension error";
    case MG_ERR_CONTRACT: return "contract violation";
    case MG_ERR_NUMERIC: return "numeric error";
    case MG_ERR_CONFIG: return "configuration error";
    case MG_ERR_PARSE: return "parse error";
    case MG_ERR_IO: return "i/o error";
    case MG_ERR_UNKNOWN_TAG: return "unknown tag";
    case MG_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* mg_last_error(void) { return g_last_error.c_str(); }

void mg_string_free(char* s) { std::free(s); }

void mg_set_log(mg_log_fn fn, void* user) {
  std::lock_guard<std::mutex> lock(g_log_mutex);
  g_log_fn = fn;
  g_log_user = user;
}

mg_status mg_config_new(mg_config** out) {
  return guarded([&] {
    need(out != nullptr, "output pointer is null");
    *out = new mg_config{};
  });
}

mg_status mg_config_load(const char* path, mg_config** out) {
  return guarded([&] {
    need(out != nullptr, "output pointer is null");
    auto cfg = std::make_unique<mg_config>(mg_config{mg::config::RunConfig::load(arg(path, "path"))});
    for (const auto& w : cfg->cfg.warnings()) log_line("warning: " + w);
    *out = cfg.release();
  });
}

mg_status mg_config_set(mg_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg != nullptr, "config is null");
    cfg->cfg.set(arg(key, "key"), arg(value, "value"));
  });
}

mg_status mg_config_get(const mg_config* cfg, const char* key, char** value) {
  return guarded([&] { give(config_of(cfg).get(arg(key, "key")), value); });
}

mg_status mg_config_echo(const mg_config* cfg, char** text) {
  return guarded([&] { give(config_of(cfg).echo(), text); });
}

mg_status mg_config_warnings(const mg_config* cfg, char** text) {
  return guarded([&] {
    std::string out;
    for (const auto& w : config_of(cfg).warnings()) out += w + "\n";
    give(out, text);
  });
}

mg_status mg_config_keys(char** text) {
  return guarded([&] {
    std::string out;
    for (const auto& k : mg::config::known_keys()) out += k.key + " = " + k.default_value + "  # " + k.help + "\n";
    give(out, text);
  });
}

void mg_config_free(mg_config* cfg) { delete cfg; }

mg_status mg_toylang(const mg_config* cfg, int langs, size_t sentences, const char* out_dir, char** report) {
  return guarded([&] {
    const auto& c = config_of(cfg);
    need(langs >= 1 && langs <= 3, "langs must be 1, 2 or 3");
    need(sentences >= 1, "sentences must be positive");
    const std::string dir = arg(out_dir, "out_dir");
    const size_t held_out = std::max<size_t>(1, sentences / 25);
    const uint64_t seed = static_cast<uint64_t>(c.get_int("seed"));
    const auto data = mg::toylang::make_toy_data(langs, sentences, held_out, held_out, seed);
    mg::toylang::write_toy_tree(data, dir, seed);
    json r;
    r["languages"] = json::array();
    for (const auto& l : data.langs) r["languages"].push_back(l.tag);
    r["train_concepts"] = data.train.size();
    r["valid_concepts"] = data.valid.size();
    r["test_concepts"] = data.test.size();
    r["train_pairs"] = data.train_pairs.size();
    r["seed"] = seed;
    r["out"] = dir;
    give(r.dump(), report);
  });
}

mg_status mg_prepare(const mg_config* cfg, const char* in_dir, const char* out_dir, char** report) {
  return guarded([&] {
    const auto& c = config_of(cfg);
    mg::corpus::PrepareOptions o;
    o.input_dir = arg(in_dir, "in_dir");
    o.output_dir = arg(out_dir, "out_dir");
    o.subword_vocab = static_cast<int>(c.get_int("subword_vocab"));
    o.balance_cap = static_cast<size_t>(c.get_int("balance_cap"));
    o.clean.max_len = static_cast<int>(c.get_int("clean_max_len"));
    o.clean.max_ratio = c.get_real("clean_max_ratio");
    o.seed = static_cast<uint64_t>(c.get_int("seed"));
    const auto rep = mg::corpus::prepare(o);
    json r;
    r["train_in"] = rep.train_in;
    r["train_out"] = rep.train_out;
    r["valid_out"] = rep.valid_out;
    r["test_out"] = rep.test_out;
    r["vocab_size"] = rep.vocab_size;
    r["languages"] = rep.tags.langs;
    r["styles"] = rep.tags.domains;
    give(r.dump(), report);
  });
}

mg_status mg_subwords_learn(const mg_config* cfg, const char* input_path, const char* lang, const char* out_dir,
                            char** report) {
  return guarded([&] {
    const auto& c = config_of(cfg);
    const std::string l = arg(lang, "lang"), dir = arg(out_dir, "out_dir");
    std::vector<std::string> tokens;
    for (const auto& line : read_lines(arg(input_path, "input_path"))) {
      for (auto& t : mg::text::tokenize(line, l)) tokens.push_back(std::move(t));
    }
    need(!tokens.empty(), "no tokens in " + std::string(input_path));
    const auto model = mg::text::SubwordModel::learn(tokens, static_cast<size_t>(c.get_int("subword_vocab")));
    std::map<std::string, long> counts;
    for (const auto& u : model.apply(tokens)) ++counts[u];
    const auto vocab = mg::text::Vocab::build(counts, model.alphabet());
    std::filesystem::create_directories(dir);
    model.save(mg::text::Pipeline::subwords_file(dir));
    vocab.save(mg::text::Pipeline::vocab_file(dir));
    json r;
    r["merges"] = model.merges().size();
    r["alphabet"] = model.alphabet().size();
    r["vocab_size"] = vocab.size();
    r["tokens"] = tokens.size();
    give(r.dump(), report);
  });
}

mg_status mg_subwords_apply(const char* model_dir, const char* tokens, char** units) {
  return guarded([&] {
    const std::string dir = arg(model_dir, "model_dir");
    const auto vocab = mg::text::Vocab::load(mg::text::Pipeline::vocab_file(dir));
    const auto model = mg::text::SubwordModel::load(mg::text::Pipeline::subwords_file(dir), vocab.alphabet());
    give(join(model.apply(mg::text::split_whitespace(arg(tokens, "tokens")))), units);
  });
}

mg_status mg_subwords_revert(const char* units, char** tokens) {
  return guarded([&] { give(join(mg::text::revert_subwords(mg::text::split_whitespace(arg(units, "units")))), tokens); });
}

mg_status mg_truecase_train(const char* input_path, const char* lang, const char* model_path, char** report) {
  return guarded([&] {
    const std::string l = arg(lang, "lang");
    std::vector<std::vector<std::string>> corpus;
    for (const auto& line : read_lines(arg(input_path, "input_path"))) corpus.push_back(mg::text::tokenize(line, l));
    const auto model = mg::text::TruecaseModel::train(corpus);
    model.save(arg(model_path, "model_path"));
    json r;
    r["sentences"] = corpus.size();
    r["words"] = model.size();
    give(r.dump(), report);
  });
}

mg_status mg_truecase_apply(const char* model_path, const char* lang, const char* sentence, char** tokens) {
  return guarded([&] {
    const auto model = mg::text::TruecaseModel::load(arg(model_path, "model_path"));
    give(join(mg::text::truecase(mg::text::tokenize(arg(sentence, "sentence"), arg(lang, "lang")), model)), tokens);
  });
}

mg_status mg_truecase_restore(const char* lang, const char* tokens, char** sentence) {
  return guarded([&] {
    const auto words = mg::text::detruecase(mg::text::split_whitespace(arg(tokens, "tokens")));
    give(mg::text::detokenize(words, arg(lang, "lang")), sentence);
  });
}

mg_status mg_train(const mg_config* cfg, const char* data_dir, const char* model_dir, int resume, char** report) {
  return guarded([&] {
    const auto& c = config_of(cfg);
    echo_config(c);
    const std::string dir = arg(model_dir, "model_dir");
    const auto data = mg::corpus::load_prepared(arg(data_dir, "data_dir"));
    const auto train_set = mg::corpus::encode_pairs(data.train, data.pipeline, data.tags, true);
    const auto valid_set = mg::corpus::encode_pairs(data.valid, data.pipeline, data.tags, true);

    mg::model::ModelConfig mc = c.model_config();
    mc.token_vocab = data.pipeline.vocab.size();
    mc.langs = data.tags.langs;
    mc.domains = data.tags.domains;
    mc.validate();
    mg::model::Transformer model(mc, static_cast<uint64_t>(c.get_int("seed")));

    mg::train::TrainOptions o = c.train_options();
    o.out_dir = dir;
    o.log = log_line;
    std::optional<mg::model::Checkpoint> last;
    if (resume) last = mg::model::Checkpoint::load(mg::train::last_file(dir));
    std::filesystem::create_directories(dir);
    data.pipeline.save(dir);
    data.tags.save(mg::corpus::tags_file(dir));
    mg::write_file(dir + "/config.txt", c.echo());
    const auto result = mg::train::train(model, train_set, valid_set, o, last ? &*last : nullptr);

    json r;
    r["checkpoints"] = result.log.size();
    r["stop_reason"] = result.stop_reason;
    r["best"] = result.best_path;
    r["last"] = result.last_path;
    double best = 0.0;
    for (size_t i = 0; i < result.log.size(); ++i) {
      if (i == 0 || result.log[i].valid_ppl < best) best = result.log[i].valid_ppl;
    }
    r["best_valid_ppl"] = best;
    r["updates"] = result.log.empty() ? 0 : result.log.back().updates;
    give(r.dump(), report);
  });
}

mg_status mg_bundle_load(const char* path, mg_bundle** out) {
  return guarded([&] {
    need(out != nullptr, "output pointer is null");
    *out = new mg_bundle{mg::decode::Bundle::load(arg(path, "path"))};
  });
}

void mg_bundle_free(mg_bundle* bundle) { delete bundle; }

mg_status mg_bundle_tags(const mg_bundle* bundle, char** out) {
  return guarded([&] {
    need(bundle != nullptr, "bundle is null");
    json r;
    r["languages"] = bundle->bundle->tags.langs;
    r["styles"] = bundle->bundle->tags.domains;
    give(r.dump(), out);
  });
}

mg_status mg_bundle_rewrite(const mg_bundle* bundle, const char* request_json, char** response_json) {
  return guarded([&] {
    need(bundle != nullptr, "bundle is null");
    const json req = json::parse(arg(request_json, "request_json"));
    need(req.is_object(), "request must be a JSON object");
    auto text_field = [&](const char* key) {
      if (!req.contains(key) || !req[key].is_string()) {
        mg::fail(mg::ErrorKind::kInvalidArgument, std::string("request field '") + key + "' must be a string");
      }
      return req[key].get<std::string>();
    };
    mg::decode::RewriteRequest r;
    r.text = text_field("text");
    r.source_lang = text_field("source_lang");
    r.target_lang = text_field("target_lang");
    r.target_style = text_field("target_style");
    if (req.contains("beam")) {
      need(req["beam"].is_number_integer(), "request field 'beam' must be an integer");
      r.beam = req["beam"].get<int>();
    }
    if (req.contains("length_alpha")) {
      need(req["length_alpha"].is_number(), "request field 'length_alpha' must be a number");
      r.length_alpha = req["length_alpha"].get<double>();
    }
    const auto result = mg::decode::rewrite(*bundle->bundle, r);
    json out;
    out["output"] = result.output;
    out["score"] = result.score;
    out["tokens_in"] = result.tokens_in;
    out["tokens_out"] = result.tokens_out;
    give(out.dump(), response_json);
  });
}

mg_status mg_evaluate(const char* request_json, char** report) {
  return guarded([&] {
    const json req = json::parse(arg(request_json, "request_json"));
    need(req.is_object() && req.contains("metric") && req["metric"].is_string(), "request needs a 'metric' string");
    const std::string metric = req["metric"];
    const std::string lang = req.value("lang", std::string());
    auto path = [&](const char* key) {
      if (!req.contains(key) || !req[key].is_string()) {
        mg::fail(mg::ErrorKind::kInvalidArgument, std::string("metric ") + metric + " needs '" + key + "'");
      }
      return req[key].get<std::string>();
    };
    auto refs = [&] {
      need(req.contains("refs") && req["refs"].is_array() && !req["refs"].empty(),
           "metric " + metric + " needs 'refs' (a list of files)");
      std::vector<std::vector<mg::metrics::Tokens>> out;
      for (const auto& p : req["refs"]) out.push_back(read_token_lines(p.get<std::string>(), lang));
      return out;
    };
    const auto hyps = read_token_lines(path("hyp"), lang);
    mg::metrics::MetricReport rep;
    if (metric == "bleu") {
      const auto r = refs();
      need(r.size() == 1, "bleu takes exactly one reference file");
      rep = mg::metrics::corpus_bleu(hyps, r[0]);
    } else if (metric == "gleu") {
      const auto srcs = read_token_lines(path("src"), lang);
      const auto r = refs();
      std::vector<std::vector<mg::metrics::Tokens>> per_sentence(hyps.size());
      for (const auto& file : r) {
        if (file.size() != hyps.size()) {
          mg::fail(mg::ErrorKind::kInvalidArgument, "reference has " + std::to_string(file.size()) + " lines, hypothesis " +
                                                        std::to_string(hyps.size()));
        }
        for (size_t i = 0; i < hyps.size(); ++i) per_sentence[i].push_back(file[i]);
      }
      rep = mg::metrics::corpus_gleu(srcs, hyps, per_sentence);
    } else if (metric == "m2") {
      const std::string gold_path = path("gold");
      rep = mg::metrics::m2_score(hyps, mg::metrics::parse_m2(mg::read_file(gold_path), gold_path));
    } else {
      mg::fail(mg::ErrorKind::kInvalidArgument, "unknown metric '" + metric + "' (expected bleu, gleu or m2)");
    }
    json r;
    r["metric"] = rep.metric;
    r["value"] = rep.value;
    if (metric == "m2") {
      r["precision"] = rep.precision;
      r["recall"] = rep.recall;
    }
    r["sentences"] = hyps.size();
    give(r.dump(), report);
  });
}

mg_status mg_classifier_train(const mg_config* cfg, const char* data_path, const char* model_path, char** report) {
  return guarded([&] {
    const auto& c = config_of(cfg);
    echo_config(c);
    const auto data = mg::styleclf::read_labeled(arg(data_path, "data_path"));
    auto trained = mg::styleclf::train_classifier(data, c.classifier_config(), static_cast<uint64_t>(c.get_int("seed")),
                                                  log_line);
    trained.classifier->save(arg(model_path, "model_path"));
    json r;
    r["valid_accuracy"] = trained.valid_accuracy;
    r["accuracy_trace"] = trained.accuracy_trace;
    r["labels"] = trained.classifier->config().labels;
    r["sentences"] = data.size();
    give(r.dump(), report);
  });
}

mg_status mg_classifier_load(const char* path, mg_classifier** out) {
  return guarded([&] {
    need(out != nullptr, "output pointer is null");
    *out = new mg_classifier{
        std::make_unique<mg::styleclf::StyleClassifier>(mg::styleclf::StyleClassifier::load(arg(path, "path")))};
  });
}

void mg_classifier_free(mg_classifier* clf) { delete clf; }

mg_status mg_classifier_predict(const mg_classifier* clf, const char* sentence, char** out) {
  return guarded([&] {
    need(clf != nullptr, "classifier is null");
    const auto p = clf->clf->predict(arg(sentence, "sentence"));
    json r;
    r["label"] = p.label;
    r["probabilities"] = json::object();
    const auto& labels = clf->clf->config().labels;
    for (size_t i = 0; i < labels.size(); ++i) r["probabilities"][labels[i]] = p.probabilities[i];
    give(r.dump(), out);
  });
}

mg_status mg_classifier_transfer_rate(const mg_classifier* clf, const char* sentences, const char* target_label,
                                      double* rate) {
  return guarded([&] {
    need(clf != nullptr, "classifier is null");
    need(rate != nullptr, "output pointer is null");
    std::vector<std::string> lines;
    std::istringstream in(arg(sentences, "sentences"));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty()) lines.push_back(line);
    }
    *rate = mg::styleclf::transfer_rate(*clf->clf, lines, arg(target_label, "target_label"));
  });
}

}  // extern "C"
