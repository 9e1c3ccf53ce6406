#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "monoglot/monoglot.h"
#include "service.hpp"

namespace {

using json = nlohmann::json;

// A failed library call; carries the status and the library's message.
struct CallError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(mg_status st) {
  if (st != MG_OK) throw CallError(std::string(mg_status_name(st)) + ": " + mg_last_error());
}

std::string take(char* s) {
  std::string out = s ? s : "";
  mg_string_free(s);
  return out;
}

void print_report(char* report) { std::cout << take(report) << "\n"; }

struct ConfigHandle {
  mg_config* cfg = nullptr;
  ~ConfigHandle() { mg_config_free(cfg); }
};

// Options shared by every command.
struct Common {
  std::string config_path;
  std::vector<std::string> sets;            // KEY=VALUE overrides
  std::map<std::string, std::string> flags;  // command flags bound to config keys
};

// Builds the effective configuration: defaults, then the file, then
// --set overrides, then command flags.
void build_config(const Common& c, ConfigHandle& h, bool echo) {
  if (c.config_path.empty()) {
    check(mg_config_new(&h.cfg));
  } else {
    check(mg_config_load(c.config_path.c_str(), &h.cfg));
  }
  for (const auto& kv : c.sets) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) throw CallError("--set expects KEY=VALUE, got '" + kv + "'");
    check(mg_config_set(h.cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
  }
  for (const auto& [key, value] : c.flags) check(mg_config_set(h.cfg, key.c_str(), value.c_str()));
  if (echo) {
    char* text = nullptr;
    check(mg_config_echo(h.cfg, &text));
    std::cerr << "effective configuration:\n" << take(text);
  }
}

// Binds a command flag to a config key; a given flag overrides the file.
void key_flag(CLI::App* cmd, Common& c, const std::string& flag, const std::string& key, const std::string& help) {
  cmd->add_option_function<std::string>(
      flag, [&c, key](const std::string& v) { c.flags[key] = v; }, help + " (config key " + key + ")");
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "config file of `key = value` lines")->check(CLI::ExistingFile);
  cmd->add_option("--set", c.sets, "override a config key, KEY=VALUE (repeatable)");
  key_flag(cmd, c, "--seed", "seed", "random seed");
}

template <typename F>
void for_each_line(F&& f) {
  std::string line;
  while (std::getline(std::cin, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    f(line);
  }
}

void log_to_stderr(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

struct BundleHandle {
  mg_bundle* b = nullptr;
  ~BundleHandle() { mg_bundle_free(b); }
};

void rewrite_stream(const std::string& model, const std::string& from, const std::string& to,
                    const std::string& style, const ConfigHandle& h, bool verbose) {
  BundleHandle bundle;
  check(mg_bundle_load(model.c_str(), &bundle.b));
  char* beam = nullptr;
  char* alpha = nullptr;
  check(mg_config_get(h.cfg, "beam", &beam));
  check(mg_config_get(h.cfg, "length_alpha", &alpha));
  json req;
  req["source_lang"] = from;
  req["target_lang"] = to;
  req["target_style"] = style;
  req["beam"] = std::stoi(take(beam));
  req["length_alpha"] = std::stod(take(alpha));
  for_each_line([&](const std::string& line) {
    if (line.find_first_not_of(" \t") == std::string::npos) {
      std::cout << "\n";
      return;
    }
    req["text"] = line;
    char* out = nullptr;
    check(mg_bundle_rewrite(bundle.b, req.dump().c_str(), &out));
    const json res = json::parse(take(out));
    std::cout << res["output"].get<std::string>() << "\n" << std::flush;
    if (verbose) std::cerr << "score " << res["score"] << " units " << res["tokens_in"] << " -> " << res["tokens_out"] << "\n";
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monoglot: multilingual factored transformer for monolingual rewriting"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mg_version()));
  app.footer("Run `monoglot COMMAND --help` for the options of a command.");

  Common common;
  std::function<void()> run;

  // toylang
  auto* toy = app.add_subcommand("toylang", "generate a toy-language corpus tree");
  int toy_langs = 3;
  size_t toy_sentences = 5000;
  std::string toy_out;
  toy->add_option("--langs", toy_langs, "number of languages (1-3)")->capture_default_str();
  toy->add_option("--sentences", toy_sentences, "training concepts")->capture_default_str();
  toy->add_option("--out", toy_out, "output directory")->required();
  add_common(toy, common);
  toy->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, !common.config_path.empty());
      char* report = nullptr;
      check(mg_toylang(h.cfg, toy_langs, toy_sentences, toy_out.c_str(), &report));
      print_report(report);
    };
  });

  // prepare
  auto* prep = app.add_subcommand("prepare", "clean, balance and encode a corpus tree");
  std::string prep_in, prep_out;
  prep->add_option("--in", prep_in, "directory with train.tsv, valid.tsv, test.tsv")->required();
  prep->add_option("--out", prep_out, "output directory")->required();
  add_common(prep, common);
  key_flag(prep, common, "--subword-vocab", "subword_vocab", "subword vocabulary size");
  key_flag(prep, common, "--balance-cap", "balance_cap", "max pairs per stream");
  prep->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, !common.config_path.empty());
      char* report = nullptr;
      check(mg_prepare(h.cfg, prep_in.c_str(), prep_out.c_str(), &report));
      print_report(report);
    };
  });

  // subwords
  auto* sub = app.add_subcommand("subwords", "learn or apply subword segmentation");
  sub->require_subcommand(1);
  auto* sub_learn = sub->add_subcommand("learn", "learn a subword model from a text file");
  std::string sub_input, sub_lang, sub_dir;
  sub_learn->add_option("--input", sub_input, "text file, one sentence per line")->required()->check(CLI::ExistingFile);
  sub_learn->add_option("--lang", sub_lang, "language tag for tokenization")->required();
  sub_learn->add_option("--out", sub_dir, "output directory")->required();
  add_common(sub_learn, common);
  key_flag(sub_learn, common, "--vocab", "subword_vocab", "subword vocabulary size");
  sub_learn->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, !common.config_path.empty());
      char* report = nullptr;
      check(mg_subwords_learn(h.cfg, sub_input.c_str(), sub_lang.c_str(), sub_dir.c_str(), &report));
      print_report(report);
    };
  });
  auto* sub_apply = sub->add_subcommand("apply", "segment tokenized lines from stdin");
  sub_apply->add_option("--model", sub_dir, "directory with subwords.bpe and vocab.txt")->required();
  add_common(sub_apply, common);
  sub_apply->callback([&] {
    run = [&] {
      for_each_line([&](const std::string& line) {
        char* out = nullptr;
        check(mg_subwords_apply(sub_dir.c_str(), line.c_str(), &out));
        std::cout << take(out) << "\n";
      });
    };
  });
  auto* sub_revert = sub->add_subcommand("revert", "join subword units from stdin back into tokens");
  add_common(sub_revert, common);
  sub_revert->callback([&] {
    run = [&] {
      for_each_line([&](const std::string& line) {
        char* out = nullptr;
        check(mg_subwords_revert(line.c_str(), &out));
        std::cout << take(out) << "\n";
      });
    };
  });

  // truecase
  auto* tc = app.add_subcommand("truecase", "train or apply a truecaser");
  tc->require_subcommand(1);
  std::string tc_input, tc_lang, tc_model;
  auto* tc_train = tc->add_subcommand("train", "train a truecaser on a text file");
  tc_train->add_option("--input", tc_input, "text file, one sentence per line")->required()->check(CLI::ExistingFile);
  tc_train->add_option("--lang", tc_lang, "language tag")->required();
  tc_train->add_option("--model", tc_model, "model file to write")->required();
  add_common(tc_train, common);
  tc_train->callback([&] {
    run = [&] {
      char* report = nullptr;
      check(mg_truecase_train(tc_input.c_str(), tc_lang.c_str(), tc_model.c_str(), &report));
      print_report(report);
    };
  });
  auto* tc_apply = tc->add_subcommand("apply", "tokenize and truecase raw lines from stdin");
  tc_apply->add_option("--model", tc_model, "truecaser model file")->required()->check(CLI::ExistingFile);
  tc_apply->add_option("--lang", tc_lang, "language tag")->required();
  add_common(tc_apply, common);
  tc_apply->callback([&] {
    run = [&] {
      for_each_line([&](const std::string& line) {
        char* out = nullptr;
        check(mg_truecase_apply(tc_model.c_str(), tc_lang.c_str(), line.c_str(), &out));
        std::cout << take(out) << "\n";
      });
    };
  });
  auto* tc_restore = tc->add_subcommand("restore", "recase and detokenize token lines from stdin");
  tc_restore->add_option("--lang", tc_lang, "language tag")->required();
  add_common(tc_restore, common);
  tc_restore->callback([&] {
    run = [&] {
      for_each_line([&](const std::string& line) {
        char* out = nullptr;
        check(mg_truecase_restore(tc_lang.c_str(), line.c_str(), &out));
        std::cout << take(out) << "\n";
      });
    };
  });

  // train
  auto* tr = app.add_subcommand("train", "train a model on a prepared directory");
  std::string tr_data, tr_model;
  bool tr_resume = false;
  tr->add_option("--data", tr_data, "prepared directory")->required()->check(CLI::ExistingDirectory);
  tr->add_option("--model", tr_model, "model directory to write")->required();
  tr->add_flag("--resume", tr_resume, "continue from MODEL/last.ckpt");
  add_common(tr, common);
  key_flag(tr, common, "--lr", "lr", "initial learning rate");
  key_flag(tr, common, "--max-updates", "max_updates", "update limit");
  key_flag(tr, common, "--max-epochs", "max_epochs", "epoch limit");
  key_flag(tr, common, "--batch-words", "batch_words", "units per batch");
  tr->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, false);  // the library echoes through the log
      char* report = nullptr;
      check(mg_train(h.cfg, tr_data.c_str(), tr_model.c_str(), tr_resume ? 1 : 0, &report));
      print_report(report);
    };
  });

  // rewrite and translate
  std::string dec_model, dec_lang, dec_from, dec_to, dec_style;
  bool dec_verbose = false;
  auto* rw = app.add_subcommand("rewrite", "rewrite stdin lines within one language");
  rw->add_option("--model", dec_model, "model directory or checkpoint")->required();
  rw->add_option("--lang", dec_lang, "language tag")->required();
  rw->add_option("--style", dec_style, "target style (domain) tag")->required();
  rw->add_flag("--verbose", dec_verbose, "print scores to stderr");
  add_common(rw, common);
  key_flag(rw, common, "--beam", "beam", "beam width");
  key_flag(rw, common, "--length-alpha", "length_alpha", "length normalization exponent");
  rw->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, !common.config_path.empty());
      rewrite_stream(dec_model, dec_lang, dec_lang, dec_style, h, dec_verbose);
    };
  });
  auto* tl = app.add_subcommand("translate", "translate stdin lines between languages");
  tl->add_option("--model", dec_model, "model directory or checkpoint")->required();
  tl->add_option("--from", dec_from, "source language tag")->required();
  tl->add_option("--to", dec_to, "target language tag")->required();
  tl->add_option("--style", dec_style, "target style (domain) tag")->required();
  tl->add_flag("--verbose", dec_verbose, "print scores to stderr");
  add_common(tl, common);
  key_flag(tl, common, "--beam", "beam", "beam width");
  key_flag(tl, common, "--length-alpha", "length_alpha", "length normalization exponent");
  tl->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, !common.config_path.empty());
      rewrite_stream(dec_model, dec_from, dec_to, dec_style, h, dec_verbose);
    };
  });

  // evaluate
  auto* ev = app.add_subcommand("evaluate", "score a hypothesis file with BLEU, GLEU or M2");
  std::string ev_metric, ev_hyp, ev_src, ev_gold, ev_lang;
  std::vector<std::string> ev_refs;
  ev->add_option("--metric", ev_metric, "bleu, gleu or m2")
      ->required()
      ->check(CLI::IsMember({"bleu", "gleu", "m2"}));
  ev->add_option("--hyp", ev_hyp, "hypotheses, one per line")->required()->check(CLI::ExistingFile);
  ev->add_option("--src", ev_src, "sources (GLEU)")->check(CLI::ExistingFile);
  ev->add_option("--ref", ev_refs, "reference file (repeatable; BLEU takes one)")->check(CLI::ExistingFile);
  ev->add_option("--gold", ev_gold, "gold M2 file")->check(CLI::ExistingFile);
  ev->add_option("--lang", ev_lang, "tokenize lines for this language; default splits on whitespace");
  add_common(ev, common);
  ev->callback([&] {
    run = [&] {
      json req;
      req["metric"] = ev_metric;
      req["hyp"] = ev_hyp;
      if (!ev_src.empty()) req["src"] = ev_src;
      if (!ev_refs.empty()) req["refs"] = ev_refs;
      if (!ev_gold.empty()) req["gold"] = ev_gold;
      if (!ev_lang.empty()) req["lang"] = ev_lang;
      char* report = nullptr;
      check(mg_evaluate(req.dump().c_str(), &report));
      const json r = json::parse(take(report));
      char line[128];
      if (ev_metric == "m2") {
        std::snprintf(line, sizeof line, "P %.4f R %.4f F0.5 %.4f", r["precision"].get<double>(),
                      r["recall"].get<double>(), r["value"].get<double>());
      } else {
        if (ev_metric == "bleu") {
          std::snprintf(line, sizeof line, "BLEU %.2f", r["value"].get<double>());
        } else {
          std::snprintf(line, sizeof line, "GLEU %.4f", r["value"].get<double>());
        }
      }
      std::cout << line << "\n";
    };
  });

  // classify-train and classify
  std::string clf_data, clf_model, clf_target;
  auto* ct = app.add_subcommand("classify-train", "train a style classifier on `sentence<TAB>label` lines");
  ct->add_option("--data", clf_data, "labeled TSV file")->required()->check(CLI::ExistingFile);
  ct->add_option("--model", clf_model, "classifier file to write")->required();
  add_common(ct, common);
  ct->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, false);
      char* report = nullptr;
      check(mg_classifier_train(h.cfg, clf_data.c_str(), clf_model.c_str(), &report));
      print_report(report);
    };
  });
  auto* cl = app.add_subcommand("classify", "label stdin lines, or report a transfer rate with --target");
  cl->add_option("--model", clf_model, "classifier file")->required()->check(CLI::ExistingFile);
  cl->add_option("--target", clf_target, "print the percentage of lines labeled TARGET");
  add_common(cl, common);
  cl->callback([&] {
    run = [&] {
      mg_classifier* clf = nullptr;
      check(mg_classifier_load(clf_model.c_str(), &clf));
      std::unique_ptr<mg_classifier, void (*)(mg_classifier*)> guard(clf, mg_classifier_free);
      if (!clf_target.empty()) {
        std::string all;
        for_each_line([&](const std::string& line) { all += line + "\n"; });
        double rate = 0.0;
        check(mg_classifier_transfer_rate(clf, all.c_str(), clf_target.c_str(), &rate));
        std::printf("%.2f\n", rate);
        return;
      }
      for_each_line([&](const std::string& line) {
        char* out = nullptr;
        check(mg_classifier_predict(clf, line.c_str(), &out));
        const json r = json::parse(take(out));
        const std::string label = r["label"];
        std::printf("%s\t%.4f\n", label.c_str(), r["probabilities"][label].get<double>());
      });
    };
  });

  // serve
  auto* sv = app.add_subcommand("serve", "HTTP service: POST /translate, GET /languages, GET /health");
  std::string sv_model;
  mgsvc::ServeOptions sv_opts;
  sv->add_option("--model", sv_model, "model directory or checkpoint (default: $MONOGLOT_MODEL)");
  sv->add_option("--host", sv_opts.host, "address to bind")->capture_default_str();
  sv->add_option("--cors-origin", sv_opts.cors_origin, "Access-Control-Allow-Origin value")->capture_default_str();
  add_common(sv, common);
  key_flag(sv, common, "--port", "port", "listening port");
  sv->callback([&] {
    run = [&] {
      ConfigHandle h;
      build_config(common, h, !common.config_path.empty());
      if (sv_model.empty()) {
        const char* env = std::getenv("MONOGLOT_MODEL");
        if (!env || !*env) throw CallError("no model: pass --model or set MONOGLOT_MODEL");
        sv_model = env;
      }
      char* port = nullptr;
      check(mg_config_get(h.cfg, "port", &port));
      sv_opts.port = std::stoi(take(port));
      mgsvc::Service service;
      service.start_loading(sv_model);
      if (mgsvc::serve(service, sv_opts) != 0) throw CallError("server failed");
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
      std::cerr << "unknown command '" << argv[1] << "'\n";
    } else {
      app.exit(e);
    }
    std::cerr << "\n" << app.help();
    return 2;
  }

  mg_set_log(log_to_stderr, nullptr);
  try {
    if (run) run();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
