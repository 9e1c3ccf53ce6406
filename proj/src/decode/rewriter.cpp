#include "decode/rewriter.hpp"

#include <filesystem>

#include "common/error.hpp"
#include "corpus/prepare.hpp"
#include "text/unicode.hpp"
#include "train/trainer.hpp"

namespace mg::decode {

namespace fs = std::filesystem;

std::unique_ptr<Bundle> Bundle::load(const std::string& path) {
  std::string dir = path, ckpt_path = train::best_file(path);
  if (fs::is_regular_file(path)) {
    dir = fs::path(path).parent_path().string();
    if (dir.empty()) dir = ".";
    ckpt_path = path;
  }
  if (!fs::exists(ckpt_path)) fail(ErrorKind::kIo, "no checkpoint at " + ckpt_path);
  const model::Checkpoint ckpt = model::Checkpoint::load(ckpt_path);
  corpus::TagSet tags = corpus::TagSet::load(corpus::tags_file(dir));
  model::Transformer model = model::restore(ckpt);
  if (model.config().langs != tags.langs || model.config().domains != tags.domains) {
    fail(ErrorKind::kConfig, "tags.txt in " + dir + " does not match the checkpoint's factor inventory");
  }
  text::Pipeline pipeline = text::Pipeline::load(dir, tags.langs);
  if (pipeline.vocab.size() != model.config().token_vocab) {
    fail(ErrorKind::kConfig, "vocabulary in " + dir + " has " + std::to_string(pipeline.vocab.size()) +
                                 " units, checkpoint expects " + std::to_string(model.config().token_vocab));
  }
  return std::unique_ptr<Bundle>(new Bundle{std::move(model), std::move(pipeline), std::move(tags)});
}

namespace {

Hypothesis best_hypothesis(const model::Transformer& model, const std::vector<int>& src, int lang, int style, int beam,
                           double length_alpha) {
  const model::EncodedSource enc = model.encode_source(src, lang, style);
  BeamOptions opts;
  opts.beam = beam;
  opts.length_alpha = length_alpha;
  opts.max_len = std::min<int>(max_output_length(src.size()), model.config().max_positions - 1);
  return beam_search([&](const std::vector<std::vector<int>>& p) { return model.next_logits(enc, p); }, opts).front();
}

}  // namespace

std::vector<int> decode_units(const model::Transformer& model, const std::vector<int>& src, int lang_factor,
                              int style_factor, int beam, double length_alpha) {
  std::vector<int> out = best_hypothesis(model, src, lang_factor, style_factor, beam, length_alpha).units;
  out.pop_back();  // EOS
  return out;
}

RewriteResult rewrite(const Bundle& bundle, const RewriteRequest& req) {
  const int lang = bundle.tags.lang_index(req.target_lang);
  const int style = bundle.tags.domain_index(req.target_style);
  const int source = bundle.tags.lang_index(req.source_lang);
  auto unknown = [&](const std::string& what, const std::string& tag, const std::vector<std::string>& valid) {
    fail(ErrorKind::kUnknownTag, "unknown " + what + " '" + tag + "' (available: " + text::join(valid, ", ") + ")");
  };
  if (source < 0) unknown("source language", req.source_lang, bundle.tags.langs);
  if (lang < 0) unknown("target language", req.target_lang, bundle.tags.langs);
  if (style < 0) unknown("style", req.target_style, bundle.tags.domains);
  if (req.beam < 1) fail(ErrorKind::kInvalidArgument, "beam must be at least 1");

  const std::vector<std::string> units = bundle.pipeline.units(req.text, req.source_lang);
  const std::vector<int> src = bundle.pipeline.vocab.encode(units);
  if (static_cast<int>(src.size()) > bundle.model.config().max_positions) {
    fail(ErrorKind::kInvalidArgument, "input has " + std::to_string(src.size()) + " units, the model accepts at most " +
                                          std::to_string(bundle.model.config().max_positions));
  }
  RewriteResult r;
  r.tokens_in = static_cast<int>(src.size());
  if (src.empty()) return r;

  const Hypothesis best = best_hypothesis(bundle.model, src, lang, style, req.beam, req.length_alpha);
  std::vector<int> ids(best.units.begin(), best.units.end() - 1);
  r.units = bundle.pipeline.vocab.decode(ids);
  r.output = bundle.pipeline.restore(r.units, req.target_lang);
  r.score = best.score;
  r.tokens_out = static_cast<int>(ids.size());
  return r;
}

}  // namespace mg::decode
