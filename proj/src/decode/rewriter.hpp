#pragma once

#include <memory>
#include <string>
#include <vector>

#include "corpus/corpus.hpp"
#include "decode/beam.hpp"
#include "model/transformer.hpp"
#include "text/pipeline.hpp"

namespace mg::decode {

// A trained model with everything needed to read and write text.
// Immutable once loaded; safe for concurrent readers.
struct Bundle {
  model::Transformer model;
  text::Pipeline pipeline;
  corpus::TagSet tags;

  // `path` is a model directory (best.ckpt, pipeline files, tags.txt) or a
  // checkpoint file whose directory holds the pipeline files.
  static std::unique_ptr<Bundle> load(const std::string& path);
};

struct RewriteRequest {
  std::string text;
  std::string source_lang;
  std::string target_lang;
  std::string target_style;  // domain tag
  int beam = 5;
  double length_alpha = 1.0;
};

struct RewriteResult {
  std::string output;
  double score = 0.0;  // normalized log-probability of the best hypothesis
  int tokens_in = 0;   // source units
  int tokens_out = 0;  // output units without EOS
  std::vector<std::string> units;
};

// Throws an unknown-tag error listing the valid tags when a tag is not in
// the bundle, and invalid-argument for a bad beam.
RewriteResult rewrite(const Bundle& bundle, const RewriteRequest& req);

// Beam decode of already-encoded units; returns output ids without EOS.
std::vector<int> decode_units(const model::Transformer& model, const std::vector<int>& src, int lang_factor,
                              int style_factor, int beam, double length_alpha);

}  // namespace mg::decode
