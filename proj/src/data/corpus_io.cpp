#include "adaptms/data/corpus_io.hpp"

#include "adaptms/util/float_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace adaptms::data {

namespace {

constexpr std::string_view kMagic = "#adaptms-corpus";
constexpr std::string_view kVersion = "v1";

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view value_of(std::string_view field, std::string_view key) {
  if (field.substr(0, key.size()) != key || field.size() <= key.size() || field[key.size()] != '=') {
    throw std::invalid_argument("corpus header: expected '" + std::string(key) + "=' field");
  }
  return field.substr(key.size() + 1);
}

}  // namespace

nlohmann::json spec_to_json(const PlatformSpec& s) {
  return {{"platform_id", s.platform_id},
          {"name", s.name},
          {"rating_alpha", s.rating_alpha},
          {"rating_beta", s.rating_beta},
          {"rating_noise_sd", s.rating_noise_sd},
          {"mean_review_tokens", s.mean_review_tokens},
          {"missing_behavior_rate", s.missing_behavior_rate},
          {"vocab_skew_seed", s.vocab_skew_seed},
          {"logged_feature_mask", s.logged_feature_mask},
          {"course_mix", s.course_mix},
          {"schema_scale", s.schema_scale},
          {"schema_noise", s.schema_noise},
          {"boilerplate_share", s.boilerplate_share}};
}

PlatformSpec spec_from_json(const nlohmann::json& j) {
  PlatformSpec s;
  auto read = [&j](const char* key, auto& field) {
    if (j.contains(key)) {
      try {
        j.at(key).get_to(field);
      } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("platform spec field '") + key + "': " + e.what());
      }
    }
  };
  read("platform_id", s.platform_id);
  read("name", s.name);
  read("rating_alpha", s.rating_alpha);
  read("rating_beta", s.rating_beta);
  read("rating_noise_sd", s.rating_noise_sd);
  read("mean_review_tokens", s.mean_review_tokens);
  read("missing_behavior_rate", s.missing_behavior_rate);
  read("vocab_skew_seed", s.vocab_skew_seed);
  read("logged_feature_mask", s.logged_feature_mask);
  read("course_mix", s.course_mix);
  read("schema_scale", s.schema_scale);
  read("schema_noise", s.schema_noise);
  read("boilerplate_share", s.boilerplate_share);
  return s;
}

std::string serialize_corpus(const Corpus& corpus) {
  nlohmann::json specs = nlohmann::json::array();
  for (const auto& s : corpus.specs) specs.push_back(spec_to_json(s));
  std::string out;
  out.reserve(corpus.instances.size() * 200);
  out += kMagic;
  out += '\t';
  out += kVersion;
  out += "\tseed=" + std::to_string(corpus.seed);
  out += "\tspec_fingerprint=" + corpus.spec_fingerprint();
  out += "\tconfig_fingerprint=" + corpus.config_fingerprint;
  out += "\tspecs=" + specs.dump();
  out += '\n';
  for (const auto& inst : corpus.instances) {
    out += std::to_string(inst.platform);
    out += '\t';
    out += std::to_string(inst.time_index);
    out += '\t';
    out += std::to_string(inst.modality);
    out += '\t';
    util::append_double(out, inst.label);
    for (double b : inst.behavior) {
      out += '\t';
      util::append_double(out, b);
    }
    out += '\t';
    for (std::size_t t = 0; t < inst.tokens.size(); ++t) {
      if (t > 0) out += ' ';
      out += std::to_string(inst.tokens[t]);
    }
    out += '\t';
    util::append_double(out, inst.latent);
    out += '\n';
  }
  return out;
}

Corpus parse_corpus(std::string_view text) {
  const std::size_t header_end = text.find('\n');
  if (header_end == std::string_view::npos) throw std::invalid_argument("corpus: missing header");
  const auto header = split_on(text.substr(0, header_end), '\t');
  if (header.size() != 6 || header[0] != kMagic || header[1] != kVersion) {
    throw std::invalid_argument("corpus: unrecognized header");
  }
  Corpus corpus;
  corpus.seed = static_cast<std::uint64_t>(std::stoull(std::string(value_of(header[2], "seed"))));
  const std::string spec_fp(value_of(header[3], "spec_fingerprint"));
  const std::string_view cfg = header[4].substr(0, std::string_view("config_fingerprint=").size());
  if (cfg != "config_fingerprint=") throw std::invalid_argument("corpus header: expected config_fingerprint");
  corpus.config_fingerprint = std::string(header[4].substr(cfg.size()));
  for (const auto& s : nlohmann::json::parse(value_of(header[5], "specs"))) {
    corpus.specs.push_back(spec_from_json(s));
  }
  if (corpus.spec_fingerprint() != spec_fp) {
    throw std::invalid_argument("corpus: spec fingerprint mismatch");
  }

  std::size_t pos = header_end + 1;
  std::size_t line_no = 1;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_on(line, '\t');
    if (f.size() != 4 + kBehaviorDim + 2) {
      throw std::invalid_argument("corpus line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(4 + kBehaviorDim + 2) + " fields, got " +
                                  std::to_string(f.size()));
    }
    try {
      Instance inst;
      inst.platform = static_cast<int>(util::parse_int(f[0]));
      inst.time_index = util::parse_int(f[1]);
      inst.modality = static_cast<int>(util::parse_int(f[2]));
      inst.label = util::parse_double(f[3]);
      for (std::size_t b = 0; b < kBehaviorDim; ++b) inst.behavior[b] = util::parse_double(f[4 + b]);
      const std::string_view toks = f[4 + kBehaviorDim];
      if (!toks.empty()) {
        for (auto t : split_on(toks, ' ')) inst.tokens.push_back(static_cast<TokenId>(util::parse_int(t)));
      }
      inst.latent = util::parse_double(f[5 + kBehaviorDim]);
      if (inst.platform < 0 || static_cast<std::size_t>(inst.platform) >= corpus.specs.size()) {
        throw std::invalid_argument("platform id out of range");
      }
      corpus.instances.push_back(std::move(inst));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("corpus line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::string text = serialize_corpus(corpus);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open corpus file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_corpus(buf.str());
}

}  // namespace adaptms::data
