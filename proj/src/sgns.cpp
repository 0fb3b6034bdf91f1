#include "skillrel/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <thread>

#include "json.hpp"
#include "skillrel/error.hpp"
#include "skillrel/rng.hpp"

namespace skillrel {

namespace {

using nlohmann::json;

// log(1/(1+e^-x)) without overflow on either tail.
double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

std::uint32_t fnv1a32(const char* data, std::size_t len) {
  std::uint32_t h = 2166136261u;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= static_cast<unsigned char>(data[i]);
    h *= 16777619u;
  }
  return h;
}

// Stable per-bucket seed so init does not depend on touch order.
std::uint64_t bucket_seed(std::uint64_t seed, std::uint32_t id) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(id) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Eigen::VectorXd init_bucket(std::uint64_t seed, std::uint32_t id, Eigen::Index dim) {
  Rng rng(bucket_seed(seed, id));
  Eigen::VectorXd v(dim);
  const double half = 0.5 / static_cast<double>(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = rng.uniform_real(-half, half);
  return v;
}

struct Vocab {
  std::vector<std::string> words;             // count desc, then lexicographic
  std::vector<std::size_t> counts;            // aligned with words
  std::unordered_map<std::string, std::size_t> id;
  std::vector<double> noise_cdf;              // unigram^0.75 cumulative

  std::size_t sample_noise(Rng& rng) const {
    const double r = rng.uniform_real() * noise_cdf.back();
    const auto it = std::upper_bound(noise_cdf.begin(), noise_cdf.end(), r);
    return static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - noise_cdf.begin(), static_cast<std::ptrdiff_t>(noise_cdf.size()) - 1));
  }
};

Vocab build_vocab(const std::vector<std::vector<std::string>>& sentences, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;  // ordered for deterministic ties
  for (const auto& sent : sentences)
    for (const auto& tok : sent) ++counts[tok];

  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [word, count] : counts)
    if (count >= min_count) kept.emplace_back(word, count);
  if (kept.empty())
    throw empty_input_error("no token reaches min_count " + std::to_string(min_count));
  std::sort(kept.begin(), kept.end(), [](const auto& x, const auto& y) {
    if (x.second != y.second) return x.second > y.second;
    return x.first < y.first;
  });

  Vocab vocab;
  vocab.noise_cdf.reserve(kept.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    vocab.words.push_back(kept[i].first);
    vocab.counts.push_back(kept[i].second);
    vocab.id.emplace(kept[i].first, i);
    acc += std::pow(static_cast<double>(kept[i].second), 0.75);
    vocab.noise_cdf.push_back(acc);
  }
  return vocab;
}

// One worker's pass over its sentence share. Shared matrices are written
// without locks; with a single worker this is exactly sequential training.
struct TrainShared {
  const std::vector<std::vector<std::size_t>>* sentences;  // vocab ids only
  const Vocab* vocab;
  const SGNSConfig* cfg;
  Eigen::MatrixXd* syn0;
  Eigen::MatrixXd* syn1;
  // Subword mode only:
  std::unordered_map<std::uint32_t, Eigen::VectorXd>* bucket_rows;
  const std::vector<std::vector<std::uint32_t>>* word_ngrams;  // per vocab id
  std::size_t total_positions = 0;
  std::atomic<std::size_t> processed{0};
};

void train_range(TrainShared& sh, std::size_t begin, std::size_t end, std::uint64_t seed) {
  const SGNSConfig& cfg = *sh.cfg;
  const Vocab& vocab = *sh.vocab;
  Rng rng(seed);
  const double lr0 = cfg.learning_rate;
  const double lr_floor = 1e-4 * lr0;
  const std::size_t total_work = sh.total_positions * static_cast<std::size_t>(cfg.epochs);
  const bool subword = cfg.subword.has_value();
  const Eigen::Index dim = sh.syn0->cols();
  Eigen::VectorXd center(dim);
  std::vector<std::size_t> noise_ids(static_cast<std::size_t>(cfg.negatives));

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t s = begin; s < end; ++s) {
      const auto& sent = (*sh.sentences)[s];
      for (std::size_t pos = 0; pos < sent.size(); ++pos) {
        const std::size_t done = sh.processed.fetch_add(1, std::memory_order_relaxed);
        const double progress = static_cast<double>(done) / static_cast<double>(total_work);
        const double lr = std::max(lr_floor, lr0 * (1.0 - progress));

        const std::size_t center_id = sent[pos];
        const int radius = 1 + static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(cfg.window)));

        // Compose the center's input vector once per position.
        double parts = 1.0;
        center = sh.syn0->row(static_cast<Eigen::Index>(center_id));
        if (subword) {
          for (const std::uint32_t id : (*sh.word_ngrams)[center_id]) {
            center += sh.bucket_rows->find(id)->second;
            parts += 1.0;
          }
          center /= parts;
        }

        for (int off = -radius; off <= radius; ++off) {
          if (off == 0) continue;
          const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(pos) + off;
          if (j < 0 || j >= static_cast<std::ptrdiff_t>(sent.size())) continue;
          const std::size_t context_id = sent[static_cast<std::size_t>(j)];

          // A noise draw equal to the context word is redrawn so the pair
          // never trains against itself.
          noise_ids.clear();
          for (int n = 0; n < cfg.negatives; ++n) {
            std::size_t noise_id = context_id;
            for (int tries = 0; tries < 16 && noise_id == context_id; ++tries)
              noise_id = vocab.sample_noise(rng);
            if (noise_id != context_id) noise_ids.push_back(noise_id);  // miss: one-word vocabulary
          }
          Eigen::MatrixXd negatives(noise_ids.size(), dim);
          for (std::size_t n = 0; n < noise_ids.size(); ++n)
            negatives.row(static_cast<Eigen::Index>(n)) =
                sh.syn1->row(static_cast<Eigen::Index>(noise_ids[n]));

          const SgnsStep step =
              sgns_gradients(center, sh.syn1->row(static_cast<Eigen::Index>(context_id)).transpose(),
                             negatives);

          sh.syn1->row(static_cast<Eigen::Index>(context_id)) -= lr * step.d_context.transpose();
          for (std::size_t n = 0; n < noise_ids.size(); ++n)
            sh.syn1->row(static_cast<Eigen::Index>(noise_ids[n])) -=
                lr * step.d_negatives.row(static_cast<Eigen::Index>(n));

          // Input-side update, split evenly over the composed parts.
          const Eigen::VectorXd grad_in = (lr / parts) * step.d_center;
          sh.syn0->row(static_cast<Eigen::Index>(center_id)) -= grad_in.transpose();
          if (subword)
            for (const std::uint32_t id : (*sh.word_ngrams)[center_id])
              sh.bucket_rows->find(id)->second -= grad_in;
        }
      }
    }
  }
}

}  // namespace

void SGNSConfig::validate() const {
  if (dim <= 0) throw config_error("dim must be positive");
  if (window < 1) throw config_error("window must be >= 1");
  if (negatives < 1) throw config_error("negatives must be >= 1");
  if (min_count < 1) throw config_error("min_count must be >= 1");
  if (epochs < 1) throw config_error("epochs must be >= 1");
  if (learning_rate <= 0.0) throw config_error("learning_rate must be positive");
  if (threads < 1) throw config_error("threads must be >= 1");
  if (subword) {
    if (subword->min_n < 1 || subword->max_n < subword->min_n)
      throw config_error("need 1 <= min_n <= max_n");
    if (subword->buckets == 0) throw config_error("buckets must be positive");
  }
}

std::vector<std::uint32_t> subword_ngrams(const std::string& word, int min_n, int max_n,
                                          std::uint32_t buckets) {
  const std::string padded = "<" + word + ">";
  std::vector<std::uint32_t> ids;
  const std::size_t len = padded.size();
  for (int n = min_n; n <= max_n; ++n) {
    if (static_cast<std::size_t>(n) > len) break;
    for (std::size_t start = 0; start + static_cast<std::size_t>(n) <= len; ++start)
      ids.push_back(fnv1a32(padded.data() + start, static_cast<std::size_t>(n)) % buckets);
  }
  return ids;
}

SgnsStep sgns_gradients(const Eigen::VectorXd& center, const Eigen::VectorXd& context,
                        const Eigen::MatrixXd& negatives) {
  SgnsStep step;
  step.d_center = Eigen::VectorXd::Zero(center.size());
  step.d_negatives = Eigen::MatrixXd::Zero(negatives.rows(), negatives.cols());

  const double pos_dot = center.dot(context);
  step.loss = -log_sigmoid(pos_dot);
  const double g_pos = sigmoid(pos_dot) - 1.0;
  step.d_center = g_pos * context;
  step.d_context = g_pos * center;

  for (Eigen::Index n = 0; n < negatives.rows(); ++n) {
    const double dot = center.dot(negatives.row(n).transpose());
    step.loss -= log_sigmoid(-dot);
    const double g = sigmoid(dot);
    step.d_center += g * negatives.row(n).transpose();
    step.d_negatives.row(n) = g * center.transpose();
  }
  return step;
}

Eigen::VectorXd SubwordModel::bucket_vector(std::uint32_t id) const {
  const auto it = bucket_rows.find(id);
  if (it != bucket_rows.end()) return it->second;
  return init_bucket(seed, id, dim);
}

Eigen::VectorXd SubwordModel::word_vector(const std::string& word) const {
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
  double parts = 0.0;
  if (const auto row = word_part.row_of(word)) {
    acc += word_part.vectors.row(*row).transpose();
    parts += 1.0;
  }
  for (const std::uint32_t id : subword_ngrams(word, cfg.min_n, cfg.max_n, cfg.buckets)) {
    acc += bucket_vector(id);
    parts += 1.0;
  }
  if (parts == 0.0) return acc;  // empty word, zero n-grams
  return acc / parts;
}

SGNSModel train_sgns(const std::vector<std::vector<std::string>>& sentences,
                     const SGNSConfig& cfg) {
  cfg.validate();
  const Vocab vocab = build_vocab(sentences, cfg.min_count);
  const Eigen::Index dim = cfg.dim;
  const std::size_t vocab_size = vocab.words.size();

  // Sentences as vocab ids, below-min_count tokens dropped.
  std::vector<std::vector<std::size_t>> encoded;
  encoded.reserve(sentences.size());
  std::size_t total_positions = 0;
  for (const auto& sent : sentences) {
    std::vector<std::size_t> ids;
    ids.reserve(sent.size());
    for (const auto& tok : sent) {
      const auto it = vocab.id.find(tok);
      if (it != vocab.id.end()) ids.push_back(it->second);
    }
    total_positions += ids.size();
    encoded.push_back(std::move(ids));
  }

  Rng init_rng(cfg.seed);
  Eigen::MatrixXd syn0(vocab_size, dim);
  const double half = 0.5 / static_cast<double>(dim);
  for (Eigen::Index r = 0; r < syn0.rows(); ++r)
    for (Eigen::Index c = 0; c < dim; ++c) syn0(r, c) = init_rng.uniform_real(-half, half);
  Eigen::MatrixXd syn1 = Eigen::MatrixXd::Zero(vocab_size, dim);

  // Subword state: the n-gram ids of every vocab word, with their bucket
  // rows created up front so training never mutates the map layout.
  std::unordered_map<std::uint32_t, Eigen::VectorXd> bucket_rows;
  std::vector<std::vector<std::uint32_t>> word_ngrams;
  if (cfg.subword) {
    word_ngrams.resize(vocab_size);
    for (std::size_t w = 0; w < vocab_size; ++w) {
      word_ngrams[w] =
          subword_ngrams(vocab.words[w], cfg.subword->min_n, cfg.subword->max_n, cfg.subword->buckets);
      for (const std::uint32_t id : word_ngrams[w])
        if (!bucket_rows.count(id)) bucket_rows.emplace(id, init_bucket(cfg.seed, id, dim));
    }
  }

  TrainShared sh;
  sh.sentences = &encoded;
  sh.vocab = &vocab;
  sh.cfg = &cfg;
  sh.syn0 = &syn0;
  sh.syn1 = &syn1;
  sh.bucket_rows = &bucket_rows;
  sh.word_ngrams = &word_ngrams;
  sh.total_positions = total_positions;

  const int workers = std::max(1, std::min<int>(cfg.threads, static_cast<int>(encoded.size())));
  if (workers == 1) {
    train_range(sh, 0, encoded.size(), cfg.seed + 1);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (encoded.size() + workers - 1) / workers;
    for (int t = 0; t < workers; ++t) {
      const std::size_t begin = static_cast<std::size_t>(t) * chunk;
      const std::size_t end = std::min(encoded.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back([&sh, begin, end, seed = cfg.seed + 1 + static_cast<std::uint64_t>(t)] {
        train_range(sh, begin, end, seed);
      });
    }
    for (auto& th : pool) th.join();
  }

  SGNSModel model;
  for (std::size_t w = 0; w < vocab_size; ++w) model.freqs.counts[vocab.words[w]] = vocab.counts[w];

  if (cfg.subword) {
    SubwordModel sub;
    sub.cfg = *cfg.subword;
    sub.dim = dim;
    sub.seed = cfg.seed;
    sub.bucket_rows = std::move(bucket_rows);
    for (std::size_t w = 0; w < vocab_size; ++w)
      sub.word_part.add(vocab.words[w], syn0.row(static_cast<Eigen::Index>(w)).transpose());
    for (std::size_t w = 0; w < vocab_size; ++w)
      model.table.add(vocab.words[w], sub.word_vector(vocab.words[w]));
    model.subword = std::move(sub);
  } else {
    for (std::size_t w = 0; w < vocab_size; ++w)
      model.table.add(vocab.words[w], syn0.row(static_cast<Eigen::Index>(w)).transpose());
  }
  return model;
}

std::optional<Eigen::VectorXd> SubwordPhraseEmbedder::embed(const std::string& phrase) const {
  const auto words = tokenize_for_embedding(phrase);
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(model_.dim);
  double weight_sum = 0.0;
  for (const auto& w : words) {
    const double weight = 1.0 / static_cast<double>(freqs_.freq(w));
    acc += weight * model_.word_vector(w);
    weight_sum += weight;
  }
  if (weight_sum == 0.0) return std::nullopt;  // phrase with no tokens at all
  return acc / weight_sum;
}

void save_sgns_model(const SGNSModel& model, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  save_table(model.table, (fs::path(dir) / "vectors.vec").string());
  save_frequencies(model.freqs, (fs::path(dir) / "vocab_freq.tsv").string());

  json manifest{{"type", model.subword ? "subword" : "word"},
                {"dim", model.table.dim()},
                {"vectors", "vectors.vec"},
                {"frequencies", "vocab_freq.tsv"}};
  if (model.subword) {
    const auto& sub = *model.subword;
    manifest["min_n"] = sub.cfg.min_n;
    manifest["max_n"] = sub.cfg.max_n;
    manifest["buckets"] = sub.cfg.buckets;
    manifest["seed"] = sub.seed;
    manifest["word_part"] = "words.vec";
    manifest["ngrams"] = "ngrams.vec";
    save_table(sub.word_part, (fs::path(dir) / "words.vec").string());

    // Bucket rows reuse the table format with decimal ids as tokens.
    EmbeddingTable buckets;
    std::vector<std::uint32_t> ids;
    ids.reserve(sub.bucket_rows.size());
    for (const auto& [id, _] : sub.bucket_rows) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (const std::uint32_t id : ids) buckets.add(std::to_string(id), sub.bucket_rows.at(id));
    save_table(buckets, (fs::path(dir) / "ngrams.vec").string());
  }
  std::ofstream out(fs::path(dir) / "model.json");
  if (!out) throw io_error("cannot write model.json under " + dir);
  out << manifest.dump(2) << '\n';
}

SGNSModel load_sgns_model(const std::string& dir) {
  namespace fs = std::filesystem;
  const auto manifest_path = (fs::path(dir) / "model.json").string();
  std::ifstream in(manifest_path);
  if (!in) throw io_error("cannot read " + manifest_path);
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw parse_error(manifest_path + ": " + e.what());
  }

  SGNSModel model;
  model.table = load_table((fs::path(dir) / manifest.value("vectors", "vectors.vec")).string());
  model.freqs = load_frequencies((fs::path(dir) / manifest.value("frequencies", "vocab_freq.tsv")).string());
  if (manifest.value("type", "word") == "subword") {
    SubwordModel sub;
    sub.cfg.min_n = manifest.value("min_n", 3);
    sub.cfg.max_n = manifest.value("max_n", 6);
    sub.cfg.buckets = manifest.value("buckets", std::uint32_t{2'000'000});
    sub.seed = manifest.value("seed", std::uint64_t{0});
    sub.word_part = load_table((fs::path(dir) / manifest.value("word_part", "words.vec")).string());
    sub.dim = sub.word_part.dim();
    const auto buckets = load_table((fs::path(dir) / manifest.value("ngrams", "ngrams.vec")).string());
    for (Eigen::Index r = 0; r < buckets.size(); ++r) {
      std::uint32_t id = 0;
      try {
        id = static_cast<std::uint32_t>(std::stoul(buckets.token_at(r)));
      } catch (const std::exception&) {
        throw parse_error("ngrams.vec row " + std::to_string(r + 2) + ": bucket id is not a number");
      }
      sub.bucket_rows.emplace(id, buckets.vectors.row(r).transpose());
    }
    model.subword = std::move(sub);
  }
  return model;
}

}  // namespace skillrel
