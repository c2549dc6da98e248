#include "ranksvm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace fs = std::filesystem;

namespace ranksvm {

void SynthConfig::validate() const {
  if (queries < 3 || queries < folds || folds < 1)
    throw std::invalid_argument("need at least 3 queries and one query per fold");
  if (docs_per_query < 2) throw std::invalid_argument("need at least 2 docs per query");
  if (dim < 1 || informative < 1 || informative > dim)
    throw std::invalid_argument("bad dimension / informative count");
  if (noise < 0) throw std::invalid_argument("noise must be >= 0");
}

namespace {

// raw-bits uniform in [0,1); avoids libstdc++ distribution implementation
// details so output is byte-identical across platforms
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 == 0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

struct SynthQuery {
  std::vector<std::vector<double>> features;  // docs x dim
  std::vector<int> grades;
};

std::vector<SynthQuery> generate_queries(const SynthConfig& config) {
  std::mt19937_64 rng(config.seed);
  // planted weights: alternating-sign magnitudes on the first `informative` coords
  std::vector<double> w_star(static_cast<std::size_t>(config.dim), 0.0);
  for (int j = 0; j < config.informative; ++j)
    w_star[static_cast<std::size_t>(j)] = (j % 2 == 0 ? 1.0 : -1.0) * (1.0 + 0.25 * j);

  std::vector<SynthQuery> queries(static_cast<std::size_t>(config.queries));
  for (auto& query : queries) {
    query.features.assign(static_cast<std::size_t>(config.docs_per_query),
                          std::vector<double>(static_cast<std::size_t>(config.dim)));
    std::vector<double> scores(static_cast<std::size_t>(config.docs_per_query));
    for (int doc = 0; doc < config.docs_per_query; ++doc) {
      auto& x = query.features[static_cast<std::size_t>(doc)];
      double score = 0;
      for (int j = 0; j < config.dim; ++j) {
        x[static_cast<std::size_t>(j)] = 2.0 * uniform01(rng) - 1.0;
        score += w_star[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
      }
      if (config.noise > 0) score += config.noise * gaussian(rng);
      scores[static_cast<std::size_t>(doc)] = score;
    }
    // grades by score quantile: top 20% grade 2, next 30% grade 1, rest 0
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    const auto n = scores.size();
    const std::size_t top2 = std::max<std::size_t>(1, n / 5);
    const std::size_t top1 = std::max<std::size_t>(top2 + 1, (n * 3) / 10 + top2);
    query.grades.assign(n, 0);
    for (std::size_t r = 0; r < n; ++r)
      query.grades[order[r]] = r < top2 ? 2 : (r < top1 ? 1 : 0);
  }
  return queries;
}

void append_queries(std::string& out, const std::vector<SynthQuery>& queries,
                    const std::vector<std::size_t>& which) {
  char buf[64];
  for (std::size_t qi : which) {
    const auto& query = queries[qi];
    for (std::size_t doc = 0; doc < query.features.size(); ++doc) {
      out += std::to_string(query.grades[doc]);
      out += " qid:";
      out += std::to_string(qi + 1);
      for (std::size_t j = 0; j < query.features[doc].size(); ++j) {
        std::snprintf(buf, sizeof buf, " %zu:%.6f", j + 1, query.features[doc][j]);
        out += buf;
      }
      out += '\n';
    }
  }
}

}  // namespace

SynthFoldText generate_synthetic_fold(const SynthConfig& config, int fold_index) {
  config.validate();
  if (fold_index < 0 || fold_index >= config.folds) throw std::invalid_argument("bad fold index");
  const auto queries = generate_queries(config);

  // rotated 60/20/20 split: fold f shifts the query sequence by f*Q/folds
  // before cutting, so test sets rotate through the corpus
  const std::size_t q_total = queries.size();
  const std::size_t shift = q_total * static_cast<std::size_t>(fold_index) /
                            static_cast<std::size_t>(config.folds);
  const std::size_t train_end = std::max<std::size_t>(1, (q_total * 3) / 5);
  const std::size_t vali_end = std::max(train_end + 1, (q_total * 4) / 5);
  std::vector<std::size_t> train, vali, test;
  for (std::size_t qi = 0; qi < q_total; ++qi) {
    const std::size_t r = (qi + q_total - shift) % q_total;
    if (r < train_end)
      train.push_back(qi);
    else if (r < vali_end)
      vali.push_back(qi);
    else
      test.push_back(qi);
  }

  SynthFoldText text;
  append_queries(text.train, queries, train);
  append_queries(text.vali, queries, vali);
  append_queries(text.test, queries, test);
  return text;
}

void generate_synthetic_corpus(const SynthConfig& config, const std::string& out_dir) {
  config.validate();
  for (int f = 0; f < config.folds; ++f) {
    const SynthFoldText text = generate_synthetic_fold(config, f);
    const fs::path fold_dir = fs::path(out_dir) / ("Fold" + std::to_string(f + 1));
    fs::create_directories(fold_dir);
    const auto write = [&](const char* name, const std::string& body) {
      std::ofstream out(fold_dir / name, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + (fold_dir / name).string());
      out << body;
    };
    write("train.txt", text.train);
    write("vali.txt", text.vali);
    write("test.txt", text.test);
  }
}

}  // namespace ranksvm
