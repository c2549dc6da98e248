#include "ranksvm/letor.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ranksvm {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line_no, const std::string& what) {
  throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": " + what);
}

struct RawSample {
  int relevance;
  std::int64_t query_id;
  std::vector<std::pair<int, double>> features;  // (fid, value), fid 1-based
  std::string doc_id;
};

}  // namespace

Dataset::Dataset(std::vector<Sample> samples, Eigen::Index dimension) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  features_.resize(n, dimension);
  relevances_.reserve(samples.size());
  query_ids_.reserve(samples.size());
  doc_ids_.reserve(samples.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    Sample& s = samples[static_cast<std::size_t>(i)];
    if (s.features.size() != dimension)
      throw std::invalid_argument("sample feature length does not match dataset dimension");
    if (s.relevance < 0) throw std::invalid_argument("negative relevance grade");
    features_.row(i) = s.features;
    relevances_.push_back(s.relevance);
    query_ids_.push_back(s.query_id);
    doc_ids_.push_back(std::move(s.doc_id));
  }
  // query ranges must be contiguous runs in sample order
  for (std::size_t i = 0; i < query_ids_.size(); ++i) {
    const std::int64_t q = query_ids_[i];
    auto it = query_index_.find(q);
    if (it == query_index_.end()) {
      query_index_.emplace(q, QueryRange{i, i + 1});
      query_order_.push_back(q);
    } else {
      if (it->second.end != i)
        throw std::invalid_argument("query id " + std::to_string(q) + " is not contiguous");
      it->second.end = i + 1;
    }
  }
  active_features_.assign(static_cast<std::size_t>(dimension), false);
  for (Eigen::Index j = 0; j < dimension; ++j)
    active_features_[static_cast<std::size_t>(j)] = (features_.col(j).array() != 0.0).any();
}

std::size_t Dataset::num_active_features() const {
  return static_cast<std::size_t>(std::count(active_features_.begin(), active_features_.end(), true));
}

Dataset parse_letor_text(const std::string& text, const std::string& origin) {
  std::vector<RawSample> raws;
  int max_fid = 0;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos) continue;
    if (line[start] == '#') continue;

    std::string payload = line;
    std::string comment;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      payload = line.substr(0, hash);
      comment = line.substr(hash + 1);
      // trim comment
      while (!comment.empty() && std::isspace(static_cast<unsigned char>(comment.front()))) comment.erase(comment.begin());
      while (!comment.empty() && std::isspace(static_cast<unsigned char>(comment.back()))) comment.pop_back();
    }

    std::istringstream tokens(payload);
    RawSample raw;
    raw.doc_id = comment;

    std::string tok;
    if (!(tokens >> tok)) parse_fail(origin, line_no, "missing relevance field");
    try {
      std::size_t used = 0;
      raw.relevance = std::stoi(tok, &used);
      if (used != tok.size() || raw.relevance < 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      parse_fail(origin, line_no, "bad relevance '" + tok + "'");
    }

    if (!(tokens >> tok)) parse_fail(origin, line_no, "missing qid field");
    if (tok.rfind("qid:", 0) != 0) parse_fail(origin, line_no, "expected qid:<id>, got '" + tok + "'");
    try {
      std::size_t used = 0;
      raw.query_id = std::stoll(tok.substr(4), &used);
      if (used != tok.size() - 4 || raw.query_id < 0) throw std::invalid_argument("");
    } catch (const std::exception&) {
      parse_fail(origin, line_no, "bad qid '" + tok + "'");
    }

    int prev_fid = 0;
    while (tokens >> tok) {
      auto colon = tok.find(':');
      if (colon == std::string::npos)
        parse_fail(origin, line_no, "expected <fid>:<value>, got '" + tok + "'");
      int fid = 0;
      double value = 0;
      try {
        std::size_t used = 0;
        fid = std::stoi(tok.substr(0, colon), &used);
        if (used != colon || fid <= 0) throw std::invalid_argument("");
        value = std::stod(tok.substr(colon + 1), &used);
        if (used != tok.size() - colon - 1) throw std::invalid_argument("");
      } catch (const std::exception&) {
        parse_fail(origin, line_no, "bad feature token '" + tok + "'");
      }
      if (fid <= prev_fid)
        parse_fail(origin, line_no, "feature ids must be strictly increasing");
      prev_fid = fid;
      raw.features.emplace_back(fid, value);
    }
    if (raw.features.empty()) parse_fail(origin, line_no, "line has no features");
    max_fid = std::max(max_fid, prev_fid);
    raws.push_back(std::move(raw));
  }

  std::vector<Sample> samples;
  samples.reserve(raws.size());
  for (auto& raw : raws) {
    Sample s;
    s.relevance = raw.relevance;
    s.query_id = raw.query_id;
    s.doc_id = std::move(raw.doc_id);
    s.features = Eigen::VectorXd::Zero(max_fid);
    for (auto [fid, value] : raw.features) s.features[fid - 1] = value;
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples), max_fid);
}

Dataset parse_letor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_letor_text(buf.str(), path);
}

std::string serialize_letor(const Dataset& dataset) {
  std::ostringstream out;
  char num[64];
  for (std::size_t i = 0; i < dataset.num_samples(); ++i) {
    out << dataset.relevance(i) << " qid:" << dataset.query_id(i);
    for (Eigen::Index j = 0; j < dataset.dimension(); ++j) {
      const double v = dataset.feature_row(i)[j];
      if (v == 0.0) continue;
      std::snprintf(num, sizeof num, "%.17g", v);
      out << ' ' << (j + 1) << ':' << num;
    }
    if (!dataset.doc_id(i).empty()) out << " #" << dataset.doc_id(i);
    out << '\n';
  }
  return out.str();
}

PreferencePairs build_preference_pairs(const Dataset& dataset) {
  PreferencePairs result;
  for (std::int64_t qid : dataset.query_order()) {
    const QueryRange range = dataset.query_range(qid);
    for (std::size_t s = range.begin; s < range.end; ++s) {
      for (std::size_t t = range.begin; t < range.end; ++t) {
        if (dataset.relevance(s) > dataset.relevance(t))
          result.pairs.emplace_back(static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(t));
      }
    }
  }
  return result;
}

Eigen::VectorXd pair_difference(const PreferencePairs& pairs, const Dataset& dataset, std::size_t p) {
  if (p >= pairs.count()) throw std::out_of_range("pair index out of range");
  const auto [s, t] = pairs.pairs[p];
  return dataset.feature_row(s) - dataset.feature_row(t);
}

Eigen::VectorXd xtilde_apply(const PreferencePairs& pairs, const Dataset& dataset,
                             const Eigen::VectorXd& w) {
  if (w.size() != dataset.dimension()) throw std::invalid_argument("weight length mismatch");
  const Eigen::VectorXd scores = dataset.features() * w;
  Eigen::VectorXd out(static_cast<Eigen::Index>(pairs.count()));
  for (std::size_t p = 0; p < pairs.count(); ++p) {
    const auto [s, t] = pairs.pairs[p];
    out[static_cast<Eigen::Index>(p)] = scores[static_cast<Eigen::Index>(s)] - scores[static_cast<Eigen::Index>(t)];
  }
  return out;
}

Eigen::VectorXd xtilde_apply_transpose(const PreferencePairs& pairs, const Dataset& dataset,
                                       const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != pairs.count())
    throw std::invalid_argument("pair-vector length mismatch");
  Eigen::VectorXd doc_coeff = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dataset.num_samples()));
  for (std::size_t p = 0; p < pairs.count(); ++p) {
    const auto [s, t] = pairs.pairs[p];
    doc_coeff[static_cast<Eigen::Index>(s)] += v[static_cast<Eigen::Index>(p)];
    doc_coeff[static_cast<Eigen::Index>(t)] -= v[static_cast<Eigen::Index>(p)];
  }
  return dataset.features().transpose() * doc_coeff;
}

Eigen::MatrixXd dense_differences(const PreferencePairs& pairs, const Dataset& dataset,
                                  std::size_t max_entries) {
  const std::size_t entries = pairs.count() * static_cast<std::size_t>(dataset.dimension());
  if (entries > max_entries)
    throw std::runtime_error("dense preference matrix exceeds entry budget (" +
                             std::to_string(entries) + " > " + std::to_string(max_entries) + ")");
  Eigen::MatrixXd x(static_cast<Eigen::Index>(pairs.count()), dataset.dimension());
  for (std::size_t p = 0; p < pairs.count(); ++p)
    x.row(static_cast<Eigen::Index>(p)) = pair_difference(pairs, dataset, p);
  return x;
}

Dataset normalize_query_minmax(const Dataset& dataset) {
  std::vector<Sample> samples(dataset.num_samples());
  for (std::size_t i = 0; i < dataset.num_samples(); ++i) {
    samples[i].relevance = dataset.relevance(i);
    samples[i].query_id = dataset.query_id(i);
    samples[i].doc_id = dataset.doc_id(i);
    samples[i].features = dataset.feature_row(i);
  }
  for (std::int64_t qid : dataset.query_order()) {
    const QueryRange range = dataset.query_range(qid);
    for (Eigen::Index j = 0; j < dataset.dimension(); ++j) {
      double lo = samples[range.begin].features[j];
      double hi = lo;
      for (std::size_t i = range.begin + 1; i < range.end; ++i) {
        lo = std::min(lo, samples[i].features[j]);
        hi = std::max(hi, samples[i].features[j]);
      }
      const double span = hi - lo;
      for (std::size_t i = range.begin; i < range.end; ++i)
        samples[i].features[j] = span > 0 ? (samples[i].features[j] - lo) / span : 0.0;
    }
  }
  return Dataset(std::move(samples), dataset.dimension());
}

}  // namespace ranksvm
