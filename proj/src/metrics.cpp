#include "nashae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "nashae/errors.hpp"
#include "nashae/rng.hpp"

namespace nashae {

void LatentTable::validate() const {
  const std::size_t l = latents.rows();
  if (attr_names.size() != binary_attrs.size()) throw DataError("latent table: attribute names/columns differ");
  for (const auto& a : binary_attrs)
    if (a.size() != l) throw DataError("latent table: attribute column length differs from latent rows");
  if (factor_names.size() != factor_labels.size()) throw DataError("latent table: factor names/columns differ");
  for (const auto& f : factor_labels)
    if (f.size() != l) throw DataError("latent table: factor column length differs from latent rows");
}

// ---------------------------------------------------------------------------
// AUROC

namespace {

struct RocPoint {
  double fpr;
  double tpr;
  friend bool operator<(const RocPoint& a, const RocPoint& b) {
    return a.fpr < b.fpr || (a.fpr == b.fpr && a.tpr < b.tpr);
  }
};

double trapezoid(std::vector<RocPoint> pts) {
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    area += (pts[i].fpr - pts[i - 1].fpr) * (pts[i].tpr + pts[i - 1].tpr) * 0.5;
  }
  return area;
}

}  // namespace

double auroc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ShapeError("auroc: scores and labels differ in length");
  std::vector<double> pos;
  std::vector<double> neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] ? pos : neg).push_back(scores[i]);
  if (pos.empty() || neg.empty()) throw DataError("auroc: undefined for single-class labels");
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());

  const double lo = std::min(pos.front(), neg.front());
  const double hi = std::max(pos.back(), neg.back());
  if (!(hi > lo)) return 0.5;

  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  const auto at_least = [](const std::vector<double>& v, double t) {
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t));
  };
  const auto at_most = [](const std::vector<double>& v, double t) {
    return static_cast<double>(std::upper_bound(v.begin(), v.end(), t) - v.begin());
  };

  std::vector<RocPoint> high{{0.0, 0.0}, {1.0, 1.0}};
  std::vector<RocPoint> low{{0.0, 0.0}, {1.0, 1.0}};
  for (std::size_t t = 0; t < kAurocThresholds; ++t) {
    const double thr =
        lo + (hi - lo) * static_cast<double>(t) / static_cast<double>(kAurocThresholds - 1);
    high.push_back({at_least(neg, thr) / nn, at_least(pos, thr) / np});
    low.push_back({at_most(neg, thr) / nn, at_most(pos, thr) / np});
  }
  return std::max(trapezoid(std::move(high)), trapezoid(std::move(low)));
}

// ---------------------------------------------------------------------------
// Entropy screening

namespace {

double entropy_bits(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

}  // namespace

EntropyScreen entropy_disqualify(const std::vector<std::vector<std::uint8_t>>& attrs,
                                 double threshold) {
  const std::size_t a_count = attrs.size();
  EntropyScreen screen;
  screen.max_reduction.assign(a_count, 0.0);
  if (a_count == 0) return screen;
  const std::size_t l = attrs.front().size();
  for (const auto& a : attrs)
    if (a.size() != l) throw ShapeError("entropy_disqualify: attribute columns differ in length");
  if (l == 0) throw DataError("entropy_disqualify: no samples");
  const double n = static_cast<double>(l);

  std::vector<double> marginal(a_count);
  for (std::size_t a = 0; a < a_count; ++a) {
    const double p = static_cast<double>(std::count(attrs[a].begin(), attrs[a].end(), 1)) / n;
    const double probs[2] = {p, 1.0 - p};
    marginal[a] = entropy_bits(probs);
  }

  for (std::size_t a = 0; a < a_count; ++a) {
    if (marginal[a] <= 0.0) {
      screen.max_reduction[a] = 1.0;
      screen.disqualified.push_back(a);
      continue;
    }
    double worst = 0.0;
    for (std::size_t b = 0; b < a_count; ++b) {
      if (b == a) continue;
      double joint[4] = {0, 0, 0, 0};
      for (std::size_t i = 0; i < l; ++i) joint[(attrs[a][i] ? 2 : 0) + (attrs[b][i] ? 1 : 0)] += 1.0;
      for (double& j : joint) j /= n;
      // H(a|b) = H(a,b) - H(b)
      const double conditional = entropy_bits(joint) - marginal[b];
      worst = std::max(worst, (marginal[a] - conditional) / marginal[a]);
    }
    screen.max_reduction[a] = worst;
    (worst > threshold ? screen.disqualified : screen.qualified).push_back(a);
  }
  return screen;
}

// ---------------------------------------------------------------------------
// TAD

TadReport tad(const LatentTable& table, double entropy_threshold, double capture_threshold) {
  table.validate();
  if (table.binary_attrs.empty()) throw DataError("tad: latent table has no binary attributes");
  const EntropyScreen screen = entropy_disqualify(table.binary_attrs, entropy_threshold);
  if (screen.qualified.empty()) throw DataError("tad: every attribute was disqualified");
  const std::size_t m = table.latents.cols();
  if (m == 0) throw DataError("tad: no latents");

  TadReport report;
  report.disqualified = screen.disqualified;
  for (std::size_t a : screen.qualified) {
    AttributeScore s;
    s.attribute = a;
    s.name = table.attr_names[a];
    for (std::size_t j = 0; j < m; ++j) s.aurocs.push_back(auroc(table.latents.column(j), table.binary_attrs[a]));
    std::vector<std::size_t> order(m);
    for (std::size_t j = 0; j < m; ++j) order[j] = j;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return s.aurocs[x] > s.aurocs[y]; });
    s.best_latent = order[0];
    s.a1 = s.aurocs[order[0]];
    s.a2 = m > 1 ? s.aurocs[order[1]] : 0.5;
    s.diff = s.a1 - s.a2;
    s.captured = s.a1 >= capture_threshold;
    report.tad += s.diff;
    if (s.captured) ++report.captured_count;
    report.attributes.push_back(std::move(s));
  }
  return report;
}

// ---------------------------------------------------------------------------
// beta-VAE metric

namespace {

struct FactorIndex {
  // value code -> rows carrying it
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::size_t> code_of_row;
};

std::vector<FactorIndex> index_factors(const std::vector<std::vector<std::size_t>>& factors,
                                       std::size_t rows) {
  std::vector<FactorIndex> out;
  for (std::size_t f = 0; f < factors.size(); ++f) {
    if (factors[f].size() != rows) throw DataError("beta_vae_score: factor column length differs from rows");
    std::map<std::size_t, std::size_t> code;
    FactorIndex idx;
    for (std::size_t r = 0; r < rows; ++r) {
      auto [it, inserted] = code.emplace(factors[f][r], idx.groups.size());
      if (inserted) idx.groups.emplace_back();
      idx.groups[it->second].push_back(r);
      idx.code_of_row.push_back(it->second);
    }
    if (idx.groups.size() < 2) {
      throw DataError("beta_vae_score: factor " + std::to_string(f) +
                      " takes a single value and cannot be held fixed");
    }
    out.push_back(std::move(idx));
  }
  return out;
}

// One labelled point: mean |z1 - z2| over `pairs` pairs sharing factor `f`.
std::vector<double> difference_point(const RealMatrix& latents, const FactorIndex& idx,
                                     std::size_t pairs, Rng& rng) {
  const std::size_t m = latents.cols();
  std::vector<double> feature(m, 0.0);
  std::uniform_int_distribution<std::size_t> any_row(0, latents.rows() - 1);
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t r1 = any_row(rng);
    const auto& group = idx.groups[idx.code_of_row[r1]];
    std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
    const std::size_t r2 = group[pick(rng)];
    for (std::size_t c = 0; c < m; ++c) feature[c] += std::abs(latents(r1, c) - latents(r2, c));
  }
  for (double& v : feature) v /= static_cast<double>(pairs);
  return feature;
}

void make_points(const RealMatrix& latents, const std::vector<FactorIndex>& factors,
                 std::size_t count, std::size_t pairs, Rng& rng, RealMatrix& x,
                 std::vector<std::size_t>& y) {
  x = RealMatrix(count, latents.cols());
  y.assign(count, 0);
  std::uniform_int_distribution<std::size_t> pick_factor(0, factors.size() - 1);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t f = pick_factor(rng);
    const auto feature = difference_point(latents, factors[f], pairs, rng);
    std::copy(feature.begin(), feature.end(), x.row(i).begin());
    y[i] = f;
  }
}

// Linear softmax classifier trained by full-batch gradient descent on
// cross-entropy.
class SoftmaxClassifier {
 public:
  SoftmaxClassifier(std::size_t features, std::size_t classes, Rng& rng)
      : weights_(classes, features), bias_(classes, 0.0) {
    std::normal_distribution<double> init(0.0, std::sqrt(2.0 / static_cast<double>(features)));
    for (double& w : weights_.flat()) w = init(rng);
  }

  RealMatrix probabilities(const RealMatrix& x) const {
    RealMatrix logits = matmul_transpose_b(x, weights_);
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      auto row = logits.row(r);
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < row.size(); ++c) {
        row[c] += bias_[c];
        mx = std::max(mx, row[c]);
      }
      double sum = 0.0;
      for (double& v : row) {
        v = std::exp(v - mx);
        sum += v;
      }
      for (double& v : row) v /= sum;
    }
    return logits;
  }

  void step(const RealMatrix& x, const std::vector<std::size_t>& y, double lr) {
    RealMatrix grad = probabilities(x);
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    for (std::size_t r = 0; r < grad.rows(); ++r) {
      grad(r, y[r]) -= 1.0;
      for (double& v : grad.row(r)) v *= inv_n;
    }
    const RealMatrix gw = matmul_transpose_a(grad, x);
    for (std::size_t i = 0; i < gw.size(); ++i) weights_.flat()[i] -= lr * gw.flat()[i];
    for (std::size_t r = 0; r < grad.rows(); ++r)
      for (std::size_t c = 0; c < grad.cols(); ++c) bias_[c] -= lr * grad(r, c);
  }

  double accuracy(const RealMatrix& x, const std::vector<std::size_t>& y) const {
    const RealMatrix p = probabilities(x);
    std::size_t correct = 0;
    for (std::size_t r = 0; r < p.rows(); ++r) {
      auto row = p.row(r);
      const auto best = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
      if (best == y[r]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(p.rows());
  }

 private:
  RealMatrix weights_;
  std::vector<double> bias_;
};

}  // namespace

double beta_vae_score(const RealMatrix& latents, const std::vector<std::vector<std::size_t>>& factors,
                      const BetaVaeConfig& cfg) {
  if (factors.size() < 2) throw DataError("beta_vae_score: need at least two factors");
  if (latents.rows() < 2 || latents.cols() == 0) throw DataError("beta_vae_score: too few latents");
  if (cfg.pairs_per_point == 0 || cfg.train_points == 0 || cfg.eval_points == 0) {
    throw ConfigError("beta_vae_score: pair and point counts must be positive");
  }
  const auto index = index_factors(factors, latents.rows());

  Rng train_rng = make_rng(cfg.seed, Stream::Metric, 0);
  Rng eval_rng = make_rng(cfg.seed, Stream::Metric, 1);
  Rng init_rng = make_rng(cfg.seed, Stream::Metric, 2);

  RealMatrix x_train, x_eval;
  std::vector<std::size_t> y_train, y_eval;
  make_points(latents, index, cfg.train_points, cfg.pairs_per_point, train_rng, x_train, y_train);
  make_points(latents, index, cfg.eval_points, cfg.pairs_per_point, eval_rng, x_eval, y_eval);

  SoftmaxClassifier clf(latents.cols(), factors.size(), init_rng);
  const auto final_start = static_cast<std::size_t>(
      std::floor(static_cast<double>(cfg.iterations) * (1.0 - cfg.final_fraction)));
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    clf.step(x_train, y_train, it < final_start ? cfg.learning_rate : cfg.final_learning_rate);
  }
  return clf.accuracy(x_eval, y_eval);
}

double beta_vae_score(const Encoder& encoder, const BeamDataset& ds, const BetaVaeConfig& cfg) {
  const RealMatrix z = encoder(ds.samples);
  if (z.rows() != ds.size()) throw DataError("beta_vae_score: encoder changed the row count");
  return beta_vae_score(z, {ds.freq_label, ds.dc_index}, cfg);
}

// ---------------------------------------------------------------------------

std::vector<double> r_squared_per_latent(const RealMatrix& z, const RealMatrix& z_pred) {
  require_same_shape(z, z_pred, "r_squared_per_latent");
  if (z.rows() < 2) throw DataError("r_squared_per_latent: need at least 2 samples");
  const auto means = column_means(z);
  std::vector<double> r2(z.cols(), 0.0);
  for (std::size_t c = 0; c < z.cols(); ++c) {
    double ss_res = 0.0;
    double ss_tot = 0.0;
    for (std::size_t r = 0; r < z.rows(); ++r) {
      const double res = z(r, c) - z_pred(r, c);
      const double dev = z(r, c) - means[c];
      ss_res += res * res;
      ss_tot += dev * dev;
    }
    r2[c] = ss_tot < 1e-12 ? 0.0 : 1.0 - ss_res / ss_tot;
  }
  return r2;
}

std::size_t count_learned_latents(std::span<const double> mins, std::span<const double> maxs,
                                  double threshold) {
  if (mins.size() != maxs.size()) throw ShapeError("count_learned_latents: min/max length mismatch");
  std::size_t count = 0;
  for (std::size_t i = 0; i < mins.size(); ++i)
    if (maxs[i] - mins[i] >= threshold) ++count;
  return count;
}

std::size_t count_learned_latents(std::span<const double> ranges, double threshold) {
  return static_cast<std::size_t>(
      std::count_if(ranges.begin(), ranges.end(), [&](double r) { return r >= threshold; }));
}

void add_beam_attributes(LatentTable& table, const std::vector<std::size_t>& freq_label,
                         const std::vector<double>& dc_label) {
  if (freq_label.size() != table.size() || dc_label.size() != table.size()) {
    throw DataError("add_beam_attributes: label count differs from latent rows");
  }
  std::vector<std::uint8_t> dc_high(table.size());
  std::vector<std::uint8_t> lowest_freq(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    dc_high[r] = dc_label[r] >= 0.5 ? 1 : 0;
    lowest_freq[r] = freq_label[r] == 0 ? 1 : 0;
  }
  table.attr_names.emplace_back("dc_high");
  table.binary_attrs.push_back(std::move(dc_high));
  table.attr_names.emplace_back("freq_lowest");
  table.binary_attrs.push_back(std::move(lowest_freq));
}

}  // namespace nashae
