#include "arsent/linsvm.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <list>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "arsent/error.hpp"
#include "arsent/random.hpp"

namespace arsent {
namespace {

constexpr double kTau = 1e-12;
constexpr std::size_t kCacheBytes = std::size_t{256} << 20;

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

// Rows of the linear Gram matrix K(i, .) computed on demand, with an LRU
// bound on how many are kept.
class KernelRows {
 public:
  KernelRows(const DocTermMatrix& m, std::span<const std::size_t> order)
      : m_(m), order_(order), scratch_(m.cols(), 0.0), rows_(order.size()) {
    const std::size_t n = order.size();
    capacity_ = std::max<std::size_t>(2, kCacheBytes / std::max<std::size_t>(1, n * sizeof(double)));
    diag_.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const SparseRow r = m_.row(order_[t]);
      double s = 0.0;
      for (double v : r.values) s += v * v;
      diag_[t] = s;
    }
  }

  double diag(std::size_t t) const { return diag_[t]; }

  const std::vector<double>& get(std::size_t t) {
    Slot& slot = rows_[t];
    if (!slot.values.empty()) {
      lru_.splice(lru_.begin(), lru_, slot.pos);
      return slot.values;
    }
    if (lru_.size() >= capacity_) {
      const std::size_t victim = lru_.back();
      lru_.pop_back();
      std::vector<double>().swap(rows_[victim].values);
    }
    compute(t, slot.values);
    lru_.push_front(t);
    slot.pos = lru_.begin();
    return slot.values;
  }

 private:
  struct Slot {
    std::vector<double> values;
    std::list<std::size_t>::iterator pos;
  };

  void compute(std::size_t t, std::vector<double>& out) {
    const SparseRow xi = m_.row(order_[t]);
    for (std::size_t k = 0; k < xi.indices.size(); ++k) scratch_[xi.indices[k]] = xi.values[k];
    out.assign(order_.size(), 0.0);
    for (std::size_t s = 0; s < order_.size(); ++s) {
      const SparseRow xs = m_.row(order_[s]);
      double dot = 0.0;
      for (std::size_t k = 0; k < xs.indices.size(); ++k) dot += xs.values[k] * scratch_[xs.indices[k]];
      out[s] = dot;
    }
    for (std::uint32_t idx : xi.indices) scratch_[idx] = 0.0;
  }

  const DocTermMatrix& m_;
  std::span<const std::size_t> order_;
  std::vector<double> scratch_;
  std::vector<double> diag_;
  std::vector<Slot> rows_;
  std::list<std::size_t> lru_;
  std::size_t capacity_;
};

double dot(const std::vector<double>& w, const SparseRow& x) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.indices.size(); ++k) s += w[x.indices[k]] * x.values[k];
  return s;
}

}  // namespace

void SvmParams::validate() const {
  if (!(C > 0.0) || !std::isfinite(C)) throw ValidationError("svm: C must be positive");
  if (!(tolerance > 0.0)) throw ValidationError("svm: tolerance must be positive");
  if (max_epochs < 1) throw ValidationError("svm: max_epochs must be at least 1");
}

double primal_objective(std::span<const double> w, double b, const DocTermMatrix& matrix, double C) {
  if (w.size() != matrix.cols()) throw std::invalid_argument("primal_objective: dimension mismatch");
  double norm2 = 0.0;
  for (double v : w) norm2 += v * v;
  double loss = 0.0;
  for (std::size_t r = 0; r < matrix.rows(); ++r) {
    const SparseRow x = matrix.row(r);
    double f = -b;
    for (std::size_t k = 0; k < x.indices.size(); ++k) f += w[x.indices[k]] * x.values[k];
    loss += std::max(0.0, 1.0 - sign(matrix.label(r)) * f);
  }
  return 0.5 * norm2 + C * loss;
}

SvmModel train(const DocTermMatrix& matrix, const SvmParams& params) {
  params.validate();
  const std::size_t n = matrix.rows();
  if (n < 2) throw DataError("svm: need at least two training documents");
  const auto positives = static_cast<std::size_t>(
      std::count(matrix.labels().begin(), matrix.labels().end(), Polarity::Positive));
  if (positives == 0 || positives == n) throw DataError("svm: training data contains a single class");

  const double C = params.C;
  const double eps = params.tolerance;

  // Internal position t holds training row order[t].
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(params.seed);
  rng.shuffle(std::span<std::size_t>(order));

  std::vector<double> y(n);
  for (std::size_t t = 0; t < n; ++t) y[t] = sign(matrix.label(order[t]));

  KernelRows kernel(matrix, order);
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);  // gradient of 1/2 a'Qa - e'a, Q_ts = y_t y_s K_ts

  const auto upper = [&](std::size_t t) { return alpha[t] >= C; };
  const auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  const std::size_t max_iter = params.max_epochs * n;
  std::size_t iter = 0;
  bool converged = false;
  while (iter < max_iter) {
    // Working set: i maximizes -y G over I_up; j minimizes the second-order
    // decrease estimate over I_low.
    double gmax = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmax_idx = -1;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= gmax) gmax = -grad[t], gmax_idx = static_cast<std::ptrdiff_t>(t);
      } else {
        if (!lower(t) && grad[t] >= gmax) gmax = grad[t], gmax_idx = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (gmax_idx < 0) {
      converged = true;
      break;
    }
    const auto i = static_cast<std::size_t>(gmax_idx);
    const std::vector<double>& Ki = kernel.get(i);

    double gmax2 = -std::numeric_limits<double>::infinity();
    std::ptrdiff_t gmin_idx = -1;
    double obj_diff_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      double grad_diff = 0.0;
      if (y[t] > 0) {
        if (lower(t)) continue;
        gmax2 = std::max(gmax2, grad[t]);
        grad_diff = gmax + grad[t];
      } else {
        if (upper(t)) continue;
        gmax2 = std::max(gmax2, -grad[t]);
        grad_diff = gmax - grad[t];
      }
      if (grad_diff > 0) {
        double quad = kernel.diag(i) + kernel.diag(t) - 2.0 * Ki[t];
        if (quad <= 0) quad = kTau;
        const double obj_diff = -(grad_diff * grad_diff) / quad;
        if (obj_diff <= obj_diff_min) obj_diff_min = obj_diff, gmin_idx = static_cast<std::ptrdiff_t>(t);
      }
    }
    if (gmax + gmax2 < eps || gmin_idx < 0) {
      converged = true;
      break;
    }
    const auto j = static_cast<std::size_t>(gmin_idx);
    const double Kij = Ki[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];

    double quad = kernel.diag(i) + kernel.diag(j) - 2.0 * Kij;
    if (quad <= 0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = diff;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = -diff;
      }
      if (diff > 0) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = C - diff;
      } else {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = C + diff;
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > C) {
        if (alpha[i] > C) alpha[i] = C, alpha[j] = sum - C;
      } else {
        if (alpha[j] < 0) alpha[j] = 0, alpha[i] = sum;
      }
      if (sum > C) {
        if (alpha[j] > C) alpha[j] = C, alpha[i] = sum - C;
      } else {
        if (alpha[i] < 0) alpha[i] = 0, alpha[j] = sum;
      }
    }

    const double dai = (alpha[i] - old_ai) * y[i];
    const double daj = (alpha[j] - old_aj) * y[j];
    if (dai != 0.0) {
      for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * Ki[t] * dai;
    }
    if (daj != 0.0) {
      const std::vector<double>& Kj = kernel.get(j);
      for (std::size_t t = 0; t < n; ++t) grad[t] += y[t] * Kj[t] * daj;
    }
    ++iter;
  }

  // Intercept: average of y G over free multipliers, else the midpoint of the
  // feasible interval.
  double b = 0.0;
  {
    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
      const double yg = y[t] * grad[t];
      if (upper(t)) {
        if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else if (lower(t)) {
        if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
      } else {
        ++n_free;
        sum_free += yg;
      }
    }
    b = n_free > 0 ? sum_free / static_cast<double>(n_free) : (ub + lb) / 2;
  }

  SvmModel model;
  model.C = C;
  model.tolerance = eps;
  model.converged = converged;
  model.iterations = iter;
  model.b = b;
  model.w.assign(matrix.cols(), 0.0);
  model.alpha.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    model.alpha[order[t]] = alpha[t];
    if (alpha[t] == 0.0) continue;
    const SparseRow x = matrix.row(order[t]);
    for (std::size_t k = 0; k < x.indices.size(); ++k) model.w[x.indices[k]] += alpha[t] * y[t] * x.values[k];
  }
  model.objective = primal_objective(model.w, model.b, matrix, C);
  return model;
}

double decision_value(const SvmModel& model, const SparseRow& x) {
  if (x.dim != model.dims()) {
    throw std::invalid_argument("decision_value: row has " + std::to_string(x.dim) +
                                " dimensions, model has " + std::to_string(model.dims()));
  }
  return dot(model.w, x) - model.b;
}

double decision_value(const SvmModel& model, std::span<const double> dense_x) {
  if (dense_x.size() != model.dims()) {
    throw std::invalid_argument("decision_value: row has " + std::to_string(dense_x.size()) +
                                " dimensions, model has " + std::to_string(model.dims()));
  }
  double s = 0.0;
  for (std::size_t k = 0; k < dense_x.size(); ++k) s += model.w[k] * dense_x[k];
  return s - model.b;
}

Polarity predict(const SvmModel& model, const SparseRow& x) {
  return decision_value(model, x) > 0.0 ? Polarity::Positive : Polarity::Negative;
}

Polarity predict(const SvmModel& model, std::span<const double> dense_x) {
  return decision_value(model, dense_x) > 0.0 ? Polarity::Positive : Polarity::Negative;
}

double margin(const SvmModel& model) {
  double norm2 = 0.0;
  for (double v : model.w) norm2 += v * v;
  if (norm2 == 0.0) throw DataError("margin: weight vector is zero");
  return 2.0 / std::sqrt(norm2);
}

void write_model(std::ostream& out, const SvmModel& model) {
  out << "linsvm\n";
  out << "dims " << model.dims() << '\n';
  out << "C " << format_double(model.C) << '\n';
  out << "tolerance " << format_double(model.tolerance) << '\n';
  out << "objective " << format_double(model.objective) << '\n';
  for (std::size_t k = 0; k < model.w.size(); ++k) out << k << ' ' << format_double(model.w[k]) << '\n';
  out << "bias " << format_double(model.b) << '\n';
}

SvmModel read_model(std::istream& in) {
  SvmModel model;
  std::string tag;
  std::size_t dims = 0;
  auto expect = [&](const char* want) {
    if (!(in >> tag) || tag != want) throw DataError(std::string("read_model: expected '") + want + "'");
  };
  expect("linsvm");
  expect("dims");
  if (!(in >> dims)) throw DataError("read_model: bad dims");
  expect("C");
  if (!(in >> model.C)) throw DataError("read_model: bad C");
  expect("tolerance");
  if (!(in >> model.tolerance)) throw DataError("read_model: bad tolerance");
  expect("objective");
  if (!(in >> model.objective)) throw DataError("read_model: bad objective");
  model.w.assign(dims, 0.0);
  for (std::size_t k = 0; k < dims; ++k) {
    std::size_t idx = 0;
    if (!(in >> idx >> model.w[k]) || idx != k) {
      throw DataError("read_model: bad weight line " + std::to_string(k));
    }
  }
  expect("bias");
  if (!(in >> model.b)) throw DataError("read_model: bad bias");
  return model;
}

}  // namespace arsent
