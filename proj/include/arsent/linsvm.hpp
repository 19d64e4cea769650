#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "arsent/corpus.hpp"
#include "arsent/vectorize.hpp"

namespace arsent {

struct SvmParams {
  double C = 1.0;
  // Stop once the maximal KKT violation of the dual drops below this.
  double tolerance = 1e-3;
  // Iteration budget, in units of the training-set size.
  std::size_t max_epochs = 1000;
  // Orders examples inside the solver; only affects ties.
  std::uint64_t seed = 1;

  /// Throws ValidationError unless C > 0, tolerance > 0 and max_epochs >= 1.
  void validate() const;
};

/// Binary linear separator. The decision function is w.x - b; positive
/// values mean Polarity::Positive.
struct SvmModel {
  std::vector<double> w;
  double b = 0.0;
  // Dual multipliers, aligned with the training rows; 0 <= alpha <= C and
  // w = sum_i alpha_i y_i x_i.
  std::vector<double> alpha;
  // 1/2 |w|^2 + C sum_i max(0, 1 - y_i (w.x_i - b)) on the training data.
  double objective = 0.0;
  double C = 1.0;
  double tolerance = 1e-3;
  bool converged = true;
  std::size_t iterations = 0;

  std::size_t dims() const { return w.size(); }
};

/// Soft-margin linear SVM with hinge loss, L2 penalty and an unpenalized
/// intercept, solved in the dual by pairwise coordinate updates (SMO with
/// second-order working-set selection).
///
/// Throws DataError when fewer than two rows or a single class is present.
/// Running out of iterations is not an error: the model comes back with
/// `converged == false`.
SvmModel train(const DocTermMatrix& matrix, const SvmParams& params = {});

/// w.x - b. Throws std::invalid_argument on a dimension mismatch.
double decision_value(const SvmModel& model, const SparseRow& x);
double decision_value(const SvmModel& model, std::span<const double> dense_x);

/// Positive when the decision value is > 0; exactly 0 maps to Negative.
Polarity predict(const SvmModel& model, const SparseRow& x);
Polarity predict(const SvmModel& model, std::span<const double> dense_x);

/// Geometric margin 2 / |w|. Throws DataError for a zero weight vector.
double margin(const SvmModel& model);

/// Primal objective of (w, b) on `matrix` for penalty C.
double primal_objective(std::span<const double> w, double b, const DocTermMatrix& matrix, double C);

/// Text dump: a header ("linsvm", dims, C, tolerance, objective), one
/// "index weight" line per dimension, and a closing "bias" line. Doubles are
/// printed in shortest round-trip form.
void write_model(std::ostream& out, const SvmModel& model);
SvmModel read_model(std::istream& in);

}  // namespace arsent
