// Copyright 2025 The postvar developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace postvar {

enum class LossKind { kRmse, kMae, kBce };

/// RMSE = ||y - yhat||_2 / sqrt(d);  MAE = ||y - yhat||_1 / d;
/// BCE = mean of -y log(yhat) - (1-y) log(1-yhat) with predictions clipped
/// into [1e-12, 1 - 1e-12].  BCE requires y in {0, 1}.
double compute_loss(LossKind kind, const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

LossKind loss_kind_from_string(const std::string& name);
std::string to_string(LossKind kind);

enum class TaskKind { kRegression, kBinary, kMulticlass };

struct Constraint {
    enum class Kind { kNone, kRidge, kBall };
    Kind kind = Kind::kNone;
    double ridge_lambda = 0.0;

    static Constraint none() { return {}; }
    static Constraint ridge(double lambda) {
        if (lambda < 0.0) {
            throw std::invalid_argument("ridge penalty must be nonnegative");
        }
        return {Kind::kRidge, lambda};
    }
    static Constraint ball() { return {Kind::kBall, 0.0}; }
};

std::string to_string(const Constraint& constraint);
Constraint constraint_from_string(const std::string& text);

/// Linear (optionally sigmoid/softmax-activated) head over the feature
/// matrix.  `coefficients` is m x 1 for regression/binary and m x C for
/// multiclass; the optional intercept sits outside any ball constraint.
struct RegressionModel {
    TaskKind task = TaskKind::kRegression;
    Constraint constraint;
    Eigen::MatrixXd coefficients;
    Eigen::RowVectorXd intercept;  // empty when the model has none

    bool has_intercept() const { return intercept.size() > 0; }
    Eigen::Index feature_count() const { return coefficients.rows(); }
    Eigen::Index class_count() const { return coefficients.cols(); }
};

/// Iteration/tolerance knobs for the iterative fits.  The defaults are the
/// contract values; loosen them only for exploratory runs.
struct FitOptions {
    int max_iterations = 100000;
    double tolerance = 0.0;  // 0 = per-fit default (1e-8 pgd, 1e-7 logistic)
    bool intercept = false;
};

/// Carries the last iterate when an iterative fit hits its iteration cap.
class ConvergenceError : public std::runtime_error {
  public:
    ConvergenceError(std::string message, RegressionModel last, int iterations,
                     double residual)
        : std::runtime_error(std::move(message)),
          last_iterate(std::move(last)),
          iterations(iterations),
          residual(residual) {}

    RegressionModel last_iterate;
    int iterations;
    double residual;
};

/// Minimum-norm least squares via SVD; singular values below
/// 1e-12 * sigma_max count as zero.
RegressionModel fit_least_squares(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                                  bool intercept = false);

/// Ridge: alpha = (Q^T Q + d lambda I)^{-1} Q^T y (intercept unpenalised).
/// Ball: projected gradient descent on the squared RMSE over the unit l2
/// ball, run to first-order stationarity 1e-8 (or the iteration cap, which
/// raises ConvergenceError).
RegressionModel fit_constrained(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                                const Constraint& constraint, FitOptions options = {});

/// BCE minimisation by projected gradient descent with backtracking line
/// search and momentum restarts; ball constraint by projection.  Labels
/// must be 0/1.  Converges at projected-gradient norm 1e-7.
RegressionModel fit_logistic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                             const Constraint& constraint, FitOptions options = {});

/// Multiclass cross-entropy, same solver; the ball constraint applies per
/// class column.  Labels are class ids in [0, num_classes).
RegressionModel fit_softmax(const Eigen::MatrixXd& Q, const Eigen::VectorXi& labels,
                            int num_classes, const Constraint& constraint,
                            FitOptions options = {});

/// Raw scores for regression, sigmoid probabilities for binary (d x 1),
/// softmax probabilities for multiclass (d x C).
Eigen::MatrixXd predict(const RegressionModel& model, const Eigen::MatrixXd& Q);

/// Argmax class ids from predicted probabilities (binary threshold 0.5).
Eigen::VectorXi predicted_classes(const RegressionModel& model, const Eigen::MatrixXd& Q);

/// Fraction of rows whose predicted class matches `labels`.
double accuracy(const RegressionModel& model, const Eigen::MatrixXd& Q,
                const Eigen::VectorXd& labels);

/// Multiclass cross-entropy of predicted probabilities against class ids.
double cross_entropy(const Eigen::MatrixXd& probabilities, const Eigen::VectorXi& labels);

}  // namespace postvar
