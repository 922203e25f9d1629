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

#include "postvar/head.hpp"

#include "postvar/textio.hpp"

#include <cmath>
#include <functional>
#include <limits>

namespace postvar {

namespace {

constexpr double kProbabilityClip = 1e-12;
constexpr double kSingularCutoff = 1e-12;
constexpr double kDefaultBallTolerance = 1e-8;
constexpr double kDefaultLogisticTolerance = 1e-7;

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// BCE of a single logit against a 0/1 label without forming probabilities:
// max(z, 0) - z*y + log(1 + exp(-|z|)).
double bce_from_logit(double z, double y) {
    return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

void check_binary_labels(const Eigen::VectorXd& y) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y(i) != 0.0 && y(i) != 1.0) {
            throw std::invalid_argument("labels must be 0 or 1");
        }
    }
}

// Projects the first `coef_rows` rows of each column onto the unit l2
// ball; intercept rows (below) are left free.
void project_columns(Eigen::MatrixXd& A, Eigen::Index coef_rows) {
    for (Eigen::Index c = 0; c < A.cols(); ++c) {
        const double norm = A.col(c).head(coef_rows).norm();
        if (norm > 1.0) {
            A.col(c).head(coef_rows) /= norm;
        }
    }
}

using ObjectiveFn = std::function<double(const Eigen::MatrixXd&, Eigen::MatrixXd*)>;

struct SolveOutcome {
    Eigen::MatrixXd point;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

// Projected gradient descent with backtracking line search, Nesterov
// momentum and gradient-based restarts.  Stops when the gradient mapping
// norm ||y - prox(y - t g)|| / t falls below `tolerance`; without a
// constraint that quantity is exactly the gradient norm.
SolveOutcome minimize_projected(const ObjectiveFn& objective, Eigen::MatrixXd start,
                                bool ball, Eigen::Index coef_rows, int max_iterations,
                                double tolerance) {
    if (ball) {
        project_columns(start, coef_rows);
    }
    Eigen::MatrixXd x = start;
    Eigen::MatrixXd x_prev = x;
    Eigen::MatrixXd gradient(x.rows(), x.cols());
    Eigen::MatrixXd candidate(x.rows(), x.cols());
    double theta = 1.0;
    double step = 1.0;

    SolveOutcome outcome;
    outcome.residual = std::numeric_limits<double>::infinity();
    for (int iter = 1; iter <= max_iterations; ++iter) {
        outcome.iterations = iter;
        const double theta_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * theta * theta));
        const double beta = (theta - 1.0) / theta_next;
        Eigen::MatrixXd y = x + beta * (x - x_prev);
        theta = theta_next;

        const double fy = objective(y, &gradient);
        if (!std::isfinite(fy)) {
            throw std::runtime_error("objective diverged during fitting");
        }

        // Backtracking on the proximal decrease condition.
        double f_candidate = 0.0;
        while (true) {
            candidate = y - step * gradient;
            if (ball) {
                project_columns(candidate, coef_rows);
            }
            const Eigen::MatrixXd delta = candidate - y;
            f_candidate = objective(candidate, nullptr);
            const double bound = fy + (gradient.array() * delta.array()).sum() +
                                 delta.squaredNorm() / (2.0 * step);
            if (f_candidate <= bound + 1e-15 || step < 1e-18) {
                break;
            }
            step *= 0.5;
        }

        outcome.residual = (y - candidate).norm() / step;
        // Momentum restart when the step fights the gradient direction.
        if ((gradient.array() * (candidate - x).array()).sum() > 0.0) {
            theta = 1.0;
        }
        x_prev = x;
        x = candidate;
        if (outcome.residual <= tolerance) {
            outcome.converged = true;
            break;
        }
    }
    outcome.point = std::move(x);
    return outcome;
}

Eigen::MatrixXd augment_with_ones(const Eigen::MatrixXd& Q) {
    Eigen::MatrixXd A(Q.rows(), Q.cols() + 1);
    A.leftCols(Q.cols()) = Q;
    A.col(Q.cols()).setOnes();
    return A;
}

RegressionModel assemble_model(TaskKind task, const Constraint& constraint,
                               const Eigen::MatrixXd& packed, bool intercept,
                               Eigen::Index coef_rows) {
    RegressionModel model;
    model.task = task;
    model.constraint = constraint;
    model.coefficients = packed.topRows(coef_rows);
    if (intercept) {
        model.intercept = packed.row(coef_rows);
    }
    return model;
}

RegressionModel run_iterative_fit(TaskKind task, const Eigen::MatrixXd& Q,
                                  const ObjectiveFn& objective, Eigen::Index classes,
                                  const Constraint& constraint, const FitOptions& options,
                                  double default_tolerance, const char* what) {
    const Eigen::Index rows = Q.cols() + (options.intercept ? 1 : 0);
    const Eigen::MatrixXd start = Eigen::MatrixXd::Zero(rows, classes);
    const double tolerance =
        options.tolerance > 0.0 ? options.tolerance : default_tolerance;
    const SolveOutcome outcome = minimize_projected(
        objective, start, constraint.kind == Constraint::Kind::kBall, Q.cols(),
        options.max_iterations, tolerance);
    RegressionModel model = assemble_model(task, constraint, outcome.point,
                                           options.intercept, Q.cols());
    if (!outcome.converged) {
        throw ConvergenceError(std::string(what) + " did not reach stationarity " +
                                   format_double(tolerance) + " within " +
                                   std::to_string(options.max_iterations) +
                                   " iterations (residual " +
                                   format_double(outcome.residual) + ")",
                               model, outcome.iterations, outcome.residual);
    }
    return model;
}

}  // namespace

double compute_loss(LossKind kind, const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    if (y.size() != yhat.size()) {
        throw std::invalid_argument("loss inputs must have equal length");
    }
    if (y.size() == 0) {
        throw std::invalid_argument("loss of an empty sample is undefined");
    }
    const double d = static_cast<double>(y.size());
    switch (kind) {
        case LossKind::kRmse:
            return (y - yhat).norm() / std::sqrt(d);
        case LossKind::kMae:
            return (y - yhat).cwiseAbs().sum() / d;
        case LossKind::kBce: {
            check_binary_labels(y);
            double total = 0.0;
            for (Eigen::Index i = 0; i < y.size(); ++i) {
                const double p =
                    std::clamp(yhat(i), kProbabilityClip, 1.0 - kProbabilityClip);
                total += -y(i) * std::log(p) - (1.0 - y(i)) * std::log(1.0 - p);
            }
            return total / d;
        }
    }
    throw std::logic_error("unhandled loss kind");
}

LossKind loss_kind_from_string(const std::string& name) {
    if (name == "rmse") return LossKind::kRmse;
    if (name == "mae") return LossKind::kMae;
    if (name == "bce") return LossKind::kBce;
    throw std::invalid_argument("unknown loss: " + name);
}

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::kRmse:
            return "rmse";
        case LossKind::kMae:
            return "mae";
        case LossKind::kBce:
            return "bce";
    }
    return "?";
}

std::string to_string(const Constraint& constraint) {
    switch (constraint.kind) {
        case Constraint::Kind::kNone:
            return "none";
        case Constraint::Kind::kRidge:
            return "ridge:" + format_double(constraint.ridge_lambda);
        case Constraint::Kind::kBall:
            return "ball";
    }
    return "?";
}

Constraint constraint_from_string(const std::string& text) {
    if (text == "none") return Constraint::none();
    if (text == "ball") return Constraint::ball();
    if (text.rfind("ridge:", 0) == 0) {
        return Constraint::ridge(parse_double(text.substr(6)));
    }
    throw std::invalid_argument("unknown constraint: " + text +
                                " (expected none, ball or ridge:<lambda>)");
}

RegressionModel fit_least_squares(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                                  bool intercept) {
    if (Q.rows() != y.size()) {
        throw std::invalid_argument("row count of Q must match the label count");
    }
    if (Q.rows() == 0 || Q.cols() == 0) {
        throw std::invalid_argument("least squares needs a nonempty matrix");
    }
    const Eigen::MatrixXd A = intercept ? augment_with_ones(Q) : Q;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(kSingularCutoff);
    const Eigen::VectorXd solution = svd.solve(y);

    RegressionModel model;
    model.task = TaskKind::kRegression;
    model.constraint = Constraint::none();
    model.coefficients = solution.head(Q.cols());
    if (intercept) {
        model.intercept.resize(1);
        model.intercept(0) = solution(Q.cols());
    }
    return model;
}

RegressionModel fit_constrained(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                                const Constraint& constraint, FitOptions options) {
    if (Q.rows() != y.size()) {
        throw std::invalid_argument("row count of Q must match the label count");
    }
    const auto d = static_cast<double>(Q.rows());

    switch (constraint.kind) {
        case Constraint::Kind::kNone:
            return fit_least_squares(Q, y, options.intercept);
        case Constraint::Kind::kRidge: {
            const Eigen::MatrixXd A =
                options.intercept ? augment_with_ones(Q) : Q;
            Eigen::MatrixXd normal = A.transpose() * A;
            // The penalty scales with d so it stays commensurate with the
            // 1/d-normalised losses; the intercept is never penalised.
            normal.diagonal().head(Q.cols()).array() += d * constraint.ridge_lambda;
            const Eigen::VectorXd solution =
                normal.ldlt().solve(A.transpose() * y);
            RegressionModel model;
            model.task = TaskKind::kRegression;
            model.constraint = constraint;
            model.coefficients = solution.head(Q.cols());
            if (options.intercept) {
                model.intercept.resize(1);
                model.intercept(0) = solution(Q.cols());
            }
            return model;
        }
        case Constraint::Kind::kBall: {
            // Squared RMSE objective; the minimiser matches the RMSE one.
            const Eigen::MatrixXd A =
                options.intercept ? augment_with_ones(Q) : Q;
            const ObjectiveFn objective = [&A, &y, d](const Eigen::MatrixXd& w,
                                                      Eigen::MatrixXd* grad) {
                const Eigen::VectorXd residual = A * w.col(0) - y;
                if (grad != nullptr) {
                    grad->col(0) = (2.0 / d) * (A.transpose() * residual);
                }
                return residual.squaredNorm() / d;
            };
            RegressionModel model =
                run_iterative_fit(TaskKind::kRegression, Q, objective, 1, constraint,
                                  options, kDefaultBallTolerance, "ball-constrained least squares");
            return model;
        }
    }
    throw std::logic_error("unhandled constraint kind");
}

RegressionModel fit_logistic(const Eigen::MatrixXd& Q, const Eigen::VectorXd& y,
                             const Constraint& constraint, FitOptions options) {
    if (Q.rows() != y.size()) {
        throw std::invalid_argument("row count of Q must match the label count");
    }
    check_binary_labels(y);
    const auto d = static_cast<double>(Q.rows());
    const Eigen::MatrixXd A = options.intercept ? augment_with_ones(Q) : Q;
    const double lambda =
        constraint.kind == Constraint::Kind::kRidge ? constraint.ridge_lambda : 0.0;
    const Eigen::Index coef_rows = Q.cols();

    const ObjectiveFn objective = [&A, &y, d, lambda, coef_rows](
                                      const Eigen::MatrixXd& w, Eigen::MatrixXd* grad) {
        const Eigen::VectorXd logits = A * w.col(0);
        double loss = 0.0;
        for (Eigen::Index i = 0; i < logits.size(); ++i) {
            loss += bce_from_logit(logits(i), y(i));
        }
        loss /= d;
        if (lambda > 0.0) {
            loss += lambda * w.col(0).head(coef_rows).squaredNorm();
        }
        if (grad != nullptr) {
            Eigen::VectorXd probs(logits.size());
            for (Eigen::Index i = 0; i < logits.size(); ++i) {
                probs(i) = sigmoid(logits(i));
            }
            grad->col(0) = A.transpose() * (probs - y) / d;
            if (lambda > 0.0) {
                grad->col(0).head(coef_rows) += 2.0 * lambda * w.col(0).head(coef_rows);
            }
        }
        return loss;
    };

    RegressionModel model =
        run_iterative_fit(TaskKind::kBinary, Q, objective, 1, constraint, options,
                          kDefaultLogisticTolerance, "logistic regression");
    return model;
}

RegressionModel fit_softmax(const Eigen::MatrixXd& Q, const Eigen::VectorXi& labels,
                            int num_classes, const Constraint& constraint,
                            FitOptions options) {
    if (Q.rows() != labels.size()) {
        throw std::invalid_argument("row count of Q must match the label count");
    }
    if (num_classes < 2) {
        throw std::invalid_argument("multiclass fits need at least two classes");
    }
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) < 0 || labels(i) >= num_classes) {
            throw std::invalid_argument("class id out of range at row " + std::to_string(i));
        }
    }
    const auto d = static_cast<double>(Q.rows());
    const Eigen::MatrixXd A = options.intercept ? augment_with_ones(Q) : Q;
    const double lambda =
        constraint.kind == Constraint::Kind::kRidge ? constraint.ridge_lambda : 0.0;
    const Eigen::Index coef_rows = Q.cols();

    const ObjectiveFn objective = [&A, &labels, d, lambda, num_classes, coef_rows](
                                      const Eigen::MatrixXd& w, Eigen::MatrixXd* grad) {
        Eigen::MatrixXd probs = A * w;  // logits, then softmax row-wise
        double loss = 0.0;
        for (Eigen::Index i = 0; i < probs.rows(); ++i) {
            const double peak = probs.row(i).maxCoeff();
            double z = 0.0;
            for (int c = 0; c < num_classes; ++c) {
                z += std::exp(probs(i, c) - peak);
            }
            loss += -(probs(i, labels(i)) - peak) + std::log(z);
            for (int c = 0; c < num_classes; ++c) {
                probs(i, c) = std::exp(probs(i, c) - peak) / z;
            }
        }
        loss /= d;
        if (lambda > 0.0) {
            loss += lambda * w.topRows(coef_rows).squaredNorm();
        }
        if (grad != nullptr) {
            for (Eigen::Index i = 0; i < probs.rows(); ++i) {
                probs(i, labels(i)) -= 1.0;
            }
            *grad = A.transpose() * probs / d;
            if (lambda > 0.0) {
                grad->topRows(coef_rows) += 2.0 * lambda * w.topRows(coef_rows);
            }
        }
        return loss;
    };

    RegressionModel model =
        run_iterative_fit(TaskKind::kMulticlass, Q, objective, num_classes, constraint,
                          options, kDefaultLogisticTolerance, "softmax regression");
    return model;
}

Eigen::MatrixXd predict(const RegressionModel& model, const Eigen::MatrixXd& Q) {
    if (Q.cols() != model.feature_count()) {
        throw std::invalid_argument("feature count does not match the model");
    }
    Eigen::MatrixXd scores = Q * model.coefficients;
    if (model.has_intercept()) {
        scores.rowwise() += model.intercept;
    }
    switch (model.task) {
        case TaskKind::kRegression:
            return scores;
        case TaskKind::kBinary:
            for (Eigen::Index i = 0; i < scores.rows(); ++i) {
                scores(i, 0) = sigmoid(scores(i, 0));
            }
            return scores;
        case TaskKind::kMulticlass:
            for (Eigen::Index i = 0; i < scores.rows(); ++i) {
                const double peak = scores.row(i).maxCoeff();
                double z = 0.0;
                for (Eigen::Index c = 0; c < scores.cols(); ++c) {
                    z += std::exp(scores(i, c) - peak);
                }
                for (Eigen::Index c = 0; c < scores.cols(); ++c) {
                    scores(i, c) = std::exp(scores(i, c) - peak) / z;
                }
            }
            return scores;
    }
    throw std::logic_error("unhandled task kind");
}

Eigen::VectorXi predicted_classes(const RegressionModel& model, const Eigen::MatrixXd& Q) {
    if (model.task == TaskKind::kRegression) {
        throw std::invalid_argument("class prediction needs a classification model");
    }
    const Eigen::MatrixXd probs = predict(model, Q);
    Eigen::VectorXi classes(probs.rows());
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        if (model.task == TaskKind::kBinary) {
            classes(i) = probs(i, 0) >= 0.5 ? 1 : 0;
        } else {
            Eigen::Index best = 0;
            probs.row(i).maxCoeff(&best);
            classes(i) = static_cast<int>(best);
        }
    }
    return classes;
}

double accuracy(const RegressionModel& model, const Eigen::MatrixXd& Q,
                const Eigen::VectorXd& labels) {
    if (labels.size() != Q.rows()) {
        throw std::invalid_argument("label count does not match the rows of Q");
    }
    const Eigen::VectorXi classes = predicted_classes(model, Q);
    Eigen::Index hits = 0;
    for (Eigen::Index i = 0; i < classes.size(); ++i) {
        if (static_cast<double>(classes(i)) == labels(i)) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(classes.size());
}

double cross_entropy(const Eigen::MatrixXd& probabilities, const Eigen::VectorXi& labels) {
    if (probabilities.rows() != labels.size()) {
        throw std::invalid_argument("probability rows must match the label count");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        const double p = std::clamp(probabilities(i, labels(i)), kProbabilityClip,
                                    1.0 - kProbabilityClip);
        total += -std::log(p);
    }
    return total / static_cast<double>(labels.size());
}

}  // namespace postvar
