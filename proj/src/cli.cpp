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

#include "postvar/cli.hpp"

#include "postvar/bounds.hpp"
#include "postvar/features.hpp"
#include "postvar/head.hpp"
#include "postvar/textio.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

namespace postvar::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

struct RunConfig {
    int qubits = 4;
    int locality = 2;
    int order = 1;
    int layers = 2;
    std::string strategy = "hybrid";
    std::string mode = "exact";  // exact | direct | shadows
    double epsilon = 0.1;
    double delta = 0.1;
    std::uint64_t seed = 42;
    double tau_g = 1e-3;
    double tau_f = 1e-3;
    std::string dataset;
    std::string out = "out";
    int workers = 0;
    std::string constraint = "none";
    std::string task = "regression";
    bool intercept = false;
    double shadow_const = 34.0;
    std::string observable;  // ansatz-expansion target; default Z on qubit 0

    std::string resolved_observable() const {
        if (!observable.empty()) {
            return observable;
        }
        return "Z" + std::string(static_cast<std::size_t>(qubits - 1), 'I');
    }

    std::vector<std::pair<std::string, std::string>> entries() const {
        return {
            {"constraint", constraint},
            {"dataset", dataset},
            {"delta", format_double(delta)},
            {"epsilon", format_double(epsilon)},
            {"intercept", intercept ? "1" : "0"},
            {"layers", std::to_string(layers)},
            {"locality", std::to_string(locality)},
            {"mode", mode},
            {"n", std::to_string(qubits)},
            {"observable", resolved_observable()},
            {"order", std::to_string(order)},
            {"out", out},
            {"seed", std::to_string(seed)},
            {"shadow_const", format_double(shadow_const)},
            {"strategy", strategy},
            {"task", task},
            {"tau_f", format_double(tau_f)},
            {"tau_g", format_double(tau_g)},
            {"workers", std::to_string(workers)},
        };
    }

    std::vector<std::string> validate() const {
        std::vector<std::string> problems;
        if (qubits < 1 || qubits > kQubitCap) {
            problems.push_back("n must lie in [1, 20]");
        }
        if (locality < 0 || locality > qubits) {
            problems.push_back("locality must lie in [0, n]");
        }
        if (layers < 1) {
            problems.push_back("layers must be >= 1");
        }
        if (order < 0 || order > qubits * layers) {
            problems.push_back("order must lie in [0, n*layers]");
        }
        if (!(epsilon > 0.0 && epsilon < 2.0)) {
            problems.push_back("epsilon must lie in (0, 2)");
        }
        if (!(delta > 0.0 && delta < 1.0)) {
            problems.push_back("delta must lie in (0, 1)");
        }
        if (tau_g < 0.0) {
            problems.push_back("tau-g must be nonnegative");
        }
        if (tau_f < 0.0 || tau_f > 4.0) {
            problems.push_back("tau-f must lie in [0, 4]");
        }
        if (workers < 0) {
            problems.push_back("workers must be nonnegative");
        }
        if (mode != "exact" && mode != "direct" && mode != "shadows") {
            problems.push_back("mode must be exact, direct or shadows");
        }
        if (task != "regression" && task != "binary" && task != "multiclass") {
            problems.push_back("task must be regression, binary or multiclass");
        }
        try {
            strategy_from_string(strategy);
        } catch (const std::exception&) {
            problems.push_back("unknown strategy: " + strategy);
        }
        try {
            constraint_from_string(constraint);
        } catch (const std::exception&) {
            problems.push_back("unknown constraint: " + constraint);
        }
        if (!observable.empty()) {
            try {
                const PauliString p = PauliString::from_word(observable);
                if (p.num_qubits() != qubits) {
                    problems.push_back("observable word length must equal n");
                }
            } catch (const std::exception&) {
                problems.push_back("observable must be a word over I, X, Y, Z");
            }
        }
        if (!(shadow_const > 0.0)) {
            problems.push_back("shadow-const must be positive");
        }
        return problems;
    }
};

class ValidationError : public std::runtime_error {
  public:
    explicit ValidationError(std::vector<std::string> problems)
        : std::runtime_error("config validation failed"), problems(std::move(problems)) {}
    std::vector<std::string> problems;
};

void require_valid(const RunConfig& config) {
    std::vector<std::string> problems = config.validate();
    if (!problems.empty()) {
        throw ValidationError(std::move(problems));
    }
}

std::vector<std::string> artifact_header(const RunConfig& config) {
    std::string line = "config:";
    for (const auto& [key, value] : config.entries()) {
        line += " " + key + "=" + value;
    }
    return {std::string("postvar ") + kVersion, line};
}

ordered_json config_json(const RunConfig& config) {
    ordered_json j;
    for (const auto& [key, value] : config.entries()) {
        j[key] = value;
    }
    return j;
}

std::ofstream open_artifact(const RunConfig& config, const std::string& name) {
    std::filesystem::create_directories(config.out);
    const std::string path = config.out + "/" + name;
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write " + path);
    }
    return out;
}

// --dataset accepts a CSV path or a generator spec
// synth:<kind>[:key=value]* with keys d, l, noise, lo, hi.
SynthDataset load_dataset(const RunConfig& config) {
    if (config.dataset.empty()) {
        throw std::runtime_error("no dataset given (use --dataset)");
    }
    if (config.dataset.rfind("synth:", 0) != 0) {
        std::ifstream in(config.dataset);
        if (!in) {
            throw std::runtime_error("cannot open dataset " + config.dataset);
        }
        SynthDataset result;
        result.dataset = read_dataset_csv(in);
        return result;
    }

    std::vector<std::string> parts;
    std::stringstream spec(config.dataset);
    std::string part;
    while (std::getline(spec, part, ':')) {
        parts.push_back(part);
    }
    if (parts.size() < 2) {
        throw std::runtime_error("synth spec needs a kind: synth:<kind>[:key=value]*");
    }
    const SynthKind kind = synth_kind_from_string(parts[1]);
    SynthParams params;
    params.qubits = config.qubits;
    for (std::size_t i = 2; i < parts.size(); ++i) {
        const auto eq = parts[i].find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error("synth spec entries look like key=value, got " +
                                     parts[i]);
        }
        const std::string key = parts[i].substr(0, eq);
        const std::string value = parts[i].substr(eq + 1);
        if (key == "d") {
            params.count = std::stoi(value);
        } else if (key == "l") {
            params.feature_count = std::stoi(value);
        } else if (key == "noise") {
            params.noise = parse_double(value);
        } else if (key == "label-noise") {
            params.label_noise = parse_double(value);
        } else if (key == "lo") {
            params.low = parse_double(value);
        } else if (key == "hi") {
            params.high = parse_double(value);
        } else {
            throw std::runtime_error("unknown synth key: " + key);
        }
    }
    return synth_dataset(kind, params, config.seed);
}

NeuronRegistry build_registry(const RunConfig& config) {
    NeuronRegistry registry;
    registry.ansatz = make_ansatz_spec(config.qubits, config.layers);
    const int k = registry.ansatz.parameter_count();
    const Strategy strategy = strategy_from_string(config.strategy);
    switch (strategy) {
        case Strategy::kAnsatzExpansion:
            registry.shifts = enumerate_shifts(k, config.order);
            registry.observables = {PauliString::from_word(config.resolved_observable())};
            break;
        case Strategy::kObservableConstruction:
            registry.shifts = {ShiftVector::zeros(k)};
            registry.observables = enumerate_local_paulis(config.qubits, config.locality);
            break;
        case Strategy::kHybrid:
            registry.shifts = enumerate_shifts(k, config.order);
            registry.observables = enumerate_local_paulis(config.qubits, config.locality);
            break;
    }
    return registry;
}

double max_shadow_norm(const NeuronRegistry& registry) {
    double peak = 1.0;
    for (const PauliString& p : registry.observables) {
        peak = std::max(peak, shadow_norm_bound(p));
    }
    return peak;
}

BudgetPlan plan_for(const RunConfig& config, const NeuronRegistry& registry,
                    Eigen::Index data_count) {
    return plan_budget(strategy_from_string(config.strategy),
                       measure_mode_from_string(config.mode),
                       static_cast<std::int64_t>(registry.shifts.size()),
                       static_cast<std::int64_t>(registry.observables.size()),
                       config.qubits, data_count, config.epsilon, config.delta,
                       max_shadow_norm(registry), config.shadow_const);
}

FeatureMatrix generate(const RunConfig& config, const Dataset& dataset,
                       const NeuronRegistry& registry) {
    const auto workers = static_cast<unsigned>(config.workers);
    if (config.mode == "exact") {
        return generate_features_exact(dataset, registry, workers);
    }
    const BudgetPlan plan = plan_for(config, registry, dataset.size());
    return generate_features_sampled(dataset, registry, plan, config.seed, workers);
}

struct TrainedHead {
    RegressionModel model;
    bool hit_iteration_cap = false;
};

TrainedHead fit_head(const RunConfig& config, const Eigen::MatrixXd& Q,
                     const Eigen::VectorXd& labels) {
    const Constraint constraint = constraint_from_string(config.constraint);
    FitOptions options;
    options.intercept = config.intercept;
    TrainedHead trained;
    try {
        if (config.task == "regression") {
            trained.model = constraint.kind == Constraint::Kind::kNone
                                ? fit_least_squares(Q, labels, config.intercept)
                                : fit_constrained(Q, labels, constraint, options);
        } else if (config.task == "binary") {
            trained.model = fit_logistic(Q, labels, constraint, options);
        } else {
            int num_classes = 0;
            Eigen::VectorXi ids(labels.size());
            for (Eigen::Index i = 0; i < labels.size(); ++i) {
                ids(i) = static_cast<int>(labels(i));
                num_classes = std::max(num_classes, ids(i) + 1);
            }
            trained.model = fit_softmax(Q, ids, num_classes, constraint, options);
        }
    } catch (const ConvergenceError& error) {
        std::cerr << "warning: " << error.what() << "; using the last iterate\n";
        trained.model = error.last_iterate;
        trained.hit_iteration_cap = true;
    }
    return trained;
}

ordered_json metrics_json(const RunConfig& config, const RegressionModel& model,
                          const Eigen::MatrixXd& Q, const Eigen::VectorXd& labels) {
    ordered_json metrics;
    if (config.task == "regression") {
        const Eigen::VectorXd predictions = predict(model, Q).col(0);
        metrics["rmse"] = compute_loss(LossKind::kRmse, labels, predictions);
        metrics["mae"] = compute_loss(LossKind::kMae, labels, predictions);
    } else if (config.task == "binary") {
        const Eigen::VectorXd probabilities = predict(model, Q).col(0);
        metrics["bce"] = compute_loss(LossKind::kBce, labels, probabilities);
        metrics["accuracy"] = accuracy(model, Q, labels);
    } else {
        Eigen::VectorXi ids(labels.size());
        for (Eigen::Index i = 0; i < labels.size(); ++i) {
            ids(i) = static_cast<int>(labels(i));
        }
        metrics["cross_entropy"] = cross_entropy(predict(model, Q), ids);
        metrics["accuracy"] = accuracy(model, Q, labels);
    }
    return metrics;
}

ordered_json model_json(const RunConfig& config, const TrainedHead& trained,
                        const std::vector<std::string>& column_names,
                        const ordered_json& training_metrics) {
    const RegressionModel& model = trained.model;
    ordered_json j;
    j["version"] = kVersion;
    j["config"] = config_json(config);
    j["task"] = config.task;
    j["constraint"] = to_string(model.constraint);
    std::vector<std::vector<double>> coefficients;
    for (Eigen::Index r = 0; r < model.coefficients.rows(); ++r) {
        std::vector<double> row;
        for (Eigen::Index c = 0; c < model.coefficients.cols(); ++c) {
            row.push_back(model.coefficients(r, c));
        }
        coefficients.push_back(std::move(row));
    }
    j["coefficients"] = coefficients;
    if (model.has_intercept()) {
        std::vector<double> intercepts;
        for (Eigen::Index c = 0; c < model.intercept.size(); ++c) {
            intercepts.push_back(model.intercept(c));
        }
        j["intercept"] = intercepts;
    }
    j["column_names"] = column_names;
    j["training"] = training_metrics;
    j["hit_iteration_cap"] = trained.hit_iteration_cap;
    return j;
}

RegressionModel model_from_json(const ordered_json& j) {
    RegressionModel model;
    const std::string task = j.at("task");
    model.task = task == "regression"
                     ? TaskKind::kRegression
                     : (task == "binary" ? TaskKind::kBinary : TaskKind::kMulticlass);
    model.constraint = constraint_from_string(j.at("constraint"));
    const auto& rows = j.at("coefficients");
    const auto row_count = static_cast<Eigen::Index>(rows.size());
    const auto col_count = static_cast<Eigen::Index>(rows.at(0).size());
    model.coefficients.resize(row_count, col_count);
    for (Eigen::Index r = 0; r < row_count; ++r) {
        for (Eigen::Index c = 0; c < col_count; ++c) {
            model.coefficients(r, c) =
                rows.at(static_cast<std::size_t>(r)).at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    if (j.contains("intercept")) {
        const auto& values = j.at("intercept");
        model.intercept.resize(static_cast<Eigen::Index>(values.size()));
        for (Eigen::Index c = 0; c < model.intercept.size(); ++c) {
            model.intercept(c) = values.at(static_cast<std::size_t>(c)).get<double>();
        }
    }
    return model;
}

int cmd_features(const RunConfig& config, bool dump_dataset) {
    require_valid(config);
    const SynthDataset loaded = load_dataset(config);
    const NeuronRegistry registry = build_registry(config);
    validate_registry(registry, loaded.dataset.feature_count());
    const FeatureMatrix features = generate(config, loaded.dataset, registry);
    std::ofstream out = open_artifact(config, "features.csv");
    const auto header = artifact_header(config);
    write_features_csv(out, features, registry, loaded.dataset.labels, header);
    if (dump_dataset) {
        std::ofstream raw = open_artifact(config, "dataset.csv");
        write_dataset_csv(raw, loaded.dataset, header);
    }
    std::cout << "features: " << features.Q.rows() << " x " << features.Q.cols()
              << " -> " << config.out << "/features.csv\n";
    return 0;
}

int cmd_train(const RunConfig& config, const std::string& features_path) {
    require_valid(config);
    std::ifstream in(features_path);
    if (!in) {
        throw std::runtime_error("cannot open features " + features_path);
    }
    const FeatureCsv csv = read_features_csv(in);
    const TrainedHead trained = fit_head(config, csv.Q, csv.labels);
    const ordered_json metrics = metrics_json(config, trained.model, csv.Q, csv.labels);

    std::ofstream out = open_artifact(config, "model.json");
    out << model_json(config, trained, csv.column_names, metrics).dump(2) << "\n";
    std::cout << "train: " << metrics.dump() << " -> " << config.out << "/model.json\n";
    return 0;
}

int cmd_eval(const RunConfig& config, const std::string& features_path,
             const std::string& model_path) {
    require_valid(config);
    std::ifstream features_in(features_path);
    if (!features_in) {
        throw std::runtime_error("cannot open features " + features_path);
    }
    const FeatureCsv csv = read_features_csv(features_in);
    std::ifstream model_in(model_path);
    if (!model_in) {
        throw std::runtime_error("cannot open model " + model_path);
    }
    ordered_json model_doc;
    model_in >> model_doc;
    const RegressionModel model = model_from_json(model_doc);
    const ordered_json metrics = metrics_json(config, model, csv.Q, csv.labels);

    std::ofstream out = open_artifact(config, "metrics.csv");
    for (const std::string& line : artifact_header(config)) {
        out << "# " << line << "\n";
    }
    out << "metric,value\n";
    for (const auto& [key, value] : metrics.items()) {
        out << key << ',' << format_double(value.get<double>()) << "\n";
    }
    std::cout << "eval: " << metrics.dump() << " -> " << config.out << "/metrics.csv\n";
    return 0;
}

int cmd_budget(const RunConfig& config, std::int64_t data_count) {
    require_valid(config);
    if (config.mode == "exact") {
        throw std::runtime_error("budget planning needs --mode direct or shadows");
    }
    const NeuronRegistry registry = build_registry(config);
    const BudgetPlan plan = plan_for(config, registry, data_count);

    ordered_json j;
    j["version"] = kVersion;
    j["config"] = config_json(config);
    j["plan"] = {
        {"strategy", to_string(plan.strategy)},
        {"mode", to_string(plan.mode)},
        {"p", plan.ansatz_count},
        {"q", plan.observable_count},
        {"m", plan.neuron_count},
        {"n", plan.qubit_count},
        {"d", plan.data_count},
        {"epsilon", plan.epsilon},
        {"delta", plan.delta},
        {"shadow_norm_max", plan.shadow_norm_max},
        {"shots_per_unit", plan.shots_per_unit},
        {"groups", plan.groups},
        {"total_shots", plan.total_shots},
    };
    j["favored"] = to_string(plan.favored);

    std::ofstream out = open_artifact(config, "budget.json");
    out << j.dump(2) << "\n";
    std::cout << "plan: mode=" << to_string(plan.mode)
              << " shots_per_unit=" << plan.shots_per_unit << " groups=" << plan.groups
              << " total_shots=" << plan.total_shots << "\n";
    std::cout << "verdict: " << to_string(plan.favored) << " measurement favored for "
              << to_string(plan.strategy) << " (q=" << plan.observable_count
              << ", max shadow norm=" << format_double(plan.shadow_norm_max) << ")\n";
    return 0;
}

int cmd_prune(const RunConfig& config) {
    require_valid(config);
    const SynthDataset loaded = load_dataset(config);
    const Dataset train = loaded.dataset.split.empty()
                              ? loaded.dataset
                              : dataset_subset(loaded.dataset, loaded.dataset.train_rows());
    const NeuronRegistry registry = build_registry(config);
    validate_registry(registry, train.feature_count());
    const PauliString observable = PauliString::from_word(config.resolved_observable());
    const ShiftVector base = ShiftVector::zeros(registry.ansatz.parameter_count());

    std::ofstream out = open_artifact(config, "prune_scores.csv");
    for (const std::string& line : artifact_header(config)) {
        out << "# " << line << "\n";
    }
    out << "parameter,gradient_score,fidelity_score,dropped_by\n";

    std::vector<ShiftVector> retained = registry.shifts;
    for (int u = 0; u < registry.ansatz.parameter_count(); ++u) {
        const PruneDecision gradient =
            prune_by_gradient(train, registry.ansatz, u, base, observable, config.tau_g);
        const PruneDecision fidelity =
            prune_by_fidelity(train, registry.ansatz, u, base, config.tau_f);
        std::string dropped_by = "none";
        if (gradient.drop) {
            dropped_by = "gradient";
        } else if (fidelity.drop) {
            dropped_by = "fidelity";
        }
        if (dropped_by != "none") {
            retained = apply_shift_pruning(retained, u, base);
        }
        out << u << ',' << format_double(gradient.score) << ','
            << format_double(fidelity.score) << ',' << dropped_by << "\n";
    }

    std::ofstream kept = open_artifact(config, "retained_shifts.txt");
    for (const std::string& line : artifact_header(config)) {
        kept << "# " << line << "\n";
    }
    for (const ShiftVector& shift : retained) {
        kept << shift.signs() << "\n";
    }
    std::cout << "prune: retained " << retained.size() << " of "
              << registry.shifts.size() << " shifts -> " << config.out
              << "/retained_shifts.txt\n";
    return 0;
}

int cmd_verify_bounds(const RunConfig& config, int trials, int rows, int cols,
                      const std::string& gap_modes) {
    require_valid(config);
    if (trials < 1 || rows < 1 || cols < 1) {
        throw std::runtime_error("trials, rows and cols must be positive");
    }

    std::vector<GapMode> modes;
    if (gap_modes == "all") {
        modes = {GapMode::kUnconstrained, GapMode::kBall, GapMode::kLogisticBall};
    } else {
        modes = {gap_mode_from_string(gap_modes)};
    }

    std::ofstream out = open_artifact(config, "bounds_trials.csv");
    for (const std::string& line : artifact_header(config)) {
        out << "# " << line << "\n";
    }
    out << "theorem,m,d,epsilon,threshold,observed_max_norm,delta_loss,satisfied\n";

    int failures = 0;
    for (const GapMode mode : modes) {
        for (int trial = 0; trial < trials; ++trial) {
            Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(trial),
                                static_cast<std::uint64_t>(mode)));
            Eigen::MatrixXd q(rows, cols);
            for (Eigen::Index i = 0; i < rows; ++i) {
                for (Eigen::Index j = 0; j < cols; ++j) {
                    q(i, j) = rng.uniform(-1.0, 1.0);
                }
            }
            Eigen::VectorXd y(rows);
            for (Eigen::Index i = 0; i < rows; ++i) {
                if (mode == GapMode::kLogisticBall) {
                    y(i) = rng.uniform01() < 0.5 ? 0.0 : 1.0;
                } else {
                    y(i) = rng.uniform01() < 0.5 ? -1.0 : 1.0;
                }
            }
            double budget = 0.0;
            if (mode == GapMode::kUnconstrained) {
                budget = 0.9 * theorem1_threshold(q, q, y, config.epsilon).value;
            } else {
                budget = 0.9 * theorem2_threshold(cols, config.epsilon);
            }
            Eigen::MatrixXd noise(rows, cols);
            double peak = 0.0;
            for (Eigen::Index i = 0; i < rows; ++i) {
                for (Eigen::Index j = 0; j < cols; ++j) {
                    noise(i, j) = rng.uniform(-1.0, 1.0);
                    peak = std::max(peak, std::abs(noise(i, j)));
                }
            }
            const Eigen::MatrixXd qhat = q + noise * (budget / peak);

            const PerturbationReport report =
                verify_loss_gap(q, qhat, y, mode, config.epsilon);
            failures += report.satisfied ? 0 : 1;
            out << report.theorem << ',' << cols << ',' << rows << ','
                << format_double(report.epsilon) << ','
                << format_double(report.max_norm_threshold) << ','
                << format_double(report.observed_max_norm) << ','
                << format_double(report.delta_loss) << ','
                << (report.satisfied ? 1 : 0) << "\n";
        }
    }
    std::cout << "verify-bounds: " << (modes.size() * static_cast<std::size_t>(trials))
              << " trials, " << failures << " violations -> " << config.out
              << "/bounds_trials.csv\n";
    return failures == 0 ? 0 : 1;
}

int cmd_repro_synth(const RunConfig& base_config) {
    require_valid(base_config);
    std::ofstream summary = open_artifact(base_config, "summary.csv");
    for (const std::string& line : artifact_header(base_config)) {
        summary << "# " << line << "\n";
    }
    summary << "scenario,metric,value\n";

    // Planted linear labels recovered through 2-local measurements.
    {
        RunConfig config = base_config;
        config.dataset = "synth:linear:d=100";
        config.strategy = "observable-construction";
        config.locality = 2;
        config.task = "regression";
        const SynthDataset loaded = load_dataset(config);
        const NeuronRegistry registry = build_registry(config);
        const FeatureMatrix features = generate(config, loaded.dataset, registry);
        {
            std::ofstream out = open_artifact(config, "linear_features.csv");
            write_features_csv(out, features, registry, loaded.dataset.labels,
                               artifact_header(config));
        }
        const RegressionModel model = fit_least_squares(features.Q, loaded.dataset.labels);
        const double rmse = compute_loss(LossKind::kRmse, loaded.dataset.labels,
                                         predict(model, features.Q).col(0));
        summary << "linear,train_rmse," << format_double(rmse) << "\n";
        std::cout << "repro-synth linear: train_rmse=" << format_double(rmse) << "\n";
    }

    // XOR-style blobs: quantum features against the raw-feature baseline.
    {
        RunConfig config = base_config;
        config.dataset = "synth:blobs:d=100";
        config.strategy = "observable-construction";
        config.locality = 2;
        config.task = "binary";
        config.intercept = true;
        config.constraint = "ridge:0.005";
        const SynthDataset loaded = load_dataset(config);
        const NeuronRegistry registry = build_registry(config);
        const FeatureMatrix features = generate(config, loaded.dataset, registry);
        {
            std::ofstream out = open_artifact(config, "blobs_features.csv");
            write_features_csv(out, features, registry, loaded.dataset.labels,
                               artifact_header(config));
        }
        const TrainedHead quantum = fit_head(config, features.Q, loaded.dataset.labels);
        const double quantum_accuracy =
            accuracy(quantum.model, features.Q, loaded.dataset.labels);
        const TrainedHead baseline =
            fit_head(config, loaded.dataset.features, loaded.dataset.labels);
        const double baseline_accuracy =
            accuracy(baseline.model, loaded.dataset.features, loaded.dataset.labels);
        summary << "blobs,quantum_train_accuracy," << format_double(quantum_accuracy)
                << "\n";
        summary << "blobs,raw_train_accuracy," << format_double(baseline_accuracy) << "\n";
        std::cout << "repro-synth blobs: quantum=" << format_double(quantum_accuracy)
                  << " raw=" << format_double(baseline_accuracy) << "\n";
    }
    return 0;
}

int cmd_repro_fmnist(const RunConfig& base_config, const std::string& data_dir_flag,
                     int train_per_class, int test_per_class) {
    RunConfig config = base_config;
    require_valid(config);
    std::string directory = data_dir_flag;
    if (directory.empty()) {
        if (const char* env = std::getenv("POSTVAR_DATA_DIR")) {
            directory = env;
        }
    }
    if (directory.empty()) {
        throw std::runtime_error(
            "no dataset directory (use --data-dir or POSTVAR_DATA_DIR)");
    }

    const Dataset dataset = load_fashion_binary(directory, kFashionCoat, kFashionShirt,
                                                train_per_class, test_per_class,
                                                config.seed);
    const Dataset train = dataset_subset(dataset, dataset.train_rows());
    const Dataset test = dataset_subset(dataset, dataset.test_rows());

    const NeuronRegistry registry = build_registry(config);
    validate_registry(registry, train.feature_count());
    const FeatureMatrix train_features = generate(config, train, registry);
    const FeatureMatrix test_features = generate(config, test, registry);
    {
        std::ofstream out = open_artifact(config, "features_train.csv");
        write_features_csv(out, train_features, registry, train.labels,
                           artifact_header(config));
        std::ofstream out_test = open_artifact(config, "features_test.csv");
        write_features_csv(out_test, test_features, registry, test.labels,
                           artifact_header(config));
    }

    // Head matching the reference classical setup: logistic regression
    // with an intercept and an l2 penalty equivalent to lambda = 1/(2d).
    RunConfig head_config = config;
    head_config.task = "binary";
    head_config.intercept = true;
    head_config.constraint =
        "ridge:" + format_double(1.0 / (2.0 * static_cast<double>(train.size())));
    const TrainedHead trained = fit_head(head_config, train_features.Q, train.labels);

    const ordered_json train_metrics =
        metrics_json(head_config, trained.model, train_features.Q, train.labels);
    const ordered_json test_metrics =
        metrics_json(head_config, trained.model, test_features.Q, test.labels);

    std::ofstream model_out = open_artifact(config, "model.json");
    model_out << model_json(head_config, trained, {}, train_metrics).dump(2) << "\n";

    std::ofstream metrics = open_artifact(config, "metrics.csv");
    for (const std::string& line : artifact_header(config)) {
        metrics << "# " << line << "\n";
    }
    metrics << "split,metric,value\n";
    for (const auto& [key, value] : train_metrics.items()) {
        metrics << "train," << key << ',' << format_double(value.get<double>()) << "\n";
    }
    for (const auto& [key, value] : test_metrics.items()) {
        metrics << "test," << key << ',' << format_double(value.get<double>()) << "\n";
    }
    std::cout << "repro-fmnist " << config.strategy << " (L=" << config.locality
              << ", R=" << config.order << "): train " << train_metrics.dump()
              << " test " << test_metrics.dump() << "\n";
    return 0;
}

// Applies a flat key=value config file: every key names a long option
// (without the dashes); lines starting with '#' are comments.  Explicit
// command-line flags win, so only keys absent from `args` are injected.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        }
    }
    if (config_path.empty()) {
        return args;
    }
    std::ifstream in(config_path);
    if (!in) {
        throw std::runtime_error("cannot open config file " + config_path);
    }

    const auto user_passed = [&args](const std::string& flag) {
        for (const std::string& arg : args) {
            if (arg == flag || arg.rfind(flag + "=", 0) == 0) {
                return true;
            }
        }
        return false;
    };

    std::vector<std::string> expanded = args;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::runtime_error(config_path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        }
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        const std::string flag = "--" + key;
        if (user_passed(flag)) {
            continue;
        }
        if (key == "intercept" || key == "dump-dataset") {
            if (value == "1" || value == "true") {
                expanded.push_back(flag);
            }
            continue;
        }
        expanded.push_back(flag);
        expanded.push_back(value);
    }
    return expanded;
}

void add_common_options(CLI::App* cmd, RunConfig& config, std::string& config_file) {
    cmd->add_option("--n", config.qubits, "qubit count");
    cmd->add_option("--locality", config.locality, "observable locality cap L");
    cmd->add_option("--order", config.order, "derivative order cap R");
    cmd->add_option("--layers", config.layers, "ansatz layers");
    cmd->add_option("--strategy", config.strategy,
                    "ansatz-expansion | observable-construction | hybrid");
    cmd->add_option("--mode", config.mode, "exact | direct | shadows");
    cmd->add_option("--epsilon", config.epsilon, "per-entry additive error target");
    cmd->add_option("--delta", config.delta, "failure probability");
    cmd->add_option("--seed", config.seed, "master seed");
    cmd->add_option("--tau-g", config.tau_g, "gradient pruning threshold");
    cmd->add_option("--tau-f", config.tau_f, "fidelity pruning threshold");
    cmd->add_option("--dataset", config.dataset, "CSV path or synth:<kind>[:key=value]*");
    cmd->add_option("--out", config.out, "output directory");
    cmd->add_option("--workers", config.workers, "worker threads (0 = hardware)");
    cmd->add_option("--constraint", config.constraint, "none | ridge:<lambda> | ball");
    cmd->add_option("--task", config.task, "regression | binary | multiclass");
    cmd->add_flag("--intercept", config.intercept, "fit an unconstrained intercept");
    cmd->add_option("--shadow-const", config.shadow_const,
                    "median-of-means shot constant");
    cmd->add_option("--observable", config.observable,
                    "ansatz-expansion observable word (default Z on qubit 0)");
    cmd->add_option("--config", config_file,
                    "flat key=value config file; explicit flags override it");
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"post-variational quantum neural network toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    RunConfig config;
    std::string config_file;
    std::string features_path;
    std::string model_path;
    std::string data_dir;
    std::string gap_modes = "all";
    std::int64_t data_count = 100;
    int trials = 100;
    int rows = 50;
    int cols = 10;
    int train_per_class = 200;
    int test_per_class = 50;

    bool dump_dataset = false;
    CLI::App* features = app.add_subcommand("features", "generate a feature matrix CSV");
    add_common_options(features, config, config_file);
    features->add_flag("--dump-dataset", dump_dataset,
                       "also write the raw dataset as dataset.csv");

    CLI::App* train = app.add_subcommand("train", "fit a head on a feature CSV");
    add_common_options(train, config, config_file);
    train->add_option("--features", features_path, "feature CSV path")->required();

    CLI::App* eval = app.add_subcommand("eval", "evaluate a model on a feature CSV");
    add_common_options(eval, config, config_file);
    eval->add_option("--features", features_path, "feature CSV path")->required();
    eval->add_option("--model", model_path, "model JSON path")->required();

    CLI::App* budget = app.add_subcommand("budget", "plan a measurement budget");
    add_common_options(budget, config, config_file);
    budget->add_option("--data-count", data_count, "number of data points d");

    CLI::App* prune = app.add_subcommand("prune", "score and prune shift parameters");
    add_common_options(prune, config, config_file);

    CLI::App* verify = app.add_subcommand("verify-bounds", "loss-gap guarantee trials");
    add_common_options(verify, config, config_file);
    verify->add_option("--trials", trials, "trials per mode");
    verify->add_option("--rows", rows, "data count d");
    verify->add_option("--cols", cols, "neuron count m");
    verify->add_option("--gap-mode", gap_modes,
                       "unconstrained | ball | logistic-ball | all");

    CLI::App* repro_synth =
        app.add_subcommand("repro-synth", "end-to-end run on synthetic data");
    add_common_options(repro_synth, config, config_file);

    CLI::App* repro_fmnist =
        app.add_subcommand("repro-fmnist", "end-to-end coat-vs-shirt run");
    add_common_options(repro_fmnist, config, config_file);
    repro_fmnist->add_option("--data-dir", data_dir, "directory with the IDX files");
    repro_fmnist->add_option("--train-per-class", train_per_class,
                             "training rows per class");
    repro_fmnist->add_option("--test-per-class", test_per_class, "test rows per class");

    std::vector<std::string> expanded;
    try {
        expanded = expand_config(args);
    } catch (const std::exception& error) {
        ordered_json j;
        j["error"] = error.what();
        std::cerr << j.dump() << "\n";
        return 1;
    }
    std::vector<const char*> argv;
    argv.push_back("postvar");
    for (const std::string& arg : expanded) {
        argv.push_back(arg.c_str());
    }

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& error) {
        return app.exit(error);
    }

    try {
        if (features->parsed()) return cmd_features(config, dump_dataset);
        if (train->parsed()) return cmd_train(config, features_path);
        if (eval->parsed()) return cmd_eval(config, features_path, model_path);
        if (budget->parsed()) return cmd_budget(config, data_count);
        if (prune->parsed()) return cmd_prune(config);
        if (verify->parsed())
            return cmd_verify_bounds(config, trials, rows, cols, gap_modes);
        if (repro_synth->parsed()) return cmd_repro_synth(config);
        if (repro_fmnist->parsed())
            return cmd_repro_fmnist(config, data_dir, train_per_class, test_per_class);
        throw std::runtime_error("no subcommand given");
    } catch (const ValidationError& error) {
        ordered_json j;
        j["error"] = "config validation failed";
        j["violations"] = error.problems;
        std::cerr << j.dump() << "\n";
        return 2;
    } catch (const std::exception& error) {
        ordered_json j;
        j["error"] = error.what();
        std::cerr << j.dump() << "\n";
        return 1;
    }
}

}  // namespace postvar::cli
