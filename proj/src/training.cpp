#include "sparsebar/training.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "sparsebar/error.hpp"
#include "sparsebar/kernels.hpp"
#include "sparsebar/rng.hpp"

namespace sparsebar {
namespace {

void fill_conductances(const ThetaParams& theta, const DeviceParams& device, JunctionValues& sigma) {
    sigma.resize(theta.theta.size());
    for (std::size_t j = 0; j < theta.theta.size(); ++j) {
        const auto& th = theta.theta[j];
        auto& sg = sigma[j];
        sg.p.resize(th.size());
        sg.n.resize(th.size());
        for (std::size_t k = 0; k < th.size(); ++k) {
            sg.p[k] = theta_to_conductance(th.p[k], device);
            sg.n[k] = theta_to_conductance(th.n[k], device);
        }
    }
}

[[noreturn]] void non_finite(const char* what, std::size_t layer, std::size_t neuron) {
    throw DivergenceError(std::string("non-finite ") + what + " at layer " + std::to_string(layer) + ", neuron " +
                          std::to_string(neuron));
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("train: learning_rate must be positive");
    if (!(lr_decay >= 0.0)) throw ConfigError("train: lr_decay must be non-negative");
    if (max_epochs == 0 || max_epochs > kEpochCeiling)
        throw ConfigError("train: max_epochs must be in [1, " + std::to_string(kEpochCeiling) + "]");
    if (!(target_accuracy > 0.0 && target_accuracy <= 1.0)) throw ConfigError("train: target_accuracy must be in (0, 1]");
    if (batch_size != 1) throw ConfigError("train: only batch_size 1 is supported");
    if (!(init_scale >= 0.0)) throw ConfigError("train: init_scale must be non-negative");
    if (!(target_level > 0.0 && target_level <= 1.0)) throw ConfigError("train: target_level must be in (0, 1]");
}

ThetaParams init_theta(const NetworkStructure& structure, const TrainConfig& config) {
    ThetaParams t{structure, make_values(structure)};
    Rng rng(derive_seed(config.seed, {0x7e7a}));
    for (auto& pair : t.theta) {
        for (std::size_t k = 0; k < pair.size(); ++k) {
            pair.p[k] = uniform(rng, -config.init_scale, config.init_scale);
            pair.n[k] = uniform(rng, -config.init_scale, config.init_scale);
        }
    }
    return t;
}

ConductanceNetwork to_conductance_network(const ThetaParams& theta, const DeviceParams& device) {
    ConductanceNetwork net{theta.structure, {}, device};
    fill_conductances(theta, device, net.sigma);
    return net;
}

MappedWeights map_weights(const ThetaParams& theta, const DeviceParams& device) {
    MappedWeights mw{theta.structure, {}, {}};
    fill_conductances(theta, device, mw.weight);
    for (std::size_t j = 0; j < theta.structure.junction_count(); ++j) {
        const auto& layout = theta.structure.layout(j);
        auto& w = mw.weight[j];
        auto& totals = mw.row_conductance.emplace_back(layout.outputs);
        for (std::size_t r = 0; r < layout.outputs; ++r) {
            double s = 0.0;
            for (std::size_t k = layout.row_begin[r]; k < layout.row_begin[r + 1]; ++k) s += w.p[k] + w.n[k];
            totals[r] = s;
            for (std::size_t k = layout.row_begin[r]; k < layout.row_begin[r + 1]; ++k) {
                w.p[k] /= s;
                w.n[k] /= s;
            }
        }
    }
    return mw;
}

void forward_abstract(const MappedWeights& weights, std::span<const double> input, const DeviceParams& device,
                      ForwardTrace& trace) {
    const auto& topo = weights.structure.topology();
    if (input.size() != topo.inputs(0))
        throw ConfigError("input has " + std::to_string(input.size()) + " values, network expects " +
                          std::to_string(topo.inputs(0)));
    const std::size_t junctions = topo.junction_count();
    trace.vp.resize(junctions);
    trace.vn.resize(junctions);
    trace.net.resize(junctions);
    load_input(input, device, trace.vp[0], trace.vn[0]);
    for (std::size_t j = 0; j < junctions; ++j) {
        const auto& layout = weights.structure.layout(j);
        const auto& w = weights.weight[j];
        auto& net = trace.net[j];
        net.resize(layout.outputs);
        for (std::size_t r = 0; r < layout.outputs; ++r) {
            const std::size_t b = layout.row_begin[r];
            net[r] = kernels::row_dot(layout.column.data() + b, w.p.data() + b, w.n.data() + b, trace.vp[j].data(),
                                      trace.vn[j].data(), layout.row_size(r));
        }
        if (j + 1 < junctions)
            activate_hidden(net, device, trace.vp[j + 1], trace.vn[j + 1]);
        else
            activate_output(net, device, trace.output);
    }
}

ForwardTrace forward_abstract(const MappedWeights& weights, std::span<const double> input, const DeviceParams& device) {
    ForwardTrace t;
    forward_abstract(weights, input, device, t);
    return t;
}

std::vector<double> one_hot_target(std::size_t label, std::size_t classes, const DeviceParams& device, double level) {
    std::vector<double> t(classes, -level * device.half_vdd());
    t.at(label) = level * device.half_vdd();
    return t;
}

SgdStepper::SgdStepper(const NetworkStructure& structure, const DeviceParams& device, G2Gradient mode)
    : structure_(structure), device_(device), mode_(mode) {
    const auto& topo = structure_.topology();
    for (std::size_t j = 0; j < structure_.junction_count(); ++j) {
        row_total_.emplace_back(topo.outputs(j));
        delta_.emplace_back(topo.outputs(j));
    }
    grad_ = make_values(structure_);
}

void SgdStepper::forward(const ThetaParams& theta, std::span<const double> input) {
    fill_conductances(theta, device_, sigma_);
    const auto& topo = structure_.topology();
    if (input.size() != topo.inputs(0)) throw ConfigError("input length does not match the network");
    const std::size_t junctions = topo.junction_count();
    trace_.vp.resize(junctions);
    trace_.vn.resize(junctions);
    trace_.net.resize(junctions);
    load_input(input, device_, trace_.vp[0], trace_.vn[0]);
    for (std::size_t j = 0; j < junctions; ++j) {
        const auto& layout = structure_.layout(j);
        const auto& sg = sigma_[j];
        auto& net = trace_.net[j];
        net.resize(layout.outputs);
        for (std::size_t r = 0; r < layout.outputs; ++r) {
            const std::size_t b = layout.row_begin[r];
            const auto s = kernels::row_sums(layout.column.data() + b, sg.p.data() + b, sg.n.data() + b,
                                             trace_.vp[j].data(), trace_.vn[j].data(), layout.row_size(r));
            row_total_[j][r] = s.total;
            net[r] = s.weighted / s.total;
        }
        if (j + 1 < junctions)
            activate_hidden(net, device_, trace_.vp[j + 1], trace_.vn[j + 1]);
        else
            activate_output(net, device_, trace_.output);
    }
}

double SgdStepper::backprop(std::span<const double> target, JunctionValues& out) {
    const std::size_t junctions = structure_.junction_count();
    const std::size_t last = junctions - 1;
    if (target.size() != trace_.output.size()) throw ConfigError("target length does not match output layer");

    // Output layer: O = f(net), L = 0.5 * sum (t - O)^2.
    double loss = 0.0;
    for (std::size_t m = 0; m < target.size(); ++m) {
        const double err = trace_.output[m] - target[m];
        loss += 0.5 * err * err;
        delta_[last][m] = err * inverter_vtc_slope(trace_.net[last][m], device_);
        if (!std::isfinite(delta_[last][m])) non_finite("output error", junctions + 1, m);
    }

    out.resize(junctions);
    for (std::size_t jj = junctions; jj-- > 0;) {
        const auto& layout = structure_.layout(jj);
        const auto& sg = sigma_[jj];
        const auto& xp = trace_.vp[jj];
        const auto& xn = trace_.vn[jj];
        auto& g = out[jj];
        g.p.resize(layout.entries());
        g.n.resize(layout.entries());

        for (std::size_t r = 0; r < layout.outputs; ++r) {
            const std::size_t b = layout.row_begin[r];
            const double center = mode_ == G2Gradient::full ? trace_.net[jj][r] : 0.0;
            kernels::row_theta_grad(layout.column.data() + b, sg.p.data() + b, sg.n.data() + b, xp.data(), xn.data(),
                                    center, delta_[jj][r] / row_total_[jj][r], device_.sigma_min, device_.sigma_max,
                                    g.p.data() + b, g.n.data() + b, layout.row_size(r));
        }
        if (jj == 0) break;

        // Error w.r.t. this junction's input signals: sum_r delta_r * w_ri.
        gxp_.assign(layout.inputs, 0.0);
        gxn_.assign(layout.inputs, 0.0);
        for (std::size_t r = 0; r < layout.outputs; ++r) {
            const double scale = delta_[jj][r] / row_total_[jj][r];
            for (std::size_t k = layout.row_begin[r]; k + 1 < layout.row_begin[r + 1]; ++k) {
                const auto i = static_cast<std::size_t>(layout.column[k]);
                gxp_[i] += scale * sg.p[k];
                gxn_[i] += scale * sg.n[k];
            }
        }
        // Hidden layer jj: vn = f(net), vp = f(vn) (or -vn when ideal).
        const auto& net = trace_.net[jj - 1];
        for (std::size_t i = 0; i < layout.inputs; ++i) {
            const double dvn = inverter_vtc_slope(net[i], device_);
            const double chain = device_.regeneration == Regeneration::cascaded
                                     ? gxn_[i] + gxp_[i] * inverter_vtc_slope(xn[i], device_)
                                     : gxn_[i] - gxp_[i];
            delta_[jj - 1][i] = dvn * chain;
            if (!std::isfinite(delta_[jj - 1][i])) non_finite("hidden error", jj + 1, i);
        }
    }
    return loss;
}

double SgdStepper::gradient(const ThetaParams& theta, std::span<const double> input, std::span<const double> target,
                            JunctionValues& out) {
    forward(theta, input);
    return backprop(target, out);
}

double SgdStepper::step(ThetaParams& theta, std::span<const double> input, std::span<const double> target, double eta) {
    const double loss = gradient(theta, input, target, grad_);
    for (std::size_t j = 0; j < grad_.size(); ++j) {
        kernels::axpy(-eta, grad_[j].p.data(), theta.theta[j].p.data(), grad_[j].size());
        kernels::axpy(-eta, grad_[j].n.data(), theta.theta[j].n.data(), grad_[j].size());
    }
    // An overflowed parameter would silently saturate its conductance.
    for (std::size_t j = 0; j < grad_.size(); ++j) {
        const auto& layout = structure_.layout(j);
        for (std::size_t r = 0; r < layout.outputs; ++r)
            for (std::size_t k = layout.row_begin[r]; k < layout.row_begin[r + 1]; ++k)
                if (!std::isfinite(theta.theta[j].p[k]) || !std::isfinite(theta.theta[j].n[k]))
                    throw DivergenceError("non-finite parameter at junction " + std::to_string(j + 1) + ", neuron " +
                                          std::to_string(r));
    }
    return loss;
}

Gradient backward(const ThetaParams& theta, std::span<const double> input, std::span<const double> target,
                  const DeviceParams& device, G2Gradient mode) {
    SgdStepper stepper(theta.structure, device, mode);
    Gradient g;
    g.loss = stepper.gradient(theta, input, target, g.d_theta);
    return g;
}

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::target_hit: return "target-hit";
        case StopReason::epoch_limit: return "epoch-limit";
        case StopReason::diverged: return "diverged";
    }
    return "unknown";
}

TrainResult train(const Dataset& train_set, const NetworkStructure& structure, const TrainConfig& config,
                  const DeviceParams& device) {
    config.validate();
    device.validate();
    if (train_set.size() == 0) throw DataError("training set is empty");
    if (train_set.feature_count != structure.topology().inputs(0))
        throw ConfigError("dataset has " + std::to_string(train_set.feature_count) + " features, network expects " +
                          std::to_string(structure.topology().inputs(0)));
    if (train_set.class_count > structure.topology().layer_sizes().back())
        throw ConfigError("dataset has more classes than output neurons");

    const auto start = std::chrono::steady_clock::now();
    const std::size_t classes = structure.topology().layer_sizes().back();
    std::vector<std::vector<double>> targets;
    targets.reserve(train_set.size());
    for (std::size_t label : train_set.labels)
        targets.push_back(one_hot_target(label, classes, device, config.target_level));

    TrainResult result{init_theta(structure, config), {}};
    SgdStepper stepper(structure, device, config.g2_gradient);
    Rng order_rng(derive_seed(config.seed, {0x5eed}));
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    JunctionValues last_good = result.theta.theta;
    JunctionValues best = result.theta.theta;
    double best_acc = -1.0;
    double best_loss = 0.0;

    auto& report = result.report;
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        fisher_yates(order, order_rng);
        const double eta = config.learning_rate / (1.0 + config.lr_decay * static_cast<double>(epoch - 1));
        double loss_sum = 0.0;
        try {
            for (std::size_t i : order)
                loss_sum += stepper.step(result.theta, train_set.sample(i), targets[i], eta);
            if (!std::isfinite(loss_sum)) throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch));
        } catch (const DivergenceError& e) {
            result.theta.theta = last_good;
            report.stop_reason = StopReason::diverged;
            report.divergence_message = e.what();
            break;
        }
        last_good = result.theta.theta;

        const double acc = evaluate(result.theta, train_set, device).accuracy;
        const double loss = loss_sum / static_cast<double>(train_set.size());
        report.epochs.push_back({epoch, loss, acc});
        report.epochs_run = epoch;
        if (acc >= config.target_accuracy) {
            report.stop_reason = StopReason::target_hit;
            report.selected_epoch = epoch;
            break;
        }
        if (!config.keep_best) report.selected_epoch = epoch;
        if (config.keep_best && (acc > best_acc || (acc == best_acc && loss < best_loss))) {
            best = result.theta.theta;
            best_acc = acc;
            best_loss = loss;
            report.selected_epoch = epoch;
        }
    }
    if (config.keep_best && report.stop_reason == StopReason::epoch_limit && best_acc >= 0.0) {
        result.theta.theta = best;
    } else if (report.stop_reason == StopReason::diverged) {
        report.selected_epoch = report.epochs_run;
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

namespace {

template <class Forward>
EvalResult evaluate_with(const Dataset& data, std::size_t outputs, Forward&& forward) {
    EvalResult r;
    const std::size_t classes = std::max(outputs, data.class_count);
    r.confusion.assign(classes * classes, 0);
    r.total = data.size();
    r.predictions.reserve(data.size());
    ForwardTrace trace;
    for (std::size_t i = 0; i < data.size(); ++i) {
        forward(data.sample(i), trace);
        const std::size_t pred = classify(trace.output);
        r.predictions.push_back(pred);
        r.confusion[data.labels[i] * classes + pred] += 1;
        if (pred == data.labels[i]) ++r.correct;
    }
    r.accuracy = r.total ? static_cast<double>(r.correct) / static_cast<double>(r.total) : 0.0;
    return r;
}

}  // namespace

EvalResult evaluate(const ThetaParams& theta, const Dataset& data, const DeviceParams& device) {
    const MappedWeights w = map_weights(theta, device);
    return evaluate_with(data, theta.structure.topology().layer_sizes().back(),
                         [&](std::span<const double> x, ForwardTrace& t) { forward_abstract(w, x, device, t); });
}

EvalResult evaluate(const ConductanceNetwork& net, const Dataset& data) {
    return evaluate_with(data, net.structure.topology().layer_sizes().back(),
                         [&](std::span<const double> x, ForwardTrace& t) { forward_circuit(net, x, t); });
}

}  // namespace sparsebar
