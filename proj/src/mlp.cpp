#include "saddlecl/mlp.hpp"

#include <cmath>

namespace saddlecl {

std::size_t MlpModel::param_count() const {
    std::size_t n = 0;
    for (const Layer& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

MlpModel make_mlp(const std::vector<int>& dims, Rng& rng) {
    require(dims.size() >= 2, "make_mlp: need at least input and output dims");
    MlpModel m;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        require(dims[l] > 0 && dims[l + 1] > 0, "make_mlp: dims must be positive");
        Layer layer;
        layer.weight.resize(dims[l + 1], dims[l]);
        const double scale = std::sqrt(2.0 / static_cast<double>(dims[l]));
        for (Eigen::Index i = 0; i < layer.weight.rows(); ++i)
            for (Eigen::Index j = 0; j < layer.weight.cols(); ++j)
                layer.weight(i, j) = scale * gaussian(rng);
        layer.bias = Vector::Zero(dims[l + 1]);
        layer.activation = (l + 2 < dims.size()) ? Activation::Relu : Activation::Identity;
        m.layers.push_back(std::move(layer));
    }
    return m;
}

MlpModel clone_model(const MlpModel& model) {
    return model;  // value semantics: Eigen matrices deep-copy
}

namespace {

void check_chain(const MlpModel& model, const Matrix& batch) {
    require(!model.layers.empty(), "forward: model has no layers");
    if (batch.cols() != model.layers.front().weight.cols()) {
        throw std::invalid_argument("forward: batch is " + shape_str(batch) + " but first layer expects " +
                                    std::to_string(model.layers.front().weight.cols()) + " inputs (weight " +
                                    shape_str(model.layers.front().weight) + ")");
    }
    for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
        require(model.layers[l + 1].weight.cols() == model.layers[l].weight.rows(),
                "forward: layer dimensions do not chain at layer " + std::to_string(l + 1));
    }
}

struct ForwardTrace {
    std::vector<Matrix> inputs;   // inputs[l] feeds layer l; inputs[0] is the batch
    std::vector<Matrix> preacts;  // z_l before activation
    Matrix output;                // activation of the last layer
};

ForwardTrace run_forward(const MlpModel& model, const Matrix& batch) {
    check_chain(model, batch);
    ForwardTrace t;
    Matrix a = batch;
    for (const Layer& layer : model.layers) {
        t.inputs.push_back(a);
        Matrix z = a * layer.weight.transpose();
        z.rowwise() += layer.bias.transpose();
        t.preacts.push_back(z);
        a = (layer.activation == Activation::Relu) ? z.cwiseMax(0.0).eval() : z;
    }
    t.output = std::move(a);
    return t;
}

// Per-row weighted softmax cross-entropy on a logit column slice.
// Fills dlogits (full width, zero outside the slice) when requested.
double softmax_xent(const Matrix& logits, const Labels& labels, const std::vector<double>& w, HeadSlice head,
                    Matrix* dlogits) {
    const Eigen::Index n = logits.rows();
    const int c = head.resolve_count(static_cast<int>(logits.cols()));
    require(head.offset >= 0 && head.offset + c <= logits.cols(), "head slice out of range");
    require(static_cast<Eigen::Index>(labels.size()) == n, "labels length must match batch rows");
    require(n > 0, "batch must be nonempty");

    double loss = 0.0;
    if (dlogits) dlogits->setZero(n, logits.cols());
    for (Eigen::Index s = 0; s < n; ++s) {
        if (labels[s] < 0 || labels[s] >= c) {
            throw std::domain_error("label " + std::to_string(labels[s]) + " out of range [0, " +
                                    std::to_string(c) + ")");
        }
        const auto z = logits.row(s).segment(head.offset, c);
        const double m = z.maxCoeff();
        const double sum = (z.array() - m).exp().sum();
        const double lse = m + std::log(sum);
        loss += w[s] * (lse - z(labels[s]));
        if (dlogits) {
            auto dz = dlogits->row(s).segment(head.offset, c);
            dz = (z.array() - lse).exp() * w[s];
            dz(labels[s]) -= w[s];
        }
    }
    return loss;
}

LossResult backprop(const MlpModel& model, const Matrix& batch, const Labels& labels,
                    const std::vector<double>& w, bool want_input_grads, HeadSlice head) {
    ForwardTrace t = run_forward(model, batch);
    require_finite(t.output, "loss_and_grads: logits");

    LossResult res;
    Matrix delta;
    res.loss = softmax_xent(t.output, labels, w, head, &delta);
    require_finite(res.loss, "loss_and_grads: loss");

    const std::size_t L = model.layers.size();
    res.grads.weight_grads.resize(L);
    res.grads.bias_grads.resize(L);
    for (std::size_t li = L; li-- > 0;) {
        const Layer& layer = model.layers[li];
        if (layer.activation == Activation::Relu) {
            // subgradient at 0 is 0
            delta = (t.preacts[li].array() > 0.0).select(delta, 0.0);
        }
        res.grads.weight_grads[li] = delta.transpose() * t.inputs[li];
        res.grads.bias_grads[li] = delta.colwise().sum();
        if (li > 0 || want_input_grads) {
            delta = (delta * layer.weight).eval();
        }
    }
    if (want_input_grads) {
        res.grads.input_grads = std::move(delta);
        require_finite(res.grads.input_grads, "loss_and_grads: input grads");
    }
    return res;
}

}  // namespace

Matrix forward(const MlpModel& model, const Matrix& batch) {
    Matrix out = run_forward(model, batch).output;
    require_finite(out, "forward: logits");
    return out;
}

LossResult loss_and_grads(const MlpModel& model, const Matrix& batch, const Labels& labels,
                          bool want_input_grads, HeadSlice head) {
    std::vector<double> w(static_cast<std::size_t>(batch.rows()), 1.0 / static_cast<double>(batch.rows()));
    return backprop(model, batch, labels, w, want_input_grads, head);
}

LossResult weighted_loss_and_grads(const MlpModel& model, const Matrix& batch, const Labels& labels,
                                   const std::vector<double>& sample_weights, bool want_input_grads,
                                   HeadSlice head) {
    require(sample_weights.size() == static_cast<std::size_t>(batch.rows()),
            "weighted_loss_and_grads: one weight per batch row required");
    return backprop(model, batch, labels, sample_weights, want_input_grads, head);
}

double batch_loss(const MlpModel& model, const Matrix& batch, const Labels& labels, HeadSlice head) {
    Matrix logits = forward(model, batch);
    std::vector<double> w(static_cast<std::size_t>(batch.rows()), 1.0 / static_cast<double>(batch.rows()));
    const double loss = softmax_xent(logits, labels, w, head, nullptr);
    require_finite(loss, "batch_loss");
    return loss;
}

double weighted_batch_loss(const MlpModel& model, const Matrix& batch, const Labels& labels,
                           const std::vector<double>& sample_weights, HeadSlice head) {
    require(sample_weights.size() == static_cast<std::size_t>(batch.rows()),
            "weighted_batch_loss: one weight per batch row required");
    Matrix logits = forward(model, batch);
    const double loss = softmax_xent(logits, labels, sample_weights, head, nullptr);
    require_finite(loss, "weighted_batch_loss");
    return loss;
}

double accuracy(const MlpModel& model, const Matrix& batch, const Labels& labels, HeadSlice head) {
    Matrix logits = forward(model, batch);
    const int c = head.resolve_count(static_cast<int>(logits.cols()));
    require(head.offset >= 0 && head.offset + c <= logits.cols(), "head slice out of range");
    require(static_cast<Eigen::Index>(labels.size()) == logits.rows(), "labels length must match batch rows");
    std::size_t hits = 0;
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        Eigen::Index arg = 0;
        logits.row(s).segment(head.offset, c).maxCoeff(&arg);
        if (static_cast<int>(arg) == labels[s]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(logits.rows());
}

void apply_update_inplace(MlpModel& model, const GradientBundle& grads, double step) {
    require(grads.weight_grads.size() == model.layers.size() && grads.bias_grads.size() == model.layers.size(),
            "apply_update: gradient bundle does not match model layers");
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        require(grads.weight_grads[li].rows() == model.layers[li].weight.rows() &&
                    grads.weight_grads[li].cols() == model.layers[li].weight.cols() &&
                    grads.bias_grads[li].size() == model.layers[li].bias.size(),
                "apply_update: gradient shapes do not match layer " + std::to_string(li));
        require_finite(grads.weight_grads[li], "apply_update: weight grads");
        require_finite(grads.bias_grads[li], "apply_update: bias grads");
    }
    if (step == 0.0) return;  // keeps the model bitwise intact
    for (std::size_t li = 0; li < model.layers.size(); ++li) {
        model.layers[li].weight -= step * grads.weight_grads[li];
        model.layers[li].bias -= step * grads.bias_grads[li];
    }
}

MlpModel apply_update(const MlpModel& model, const GradientBundle& grads, double step) {
    MlpModel out = model;
    apply_update_inplace(out, grads, step);
    return out;
}

bool models_equal(const MlpModel& a, const MlpModel& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t li = 0; li < a.layers.size(); ++li) {
        if (a.layers[li].activation != b.layers[li].activation) return false;
        if (a.layers[li].weight.rows() != b.layers[li].weight.rows() ||
            a.layers[li].weight.cols() != b.layers[li].weight.cols())
            return false;
        if ((a.layers[li].weight.array() != b.layers[li].weight.array()).any()) return false;
        if ((a.layers[li].bias.array() != b.layers[li].bias.array()).any()) return false;
    }
    return true;
}

}  // namespace saddlecl
