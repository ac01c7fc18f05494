#pragma once

#include "saddlecl/rng.hpp"
#include "saddlecl/types.hpp"

namespace saddlecl {

enum class Activation { Relu, Identity };

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation activation = Activation::Identity;
};

// A plain multilayer perceptron. The concatenation of all weights and
// biases is the parameter vector; layer dimensions must chain.
struct MlpModel {
    std::vector<Layer> layers;

    int input_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols()); }
    int output_dim() const { return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows()); }
    std::size_t param_count() const;
};

// Hidden layers get ReLU, the final layer is linear. Weights are
// Gaussian scaled by sqrt(2/fan_in), biases start at zero.
MlpModel make_mlp(const std::vector<int>& dims, Rng& rng);

MlpModel clone_model(const MlpModel& model);

// Restrict loss/accuracy to a column range of the logits. A model with
// several output heads evaluates one head by slicing; count < 0 means
// the full output.
struct HeadSlice {
    int offset = 0;
    int count = -1;

    int resolve_count(int output_dim) const { return count < 0 ? output_dim : count; }
};

Matrix forward(const MlpModel& model, const Matrix& batch);

struct GradientBundle {
    std::vector<Matrix> weight_grads;
    std::vector<Vector> bias_grads;
    Matrix input_grads;  // empty unless requested
};

struct LossResult {
    double loss = 0.0;
    GradientBundle grads;
};

// Mean softmax cross-entropy over the batch with exact analytic
// gradients for every parameter and, on request, the batch entries.
LossResult loss_and_grads(const MlpModel& model, const Matrix& batch, const Labels& labels,
                          bool want_input_grads, HeadSlice head = {});

// Same machinery with per-sample weights: loss = sum_s w_s * ce_s.
// This is how a task-weighted cost is evaluated on a mixed batch.
LossResult weighted_loss_and_grads(const MlpModel& model, const Matrix& batch, const Labels& labels,
                                   const std::vector<double>& sample_weights, bool want_input_grads,
                                   HeadSlice head = {});

// Mean cross-entropy only, no gradients.
double batch_loss(const MlpModel& model, const Matrix& batch, const Labels& labels, HeadSlice head = {});

double weighted_batch_loss(const MlpModel& model, const Matrix& batch, const Labels& labels,
                           const std::vector<double>& sample_weights, HeadSlice head = {});

// Fraction of rows whose argmax inside the head equals the label.
double accuracy(const MlpModel& model, const Matrix& batch, const Labels& labels, HeadSlice head = {});

// p <- p - step * g on every parameter.
void apply_update_inplace(MlpModel& model, const GradientBundle& grads, double step);

MlpModel apply_update(const MlpModel& model, const GradientBundle& grads, double step);

bool models_equal(const MlpModel& a, const MlpModel& b);

}  // namespace saddlecl
