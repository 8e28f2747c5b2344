#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mosaic/slicer.hpp"

namespace mosaic {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Desk-scale shapes used by the self-check suite. The math is scale-free;
// these just exercise every matrix path.
constexpr int kToyTokens = 12;
constexpr int kToyChannels = 16;
constexpr int kToyProjDim = 16;
constexpr int kToyEmbedDim = 32;
constexpr int kToyOrganCount = 13;

// Row-wise softmax with per-row max subtraction.
Matrix softmax_rows(const Matrix& m);

struct FusionParams {
    Matrix w_q, w_k, w_v;  // C x d
    int num_heads = 1;
    Vector ln_gain, ln_bias;  // length C
    Matrix w1;                // C x C'
    Vector b1;                // C'
    Matrix w2;                // C' x C
    Vector b2;                // C
    double ln_eps = 1e-5;

    void validate(Index token_width) const;
};

FusionParams random_fusion_params(int channels, int proj_dim, int hidden, int heads,
                                  std::uint64_t seed);

// softmax(Q K^T / sqrt(d_head)) V with Q = F W_Q etc.; heads split the
// projection columns and concatenate their outputs.
Matrix attention(const Matrix& f, const FusionParams& params);

// Per-row (x - mean)/sqrt(var + eps), population variance, then gain/bias.
Matrix layer_norm(const Matrix& f, const Vector& gain, const Vector& bias, double eps = 1e-5);

// W2 relu(W1 N(F + attention(F))) with biases; no second residual.
Matrix fusion_block(const Matrix& f, const FusionParams& params);

// dot(a,b)/(|a||b|), clamped to [-1,1]. Zero inputs throw DegenerateVector.
double cosine_sim(const Vector& a, const Vector& b);

struct HeadParams {
    std::vector<Matrix> weights;  // layer l: in x out
    std::vector<Vector> biases;   // layer l: out

    void validate(Index input_width) const;
    Index output_width() const;
};

HeadParams random_head_params(int input, const std::vector<int>& hidden, int output,
                              std::uint64_t seed);

// MLP over [z_img; sims]: relu hidden layers, sigmoid output.
Vector predict_head(const Vector& z_img, const Vector& sims, const HeadParams& params);

struct FocalConfig {
    Vector alpha;        // per-class positive weight, > 0
    double gamma = 2.0;  // focusing parameter, >= 0
};

// Class-balanced focal loss, negated into a minimizable quantity:
//   sum_k -[ a_k (1-p_k)^g y_k ln p_k + (1-a_k) p_k^g (1-y_k) ln(1-p_k) ]
// p clamped to [1e-7, 1-1e-7].
double cbfl_loss(const Vector& y_hat, const std::vector<int>& y, const FocalConfig& config);

// Inverse-frequency class weights: total/pos (20 for empty classes), rescaled
// to mean 1, clamped to [0.05, 20].
Vector alpha_from_frequencies(const std::vector<std::int64_t>& pos_counts, std::int64_t total);

// --- analytic gradients (probe functionals used by the check suite) ---

double cbfl_from_logits(const Vector& logits, const std::vector<int>& y,
                        const FocalConfig& config);
Vector cbfl_logit_grad(const Vector& logits, const std::vector<int>& y,
                       const FocalConfig& config);

// d(sum of attention output)/d{W_Q, W_K, W_V}
void attention_weight_grads(const Matrix& f, const FusionParams& params, Matrix& d_wq,
                            Matrix& d_wk, Matrix& d_wv);

// d(sum of fusion_block output)/dW1
Matrix fusion_w1_grad(const Matrix& f, const FusionParams& params);

// d(sum of predict_head output)/d{weights, biases}
HeadParams head_param_grads(const Vector& z_img, const Vector& sims, const HeadParams& params);

// Max relative error between central differences of f and the analytic
// gradient; denominator max(|numeric|, |analytic|, 1e-8).
double grad_check(const std::function<double(const Vector&)>& f, const Vector& theta,
                  const Vector& analytic, double h = 1e-5);

// --- deterministic toy encoders (CLIP stand-ins) ---

Vector toy_encode_image(const MultiViewTensor& tensor, int dim);
Vector toy_encode_text(const std::string& prompt, int dim);

// Mean of the prompt embeddings, re-normalized.
Vector ensemble_text_embedding(const std::vector<Vector>& vectors);

// --- parameter serialization (shape header + row-major values) ---

void save_fusion_params(const FusionParams& params, const std::string& path);
FusionParams load_fusion_params(const std::string& path);
void save_head_params(const HeadParams& params, const std::string& path);
HeadParams load_head_params(const std::string& path);

// --- self-check suite (kernels-check subcommand, acceptance criterion) ---

struct KernelCheck {
    std::string name;
    double max_error = 0;
    double tolerance = 0;
    bool passed = false;
};

struct KernelCheckReport {
    std::vector<KernelCheck> checks;
    bool all_passed() const;
};

KernelCheckReport run_kernel_checks(int seeds = 20);

}  // namespace mosaic
