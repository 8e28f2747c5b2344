#include "mosaic/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mosaic/rng.hpp"

namespace mosaic {

namespace {

Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double scale = 0.5) {
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = scale * det_gaussian(rng);
    return m;
}

Vector random_vector(Index n, std::mt19937_64& rng, double scale = 0.5) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = scale * det_gaussian(rng);
    return v;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (Index r = 0; r < m.rows(); ++r) {
        double mx = m.row(r).maxCoeff();
        out.row(r) = (m.row(r).array() - mx).exp().matrix();
        out.row(r) /= out.row(r).sum();
    }
    return out;
}

void FusionParams::validate(Index token_width) const {
    const Index c = token_width;
    if (w_q.rows() != c || w_k.rows() != c || w_v.rows() != c)
        throw ShapeError("FusionParams: projection rows must equal token width");
    if (w_q.cols() != w_k.cols() || w_q.cols() != w_v.cols())
        throw ShapeError("FusionParams: projection widths differ");
    if (num_heads < 1 || w_q.cols() % num_heads != 0)
        throw ShapeError("FusionParams: head count must divide the projection width");
    if (ln_gain.size() != c || ln_bias.size() != c)
        throw ShapeError("FusionParams: layer-norm size must equal token width");
    if (w1.rows() != c || w2.cols() != c || w1.cols() != w2.rows())
        throw ShapeError("FusionParams: feed-forward shapes incompatible");
    if (b1.size() != w1.cols() || b2.size() != w2.cols())
        throw ShapeError("FusionParams: bias sizes incompatible");
}

FusionParams random_fusion_params(int channels, int proj_dim, int hidden, int heads,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    FusionParams p;
    p.w_q = random_matrix(channels, proj_dim, rng);
    p.w_k = random_matrix(channels, proj_dim, rng);
    p.w_v = random_matrix(channels, proj_dim, rng);
    p.num_heads = heads;
    p.ln_gain = Vector::Ones(channels) + random_vector(channels, rng, 0.1);
    p.ln_bias = random_vector(channels, rng, 0.1);
    p.w1 = random_matrix(channels, hidden, rng);
    p.b1 = random_vector(hidden, rng);
    p.w2 = random_matrix(hidden, channels, rng);
    p.b2 = random_vector(channels, rng);
    return p;
}

Matrix attention(const Matrix& f, const FusionParams& params) {
    params.validate(f.cols());
    const Index d = params.w_q.cols();
    const int h = params.num_heads;
    const Index dh = d / h;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix q = f * params.w_q;
    Matrix k = f * params.w_k;
    Matrix v = f * params.w_v;
    Matrix out(f.rows(), d);
    for (int i = 0; i < h; ++i) {
        auto qi = q.middleCols(i * dh, dh);
        auto ki = k.middleCols(i * dh, dh);
        auto vi = v.middleCols(i * dh, dh);
        Matrix scores = qi * ki.transpose() * inv_sqrt;
        out.middleCols(i * dh, dh) = softmax_rows(scores) * vi;
    }
    return out;
}

Matrix layer_norm(const Matrix& f, const Vector& gain, const Vector& bias, double eps) {
    if (gain.size() != f.cols() || bias.size() != f.cols())
        throw ShapeError("layer_norm: gain/bias width mismatch");
    Matrix out(f.rows(), f.cols());
    const double n = static_cast<double>(f.cols());
    for (Index r = 0; r < f.rows(); ++r) {
        double mean = f.row(r).mean();
        double var = (f.row(r).array() - mean).square().sum() / n;
        Eigen::ArrayXd centered =
            (f.row(r).transpose().array() - mean) / std::sqrt(var + eps);
        out.row(r) = (centered * gain.array() + bias.array()).matrix().transpose();
    }
    return out;
}

Matrix fusion_block(const Matrix& f, const FusionParams& params) {
    params.validate(f.cols());
    if (params.w_q.cols() != f.cols())
        throw ShapeError("fusion_block: attention width must match token width for the residual");
    Matrix g = layer_norm(f + attention(f, params), params.ln_gain, params.ln_bias, params.ln_eps);
    Matrix pre = (g * params.w1).rowwise() + params.b1.transpose();
    Matrix hidden = pre.cwiseMax(0.0);
    return (hidden * params.w2).rowwise() + params.b2.transpose();
}

double cosine_sim(const Vector& a, const Vector& b) {
    if (a.size() != b.size()) throw ShapeError("cosine_sim: length mismatch");
    double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) throw DegenerateVector("cosine_sim: zero vector");
    return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

void HeadParams::validate(Index input_width) const {
    if (weights.empty() || weights.size() != biases.size())
        throw ShapeError("HeadParams: need matching weight/bias layers");
    Index w = input_width;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        if (weights[l].rows() != w) throw ShapeError("HeadParams: layer input width mismatch");
        if (biases[l].size() != weights[l].cols())
            throw ShapeError("HeadParams: bias width mismatch");
        w = weights[l].cols();
    }
}

Index HeadParams::output_width() const {
    return weights.empty() ? 0 : weights.back().cols();
}

HeadParams random_head_params(int input, const std::vector<int>& hidden, int output,
                              std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    HeadParams p;
    int in = input;
    for (int h : hidden) {
        p.weights.push_back(random_matrix(in, h, rng));
        p.biases.push_back(random_vector(h, rng));
        in = h;
    }
    p.weights.push_back(random_matrix(in, output, rng));
    p.biases.push_back(random_vector(output, rng));
    return p;
}

Vector predict_head(const Vector& z_img, const Vector& sims, const HeadParams& params) {
    Vector a(z_img.size() + sims.size());
    a << z_img, sims;
    params.validate(a.size());
    const std::size_t last = params.weights.size() - 1;
    for (std::size_t l = 0; l <= last; ++l) {
        Vector u = params.weights[l].transpose() * a + params.biases[l];
        if (l < last) {
            a = u.cwiseMax(0.0);
        } else {
            a = u.unaryExpr([](double x) { return sigmoid(x); });
        }
    }
    return a;
}

namespace {

void validate_focal(const Vector& y_hat, const std::vector<int>& y, const FocalConfig& config) {
    if (y_hat.size() != static_cast<Index>(y.size()) || y_hat.size() != config.alpha.size())
        throw ShapeError("cbfl_loss: length mismatch");
    if (config.gamma < 0) throw ConfigError("cbfl_loss: gamma must be >= 0");
    if ((config.alpha.array() <= 0).any()) throw ConfigError("cbfl_loss: alpha must be > 0");
}

}  // namespace

double cbfl_loss(const Vector& y_hat, const std::vector<int>& y, const FocalConfig& config) {
    validate_focal(y_hat, y, config);
    double loss = 0;
    for (Index k = 0; k < y_hat.size(); ++k) {
        double p = std::clamp(y_hat[k], 1e-7, 1.0 - 1e-7);
        double a = config.alpha[k];
        if (y[k]) {
            loss -= a * std::pow(1.0 - p, config.gamma) * std::log(p);
        } else {
            loss -= (1.0 - a) * std::pow(p, config.gamma) * std::log(1.0 - p);
        }
    }
    return loss;
}

Vector alpha_from_frequencies(const std::vector<std::int64_t>& pos_counts, std::int64_t total) {
    if (total <= 0) throw EmptyDataset("alpha_from_frequencies: total must be > 0");
    if (pos_counts.empty()) throw EmptyDataset("alpha_from_frequencies: no classes");
    constexpr double kLo = 0.05, kHi = 20.0;
    Vector alpha(pos_counts.size());
    for (std::size_t k = 0; k < pos_counts.size(); ++k) {
        alpha[k] = pos_counts[k] > 0
                       ? static_cast<double>(total) / static_cast<double>(pos_counts[k])
                       : kHi;
    }
    alpha /= alpha.mean();
    return alpha.cwiseMax(kLo).cwiseMin(kHi);
}

double cbfl_from_logits(const Vector& logits, const std::vector<int>& y,
                        const FocalConfig& config) {
    Vector p = logits.unaryExpr([](double x) { return sigmoid(x); });
    return cbfl_loss(p, y, config);
}

Vector cbfl_logit_grad(const Vector& logits, const std::vector<int>& y,
                       const FocalConfig& config) {
    const double g = config.gamma;
    Vector grad(logits.size());
    for (Index k = 0; k < logits.size(); ++k) {
        double p = sigmoid(logits[k]);
        double a = config.alpha[k];
        double dl_dp;
        if (y[k]) {
            // d/dp of -a (1-p)^g ln p
            dl_dp = a * (g * std::pow(1.0 - p, g - 1.0) * std::log(p) -
                         std::pow(1.0 - p, g) / p);
        } else {
            // d/dp of -(1-a) p^g ln(1-p)
            dl_dp = (1.0 - a) * (-g * std::pow(p, g - 1.0) * std::log(1.0 - p) +
                                 std::pow(p, g) / (1.0 - p));
        }
        grad[k] = dl_dp * p * (1.0 - p);
    }
    return grad;
}

void attention_weight_grads(const Matrix& f, const FusionParams& params, Matrix& d_wq,
                            Matrix& d_wk, Matrix& d_wv) {
    params.validate(f.cols());
    const Index d = params.w_q.cols();
    const int h = params.num_heads;
    const Index dh = d / h;
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix q = f * params.w_q;
    Matrix k = f * params.w_k;
    Matrix v = f * params.w_v;
    Matrix dq = Matrix::Zero(q.rows(), q.cols());
    Matrix dk = Matrix::Zero(k.rows(), k.cols());
    Matrix dv = Matrix::Zero(v.rows(), v.cols());
    const Matrix ones = Matrix::Ones(f.rows(), dh);  // upstream: sum of all entries

    for (int i = 0; i < h; ++i) {
        Matrix qi = q.middleCols(i * dh, dh);
        Matrix ki = k.middleCols(i * dh, dh);
        Matrix vi = v.middleCols(i * dh, dh);
        Matrix a = softmax_rows(qi * ki.transpose() * inv_sqrt);
        Matrix da = ones * vi.transpose();
        // softmax backward, row by row
        Matrix ds(a.rows(), a.cols());
        for (Index r = 0; r < a.rows(); ++r) {
            double dot = da.row(r).dot(a.row(r));
            ds.row(r) = (a.row(r).array() * (da.row(r).array() - dot)).matrix();
        }
        dv.middleCols(i * dh, dh) = a.transpose() * ones;
        dq.middleCols(i * dh, dh) = ds * ki * inv_sqrt;
        dk.middleCols(i * dh, dh) = ds.transpose() * qi * inv_sqrt;
    }
    d_wq = f.transpose() * dq;
    d_wk = f.transpose() * dk;
    d_wv = f.transpose() * dv;
}

Matrix fusion_w1_grad(const Matrix& f, const FusionParams& params) {
    Matrix g = layer_norm(f + attention(f, params), params.ln_gain, params.ln_bias, params.ln_eps);
    Matrix pre = (g * params.w1).rowwise() + params.b1.transpose();
    Matrix dz = Matrix::Ones(f.rows(), params.w2.cols());
    Matrix dh = dz * params.w2.transpose();
    Matrix dpre = ((pre.array() > 0).cast<double>() * dh.array()).matrix();
    return g.transpose() * dpre;
}

HeadParams head_param_grads(const Vector& z_img, const Vector& sims, const HeadParams& params) {
    Vector a0(z_img.size() + sims.size());
    a0 << z_img, sims;
    params.validate(a0.size());

    const std::size_t layers = params.weights.size();
    std::vector<Vector> act(layers + 1);  // activations, act[0] = input
    std::vector<Vector> pre(layers);      // pre-activations
    act[0] = a0;
    for (std::size_t l = 0; l < layers; ++l) {
        pre[l] = params.weights[l].transpose() * act[l] + params.biases[l];
        act[l + 1] = l + 1 < layers
                         ? pre[l].cwiseMax(0.0).eval()
                         : pre[l].unaryExpr([](double x) { return sigmoid(x); }).eval();
    }

    HeadParams grads;
    grads.weights.resize(layers);
    grads.biases.resize(layers);
    Vector da = Vector::Ones(act[layers].size());  // d(sum of outputs)
    for (std::size_t l = layers; l-- > 0;) {
        Vector du;
        if (l == layers - 1) {
            du = da.cwiseProduct(
                act[l + 1].cwiseProduct(Vector::Ones(act[l + 1].size()) - act[l + 1]));
        } else {
            du = da.cwiseProduct((pre[l].array() > 0).cast<double>().matrix());
        }
        grads.weights[l] = act[l] * du.transpose();
        grads.biases[l] = du;
        da = params.weights[l] * du;
    }
    return grads;
}

double grad_check(const std::function<double(const Vector&)>& f, const Vector& theta,
                  const Vector& analytic, double h) {
    if (theta.size() != analytic.size()) throw ShapeError("grad_check: size mismatch");
    double worst = 0;
    Vector probe = theta;
    for (Index i = 0; i < theta.size(); ++i) {
        probe[i] = theta[i] + h;
        double fp = f(probe);
        probe[i] = theta[i] - h;
        double fm = f(probe);
        probe[i] = theta[i];
        double numeric = (fp - fm) / (2 * h);
        double denom = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
        worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
    }
    return worst;
}

Vector toy_encode_image(const MultiViewTensor& tensor, int dim) {
    if (dim < 2) throw ConfigError("toy_encode_image: dim must be >= 2");
    // 4x4 block means per channel, plus a constant, then a fixed seeded
    // projection. Equal tensors give bit-equal embeddings.
    constexpr int kBlocks = 4;
    Vector feat(9 * kBlocks * kBlocks + 1);
    int fi = 0;
    for (const Image& ch : tensor.channels) {
        const Index rows = ch.rows(), cols = ch.cols();
        for (int br = 0; br < kBlocks; ++br) {
            Index r0 = rows * br / kBlocks, r1 = rows * (br + 1) / kBlocks;
            for (int bc = 0; bc < kBlocks; ++bc) {
                Index c0 = cols * bc / kBlocks, c1 = cols * (bc + 1) / kBlocks;
                double sum = 0;
                for (Index r = r0; r < r1; ++r)
                    for (Index c = c0; c < c1; ++c) sum += ch(r, c);
                Index n = std::max<Index>(1, (r1 - r0) * (c1 - c0));
                feat[fi++] = sum / static_cast<double>(n);
            }
        }
    }
    feat[fi] = 1.0;

    std::mt19937_64 rng(0x6d6f7361696331ull);
    Matrix proj = random_matrix(dim, feat.size(), rng, 1.0);
    Vector z = proj * feat;
    double n = z.norm();
    if (n == 0.0) throw DegenerateVector("toy_encode_image: zero embedding");
    return z / n;
}

Vector toy_encode_text(const std::string& prompt, int dim) {
    if (dim < 2) throw ConfigError("toy_encode_text: dim must be >= 2");
    Vector z = Vector::Zero(dim);
    auto add_token = [&](std::string_view token) {
        std::mt19937_64 rng(fnv1a64(token));
        for (int i = 0; i < dim; ++i) z[i] += det_gaussian(rng);
    };
    std::stringstream ss{std::string(prompt)};
    std::string token;
    while (ss >> token) add_token(token);
    add_token(prompt);  // whole string, so token order matters
    double n = z.norm();
    if (n == 0.0) throw DegenerateVector("toy_encode_text: zero embedding");
    return z / n;
}

Vector ensemble_text_embedding(const std::vector<Vector>& vectors) {
    if (vectors.empty()) throw EmptyInput("ensemble_text_embedding: no vectors");
    Vector mean = Vector::Zero(vectors[0].size());
    for (const Vector& v : vectors) {
        if (v.size() != mean.size()) throw ShapeError("ensemble_text_embedding: size mismatch");
        mean += v;
    }
    mean /= static_cast<double>(vectors.size());
    double n = mean.norm();
    if (n < 1e-12) throw DegenerateVector("ensemble_text_embedding: zero mean");
    return mean / n;
}

// --- serialization ---

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data;
    data.reserve(m.size());
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    j["data"] = data;
    return j;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Index rows = j.at("rows"), cols = j.at("cols");
    const auto& data = j.at("data");
    if (static_cast<Index>(data.size()) != rows * cols)
        throw ParseError("matrix payload size does not match shape header");
    Matrix m(rows, cols);
    std::size_t i = 0;
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = data[i++];
    return m;
}

nlohmann::json vector_to_json(const Vector& v) {
    return matrix_to_json(v.transpose());
}

Vector vector_from_json(const nlohmann::json& j) {
    Matrix m = matrix_from_json(j);
    return m.row(0).transpose();
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return j;
}

void save_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw IoError("short write to " + path);
}

}  // namespace

void save_fusion_params(const FusionParams& params, const std::string& path) {
    nlohmann::json j;
    j["w_q"] = matrix_to_json(params.w_q);
    j["w_k"] = matrix_to_json(params.w_k);
    j["w_v"] = matrix_to_json(params.w_v);
    j["num_heads"] = params.num_heads;
    j["ln_gain"] = vector_to_json(params.ln_gain);
    j["ln_bias"] = vector_to_json(params.ln_bias);
    j["ln_eps"] = params.ln_eps;
    j["w1"] = matrix_to_json(params.w1);
    j["b1"] = vector_to_json(params.b1);
    j["w2"] = matrix_to_json(params.w2);
    j["b2"] = vector_to_json(params.b2);
    save_json_file(j, path);
}

FusionParams load_fusion_params(const std::string& path) {
    nlohmann::json j = load_json_file(path);
    FusionParams p;
    p.w_q = matrix_from_json(j.at("w_q"));
    p.w_k = matrix_from_json(j.at("w_k"));
    p.w_v = matrix_from_json(j.at("w_v"));
    p.num_heads = j.at("num_heads");
    p.ln_gain = vector_from_json(j.at("ln_gain"));
    p.ln_bias = vector_from_json(j.at("ln_bias"));
    p.ln_eps = j.value("ln_eps", 1e-5);
    p.w1 = matrix_from_json(j.at("w1"));
    p.b1 = vector_from_json(j.at("b1"));
    p.w2 = matrix_from_json(j.at("w2"));
    p.b2 = vector_from_json(j.at("b2"));
    return p;
}

void save_head_params(const HeadParams& params, const std::string& path) {
    nlohmann::json j;
    for (std::size_t l = 0; l < params.weights.size(); ++l) {
        j["layers"].push_back(
            {{"weight", matrix_to_json(params.weights[l])}, {"bias", vector_to_json(params.biases[l])}});
    }
    save_json_file(j, path);
}

HeadParams load_head_params(const std::string& path) {
    nlohmann::json j = load_json_file(path);
    HeadParams p;
    for (const auto& layer : j.at("layers")) {
        p.weights.push_back(matrix_from_json(layer.at("weight")));
        p.biases.push_back(vector_from_json(layer.at("bias")));
    }
    return p;
}

// --- self-check suite ---

namespace {

Vector pack3(const Matrix& a, const Matrix& b, const Matrix& c) {
    Vector v(a.size() + b.size() + c.size());
    Index i = 0;
    for (const Matrix* m : {&a, &b, &c})
        for (Index r = 0; r < m->rows(); ++r)
            for (Index col = 0; col < m->cols(); ++col) v[i++] = (*m)(r, col);
    return v;
}

void unpack3(const Vector& v, Matrix& a, Matrix& b, Matrix& c) {
    Index i = 0;
    for (Matrix* m : {&a, &b, &c})
        for (Index r = 0; r < m->rows(); ++r)
            for (Index col = 0; col < m->cols(); ++col) (*m)(r, col) = v[i++];
}

}  // namespace

bool KernelCheckReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const KernelCheck& c) { return c.passed; });
}

KernelCheckReport run_kernel_checks(int seeds) {
    KernelCheckReport report;
    auto add = [&](const std::string& name, double err, double tol) {
        report.checks.push_back({name, err, tol, err < tol});
    };

    double softmax_err = 0, ln_mean_err = 0;
    double cbfl_err = 0, head_err = 0, fusion_err = 0, attn_err = 0;

    for (int seed = 1; seed <= seeds; ++seed) {
        std::mt19937_64 rng(seed);

        // softmax row sums
        Matrix m = random_matrix(kToyTokens, kToyChannels, rng, 3.0);
        Matrix sm = softmax_rows(m);
        for (Index r = 0; r < sm.rows(); ++r)
            softmax_err = std::max(softmax_err, std::abs(sm.row(r).sum() - 1.0));

        // layer-norm centering (pre-affine: unit gain, zero bias)
        Matrix ln = layer_norm(m, Vector::Ones(m.cols()), Vector::Zero(m.cols()));
        for (Index r = 0; r < ln.rows(); ++r)
            ln_mean_err = std::max(ln_mean_err, std::abs(ln.row(r).mean()));

        // cbfl gradient wrt logits
        {
            Vector logits = random_vector(kToyOrganCount, rng, 2.0);
            std::vector<int> y(kToyOrganCount);
            for (int& v : y) v = det_uniform(rng) < 0.5 ? 1 : 0;
            FocalConfig cfg;
            cfg.alpha.resize(kToyOrganCount);
            for (Index i = 0; i < kToyOrganCount; ++i)
                cfg.alpha[i] = 0.25 + 0.5 * det_uniform(rng);
            cfg.gamma = 2.0;
            auto f = [&](const Vector& th) { return cbfl_from_logits(th, y, cfg); };
            cbfl_err = std::max(cbfl_err, grad_check(f, logits, cbfl_logit_grad(logits, y, cfg)));
        }

        // predict_head gradient wrt all parameters
        {
            HeadParams hp = random_head_params(kToyEmbedDim + kToyOrganCount, {24},
                                               kToyOrganCount, rng());
            Vector z = random_vector(kToyEmbedDim, rng);
            Vector s = random_vector(kToyOrganCount, rng);
            HeadParams analytic = head_param_grads(z, s, hp);

            std::vector<double> theta_v, grad_v;
            for (std::size_t l = 0; l < hp.weights.size(); ++l) {
                for (Index r = 0; r < hp.weights[l].rows(); ++r)
                    for (Index c = 0; c < hp.weights[l].cols(); ++c) {
                        theta_v.push_back(hp.weights[l](r, c));
                        grad_v.push_back(analytic.weights[l](r, c));
                    }
                for (Index i = 0; i < hp.biases[l].size(); ++i) {
                    theta_v.push_back(hp.biases[l][i]);
                    grad_v.push_back(analytic.biases[l][i]);
                }
            }
            Vector theta = Eigen::Map<Vector>(theta_v.data(), theta_v.size());
            Vector grad = Eigen::Map<Vector>(grad_v.data(), grad_v.size());
            auto f = [&](const Vector& th) {
                HeadParams p = hp;
                Index i = 0;
                for (std::size_t l = 0; l < p.weights.size(); ++l) {
                    for (Index r = 0; r < p.weights[l].rows(); ++r)
                        for (Index c = 0; c < p.weights[l].cols(); ++c) p.weights[l](r, c) = th[i++];
                    for (Index b = 0; b < p.biases[l].size(); ++b) p.biases[l][b] = th[i++];
                }
                return predict_head(z, s, p).sum();
            };
            head_err = std::max(head_err, grad_check(f, theta, grad));
        }

        // fusion_block gradient wrt W1
        {
            FusionParams fp = random_fusion_params(kToyChannels, kToyChannels, 20,
                                                   seed % 2 ? 1 : 4, rng());
            Matrix f0 = random_matrix(kToyTokens, kToyChannels, rng);
            Matrix analytic = fusion_w1_grad(f0, fp);
            Vector theta(fp.w1.size());
            Index i = 0;
            for (Index r = 0; r < fp.w1.rows(); ++r)
                for (Index c = 0; c < fp.w1.cols(); ++c) theta[i++] = fp.w1(r, c);
            Vector grad(analytic.size());
            i = 0;
            for (Index r = 0; r < analytic.rows(); ++r)
                for (Index c = 0; c < analytic.cols(); ++c) grad[i++] = analytic(r, c);
            auto f = [&](const Vector& th) {
                FusionParams p = fp;
                Index j = 0;
                for (Index r = 0; r < p.w1.rows(); ++r)
                    for (Index c = 0; c < p.w1.cols(); ++c) p.w1(r, c) = th[j++];
                return fusion_block(f0, p).sum();
            };
            fusion_err = std::max(fusion_err, grad_check(f, theta, grad));
        }

        // attention gradient wrt projection weights
        {
            FusionParams fp = random_fusion_params(kToyChannels, kToyProjDim, 20,
                                                   seed % 2 ? 1 : 2, rng());
            Matrix f0 = random_matrix(kToyTokens, kToyChannels, rng);
            Matrix dq, dk, dv;
            attention_weight_grads(f0, fp, dq, dk, dv);
            Vector theta = pack3(fp.w_q, fp.w_k, fp.w_v);
            Vector grad = pack3(dq, dk, dv);
            auto f = [&](const Vector& th) {
                FusionParams p = fp;
                unpack3(th, p.w_q, p.w_k, p.w_v);
                return attention(f0, p).sum();
            };
            attn_err = std::max(attn_err, grad_check(f, theta, grad));
        }
    }

    add("softmax row sums", softmax_err, 1e-12);
    add("layer-norm centering", ln_mean_err, 1e-12);
    add("cbfl logit gradient", cbfl_err, 1e-4);
    add("predict_head parameter gradient", head_err, 1e-4);
    add("fusion_block W1 gradient", fusion_err, 1e-4);
    add("attention projection gradient", attn_err, 1e-4);
    return report;
}

}  // namespace mosaic
