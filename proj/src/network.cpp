#include "dfr/network.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "dfr/errors.hpp"
#include "dfr/rng.hpp"

namespace dfr {
namespace {

constexpr double kBnEpsilon = 1e-5;
constexpr double kBnMomentum = 0.1;  // running <- 0.9 * running + 0.1 * batch

Matrix uniform_matrix(Rng& rng, std::size_t rows, std::size_t cols, double bound) {
    Matrix m(rows, cols);
    for (double& v : m.values()) v = rng.uniform(-bound, bound);
    return m;
}

Matrix colsum(const Matrix& a) {
    Matrix s(1, a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* row = a.row(i);
        for (std::size_t j = 0; j < a.cols(); ++j) s(0, j) += row[j];
    }
    return s;
}

Matrix linear(const Matrix& x, const Matrix& w, const Matrix& b) {
    Matrix z = matmul(x, w);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        double* row = z.row(i);
        for (std::size_t j = 0; j < z.cols(); ++j) row[j] += b(0, j);
    }
    return z;
}

Matrix relu(const Matrix& z) {
    Matrix a = z;
    for (double& v : a.values()) v = v > 0.0 ? v : 0.0;
    return a;
}

struct BnBuffers {
    Matrix* xhat;
    Matrix* mean;
    Matrix* inv_std;
};

// One BatchNorm block, writing the statistics actually used into `buf`.
Matrix batch_norm(const Matrix& a, const Matrix& gamma, const Matrix& shift, Matrix* running_mean,
                  Matrix* running_var, Mode mode, BnBuffers buf) {
    const std::size_t n = a.rows(), m = a.cols();
    Matrix mean(1, m), var(1, m);
    if (mode == Mode::kTrain) {
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = a.row(i);
            for (std::size_t j = 0; j < m; ++j) mean(0, j) += row[j];
        }
        for (std::size_t j = 0; j < m; ++j) mean(0, j) /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double* row = a.row(i);
            for (std::size_t j = 0; j < m; ++j) {
                const double d = row[j] - mean(0, j);
                var(0, j) += d * d;
            }
        }
        for (std::size_t j = 0; j < m; ++j) var(0, j) /= static_cast<double>(n);
        // Unbiased variance feeds the running estimate.
        const double correction = static_cast<double>(n) / static_cast<double>(n - 1);
        for (std::size_t j = 0; j < m; ++j) {
            (*running_mean)(0, j) = (1.0 - kBnMomentum) * (*running_mean)(0, j) + kBnMomentum * mean(0, j);
            (*running_var)(0, j) =
                (1.0 - kBnMomentum) * (*running_var)(0, j) + kBnMomentum * var(0, j) * correction;
        }
    } else {
        mean = *running_mean;
        var = *running_var;
    }

    Matrix inv_std(1, m);
    for (std::size_t j = 0; j < m; ++j) inv_std(0, j) = 1.0 / std::sqrt(var(0, j) + kBnEpsilon);

    Matrix xhat(n, m), out(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a.row(i);
        double* xrow = xhat.row(i);
        double* orow = out.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            xrow[j] = (arow[j] - mean(0, j)) * inv_std(0, j);
            orow[j] = gamma(0, j) * xrow[j] + shift(0, j);
        }
    }
    if (buf.xhat) *buf.xhat = std::move(xhat);
    if (buf.mean) *buf.mean = std::move(mean);
    if (buf.inv_std) *buf.inv_std = std::move(inv_std);
    return out;
}

// Gradient through train-mode BatchNorm (batch-statistics path included).
Matrix batch_norm_backward_train(const Matrix& dh, const Matrix& xhat, const Matrix& inv_std,
                                 const Matrix& gamma, Matrix* dgamma, Matrix* dshift) {
    const std::size_t n = dh.rows(), m = dh.cols();
    *dgamma = Matrix(1, m);
    *dshift = Matrix(1, m);
    Matrix sum_dxhat(1, m), sum_dxhat_xhat(1, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* drow = dh.row(i);
        const double* xrow = xhat.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            (*dgamma)(0, j) += drow[j] * xrow[j];
            (*dshift)(0, j) += drow[j];
            const double dxhat = drow[j] * gamma(0, j);
            sum_dxhat(0, j) += dxhat;
            sum_dxhat_xhat(0, j) += dxhat * xrow[j];
        }
    }
    Matrix da(n, m);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double* drow = dh.row(i);
        const double* xrow = xhat.row(i);
        double* orow = da.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double dxhat = drow[j] * gamma(0, j);
            orow[j] = inv_std(0, j) * (dxhat - inv_n * sum_dxhat(0, j) -
                                       inv_n * xrow[j] * sum_dxhat_xhat(0, j));
        }
    }
    return da;
}

// Eval mode treats the running statistics as constants, so BatchNorm is an
// affine map per feature.
Matrix batch_norm_backward_eval(const Matrix& dh, const Matrix& xhat, const Matrix& inv_std,
                                const Matrix& gamma, Matrix* dgamma, Matrix* dshift) {
    const std::size_t n = dh.rows(), m = dh.cols();
    *dgamma = Matrix(1, m);
    *dshift = Matrix(1, m);
    Matrix da(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* drow = dh.row(i);
        const double* xrow = xhat.row(i);
        double* orow = da.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            (*dgamma)(0, j) += drow[j] * xrow[j];
            (*dshift)(0, j) += drow[j];
            orow[j] = drow[j] * gamma(0, j) * inv_std(0, j);
        }
    }
    return da;
}

Matrix relu_backward(const Matrix& da, const Matrix& z) {
    Matrix dz = da;
    for (std::size_t i = 0; i < dz.size(); ++i) {
        if (z.data()[i] <= 0.0) dz.data()[i] = 0.0;
    }
    return dz;
}

Gradients backward_impl(const NetworkParams& p, const ForwardCache& c, const Matrix& dlogits,
                        const Matrix* dblock2, bool train_path) {
    require_same_shape(dlogits, c.logits, "backward dlogits");
    Gradients g;

    g.w3 = matmul_tn(c.h2, dlogits);
    g.b3 = colsum(dlogits);
    Matrix dh2 = matmul_nt(dlogits, p.w3);
    if (dblock2 != nullptr) {
        require_same_shape(*dblock2, c.h2, "backward dblock2");
        add_inplace(dh2, *dblock2);
    }

    Matrix da2 = train_path
                     ? batch_norm_backward_train(dh2, c.xhat2, c.inv_std2, p.gamma2, &g.gamma2, &g.shift2)
                     : batch_norm_backward_eval(dh2, c.xhat2, c.inv_std2, p.gamma2, &g.gamma2, &g.shift2);
    Matrix dz2 = relu_backward(da2, c.z2);
    g.w2 = matmul_tn(c.h1, dz2);
    g.b2 = colsum(dz2);
    Matrix dh1 = matmul_nt(dz2, p.w2);

    Matrix da1 = train_path
                     ? batch_norm_backward_train(dh1, c.xhat1, c.inv_std1, p.gamma1, &g.gamma1, &g.shift1)
                     : batch_norm_backward_eval(dh1, c.xhat1, c.inv_std1, p.gamma1, &g.gamma1, &g.shift1);
    Matrix dz1 = relu_backward(da1, c.z1);
    g.w1 = matmul_tn(c.input, dz1);
    g.b1 = colsum(dz1);
    g.input = matmul_nt(dz1, p.w1);
    return g;
}

Matrix forward_impl(const NetworkParams& cp, NetworkParams* mutable_p, const Matrix& x, Mode mode,
                    ForwardCache* cache) {
    if (x.cols() != cp.input_dim) {
        throw ConfigError("forward: input width " + std::to_string(x.cols()) +
                          " does not match network input_dim " + std::to_string(cp.input_dim));
    }
    if (mode == Mode::kTrain && x.rows() < 2) {
        throw ConfigError("forward: train mode needs a batch of at least 2 samples");
    }

    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;
    c = ForwardCache{};
    c.mode = mode;
    c.input = x;

    Matrix* rm1 = mutable_p ? &mutable_p->running_mean1 : const_cast<Matrix*>(&cp.running_mean1);
    Matrix* rv1 = mutable_p ? &mutable_p->running_var1 : const_cast<Matrix*>(&cp.running_var1);
    Matrix* rm2 = mutable_p ? &mutable_p->running_mean2 : const_cast<Matrix*>(&cp.running_mean2);
    Matrix* rv2 = mutable_p ? &mutable_p->running_var2 : const_cast<Matrix*>(&cp.running_var2);

    c.z1 = linear(x, cp.w1, cp.b1);
    c.a1 = relu(c.z1);
    c.h1 = batch_norm(c.a1, cp.gamma1, cp.shift1, rm1, rv1, mode, {&c.xhat1, &c.mean1, &c.inv_std1});

    c.z2 = linear(c.h1, cp.w2, cp.b2);
    c.a2 = relu(c.z2);
    c.h2 = batch_norm(c.a2, cp.gamma2, cp.shift2, rm2, rv2, mode, {&c.xhat2, &c.mean2, &c.inv_std2});

    c.logits = linear(c.h2, cp.w3, cp.b3);
    return c.logits;
}

}  // namespace

NetworkParams init_params(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed) {
    if (input_dim < 1) throw ConfigError("init_params: input_dim must be >= 1");
    if (num_classes < 2) throw ConfigError("init_params: need at least 2 classes");

    Rng rng(seed);
    NetworkParams p;
    p.input_dim = input_dim;
    p.num_classes = num_classes;

    p.w1 = uniform_matrix(rng, input_dim, kHidden1, 1.0 / std::sqrt(static_cast<double>(input_dim)));
    p.w2 = uniform_matrix(rng, kHidden1, kHidden2, 1.0 / std::sqrt(static_cast<double>(kHidden1)));
    p.w3 = uniform_matrix(rng, kHidden2, num_classes, 1.0 / std::sqrt(static_cast<double>(kHidden2)));
    p.b1 = Matrix(1, kHidden1);
    p.b2 = Matrix(1, kHidden2);
    p.b3 = Matrix(1, num_classes);

    p.gamma1 = Matrix(1, kHidden1, 1.0);
    p.shift1 = Matrix(1, kHidden1);
    p.running_mean1 = Matrix(1, kHidden1);
    p.running_var1 = Matrix(1, kHidden1, 1.0);
    p.gamma2 = Matrix(1, kHidden2, 1.0);
    p.shift2 = Matrix(1, kHidden2);
    p.running_mean2 = Matrix(1, kHidden2);
    p.running_var2 = Matrix(1, kHidden2, 1.0);
    return p;
}

Matrix forward(NetworkParams& params, const Matrix& x, Mode mode, ForwardCache* cache) {
    return forward_impl(params, mode == Mode::kTrain ? &params : nullptr, x, mode, cache);
}

Matrix forward_eval(const NetworkParams& params, const Matrix& x, ForwardCache* cache) {
    return forward_impl(params, nullptr, x, Mode::kEval, cache);
}

Gradients backward(const NetworkParams& params, const ForwardCache& cache, const Matrix& dlogits,
                   const Matrix* dblock2) {
    if (cache.mode != Mode::kTrain) {
        throw ConfigError("backward: cache comes from an eval-mode forward");
    }
    return backward_impl(params, cache, dlogits, dblock2, /*train_path=*/true);
}

Gradients backward_eval(const NetworkParams& params, const ForwardCache& cache,
                        const Matrix& dlogits, const Matrix* dblock2) {
    if (cache.mode != Mode::kEval) {
        throw ConfigError("backward_eval: cache comes from a train-mode forward");
    }
    return backward_impl(params, cache, dlogits, dblock2, /*train_path=*/false);
}

Matrix softmax(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const double* z = logits.row(i);
        double* out = p.row(i);
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < logits.cols(); ++j) zmax = std::max(zmax, z[j]);
        double denom = 0.0;
        for (std::size_t j = 0; j < logits.cols(); ++j) {
            out[j] = std::exp(z[j] - zmax);
            denom += out[j];
        }
        for (std::size_t j = 0; j < logits.cols(); ++j) out[j] /= denom;
    }
    return p;
}

CrossEntropyResult cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
    const std::size_t n = logits.rows(), c = logits.cols();
    if (labels.size() != n) {
        throw ConfigError("cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(n) + " rows");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
            throw DataError("cross_entropy: label " + std::to_string(labels[i]) +
                            " out of range at row " + std::to_string(i));
        }
    }

    CrossEntropyResult res;
    res.dlogits = softmax(logits);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double* z = logits.row(i);
        double zmax = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < c; ++j) zmax = std::max(zmax, z[j]);
        double lse = 0.0;
        for (std::size_t j = 0; j < c; ++j) lse += std::exp(z[j] - zmax);
        total += std::log(lse) - (z[labels[i]] - zmax);
    }
    res.loss = total / static_cast<double>(n);

    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        double* row = res.dlogits.row(i);
        row[labels[i]] -= 1.0;
        for (std::size_t j = 0; j < c; ++j) row[j] *= inv_n;
    }
    return res;
}

namespace {

constexpr char kCheckpointMagic[8] = {'D', 'F', 'R', 'N', 'E', 'T', '1', '\n'};

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t read_u64(std::istream& in, const std::string& path) {
    unsigned char bytes[8];
    in.read(reinterpret_cast<char*>(bytes), 8);
    if (!in) throw IoError("checkpoint truncated: " + path);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

void write_tensor(std::ostream& out, const Matrix& m) {
    write_u64(out, m.rows());
    write_u64(out, m.cols());
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(m.size() * sizeof(double)));
}

Matrix read_tensor(std::istream& in, const std::string& path) {
    const std::uint64_t rows = read_u64(in, path);
    const std::uint64_t cols = read_u64(in, path);
    Matrix m(rows, cols);
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(double)));
    if (!in) throw IoError("checkpoint truncated: " + path);
    return m;
}

template <typename Fn>
void for_each_tensor(NetworkParams& p, Fn fn) {
    fn(p.w1), fn(p.b1), fn(p.gamma1), fn(p.shift1), fn(p.running_mean1), fn(p.running_var1);
    fn(p.w2), fn(p.b2), fn(p.gamma2), fn(p.shift2), fn(p.running_mean2), fn(p.running_var2);
    fn(p.w3), fn(p.b3);
}

}  // namespace

void save_checkpoint(const NetworkParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open checkpoint for writing: " + path);
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_u64(out, params.input_dim);
    write_u64(out, params.num_classes);
    auto& p = const_cast<NetworkParams&>(params);
    for_each_tensor(p, [&](const Matrix& m) { write_tensor(out, m); });
    if (!out) throw IoError("checkpoint write failed: " + path);
}

NetworkParams load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw IoError("not a network checkpoint: " + path);
    }
    NetworkParams p;
    p.input_dim = read_u64(in, path);
    p.num_classes = read_u64(in, path);
    for_each_tensor(p, [&](Matrix& m) { m = read_tensor(in, path); });
    if (p.w1.rows() != p.input_dim || p.w3.cols() != p.num_classes) {
        throw IoError("checkpoint header disagrees with tensor shapes: " + path);
    }
    return p;
}

}  // namespace dfr
