#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dfr/matrix.hpp"

namespace dfr {

// Detailed feature extractor: Linear -> ReLU -> BatchNorm for two hidden
// blocks (widths 512 and 256), then a bare Linear producing class logits.

inline constexpr std::size_t kHidden1 = 512;
inline constexpr std::size_t kHidden2 = 256;

struct NetworkParams {
    std::size_t input_dim = 0;
    std::size_t num_classes = 0;

    Matrix w1, b1;  // input_dim x 512, 1 x 512
    Matrix w2, b2;  // 512 x 256, 1 x 256
    Matrix w3, b3;  // 256 x C, 1 x C

    // BatchNorm after blocks 1 and 2 (scale, shift, running statistics).
    Matrix gamma1, shift1, running_mean1, running_var1;  // 1 x 512
    Matrix gamma2, shift2, running_mean2, running_var2;  // 1 x 256
};

enum class Mode { kTrain, kEval };

// Everything the backward pass needs from one forward call.
struct ForwardCache {
    Mode mode = Mode::kTrain;
    Matrix input;
    // Per hidden block: linear pre-activation, ReLU output, normalized
    // activations and the batch statistics actually used.
    Matrix z1, a1, xhat1, mean1, inv_std1, h1;
    Matrix z2, a2, xhat2, mean2, inv_std2, h2;
    Matrix logits;
};

struct Gradients {
    Matrix w1, b1, gamma1, shift1;
    Matrix w2, b2, gamma2, shift2;
    Matrix w3, b3;
    Matrix input;
};

// Fan-in-scaled uniform weights, zero biases, identity BatchNorm.
// Deterministic in `seed`.
NetworkParams init_params(std::size_t input_dim, std::size_t num_classes, std::uint64_t seed);

// Train mode normalizes with batch statistics and updates running ones
// (batch size must be >= 2); eval mode uses running statistics and leaves
// the params untouched.
Matrix forward(NetworkParams& params, const Matrix& x, Mode mode, ForwardCache* cache = nullptr);
Matrix forward_eval(const NetworkParams& params, const Matrix& x, ForwardCache* cache = nullptr);

// Reverse-mode gradients for all parameters plus the input batch. The
// train variant includes the batch-statistics path and rejects eval
// caches; backward_eval differentiates the frozen-statistics function.
// `dblock2` optionally injects an extra upstream gradient at the second
// block's output (used when the histogram loss reads the embedding).
Gradients backward(const NetworkParams& params, const ForwardCache& cache, const Matrix& dlogits,
                   const Matrix* dblock2 = nullptr);
Gradients backward_eval(const NetworkParams& params, const ForwardCache& cache,
                        const Matrix& dlogits, const Matrix* dblock2 = nullptr);

// Row-wise softmax with max subtraction.
Matrix softmax(const Matrix& logits);

struct CrossEntropyResult {
    double loss = 0.0;
    Matrix dlogits;  // (softmax - one_hot) / n
};
CrossEntropyResult cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Versioned little-endian binary checkpoint of every field; see README
// for the exact layout. Round-trips bit-exactly.
void save_checkpoint(const NetworkParams& params, const std::string& path);
NetworkParams load_checkpoint(const std::string& path);

}  // namespace dfr
