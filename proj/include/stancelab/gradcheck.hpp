// Central-difference check of the whole model graph
// (embedding -> conv -> BiLSTM -> dense -> weighted cross-entropy).
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stancelab/model.hpp"
#include "stancelab/nn.hpp"

namespace stancelab {

struct ModelGradCheckOptions {
    std::size_t batch = 3;
    double delta = 1e-4;
    std::vector<double> class_weights{1.7, 0.6, 1.2};
};

/// Random inputs of varied true length, random golds, non-uniform class
/// weights. Dropout masks are fixed by reseeding before every evaluation.
inline nn::GradCheckReport check_model_gradients(const ModelConfig& cfg, std::uint64_t seed,
                                                 const ModelGradCheckOptions& opt = {}) {
    Model<double> model = build_model<double>(cfg, seed);
    Rng rng = Rng::derive(seed, 0x475241444348);
    for (auto* t : model.parameters())
        for (auto& v : t->data) v += rng.uniform(-0.1, 0.1);

    std::vector<ModelInput> batch;
    std::vector<std::size_t> golds;
    for (std::size_t i = 0; i < opt.batch; ++i) {
        ModelInput in;
        in.true_length = 1 + static_cast<std::size_t>(rng.below(cfg.max_len));
        if (cfg.encoder_kind == EncoderKind::TrainableEmbedding) {
            in.ids.assign(cfg.max_len, 0);
            for (std::size_t p = 0; p < in.true_length; ++p)
                in.ids[p] = static_cast<int>(1 + rng.below(cfg.vocab_size - 1));
        } else {
            for (std::size_t p = 0; p < in.true_length * cfg.embed_dim; ++p)
                in.features.push_back(static_cast<float>(rng.uniform(-1, 1)));
        }
        batch.push_back(std::move(in));
        golds.push_back(static_cast<std::size_t>(rng.below(cfg.num_classes)));
    }
    std::vector<double> weights(opt.class_weights.begin(), opt.class_weights.begin() + cfg.num_classes);
    const std::uint64_t dropout_seed = rng.next();

    auto loss = [&](bool need_grad) {
        Rng drop(dropout_seed);
        if (need_grad) return model.loss_and_backward(batch, golds, weights, drop);
        auto probs = model.forward(batch, nn::Mode::Train, drop);
        double total = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            nn::Tensor<double> row({cfg.num_classes});
            std::copy_n(probs.row(i), cfg.num_classes, row.data.begin());
            total += nn::weighted_cross_entropy(row, golds[i], weights[golds[i]]);
        }
        return total / static_cast<double>(batch.size());
    };
    auto named = model.named_parameters();
    std::vector<std::pair<std::string, nn::Tensor<double>*>> params(named.begin(), named.end());
    return nn::grad_check(loss, std::span<const std::pair<std::string, nn::Tensor<double>*>>(params), opt.delta);
}

}  // namespace stancelab
