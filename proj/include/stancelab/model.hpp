// Encoder -> Conv x N -> BiLSTM -> dense classifier, head replacement for
// transfer, and the checkpoint directory format.
#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <type_traits>
#include <string>
#include <vector>

#include "stancelab/nn.hpp"
#include "stancelab/textprep.hpp"
#include "stancelab/util.hpp"

namespace stancelab {

enum class EncoderKind { TrainableEmbedding, PrecomputedFile };

inline const char* encoder_kind_name(EncoderKind k) {
    return k == EncoderKind::TrainableEmbedding ? "trainable_embedding" : "precomputed_file";
}

inline EncoderKind parse_encoder_kind(std::string_view s) {
    if (s == "trainable_embedding") return EncoderKind::TrainableEmbedding;
    if (s == "precomputed_file") return EncoderKind::PrecomputedFile;
    throw ConfigError("unknown encoder_kind '" + std::string(s) + "'");
}

struct ModelConfig {
    EncoderKind encoder_kind = EncoderKind::TrainableEmbedding;
    std::size_t vocab_size = 0;
    std::size_t embed_dim = 32;
    std::size_t conv_layers = 2;
    std::size_t conv_filters = 16;
    std::size_t kernel = 3;
    bool use_bilstm = true;
    std::size_t lstm_hidden = 32;
    double dropout = 0.25;
    std::size_t num_classes = 3;
    std::size_t max_len = 64;

    void validate() const {
        if (kernel % 2 == 0) throw ConfigError("model: kernel must be odd");
        if (num_classes != 2 && num_classes != 3) throw ConfigError("model: num_classes must be 2 or 3");
        if (embed_dim < 1 || conv_filters < 1 || kernel < 1 || lstm_hidden < 1 || max_len < 1)
            throw ConfigError("model: all dimensions must be at least 1");
        if (encoder_kind == EncoderKind::TrainableEmbedding && vocab_size < 2)
            throw ConfigError("model: vocab_size must be at least 2 for a trainable embedding");
        if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model: dropout must lie in [0,1)");
    }

    /// Width of the vector the dense head consumes.
    std::size_t sentence_dim() const {
        if (use_bilstm) return 2 * lstm_hidden;
        return conv_layers > 0 ? conv_filters : embed_dim;
    }

    std::vector<std::pair<std::string, std::string>> to_pairs() const {
        return {{"encoder_kind", encoder_kind_name(encoder_kind)},
                {"vocab_size", std::to_string(vocab_size)},
                {"embed_dim", std::to_string(embed_dim)},
                {"conv_layers", std::to_string(conv_layers)},
                {"conv_filters", std::to_string(conv_filters)},
                {"kernel", std::to_string(kernel)},
                {"use_bilstm", use_bilstm ? "1" : "0"},
                {"lstm_hidden", std::to_string(lstm_hidden)},
                {"dropout", format_real(dropout)},
                {"num_classes", std::to_string(num_classes)},
                {"max_len", std::to_string(max_len)}};
    }

    /// Returns false when `key` is not a model key.
    bool set(const std::string& key, const std::string& value) {
        auto as_size = [&] {
            std::size_t pos = 0;
            unsigned long long v = 0;
            try {
                v = std::stoull(value, &pos);
            } catch (const std::exception&) {
                pos = 0;
            }
            if (pos != value.size() || value.empty() || value[0] == '-')
                throw ConfigError("config key '" + key + "': expected a non-negative integer, got '" + value + "'");
            return static_cast<std::size_t>(v);
        };
        if (key == "encoder_kind") encoder_kind = parse_encoder_kind(value);
        else if (key == "vocab_size") vocab_size = as_size();
        else if (key == "embed_dim") embed_dim = as_size();
        else if (key == "conv_layers") conv_layers = as_size();
        else if (key == "conv_filters") conv_filters = as_size();
        else if (key == "kernel") kernel = as_size();
        else if (key == "use_bilstm") use_bilstm = as_size() != 0;
        else if (key == "lstm_hidden") lstm_hidden = as_size();
        else if (key == "dropout") {
            try {
                dropout = std::stod(value);
            } catch (const std::exception&) {
                throw ConfigError("config key 'dropout': expected a number, got '" + value + "'");
            }
        } else if (key == "num_classes") num_classes = as_size();
        else if (key == "max_len" || key == "L") max_len = as_size();
        else return false;
        return true;
    }

    bool operator==(const ModelConfig&) const = default;
};

/// One sample as the model sees it: token ids, or precomputed encoder vectors
/// ([true_length x embed_dim], row-major) for the precomputed encoder.
struct ModelInput {
    std::vector<int> ids;
    std::size_t true_length = 0;
    std::vector<float> features;

    ModelInput() = default;
    explicit ModelInput(const EncodedText& e) : ids(e.ids), true_length(e.true_length) {}
};

template <class T>
class Model {
public:
    static constexpr const char* kHeadPrefix = "head.";

    Model() = default;

    const ModelConfig& config() const { return config_; }

    /// Parameter tensors in a fixed order with stable names.
    std::vector<std::pair<std::string, nn::Tensor<T>*>> named_parameters() {
        std::vector<std::pair<std::string, nn::Tensor<T>*>> out;
        if (config_.encoder_kind == EncoderKind::TrainableEmbedding) out.emplace_back("embedding.table", &embedding_);
        for (std::size_t i = 0; i < convs_.size(); ++i) {
            out.emplace_back("conv" + std::to_string(i) + ".kernels", &convs_[i].kernels);
            out.emplace_back("conv" + std::to_string(i) + ".bias", &convs_[i].bias);
        }
        if (config_.use_bilstm) {
            for (auto [dir, p] : {std::pair{"fwd", &lstm_.fwd}, std::pair{"bwd", &lstm_.bwd}}) {
                out.emplace_back(std::string("bilstm.") + dir + ".W", &p->W);
                out.emplace_back(std::string("bilstm.") + dir + ".U", &p->U);
                out.emplace_back(std::string("bilstm.") + dir + ".b", &p->b);
            }
        }
        out.emplace_back("head.W", &head_.W);
        out.emplace_back("head.b", &head_.b);
        return out;
    }

    std::vector<std::pair<std::string, const nn::Tensor<T>*>> named_parameters() const {
        std::vector<std::pair<std::string, const nn::Tensor<T>*>> out;
        for (auto& [name, t] : const_cast<Model*>(this)->named_parameters()) out.emplace_back(name, t);
        return out;
    }

    std::vector<nn::Tensor<T>*> parameters() {
        std::vector<nn::Tensor<T>*> out;
        for (auto& [name, t] : named_parameters()) out.push_back(t);
        return out;
    }

    void zero_grad() {
        for (auto* t : parameters()) {
            t->ensure_grad();
            t->zero_grad();
        }
    }

    /// Class probabilities, one row per sample.
    nn::Tensor<T> forward(const std::vector<ModelInput>& batch, nn::Mode mode, Rng& rng) const {
        if (batch.empty()) throw ConfigError("forward: empty batch");
        nn::Tensor<T> probs({batch.size(), config_.num_classes});
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Trace tr = run(batch[i], mode, rng);
            std::copy(tr.probs.data.begin(), tr.probs.data.end(), probs.row(i));
        }
        return probs;
    }

    /// Mean weighted cross-entropy over the batch; gradients of that mean are
    /// accumulated into the parameters' grad slots.
    double loss_and_backward(const std::vector<ModelInput>& batch, const std::vector<std::size_t>& golds,
                             const std::vector<double>& class_weights, Rng& rng) {
        if (batch.empty() || batch.size() != golds.size()) throw ConfigError("loss_and_backward: batch/gold mismatch");
        if (class_weights.size() != config_.num_classes) throw ConfigError("loss_and_backward: class weight count mismatch");
        for (auto* t : parameters()) t->ensure_grad();
        const double scale = 1.0 / static_cast<double>(batch.size());
        double total = 0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            Trace tr = run(batch[i], nn::Mode::Train, rng);
            const double w = class_weights[golds[i]];
            total += static_cast<double>(nn::weighted_cross_entropy(tr.probs, golds[i], w));
            backward(batch[i], tr, nn::weighted_cross_entropy_grad(tr.probs, golds[i], w * scale));
        }
        return total * scale;
    }

    /// Mean-pooled encoder vectors over the valid positions (no dropout).
    std::vector<double> encoder_vector(const ModelInput& in) const {
        auto x = encode_input(in);
        std::vector<double> v(x.cols(), 0.0);
        for (std::size_t r = 0; r < x.rows(); ++r)
            for (std::size_t c = 0; c < x.cols(); ++c) v[c] += static_cast<double>(x.at(r, c));
        for (auto& e : v) e /= static_cast<double>(x.rows());
        return v;
    }

private:
    template <class U>
    friend Model<U> build_model(const ModelConfig&, std::uint64_t);
    template <class U>
    friend Model<U> swap_head(const Model<U>&, std::size_t, std::uint64_t);

    struct Trace {
        nn::Tensor<T> encoded;
        nn::DropoutMask<T> enc_mask;
        nn::Tensor<T> enc_drop;
        std::vector<nn::Tensor<T>> conv_out;
        std::vector<nn::DropoutMask<T>> conv_mask;
        std::vector<nn::Tensor<T>> conv_drop;
        nn::BiLstmTrace<T> lstm;
        nn::Tensor<T> sentence;
        nn::DropoutMask<T> sent_mask;
        nn::Tensor<T> sent_drop;
        nn::Tensor<T> probs;
    };

    std::size_t effective_length(const ModelInput& in) const {
        return std::clamp<std::size_t>(in.true_length, 1, config_.max_len);
    }

    nn::Tensor<T> encode_input(const ModelInput& in) const {
        const std::size_t n = effective_length(in);
        if (config_.encoder_kind == EncoderKind::TrainableEmbedding) {
            if (in.ids.size() < n) throw ConfigError("forward: input has fewer ids than its true length");
            return nn::embed_lookup(embedding_, std::span<const int>(in.ids.data(), n));
        }
        nn::Tensor<T> x({n, config_.embed_dim});
        const std::size_t avail = in.features.size() / config_.embed_dim;
        if (in.features.size() % config_.embed_dim != 0 || avail < std::min(n, in.true_length))
            throw ConfigError("forward: precomputed features do not match embed_dim " +
                              std::to_string(config_.embed_dim));
        for (std::size_t i = 0; i < std::min(n, avail) * config_.embed_dim; ++i)
            x.data[i] = static_cast<T>(in.features[i]);
        return x;
    }

    Trace run(const ModelInput& in, nn::Mode mode, Rng& rng) const {
        Trace tr;
        const double rate = config_.dropout;
        tr.encoded = encode_input(in);
        tr.enc_drop = nn::dropout(tr.encoded, rate, mode, rng, &tr.enc_mask);
        const nn::Tensor<T>* x = &tr.enc_drop;
        tr.conv_out.reserve(convs_.size());
        tr.conv_drop.reserve(convs_.size());
        tr.conv_mask.resize(convs_.size());
        for (std::size_t i = 0; i < convs_.size(); ++i) {
            tr.conv_out.push_back(nn::conv1d(*x, convs_[i]));
            tr.conv_drop.push_back(nn::dropout(tr.conv_out.back(), rate, mode, rng, &tr.conv_mask[i]));
            x = &tr.conv_drop.back();
        }
        if (config_.use_bilstm) {
            auto out = nn::bilstm(*x, lstm_, x->rows());
            tr.lstm = std::move(out.trace);
            tr.sentence = std::move(out.final);
        } else {
            tr.sentence = nn::Tensor<T>({x->cols()});
            for (std::size_t r = 0; r < x->rows(); ++r)
                for (std::size_t c = 0; c < x->cols(); ++c) tr.sentence[c] += x->at(r, c);
            for (auto& v : tr.sentence.data) v /= static_cast<T>(x->rows());
        }
        tr.sent_drop = nn::dropout(tr.sentence, rate, mode, rng, &tr.sent_mask);
        tr.probs = nn::softmax(nn::dense(tr.sent_drop, head_));
        return tr;
    }

    void backward(const ModelInput& in, const Trace& tr, const nn::Tensor<T>& grad_logits) {
        nn::Tensor<T> g = nn::dense_backward(tr.sent_drop, head_, grad_logits);
        g = nn::dropout_backward(g, tr.sent_mask);
        const nn::Tensor<T>& top = convs_.empty() ? tr.enc_drop : tr.conv_drop.back();
        nn::Tensor<T> gx;
        if (config_.use_bilstm) {
            gx = nn::bilstm_backward(top, lstm_, tr.lstm, nn::Tensor<T>{}, g);
        } else {
            gx = nn::Tensor<T>({top.rows(), top.cols()});
            const T inv = T(1) / static_cast<T>(top.rows());
            for (std::size_t r = 0; r < top.rows(); ++r)
                for (std::size_t c = 0; c < top.cols(); ++c) gx.at(r, c) = g[c] * inv;
        }
        for (std::size_t i = convs_.size(); i-- > 0;) {
            gx = nn::dropout_backward(gx, tr.conv_mask[i]);
            const nn::Tensor<T>& input = i == 0 ? tr.enc_drop : tr.conv_drop[i - 1];
            gx = nn::conv1d_backward(input, tr.conv_out[i], convs_[i], gx);
        }
        if (config_.encoder_kind == EncoderKind::TrainableEmbedding) {
            gx = nn::dropout_backward(gx, tr.enc_mask);
            nn::embed_lookup_backward(embedding_, std::span<const int>(in.ids.data(), tr.encoded.rows()), gx);
        }
    }

    ModelConfig config_;
    nn::Tensor<T> embedding_;
    std::vector<nn::Conv1dParams<T>> convs_;
    nn::BiLstmParams<T> lstm_;
    nn::DenseParams<T> head_;
};

namespace detail {

template <class T>
void glorot_uniform(nn::Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (auto& v : t.data) v = static_cast<T>(rng.uniform(-limit, limit));
}

template <class T>
void init_head(nn::DenseParams<T>& head, std::size_t classes, std::size_t in_dim, Rng& rng) {
    head.W = nn::Tensor<T>({classes, in_dim});
    head.b = nn::Tensor<T>({classes});
    glorot_uniform(head.W, in_dim, classes, rng);
}

}  // namespace detail

/// Glorot-uniform weights, zero biases, LSTM forget-gate bias 1.0.
template <class T>
Model<T> build_model(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    Model<T> m;
    m.config_ = config;
    Rng rng(seed);
    const std::size_t d = config.embed_dim;
    if (config.encoder_kind == EncoderKind::TrainableEmbedding) {
        m.embedding_ = nn::Tensor<T>({config.vocab_size, d});
        detail::glorot_uniform(m.embedding_, config.vocab_size, d, rng);
    }
    std::size_t channels = d;
    for (std::size_t i = 0; i < config.conv_layers; ++i) {
        nn::Conv1dParams<T> c;
        c.kernels = nn::Tensor<T>({config.conv_filters, channels, config.kernel});
        c.bias = nn::Tensor<T>({config.conv_filters});
        detail::glorot_uniform(c.kernels, channels * config.kernel, config.conv_filters * config.kernel, rng);
        m.convs_.push_back(std::move(c));
        channels = config.conv_filters;
    }
    if (config.use_bilstm) {
        const std::size_t H = config.lstm_hidden;
        for (auto* p : {&m.lstm_.fwd, &m.lstm_.bwd}) {
            p->W = nn::Tensor<T>({4 * H, channels});
            p->U = nn::Tensor<T>({4 * H, H});
            p->b = nn::Tensor<T>({4 * H});
            detail::glorot_uniform(p->W, channels, 4 * H, rng);
            detail::glorot_uniform(p->U, H, 4 * H, rng);
            for (std::size_t u = 0; u < H; ++u) p->b[H + u] = T(1);
        }
    }
    detail::init_head(m.head_, config.num_classes, config.sentence_dim(), rng);
    return m;
}

/// Copy of `model` with a freshly initialized dense head of `new_num_classes` outputs.
template <class T>
Model<T> swap_head(const Model<T>& model, std::size_t new_num_classes, std::uint64_t seed) {
    if (new_num_classes != 2 && new_num_classes != 3) throw ConfigError("swap_head: class count must be 2 or 3");
    Model<T> m = model;
    m.config_.num_classes = new_num_classes;
    Rng rng = Rng::derive(seed, 0x4845414400000000ULL);
    detail::init_head(m.head_, new_num_classes, m.config_.sentence_dim(), rng);
    for (auto* t : m.parameters()) t->grad.clear();
    return m;
}

// ---------------------------------------------------------------- checkpoints

template <class T>
constexpr const char* dtype_name() {
    if constexpr (std::is_same_v<T, float>) return "f32";
    else return "f64";
}

inline std::size_t dtype_size(std::string_view dtype) {
    if (dtype == "f32") return 4;
    if (dtype == "f64") return 8;
    throw DataError("checkpoint: unknown dtype '" + std::string(dtype) + "'");
}

namespace detail {

template <class U>
void append_le(std::string& blob, U value) {
    static_assert(sizeof(U) == 4 || sizeof(U) == 8);
    using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
    Bits bits;
    std::memcpy(&bits, &value, sizeof bits);
    for (std::size_t i = 0; i < sizeof bits; ++i) blob.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

template <class U>
U read_le(const char* p) {
    using Bits = std::conditional_t<sizeof(U) == 4, std::uint32_t, std::uint64_t>;
    Bits bits = 0;
    for (std::size_t i = 0; i < sizeof bits; ++i)
        bits |= static_cast<Bits>(static_cast<unsigned char>(p[i])) << (8 * i);
    U v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

inline ModelConfig parse_model_config(const std::filesystem::path& path) {
    ModelConfig cfg;
    for (auto& line : read_lines(path)) {
        if (trim(line).empty()) continue;
        auto f = split(line, '\t');
        if (f.size() != 2) throw DataError(path.string() + ": malformed line '" + line + "'");
        if (!cfg.set(f[0], f[1])) throw DataError(path.string() + ": unknown key '" + f[0] + "'");
    }
    return cfg;
}

}  // namespace detail

/// Writes manifest.tsv, weights.bin (little-endian) and config.tsv into `dir`.
template <class T>
void save_checkpoint(const Model<T>& model, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string manifest, blob;
    for (auto& [name, t] : model.named_parameters()) {
        const std::size_t offset = blob.size();
        for (T v : t->data) detail::append_le(blob, v);
        std::string dims;
        for (std::size_t i = 0; i < t->shape.size(); ++i) dims += (i ? "," : "") + std::to_string(t->shape[i]);
        manifest += name + '\t' + dtype_name<T>() + '\t' + dims + '\t' + std::to_string(offset) + '\t' +
                    std::to_string(blob.size() - offset) + '\n';
    }
    std::string config;
    for (auto& [k, v] : model.config().to_pairs()) config += k + '\t' + v + '\n';
    write_file(dir / "manifest.tsv", manifest);
    write_file(dir / "weights.bin", blob);
    write_file(dir / "config.tsv", config);
}

/// Rebuilds the model described by config.tsv and fills every tensor from the
/// blob, rejecting overlapping, missing, extra or mis-sized entries.
template <class T>
Model<T> load_checkpoint(const std::filesystem::path& dir) {
    for (const char* f : {"manifest.tsv", "weights.bin", "config.tsv"})
        if (!std::filesystem::exists(dir / f)) throw DataError("checkpoint: missing " + (dir / f).string());
    ModelConfig cfg = detail::parse_model_config(dir / "config.tsv");
    Model<T> model = build_model<T>(cfg, 0);
    const std::string blob = read_file(dir / "weights.bin");

    struct Entry {
        std::string name, dtype;
        std::vector<std::size_t> dims;
        std::size_t offset = 0, bytes = 0;
    };
    std::map<std::string, Entry> entries;
    for (auto& line : read_lines(dir / "manifest.tsv")) {
        if (trim(line).empty()) continue;
        auto f = split(line, '\t');
        if (f.size() != 5) throw DataError("checkpoint manifest: malformed line '" + line + "'");
        Entry e;
        e.name = f[0];
        e.dtype = f[1];
        try {
            for (auto& d : split(f[2], ',')) e.dims.push_back(static_cast<std::size_t>(std::stoull(d)));
            e.offset = static_cast<std::size_t>(std::stoull(f[3]));
            e.bytes = static_cast<std::size_t>(std::stoull(f[4]));
        } catch (const std::exception&) {
            throw DataError("checkpoint manifest: tensor '" + e.name + "' has malformed numbers");
        }
        if (e.bytes != nn::Tensor<T>::count(e.dims) * dtype_size(e.dtype))
            throw DataError("checkpoint manifest: tensor '" + e.name + "' byte length does not match its shape");
        if (!entries.emplace(e.name, e).second)
            throw DataError("checkpoint manifest: duplicate tensor '" + e.name + "'");
    }

    std::vector<const Entry*> by_offset;
    for (auto& [n, e] : entries) by_offset.push_back(&e);
    std::sort(by_offset.begin(), by_offset.end(), [](auto* a, auto* b) { return a->offset < b->offset; });
    std::size_t cursor = 0;
    for (auto* e : by_offset) {
        if (e->offset < cursor) throw DataError("checkpoint manifest: tensor '" + e->name + "' overlaps its predecessor");
        if (e->offset > cursor) throw DataError("checkpoint manifest: gap before tensor '" + e->name + "'");
        cursor = e->offset + e->bytes;
    }
    if (cursor != blob.size())
        throw DataError("checkpoint: blob length mismatch (manifest covers " + std::to_string(cursor) +
                        " bytes, weights.bin has " + std::to_string(blob.size()) + ")");

    std::set<std::string> expected;
    for (auto& [name, t] : model.named_parameters()) {
        expected.insert(name);
        auto it = entries.find(name);
        if (it == entries.end()) throw DataError("checkpoint: manifest lacks tensor '" + name + "'");
        const Entry& e = it->second;
        if (e.dims != t->shape)
            throw DataError("checkpoint: tensor '" + name + "' has shape " + nn::shape_string(e.dims) +
                            ", config expects " + nn::shape_string(t->shape));
        const char* p = blob.data() + e.offset;
        const std::size_t width = dtype_size(e.dtype);
        for (std::size_t i = 0; i < t->size(); ++i, p += width)
            t->data[i] = e.dtype == "f32" ? static_cast<T>(detail::read_le<float>(p))
                                          : static_cast<T>(detail::read_le<double>(p));
    }
    for (auto& [name, e] : entries)
        if (!expected.count(name)) throw DataError("checkpoint: unexpected tensor '" + name + "' for this config");
    return model;
}

/// Tensors whose names or shapes differ between two models' non-head parameters.
template <class T>
std::vector<std::string> architecture_mismatches(const Model<T>& a, const Model<T>& b) {
    std::map<std::string, std::vector<std::size_t>> sa, sb;
    for (auto& [n, t] : a.named_parameters())
        if (n.rfind(Model<T>::kHeadPrefix, 0) != 0) sa[n] = t->shape;
    for (auto& [n, t] : b.named_parameters())
        if (n.rfind(Model<T>::kHeadPrefix, 0) != 0) sb[n] = t->shape;
    std::vector<std::string> out;
    for (auto& [n, s] : sa) {
        auto it = sb.find(n);
        if (it == sb.end()) out.push_back(n + ": " + nn::shape_string(s) + " vs absent");
        else if (it->second != s) out.push_back(n + ": " + nn::shape_string(s) + " vs " + nn::shape_string(it->second));
    }
    for (auto& [n, s] : sb)
        if (!sa.count(n)) out.push_back(n + ": absent vs " + nn::shape_string(s));
    return out;
}

// ---------------------------------------------------------------- precomputed encoder vectors

/// Per-sample vector sequences produced offline by an external encoder.
/// File layout: header `L=<L>\td=<d>`, then `id<TAB>floats` with n*d
/// space-separated values (n <= L tokens).
struct PrecomputedEmbeddings {
    std::size_t max_len = 0;
    std::size_t dim = 0;
    std::map<std::string, std::vector<float>> vectors;

    static PrecomputedEmbeddings load(const std::filesystem::path& path) {
        auto lines = read_lines(path);
        if (lines.empty()) throw DataError(path.string() + ": empty precomputed-embedding file");
        PrecomputedEmbeddings pe;
        for (auto& kv : split(lines[0], '\t')) {
            auto eq = kv.find('=');
            if (eq == std::string::npos) throw DataError(path.string() + ": malformed header '" + lines[0] + "'");
            std::string k(trim(kv.substr(0, eq))), v(trim(kv.substr(eq + 1)));
            if (k == "L") pe.max_len = std::stoul(v);
            else if (k == "d") pe.dim = std::stoul(v);
        }
        if (pe.max_len == 0 || pe.dim == 0) throw DataError(path.string() + ": header must declare L and d");
        for (std::size_t i = 1; i < lines.size(); ++i) {
            if (trim(lines[i]).empty()) continue;
            auto tab = lines[i].find('\t');
            if (tab == std::string::npos) throw DataError(path.string() + " row " + std::to_string(i + 1) + ": missing tab");
            std::string id(trim(std::string_view(lines[i]).substr(0, tab)));
            std::vector<float> v;
            for (auto& tok : split_whitespace(std::string_view(lines[i]).substr(tab + 1))) {
                char* end = nullptr;
                float f = std::strtof(tok.c_str(), &end);
                if (end != tok.c_str() + tok.size() || !std::isfinite(f))
                    throw DataError(path.string() + " row " + std::to_string(i + 1) + ": bad value '" + tok + "'");
                v.push_back(f);
            }
            if (v.empty() || v.size() % pe.dim != 0 || v.size() / pe.dim > pe.max_len)
                throw DataError(path.string() + " row " + std::to_string(i + 1) + ": expected n*d values with n <= L");
            if (!pe.vectors.emplace(id, std::move(v)).second)
                throw DataError(path.string() + ": duplicate id '" + id + "'");
        }
        return pe;
    }

    ModelInput input_for(const std::string& id) const {
        auto it = vectors.find(id);
        if (it == vectors.end()) throw DataError("precomputed embeddings: no vectors for id '" + id + "'");
        ModelInput in;
        in.features = it->second;
        in.true_length = it->second.size() / dim;
        return in;
    }
};

}  // namespace stancelab
